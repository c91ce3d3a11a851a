"""Validation, evaluation and Wirtinger derivatives of operator expressions.

Evaluation is environment driven: an environment resolves jet variables and
coordinates to complex scalars (jet tables) or arrays (grid states), so the
same evaluator serves jet-level checks and grid time stepping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..jetcore import JetSpec, MultiJet, as_multijet
from .nodes import BinOp, Call, Coord, ImagUnit, JetVar, Neg, Node, Num, Pow, format_path, walk


class DomainError(ValueError):
    """Evaluation left the domain of ``log`` or ``/``."""

    def __init__(self, message: str, path=(), witness=None):
        self.path = tuple(path)
        self.witness = witness
        super().__init__(f"{message} at {format_path(self.path)}")


@dataclass(frozen=True)
class Issue:
    path: tuple[int, ...]
    message: str

    def __str__(self):
        return f"{format_path(self.path)}: {self.message}"


@dataclass
class Validation:
    errors: list[Issue] = field(default_factory=list)
    #: nodes whose value must be nonzero at evaluation time (log arguments, denominators)
    domain_restricted: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def validate(expr: Node, spec: JetSpec, arity: int) -> Validation:
    result = Validation()
    for path, node in walk(expr):
        match node:
            case JetVar(internal, midx):
                if len(internal) != arity or len(midx) != arity:
                    result.errors.append(Issue(path, f"jet variable has {len(internal)} internal indices and "
                                                     f"{len(midx)} multi-indices, operator arity is {arity}"))
                    continue
                for A in internal:
                    if A >= spec.m:
                        result.errors.append(Issue(path, f"internal index out of range: {A} >= m={spec.m}"))
                for I in midx:
                    if len(I) != spec.d:
                        result.errors.append(Issue(path, f"multi-index {I} has length {len(I)}, expected d={spec.d}"))
                    elif sum(I) > spec.K:
                        result.errors.append(Issue(path, f"derivative order exceeds K: |{I}| = {sum(I)} > {spec.K}"))
            case Coord(p, k):
                if p >= arity:
                    result.errors.append(Issue(path, f"particle {p} out of range for arity {arity}"))
                if k >= spec.d:
                    result.errors.append(Issue(path, f"coordinate component {k} out of range for d={spec.d}"))
            case Call("log", _):
                result.domain_restricted.append(path + (0,))
            case BinOp("/", _, _):
                result.domain_restricted.append(path + (1,))
    return result


class JetEnv:
    """Binds jet variables to entries of an ``n``-particle jet table."""

    def __init__(self, table: MultiJet):
        self.table = table
        self.pos = table.spec.position
        self.values = table.values

    def jet(self, internal, midx):
        return complex(self.values[tuple(internal) + tuple(self.pos(I) for I in midx)])

    def coord(self, p, k):
        return float(self.table.basepoints[p, k])


def _nonzero(z) -> bool:
    return bool(np.all(np.abs(z) > 0))


def evaluate(expr: Node, env, path=()):
    """Value of ``expr`` in ``env``; scalars or arrays depending on the environment."""
    match expr:
        case Num(value):
            return value
        case ImagUnit():
            return 1j
        case Coord(p, k):
            return env.coord(p, k)
        case JetVar(internal, midx):
            return env.jet(internal, midx)
        case Neg(operand):
            return -evaluate(operand, env, path + (0,))
        case BinOp(op, left, right):
            a = evaluate(left, env, path + (0,))
            b = evaluate(right, env, path + (1,))
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if not _nonzero(b):
                raise DomainError("division by zero", path + (1,))
            return a / b
        case Pow(base, exponent):
            b = evaluate(base, env, path + (0,))
            out = 1.0
            for _ in range(exponent):
                out = out * b
            return out
        case Call(func, arg):
            z = evaluate(arg, env, path + (0,))
            if func == "conj":
                return np.conj(z)
            if func == "re":
                return np.real(z)
            if func == "im":
                return np.imag(z)
            if func == "abs2":
                return np.real(z) ** 2 + np.imag(z) ** 2
            if func == "exp":
                return np.exp(z)
            if not _nonzero(z):
                raise DomainError("log of a zero-modulus value", path + (0,))
            return np.log(z)
    raise TypeError(f"cannot evaluate {expr!r}")


def jet_degrees(expr: Node):
    """Homogeneous degrees in the jet variables, or ``None`` if not polynomial in them."""
    match expr:
        case Num() | ImagUnit() | Coord():
            return frozenset({0})
        case JetVar():
            return frozenset({1})
        case Neg(operand):
            return jet_degrees(operand)
        case BinOp(op, left, right):
            a, b = jet_degrees(left), jet_degrees(right)
            if a is None or b is None:
                return None
            if op in "+-":
                return a | b
            if op == "*":
                return frozenset(x + y for x in a for y in b)
            return a if b == {0} else None
        case Pow(base, exponent):
            b = jet_degrees(base)
            if b is None:
                return None
            out = frozenset({0})
            for _ in range(exponent):
                out = frozenset(x + y for x in out for y in b)
            return out
        case Call(_, arg):
            return frozenset({0}) if jet_degrees(arg) == {0} else None
    raise TypeError(f"not an operator node: {expr!r}")


def is_linear(expr: Node) -> bool:
    """Syntactically complex-linear and homogeneous in the jet variables."""
    return jet_degrees(expr) == {1}


def eval_operator(hier, n: int, table) -> np.ndarray:
    """Components of ``H_n`` on an ``n``-particle jet table, shape ``(m,)*n``."""
    table = as_multijet(table)
    if table.arity != n:
        raise ValueError(f"jet table has arity {table.arity}, operator arity is {n}")
    return _eval_components(hier.components(n), JetEnv(table), hier.spec.m, n)


def _eval_components(components, env, m, n) -> np.ndarray:
    out = np.empty(len(components), dtype=complex)
    for k, expr in enumerate(components):
        try:
            out[k] = evaluate(expr, env)
        except DomainError as exc:
            exc.witness = getattr(env, "table", None)
            raise
    return out.reshape((m,) * n)


def _target_index(table: MultiJet, target):
    """Array index of a jet entry given as ``(internal, midx)``; ``(C, I)`` is accepted for arity 1."""
    internal, midx = target
    if isinstance(internal, (int, np.integer)):
        internal, midx = (internal,), (tuple(midx),)
    pos = table.spec.position
    return tuple(internal) + tuple(pos(I) for I in midx)


def default_step(z: complex) -> float:
    return 1e-5 * max(1.0, abs(z))


def wirtinger_grad(hier, n: int, table, target, h: float | None = None) -> np.ndarray:
    """``dH/du = (dH/dRe u - i dH/dIm u)/2`` at one jet entry, by central differences."""
    table = as_multijet(table)
    idx = _target_index(table, target)
    z = table.values[idx]
    step = default_step(z) if h is None else h

    def shifted(delta):
        vals = np.array(table.values)
        vals[idx] = z + delta
        return eval_operator(hier, n, MultiJet(table.spec, table.basepoints, vals))

    d_re = (shifted(step) - shifted(-step)) / (2 * step)
    d_im = (shifted(1j * step) - shifted(-1j * step)) / (2 * step)
    return 0.5 * (d_re - 1j * d_im)
