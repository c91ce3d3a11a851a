"""Operator hierarchies ``{H_n}`` and their JSON file format."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from ..jetcore import JetSpec
from ..tensor import Statistics
from .evaluate import is_linear, validate
from .nodes import BinOp, Call, Coord, JetVar, Neg, Node, Pow, to_text
from .parser import parse_operator


class HierarchyError(ValueError):
    def __init__(self, message, issues=()):
        self.issues = list(issues)
        detail = "".join(f"\n  {i}" for i in self.issues)
        super().__init__(message + detail)


def output_indices(m: int, n: int):
    """Component order for arity ``n``: internal multi-indices in lexicographic order."""
    return list(itertools.product(range(m), repeat=n))


@dataclass(frozen=True, eq=False)
class Hierarchy:
    stats: Statistics
    spec: JetSpec
    operators: Mapping[int, tuple[Node, ...]]
    name: str = "custom"
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        ops = {int(n): tuple(parse_operator(c) if isinstance(c, str) else c for c in comps)
               for n, comps in self.operators.items()}
        object.__setattr__(self, "operators", ops)
        for n, comps in ops.items():
            if n < 1:
                raise HierarchyError(f"invalid arity {n}")
            if len(comps) != self.spec.m ** n:
                raise HierarchyError(f"arity {n} needs {self.spec.m ** n} components, got {len(comps)}")
            issues = []
            for k, expr in enumerate(comps):
                issues += [f"operator {n}, component {k}: {i}" for i in validate(expr, self.spec, n).errors]
            if issues:
                raise HierarchyError(f"hierarchy '{self.name}' failed validation", issues)

    @property
    def arities(self) -> list[int]:
        return sorted(self.operators)

    def components(self, n: int) -> tuple[Node, ...]:
        try:
            return self.operators[n]
        except KeyError:
            raise HierarchyError(f"hierarchy '{self.name}' has no {n}-particle operator") from None

    def is_linear(self, n: int | None = None) -> bool:
        arities = self.arities if n is None else [n]
        return all(is_linear(c) for k in arities for c in self.components(k))

    def domain_restricted(self, n: int) -> bool:
        return any(validate(c, self.spec, n).domain_restricted for c in self.components(n))

    def to_json(self) -> dict:
        return {
            "f": self.stats.f, "d": self.spec.d, "K": self.spec.K, "m": self.spec.m,
            "operators": {str(n): [to_text(c) for c in self.operators[n]] for n in self.arities},
        }

    @classmethod
    def from_json(cls, doc: Mapping, name: str = "custom") -> "Hierarchy":
        try:
            spec = JetSpec(d=int(doc["d"]), K=int(doc["K"]), m=int(doc["m"]))
            stats = Statistics(int(doc["f"]))
            operators = {int(n): list(bodies) for n, bodies in doc["operators"].items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise HierarchyError(f"malformed hierarchy document: {exc}") from exc
        return cls(stats, spec, operators, name=doc.get("name", name))

    def with_stats(self, stats: Statistics) -> "Hierarchy":
        return Hierarchy(stats, self.spec, self.operators, self.name, self.params)


def load_hierarchy(path) -> Hierarchy:
    path = Path(path)
    with path.open() as fh:
        doc = json.load(fh)
    return Hierarchy.from_json(doc, name=path.stem)


def save_hierarchy(hier: Hierarchy, path) -> None:
    with open(path, "w") as fh:
        json.dump(hier.to_json(), fh, indent=2)


def _map_leaves(node: Node, fn) -> Node:
    match node:
        case Neg(operand):
            return Neg(_map_leaves(operand, fn))
        case BinOp(op, left, right):
            return BinOp(op, _map_leaves(left, fn), _map_leaves(right, fn))
        case Pow(base, exponent):
            return Pow(_map_leaves(base, fn), exponent)
        case Call(func, arg):
            return Call(func, _map_leaves(arg, fn))
    return fn(node)


def lift_to_slot(body: Node, slot: int, outer: tuple[int, ...], d: int) -> Node:
    """Rewrite a one-particle body so it acts in particle ``slot`` of an ``len(outer)``-particle state.

    ``u[C]((I))`` becomes the jet variable of component ``outer`` with slot
    ``slot`` replaced by ``C``, differentiated by ``I`` in that slot only;
    ``x[0]`` becomes ``x[slot]``.
    """
    n = len(outer)
    zero = (0,) * d

    def fn(leaf):
        if isinstance(leaf, JetVar):
            (C,), (I,) = leaf.internal, leaf.midx
            internal = outer[:slot] + (C,) + outer[slot + 1:]
            midx = tuple(I if j == slot else zero for j in range(n))
            return JetVar(internal, midx)
        if isinstance(leaf, Coord):
            return Coord(slot, leaf.component)
        return leaf

    return _map_leaves(body, fn)


def lift(one_particle: list[Node], spec: JetSpec, n: int) -> tuple[Node, ...]:
    """``H_n = sum_j (H_1 acting in slot j)``, the canonical plain tensor derivation."""
    comps = []
    for outer in output_indices(spec.m, n):
        terms = [lift_to_slot(one_particle[outer[j]], j, outer, spec.d) for j in range(n)]
        expr = terms[0]
        for t in terms[1:]:
            expr = BinOp("+", expr, t)
        comps.append(expr)
    return tuple(comps)


def lifted_hierarchy(bodies, spec: JetSpec, stats: Statistics, max_arity: int = 4,
                     name: str = "custom", params=None) -> Hierarchy:
    """Hierarchy with arities ``1..max_arity`` obtained by slot-wise lifting of one-particle bodies."""
    one = [parse_operator(b) if isinstance(b, str) else b for b in bodies]
    if len(one) != spec.m:
        raise HierarchyError(f"need {spec.m} one-particle bodies, got {len(one)}")
    ops = {n: lift(one, spec, n) for n in range(1, max_arity + 1)}
    return Hierarchy(stats, spec, ops, name=name, params=dict(params or {}))
