"""AST node types for operator expressions and the canonical printer."""

from __future__ import annotations

from dataclasses import dataclass

FUNCTIONS = ("conj", "re", "im", "abs2", "exp", "log")


class Node:
    __slots__ = ()

    def children(self) -> tuple["Node", ...]:
        return ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class ImagUnit(Node):
    pass


@dataclass(frozen=True)
class Coord(Node):
    particle: int
    component: int = 0


@dataclass(frozen=True)
class JetVar(Node):
    """``u[A_1,...,A_p]((I_1);...;(I_p))``: derivative ``I_j`` in slot ``j`` of component ``(A_1..A_p)``."""

    internal: tuple[int, ...]
    midx: tuple[tuple[int, ...], ...]

    @property
    def arity(self) -> int:
        return len(self.internal)


@dataclass(frozen=True)
class Neg(Node):
    operand: Node

    def children(self):
        return (self.operand,)


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int

    def children(self):
        return (self.base,)


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node

    def children(self):
        return (self.arg,)


def walk(node: Node, path=()):
    """Yield ``(path, node)`` pairs depth first; ``path`` is a tuple of child positions."""
    yield path, node
    for k, child in enumerate(node.children()):
        yield from walk(child, path + (k,))


def format_path(path) -> str:
    return "root" + "".join(f".{k}" for k in path)


# precedence levels follow the grammar: expr < term < factor < unary < atom
_SUM, _PRODUCT, _POWER, _UNARY, _ATOM = range(1, 6)


def _level(node: Node) -> int:
    if isinstance(node, BinOp):
        return _SUM if node.op in "+-" else _PRODUCT
    if isinstance(node, Pow):
        return _POWER
    if isinstance(node, Neg):
        return _UNARY
    return _ATOM


def _fmt_midx(I) -> str:
    return "(" + ",".join(str(i) for i in I) + ")"


def to_text(node: Node, need: int = _SUM) -> str:
    if _level(node) < need:
        return "(" + to_text(node, _SUM) + ")"
    match node:
        case Num(value):
            return repr(float(value))
        case ImagUnit():
            return "i"
        case Coord(p, k):
            return f"x[{p}].{k}"
        case JetVar(internal, midx):
            return "u[" + ",".join(map(str, internal)) + "](" + ";".join(_fmt_midx(I) for I in midx) + ")"
        case Neg(operand):
            return "-" + to_text(operand, _UNARY)
        case BinOp(op, left, right) if op in "+-":
            return f"{to_text(left, _SUM)} {op} {to_text(right, _PRODUCT)}"
        case BinOp(op, left, right):
            return f"{to_text(left, _PRODUCT)}{op}{to_text(right, _POWER)}"
        case Pow(base, exponent):
            return f"{to_text(base, _UNARY)}^{exponent}"
        case Call(func, arg):
            return f"{func}({to_text(arg, _SUM)})"
    raise TypeError(f"not an operator node: {node!r}")
