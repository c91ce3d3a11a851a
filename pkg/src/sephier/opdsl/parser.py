"""Recursive-descent parser for the operator grammar.

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := unary ("^" uint)?
    unary  := "-" unary | atom
    atom   := number | "i" | coord | jetvar | func "(" expr ")" | "(" expr ")"
    coord  := "x" "[" uint "]" ("." uint)?
    jetvar := "u" "[" uint ("," uint)* "]" "(" midx (";" midx)* ")"
    midx   := "(" uint ("," uint)* ")"

Whitespace is ignored between tokens.
"""

from __future__ import annotations

import re

from .nodes import FUNCTIONS, BinOp, Call, Coord, ImagUnit, JetVar, Neg, Node, Num, Pow

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_UINT = re.compile(r"\d+")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.pos = pos
        self.line = text.count("\n", 0, pos) + 1
        self.column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.reason = message
        super().__init__(f"line {self.line}, column {self.column}: {message}")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message, pos=None):
        raise ParseError(message, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def accept(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.accept(ch):
            found = self.peek() or "end of input"
            self.error(f"expected '{ch}', found '{found}'")

    def match(self, pattern):
        self.skip()
        mo = pattern.match(self.text, self.pos)
        if mo:
            self.pos = mo.end()
        return mo

    def uint(self) -> int:
        mo = self.match(_UINT)
        if not mo:
            self.error("expected a non-negative integer")
        return int(mo.group())

    def parse(self) -> Node:
        node = self.expr()
        if self.peek():
            self.error(f"unexpected '{self.peek()}'")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.unary()
        if self.accept("^"):
            node = Pow(node, self.uint())
        return node

    def unary(self) -> Node:
        if self.accept("-"):
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Node:
        ch = self.peek()
        if not ch:
            self.error("unexpected end of input")
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if ch.isdigit() or ch == ".":
            mo = self.match(_NUMBER)
            if not mo:
                self.error("malformed number")
            return Num(float(mo.group()))
        start = self.pos
        mo = self.match(_IDENT)
        if not mo:
            self.error(f"unexpected '{ch}'")
        name = mo.group()
        if name == "i":
            return ImagUnit()
        if name == "x":
            return self.coord()
        if name == "u":
            return self.jetvar()
        if self.peek() == "(":
            if name not in FUNCTIONS:
                self.error(f"unknown function '{name}'", start)
            self.pos += 1
            arg = self.expr()
            self.expect(")")
            return Call(name, arg)
        self.error(f"unknown identifier '{name}'", start)

    def coord(self) -> Node:
        self.expect("[")
        p = self.uint()
        self.expect("]")
        k = self.uint() if self.accept(".") else 0
        return Coord(p, k)

    def midx(self) -> tuple[int, ...]:
        self.expect("(")
        entries = [self.uint()]
        while self.accept(","):
            entries.append(self.uint())
        self.expect(")")
        return tuple(entries)

    def jetvar(self) -> Node:
        self.expect("[")
        internal = [self.uint()]
        while self.accept(","):
            internal.append(self.uint())
        self.expect("]")
        self.expect("(")
        midx = [self.midx()]
        while self.accept(";"):
            midx.append(self.midx())
        self.expect(")")
        return JetVar(tuple(internal), tuple(midx))


def parse_operator(text: str) -> Node:
    """Parse operator source text into an AST; raises :class:`ParseError`."""
    return _Parser(text).parse()
