"""Parser and evaluator for word-mapping expressions.

Grammar (precedence, tightest first):

    unary  ~ (or the unicode negation sign) and -      right
    **                                                 right-assoc
    *  /                                               left
    +  -                                               left
    << >>      (shift counts must be integer literals) left
    &                                                  left
    ^          (bitwise xor)                           left
    |                                                  left

plus parentheses, the variable x, decimal and 0x-hex literals, and the
calls rev(e), rotl1(e), bit(j, e), mod(e, k) with literal j and k.
Unary minus binds tighter than the base of **, so -a**b is (-a)**b.
There is no implicit multiplication: write 2*x, not 2x.

Evaluation happens modulo 2**width with the word-core semantics:
division multiplies by the inverse of an odd divisor, and ** with a
non-literal exponent needs an odd base (the exponent is reduced modulo
2**(width-2)).  Parsing and evaluation are pure; trees are immutable
and shareable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from . import anf
from .words import (NonInvertible, WordError, mask, ubit, uinv, unot, upow,
                    urev, urotl1)


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class EvalError(ValueError):
    def __init__(self, message: str, subexpr: "Expr"):
        super().__init__(f"{message} in {to_text(subexpr)!r}")
        self.subexpr = subexpr


# ---------------------------------------------------------------------------
# syntax trees

@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" | "not"
    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # + - * / ** & ^ |
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Shift:
    op: str  # << >>
    arg: "Expr"
    count: int


@dataclass(frozen=True)
class Call:
    fn: str  # rev | rotl1 | bit | mod
    args: tuple


Expr = Lit | Var | Unary | Bin | Shift | Call

_CALL_ARITY = {"rev": 1, "rotl1": 1, "bit": 2, "mod": 2}


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>0[xX][0-9a-fA-F]+|\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|<<|>>|[-+*/&|^~()¬,]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}",
                             len(text) - len(stripped))
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            op = m.group("op")
            if op == "¬":
                op = "~"
            tokens.append(("op", op, m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, found {val or 'end of input'!r}", pos)

    # precedence ladder, loosest first
    def parse_or(self):
        e = self.parse_xor()
        while self._at_op("|"):
            self.next()
            e = Bin("|", e, self.parse_xor())
        return e

    def parse_xor(self):
        e = self.parse_and()
        while self._at_op("^"):
            self.next()
            e = Bin("^", e, self.parse_and())
        return e

    def parse_and(self):
        e = self.parse_shift()
        while self._at_op("&"):
            self.next()
            e = Bin("&", e, self.parse_shift())
        return e

    def parse_shift(self):
        e = self.parse_addsub()
        while self._at_op("<<") or self._at_op(">>"):
            _, op, pos = self.next()
            kind, val, cpos = self.next()
            if kind != "num":
                raise ParseError("shift count must be an integer literal", cpos)
            e = Shift(op, e, int(val, 0))
        return e

    def parse_addsub(self):
        e = self.parse_muldiv()
        while self._at_op("+") or self._at_op("-"):
            _, op, _ = self.next()
            e = Bin(op, e, self.parse_muldiv())
        return e

    def parse_muldiv(self):
        e = self.parse_power()
        while self._at_op("*") or self._at_op("/"):
            _, op, _ = self.next()
            e = Bin(op, e, self.parse_power())
        return e

    def parse_power(self):
        base = self.parse_unary()
        if self._at_op("**"):
            self.next()
            return Bin("**", base, self.parse_power())  # right-associative
        return base

    def parse_unary(self):
        if self._at_op("-"):
            self.next()
            return Unary("neg", self.parse_unary())
        if self._at_op("~"):
            self.next()
            return Unary("not", self.parse_unary())
        return self.parse_atom()

    def parse_atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return Lit(int(val, 0))
        if kind == "name":
            if val == "x":
                return Var()
            if val in _CALL_ARITY:
                return self._parse_call(val, pos)
            raise ParseError(f"unknown name {val!r}", pos)
        if kind == "op" and val == "(":
            e = self.parse_or()
            self.expect_op(")")
            return e
        raise ParseError(f"unexpected token {val or 'end of input'!r}", pos)

    def _parse_call(self, fn: str, pos: int):
        self.expect_op("(")
        args = [self.parse_or()]
        while self._at_op(","):
            self.next()
            args.append(self.parse_or())
        self.expect_op(")")
        if len(args) != _CALL_ARITY[fn]:
            raise ParseError(f"{fn} takes {_CALL_ARITY[fn]} argument(s)", pos)
        if fn == "bit":
            if not isinstance(args[0], Lit):
                raise ParseError("bit index must be a literal", pos)
            args = [args[0], args[1]]
        if fn == "mod":
            if not isinstance(args[1], Lit):
                raise ParseError("mod width must be a literal", pos)
        return Call(fn, tuple(args))

    def _at_op(self, op: str) -> bool:
        kind, val, _ = self.peek()
        return kind == "op" and val == op


def parse(text: str) -> Expr:
    p = _Parser(text)
    e = p.parse_or()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"trailing input {val!r}", pos)
    return e


# ---------------------------------------------------------------------------
# printing (round-trips through parse)

_PREC = {"|": 1, "^": 2, "&": 3, "shift": 4, "+": 5, "-": 5,
         "*": 6, "/": 6, "**": 7, "unary": 8, "atom": 9}


def _prec(e: Expr) -> int:
    if isinstance(e, Bin):
        return _PREC[e.op]
    if isinstance(e, Shift):
        return _PREC["shift"]
    if isinstance(e, Unary):
        return _PREC["unary"]
    return _PREC["atom"]


def _wrap(e: Expr, limit: int) -> str:
    s = to_text(e)
    return f"({s})" if _prec(e) < limit else s


def to_text(e: Expr) -> str:
    if isinstance(e, Lit):
        return str(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Unary):
        return ("-" if e.op == "neg" else "~") + _wrap(e.arg, _PREC["unary"])
    if isinstance(e, Shift):
        p = _PREC["shift"]
        return f"{_wrap(e.arg, p)} {e.op} {e.count}"
    if isinstance(e, Call):
        return f"{e.fn}({', '.join(to_text(a) for a in e.args)})"
    p = _PREC[e.op]
    if e.op == "**":
        # right-associative: parenthesise an exponent-side ** is not needed,
        # a base-side one is
        return f"{_wrap(e.left, p + 1)} ** {_wrap(e.right, p)}"
    return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}"


# ---------------------------------------------------------------------------
# evaluation

def _literal_exponent(e: Expr):
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Unary) and e.op == "neg" and isinstance(e.arg, Lit):
        return -e.arg.value
    return None


def eval_expr(e: Expr, x: int, width: int) -> int:
    """Value of the expression at x, reduced modulo 2**width."""
    m = mask(width)

    def run(node: Expr) -> int:
        if isinstance(node, Lit):
            return node.value & m
        if isinstance(node, Var):
            return x & m
        if isinstance(node, Unary):
            v = run(node.arg)
            return (-v) & m if node.op == "neg" else unot(v, width)
        if isinstance(node, Shift):
            if not 0 <= node.count < width:
                raise EvalError(f"shift count {node.count} out of range", node)
            v = run(node.arg)
            return (v << node.count) & m if node.op == "<<" else v >> node.count
        if isinstance(node, Call):
            if node.fn == "rev":
                return urev(run(node.args[0]), width)
            if node.fn == "rotl1":
                return urotl1(run(node.args[0]), width)
            if node.fn == "bit":
                return ubit(node.args[0].value, run(node.args[1]))
            k = node.args[1].value
            if not 0 <= k <= 64:
                raise EvalError(f"mod width {k} out of range", node)
            return run(node.args[0]) & ((1 << k) - 1) & m
        a = run(node.left)
        if node.op == "+":
            return (a + run(node.right)) & m
        if node.op == "-":
            return (a - run(node.right)) & m
        if node.op == "*":
            return (a * run(node.right)) & m
        if node.op == "&":
            return a & run(node.right)
        if node.op == "^":
            return a ^ run(node.right)
        if node.op == "|":
            return a | run(node.right)
        if node.op == "/":
            b = run(node.right)
            try:
                return (a * uinv(b, width)) & m
            except NonInvertible:
                raise EvalError(f"even divisor {b}", node) from None
        # **
        lit = _literal_exponent(node.right)
        try:
            if lit is not None:
                return upow(a, lit, width, literal=True)
            return upow(a, run(node.right), width, literal=False)
        except (NonInvertible, WordError) as exc:
            raise EvalError(str(exc), node) from None

    return run(e)


class BoundExpr:
    """An expression fixed to a width, usable as a plain mapping."""

    __slots__ = ("expr", "width", "text")

    def __init__(self, expr: Expr | str, width: int):
        if isinstance(expr, str):
            expr = parse(expr)
        self.expr = expr
        self.width = width
        self.text = to_text(expr)

    def __call__(self, x: int) -> int:
        return eval_expr(self.expr, x, self.width)

    def __repr__(self):
        return f"BoundExpr({self.text!r}, width={self.width})"


# ---------------------------------------------------------------------------
# classification

@dataclass(frozen=True)
class Classification:
    compatible: bool | None  # None means "unknown": suspect ops, no witness
    checked_width: int
    witness: tuple[int, int, int] | None


def _has_suspect_ops(e: Expr) -> bool:
    if isinstance(e, Shift):
        return e.op == ">>" or _has_suspect_ops(e.arg)
    if isinstance(e, Unary):
        return _has_suspect_ops(e.arg)
    if isinstance(e, Bin):
        return _has_suspect_ops(e.left) or _has_suspect_ops(e.right)
    if isinstance(e, Call):
        if e.fn in ("rev", "rotl1"):
            return True
        if e.fn == "bit" and e.args[0].value > 0:
            return True
        return any(_has_suspect_ops(a) for a in e.args
                   if not isinstance(a, Lit))
    return False


def classify(e: Expr, max_width: int = 10) -> Classification:
    """Operator-level compatibility verdict.

    Compositions of compatible operators are compatible.  When a
    suspect operator appears the verdict is checked empirically: a
    witness makes it False, otherwise it stays unknown (None).
    """
    if not _has_suspect_ops(e):
        return Classification(True, 0, None)
    for w in (2, 3, 4, 6, 8, max_width):
        if w > max_width:
            break
        try:
            rep = anf.is_compatible(BoundExpr(e, w), w)
        except EvalError:
            continue
        if not rep.compatible:
            return Classification(False, w, rep.witness)
    return Classification(None, max_width, None)


# ---------------------------------------------------------------------------
# table-driven composition builder

DEFAULT_OP_TABLE = {(0, 0): "+", (1, 0): "*", (0, 1): "^", (1, 1): "&"}


def build_controlled_composition(control: int, stages: int,
                                 const_table: tuple[int, ...],
                                 op_table: dict | None = None,
                                 control_bits: int | None = None) -> Expr:
    """Left-nested composition whose shape is selected by control bits.

    Bit 3*j of the control picks operand j (0 = the variable x, 1 = the
    j-th table constant); bits 3*j-2 and 3*j-1 pick the operator joining
    stage j.  stages operands consume 3*stages - 2 control bits.
    """
    if stages < 1:
        raise ValueError("need at least one stage")
    ops = op_table or DEFAULT_OP_TABLE
    need = 3 * stages - 2
    if control_bits is not None and need > control_bits:
        raise ValueError(
            f"exhausted control bits: {stages} stages need {need}, have {control_bits}")

    def operand(j: int) -> Expr:
        if (control >> (3 * j)) & 1:
            return Lit(const_table[j % len(const_table)])
        return Var()

    acc = operand(0)
    for j in range(1, stages):
        sel = ((control >> (3 * j - 2)) & 1, (control >> (3 * j - 1)) & 1)
        acc = Bin(ops[sel], acc, operand(j))
    return acc


def mapping_to_expr(f: Callable[[int], int], width: int) -> Expr:
    """Expression equivalent to a mapping on Z/2**width, rebuilt from its
    per-bit ANFs (width capped by the truth-table budget).

    The result uses bit() extractions, so classify() will not certify it,
    but evaluation agrees with f everywhere on 0..2**width-1.
    """
    terms = []
    for i in range(width):
        a = anf.anf_of_bit(lambda u: f(u), i, width)
        if not a.monomials:
            continue
        mons = []
        for mon in sorted(a.monomials):
            if mon == 0:
                mons.append(Lit(1))
                continue
            factors = [Call("bit", (Lit(t), Var()))
                       for t in range(width) if (mon >> t) & 1]
            prod = factors[0]
            for fac in factors[1:]:
                prod = Bin("&", prod, fac)
            mons.append(prod)
        acc = mons[0]
        for mon_e in mons[1:]:
            acc = Bin("^", acc, mon_e)
        terms.append(Bin("*", Lit(1 << i), acc) if i else acc)
    if not terms:
        return Lit(0)
    out = terms[0]
    for t in terms[1:]:
        out = Bin("+", out, t)
    return out
