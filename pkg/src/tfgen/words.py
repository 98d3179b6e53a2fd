"""Exact arithmetic on n-bit words under 2-adic operator semantics.

A word is a residue modulo 2**width for an explicit width between 1 and
64.  Digits are indexed from the least significant position, so bit j of
the integer value is the j-th base-2 digit.  Every operation reduces its
result modulo 2**width.  Division multiplies by the inverse of an odd
divisor, and exponentiation with a non-literal exponent reduces the
exponent modulo 2**(width-2), the exponent of the group of odd units.

All functions here are pure; Word values are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_WIDTH = 64

#: operators that commute with reduction modulo every 2**r: congruent
#: inputs give congruent outputs (1-Lipschitz in the 2-adic metric)
COMPATIBLE_OPS = frozenset(
    {"add", "sub", "mul", "div", "pow", "and", "or", "xor", "not", "neg", "shl", "mod"}
)
#: operators that leak high-order bits into low-order positions
NON_COMPATIBLE_OPS = frozenset({"shr", "rotl1", "rev"})


class WordError(ValueError):
    pass


class WidthMismatch(WordError):
    pass


class NonInvertible(WordError):
    """Even divisor, or even base where an inverse power is required."""


def check_width(width: int) -> None:
    if not 1 <= width <= MAX_WIDTH:
        raise WordError(f"width must be in 1..{MAX_WIDTH}, got {width}")


def mask(width: int) -> int:
    return (1 << width) - 1


# ---------------------------------------------------------------------------
# integer-level primitives (the workhorses; Word wraps these)

def ubit(j: int, x: int) -> int:
    return (x >> j) & 1


def unot(x: int, width: int) -> int:
    return mask(width) ^ (x & mask(width))


def uneg(x: int, width: int) -> int:
    return (-x) & mask(width)


def uinv(a: int, width: int) -> int:
    """Inverse of an odd residue modulo 2**width."""
    if a & 1 == 0:
        raise NonInvertible("non-invertible divisor (even)")
    return pow(a, -1, 1 << width)


def upow(base: int, exp: int, width: int, literal: bool = False) -> int:
    """base**exp modulo 2**width.

    A literal non-negative exponent is plain modular power and allows any
    base.  Otherwise the base must be odd and, for width >= 3, the
    exponent is reduced modulo 2**(width-2); a negative literal exponent
    means the inverse of the positive power.
    """
    m = 1 << width
    if literal:
        if exp >= 0:
            return pow(base, exp, m)
        if base & 1 == 0:
            raise NonInvertible("negative exponent requires an odd base")
        return pow(base, exp, m)
    if base & 1 == 0:
        raise NonInvertible("variable exponent requires an odd base")
    if width < 3:
        raise WordError("variable exponents need width >= 3")
    return pow(base, exp % (1 << (width - 2)), m)


def urev(x: int, width: int) -> int:
    """Bit reversal within the width: bit j of the result is bit width-1-j."""
    x &= mask(width)
    out = 0
    for _ in range(width):
        out = (out << 1) | (x & 1)
        x >>= 1
    return out


def ushl(x: int, m: int, width: int) -> int:
    return (x << m) & mask(width)


def ushr(x: int, m: int, width: int) -> int:
    return (x & mask(width)) >> m


def urotl1(x: int, width: int) -> int:
    """Rotate one position toward the high-order bit."""
    x &= mask(width)
    return ((x << 1) | (x >> (width - 1))) & mask(width)


# ---------------------------------------------------------------------------
# the Word surface

@dataclass(frozen=True)
class Word:
    """An n-bit residue with explicit width.  Value is kept reduced."""

    value: int
    width: int

    def __post_init__(self):
        check_width(self.width)
        object.__setattr__(self, "value", self.value & mask(self.width))

    def bit(self, j: int) -> int:
        return ubit(j, self.value)

    def _match(self, other: "Word") -> None:
        if self.width != other.width:
            raise WidthMismatch(f"width {self.width} vs {other.width}")

    def _wrap(self, v: int) -> "Word":
        return Word(v, self.width)

    def __add__(self, other):
        self._match(other)
        return self._wrap(self.value + other.value)

    def __sub__(self, other):
        self._match(other)
        return self._wrap(self.value - other.value)

    def __mul__(self, other):
        self._match(other)
        return self._wrap(self.value * other.value)

    def __and__(self, other):
        self._match(other)
        return self._wrap(self.value & other.value)

    def __or__(self, other):
        self._match(other)
        return self._wrap(self.value | other.value)

    def __xor__(self, other):
        self._match(other)
        return self._wrap(self.value ^ other.value)

    def __invert__(self):
        return self._wrap(unot(self.value, self.width))

    def __neg__(self):
        return self._wrap(-self.value)

    def __repr__(self):
        return f"Word({self.value:#x}, width={self.width})"


_BINARY = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "and": lambda a, b: a & b,
    "or": lambda a, b: a | b,
    "xor": lambda a, b: a ^ b,
}


def apply_primitive(op: str, a: Word, b: Word | None = None) -> Word:
    """Apply a named operator; binary ops require matching widths."""
    if op == "not":
        return ~a
    if op == "neg":
        return -a
    if b is None:
        raise WordError(f"operator {op!r} needs two operands")
    a._match(b)
    if op in _BINARY:
        return Word(_BINARY[op](a.value, b.value), a.width)
    if op == "div":
        return Word(a.value * uinv(b.value, a.width), a.width)
    if op == "pow":
        return pow_2adic(a, b)
    raise WordError(f"unknown operator {op!r}")


def inv_odd(a: Word) -> Word:
    return Word(uinv(a.value, a.width), a.width)


def pow_2adic(a: Word, e: "Word | int") -> Word:
    """a**e with the exponent reduced modulo 2**(width-2).

    An int e is treated as a literal exponent (plain power when e >= 0,
    inverse power for odd a when e < 0); a Word exponent requires an odd
    base and width >= 3.
    """
    if isinstance(e, Word):
        return Word(upow(a.value, e.value, a.width, literal=False), a.width)
    return Word(upow(a.value, e, a.width, literal=True), a.width)


def bit_reverse(x: Word) -> Word:
    return Word(urev(x.value, x.width), x.width)


def shift_rotate(kind: str, x: Word, m: int = 0) -> Word:
    """shl multiplies by 2**m, shr floor-divides by 2**m, rotl1 rotates
    one position toward the high-order bit (m is ignored for rotl1)."""
    if kind == "rotl1":
        return Word(urotl1(x.value, x.width), x.width)
    if not 0 <= m < x.width:
        raise WordError(f"shift count {m} out of range for width {x.width}")
    if kind == "shl":
        return Word(ushl(x.value, m, x.width), x.width)
    if kind == "shr":
        return Word(ushr(x.value, m, x.width), x.width)
    raise WordError(f"unknown shift kind {kind!r}")


def delta(j: int, x: Word) -> int:
    """The j-th base-2 digit of x."""
    if not 0 <= j < x.width:
        raise WordError(f"bit index {j} out of range for width {x.width}")
    return x.bit(j)
