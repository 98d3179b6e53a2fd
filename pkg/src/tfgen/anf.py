"""Boolean-function view of mappings on Z/2**n.

A mapping f on Z/2**n splits into n coordinate Boolean functions
tau_i(x) = bit i of f(x).  This module computes their algebraic normal
forms, decides compatibility (bit i depends only on bits 0..i),
measure preservation and single-cycle transitivity, counts transitive
maps by enumeration, builds guaranteed-ergodic maps from arbitrary
compatible ones, and implements the per-family ergodicity criteria and
the carry formula for bit j of z+i.

Everything is pure; mappings are plain callables int -> int that may
return unreduced integers (callers mask to the working width).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .words import uinv, mask

ANF_WIDTH_MAX = 16      # truth-table transform budget
CYCLE_WIDTH_MAX = 26    # full-orbit budget
DECOMPOSE_WIDTH_MAX = 12
CARRY_INDEX_MAX = 16
COUNT_WIDTH_MAX = 4


class BudgetError(ValueError):
    pass


class MappingError(ValueError):
    pass


def replicate_mask(block: int, width_bits: int, total_bits: int) -> int:
    """Tile a block of width_bits across total_bits positions."""
    rep = ((1 << total_bits) - 1) // ((1 << width_bits) - 1)
    return block * rep


def mobius_transform(table: int, nvars: int) -> int:
    """Binary Moebius (Reed-Muller) transform of a truth table.

    The table is an integer whose bit u holds the value at point u; the
    result holds ANF coefficients in the same layout.  Self-inverse.
    """
    total = 1 << nvars
    for i in range(nvars):
        step = 1 << i
        low = replicate_mask((1 << step) - 1, step << 1, total)
        table ^= (table & low) << step
    return table


def truth_table_of(bit_fn: Callable[[int], int], nvars: int) -> int:
    tt = 0
    for u in range(1 << nvars):
        if bit_fn(u) & 1:
            tt |= 1 << u
    return tt


class BooleanANF:
    """XOR of AND-monomials over variables x0..x(k-1).

    Monomials are integer bitmasks (bit t set means xt is a factor; the
    zero mask is the constant 1).  Coefficients live in {0,1}, so the
    monomial set has no duplicates by construction.
    """

    __slots__ = ("nvars", "monomials")

    def __init__(self, nvars: int, monomials=()):
        self.nvars = nvars
        self.monomials = frozenset(monomials)

    @classmethod
    def zero(cls, nvars: int) -> "BooleanANF":
        return cls(nvars)

    @classmethod
    def one(cls, nvars: int) -> "BooleanANF":
        return cls(nvars, (0,))

    @classmethod
    def var(cls, nvars: int, t: int) -> "BooleanANF":
        return cls(nvars, (1 << t,))

    @classmethod
    def from_truth_table(cls, table: int, nvars: int) -> "BooleanANF":
        coeffs = mobius_transform(table, nvars)
        mons = []
        u = 0
        while coeffs:
            if coeffs & 1:
                mons.append(u)
            coeffs >>= 1
            u += 1
        return cls(nvars, mons)

    def truth_table(self) -> int:
        acc = 0
        for m in self.monomials:
            acc |= 1 << m
        return mobius_transform(acc, self.nvars)

    def evaluate(self, point: int) -> int:
        acc = 0
        for m in self.monomials:
            if point & m == m:
                acc ^= 1
        return acc

    def degree(self) -> int:
        return max((m.bit_count() for m in self.monomials), default=0)

    def variables_used(self) -> int:
        acc = 0
        for m in self.monomials:
            acc |= m
        return acc

    def top_coefficient(self) -> int:
        """Coefficient of the full monomial x0*..*x(k-1); equals the
        weight parity of the function."""
        return int(((1 << self.nvars) - 1) in self.monomials)

    def __xor__(self, other: "BooleanANF") -> "BooleanANF":
        return BooleanANF(max(self.nvars, other.nvars),
                          self.monomials ^ other.monomials)

    def __mul__(self, other: "BooleanANF") -> "BooleanANF":
        out: set[int] = set()
        for a in self.monomials:
            for b in other.monomials:
                out ^= {a | b}
        return BooleanANF(max(self.nvars, other.nvars), out)

    def __eq__(self, other):
        return (isinstance(other, BooleanANF)
                and self.nvars == other.nvars
                and self.monomials == other.monomials)

    def __hash__(self):
        return hash((self.nvars, self.monomials))

    def __len__(self):
        return len(self.monomials)

    def __repr__(self):
        if not self.monomials:
            return "0"
        parts = []
        for m in sorted(self.monomials):
            if m == 0:
                parts.append("1")
            else:
                parts.append("*".join(f"x{t}" for t in range(self.nvars)
                                      if m >> t & 1))
        return " ^ ".join(parts)


# ---------------------------------------------------------------------------
# bit-slice analysis

def anf_of_bit(f: Callable[[int], int], i: int, width: int) -> BooleanANF:
    """ANF of bit i of f as a function of the input bits x0..x(width-1)."""
    if width > ANF_WIDTH_MAX:
        raise BudgetError(f"width {width} over ANF budget {ANF_WIDTH_MAX}")
    tt = truth_table_of(lambda u: f(u) >> i, width)
    return BooleanANF.from_truth_table(tt, width)


def bit_slice(f: Callable[[int], int], width: int) -> list[BooleanANF]:
    """All coordinate ANFs tau_0..tau_(width-1) of f."""
    return [anf_of_bit(f, i, width) for i in range(width)]


@dataclass(frozen=True)
class CompatReport:
    compatible: bool
    witness: tuple[int, int, int] | None  # (u, v, r): u = v mod 2**r, f differs


def is_compatible(f: Callable[[int], int], width: int) -> CompatReport:
    """Check bit i of f(u) never depends on bits above i.

    Flipping a single bit j of the input must leave the output unchanged
    modulo 2**j; closure under single flips gives the full congruence
    property.  Returns a witness pair on failure.
    """
    if width > ANF_WIDTH_MAX:
        raise BudgetError(f"width {width} over budget {ANF_WIDTH_MAX}")
    for j in range(1, width):
        low = mask(j)
        for u in range(1 << width):
            v = u ^ (1 << j)
            if (f(u) ^ f(v)) & low:
                return CompatReport(False, (u, v, j))
    return CompatReport(True, None)


@dataclass(frozen=True)
class CycleStructure:
    bijective: bool
    transitive: bool
    cycle_lengths: tuple[int, ...] | None


def cycle_structure(f: Callable[[int], int], width: int) -> CycleStructure:
    """Exact permutation test and cycle decomposition of f mod 2**width."""
    if width > CYCLE_WIDTH_MAX:
        raise BudgetError(f"width {width} over orbit budget {CYCLE_WIDTH_MAX}")
    size = 1 << width
    m = size - 1
    seen = bytearray(size)
    for x in range(size):
        y = f(x) & m
        if seen[y]:
            return CycleStructure(False, False, None)
        seen[y] = 1
    visited = bytearray(size)
    lengths = []
    for start in range(size):
        if visited[start]:
            continue
        x = start
        n = 0
        while not visited[x]:
            visited[x] = 1
            x = f(x) & m
            n += 1
        lengths.append(n)
    lengths.sort()
    return CycleStructure(True, lengths == [size], tuple(lengths))


def is_transitive_mod(f: Callable[[int], int], k: int) -> bool:
    """Is f mod 2**k a single 2**k-cycle?  Walks the orbit of 0."""
    if k > CYCLE_WIDTH_MAX:
        raise BudgetError(f"depth {k} over orbit budget {CYCLE_WIDTH_MAX}")
    m = mask(k)
    size = 1 << k
    x = 0
    for _ in range(size - 1):
        x = f(x) & m
        if x == 0:
            return False
    return f(x) & m == 0


def is_bijective_mod(f: Callable[[int], int], k: int) -> bool:
    if k > CYCLE_WIDTH_MAX:
        raise BudgetError(f"depth {k} over orbit budget {CYCLE_WIDTH_MAX}")
    m = mask(k)
    seen = bytearray(1 << k)
    for x in range(1 << k):
        y = f(x) & m
        if seen[y]:
            return False
        seen[y] = 1
    return True


def is_ergodic_to_depth(f: Callable[[int], int], depth: int) -> bool:
    """Transitive modulo 2**k for every k = 1..depth (the finite-depth
    proxy for ergodicity)."""
    return all(is_transitive_mod(f, k) for k in range(1, depth + 1))


def is_mp_to_depth(f: Callable[[int], int], depth: int) -> bool:
    """Bijective modulo 2**k for every k = 1..depth."""
    return all(is_bijective_mod(f, k) for k in range(1, depth + 1))


def _tau_anf(f: Callable[[int], int], i: int) -> BooleanANF:
    # coordinate i over variables x0..xi only (enough for compatible f)
    table = getattr(f, "bit_table", None)
    if table is not None:
        tt = table(i)
    else:
        tt = truth_table_of(lambda u: f(u) >> i, i + 1)
    return BooleanANF.from_truth_table(tt, i + 1)


def mp_shape_via_anf(f: Callable[[int], int], depth: int) -> bool:
    """Bit i of f splits as xi ^ phi_i(x0..x(i-1)) for all i < depth."""
    if depth > ANF_WIDTH_MAX:
        raise BudgetError(f"depth {depth} over ANF budget {ANF_WIDTH_MAX}")
    for i in range(depth):
        xi = 1 << i
        anf = _tau_anf(f, i)
        if xi not in anf.monomials:
            return False
        if any(m != xi and m & xi for m in anf.monomials):
            return False
    return True


def ergodicity_via_anf(f: Callable[[int], int], depth: int) -> bool:
    """ANF ergodicity test: bit i of f is xi ^ phi_i with phi_0 = 1 and,
    for i >= 1, phi_i containing the full monomial x0*..*x(i-1).

    Agrees with is_ergodic_to_depth on compatible mappings.
    """
    if depth > ANF_WIDTH_MAX:
        raise BudgetError(f"depth {depth} over ANF budget {ANF_WIDTH_MAX}")
    for i in range(depth):
        xi = 1 << i
        anf = _tau_anf(f, i)
        if xi not in anf.monomials:
            return False
        phi = anf.monomials - {xi}
        if any(m & xi for m in phi):
            return False
        if i == 0:
            if phi != {0}:
                return False
        elif (xi - 1) not in phi:
            return False
    return True


# ---------------------------------------------------------------------------
# table-backed compatible mappings

class TriangularMap:
    """Compatible map given by per-bit truth tables: bit i of f(x) is
    taus[i] indexed by x mod 2**(i+1)."""

    __slots__ = ("width", "taus")

    def __init__(self, width: int, taus: Sequence[int]):
        if len(taus) != width:
            raise MappingError("need one table per output bit")
        self.width = width
        self.taus = tuple(taus)

    def __call__(self, x: int) -> int:
        out = 0
        for i, t in enumerate(self.taus):
            out |= ((t >> (x & ((2 << i) - 1))) & 1) << i
        return out

    def bit_table(self, i: int) -> int:
        return self.taus[i]


class MeasureShapeMap:
    """Map of the shape bit_i(f(x)) = bit_i(x) ^ phi_i(x mod 2**i);
    phis[i] is the truth table of phi_i over i variables (phis[0] is a
    single constant bit).  Such maps are compatible and bijective at
    every depth."""

    __slots__ = ("width", "phis")

    def __init__(self, width: int, phis: Sequence[int]):
        if len(phis) != width:
            raise MappingError("need one table per output bit")
        self.width = width
        self.phis = tuple(phis)

    def __call__(self, x: int) -> int:
        out = 0
        for i, p in enumerate(self.phis):
            b = ((x >> i) ^ (p >> (x & ((1 << i) - 1)))) & 1
            out |= b << i
        return out

    def bit_table(self, i: int) -> int:
        # low table half has input bit i clear, high half complements it
        half = 1 << i
        p = self.phis[i]
        return p | ((p ^ ((1 << half) - 1)) << half)


def random_anf(nvars: int, rng, max_monomials: int = 8) -> BooleanANF:
    """Uniform-ish sparse ANF: up to max_monomials distinct monomials."""
    n = rng.randint(0, max_monomials)
    mons = {rng.randrange(1 << nvars) for _ in range(n)}
    return BooleanANF(nvars, mons)


def random_triangular(width: int, rng, max_monomials: int = 8) -> TriangularMap:
    taus = [random_anf(i + 1, rng, max_monomials).truth_table()
            for i in range(width)]
    return TriangularMap(width, taus)


def random_measure_map(width: int, rng, ergodic: bool = False,
                       max_monomials: int = 8) -> MeasureShapeMap:
    """Random measure-preserving-shaped map; with ergodic=True the
    phi tables are adjusted to odd weight (constant 1 at bit 0, full
    monomial present above)."""
    phis = []
    for i in range(width):
        if i == 0:
            p = rng.randrange(2)
            if ergodic:
                p = 1
            phis.append(p)
            continue
        table = random_anf(i, rng, max_monomials).truth_table()
        if ergodic and not _parity(table):
            # flipping the all-ones point toggles exactly the top coefficient
            table ^= 1 << ((1 << i) - 1)
        phis.append(table)
    return MeasureShapeMap(width, phis)


def _parity(x: int) -> int:
    return x.bit_count() & 1


# ---------------------------------------------------------------------------
# enumeration

def _walk_is_single_cycle(table: Sequence[int], size: int) -> bool:
    x = 0
    for _ in range(size - 1):
        x = table[x]
        if x == 0:
            return False
    return table[x] == 0


def iter_compatible_tables(width: int):
    """Yield every compatible map on Z/2**width as a value table, by
    running through all per-bit truth tables."""
    ranges = [range(1 << (2 << i)) for i in range(width)]
    size = 1 << width
    for taus in itertools.product(*ranges):
        table = [0] * size
        for u in range(size):
            v = 0
            for i, t in enumerate(taus):
                v |= ((t >> (u & ((2 << i) - 1))) & 1) << i
            table[u] = v
        yield table


def count_transitive(width: int) -> int:
    """Count compatible maps of Z/2**width that are single cycles, by
    enumeration and orbit walking.

    Widths 1..3 run the full product of per-bit tables.  Width 4 prunes
    level by level: a candidate transitive mod 2**(i+1) must already be
    transitive mod 2**i (the orbit projects onto the smaller modulus),
    so prefixes that fail lower moduli are dropped before extending.
    """
    if width > COUNT_WIDTH_MAX:
        raise BudgetError(f"enumeration width capped at {COUNT_WIDTH_MAX}")
    if width <= 3:
        return sum(_walk_is_single_cycle(t, 1 << width)
                   for t in iter_compatible_tables(width))

    prefixes = [()]
    for i in range(width):
        size = 2 << i
        low = size - 1
        survivors = []
        for pref in prefixes:
            base = [0] * size
            for u in range(size):
                v = 0
                for t_i, t in enumerate(pref):
                    v |= ((t >> (u & ((2 << t_i) - 1))) & 1) << t_i
                base[u] = v
            half = size >> 1
            for tau in range(1 << size):
                table = [base[u] | (((tau >> u) & 1) << i) for u in range(size)]
                x = table[0]
                ok = True
                for _ in range(size - 2):
                    if x == 0:
                        ok = False
                        break
                    x = table[x]
                if ok and x != 0 and table[x] == 0:
                    survivors.append(pref + (tau,))
        prefixes = survivors
    return len(prefixes)


# ---------------------------------------------------------------------------
# constructors

def make_ergodic_delta(g: Callable[[int], int], c: int,
                       check_width: int = 8) -> Callable[[int], int]:
    """x -> c + x + 2*(g(x+1) - g(x)) for odd c and compatible g; the
    result is ergodic."""
    if c & 1 == 0:
        raise MappingError("constant must be odd")
    rep = is_compatible(g, min(check_width, 10))
    if not rep.compatible:
        raise MappingError(f"g is not compatible, witness {rep.witness}")
    return lambda x: c + x + 2 * (g(x + 1) - g(x))


def make_mp(d: int, c: int, g: Callable[[int], int],
            check_width: int = 8) -> Callable[[int], int]:
    """x -> d + c*x + 2*g(x) for odd c and compatible g; the result is
    measure preserving (bijective at every depth)."""
    if c & 1 == 0:
        raise MappingError("multiplier must be odd")
    rep = is_compatible(g, min(check_width, 10))
    if not rep.compatible:
        raise MappingError(f"g is not compatible, witness {rep.witness}")
    return lambda x: d + c * x + 2 * g(x)


def decompose_ergodic(f: Callable[[int], int], width: int) -> list[int]:
    """Recover a table g with f(x) = 1 + x + 2*(g(x+1) - g(x)) mod 2**width
    for all x < 2**width - 1, normalised to g(0) = 0.

    g is reconstructed by integrating the step (f(x)-1-x)/2 along
    0..2**width-1; values are determined modulo 2**(width-1) and the
    identity is not required at the wrap point.
    """
    if width > DECOMPOSE_WIDTH_MAX:
        raise BudgetError(f"width {width} over budget {DECOMPOSE_WIDTH_MAX}")
    if not is_transitive_mod(f, width):
        raise MappingError("mapping is not transitive at this width")
    m = mask(width)
    half = mask(width - 1) if width > 1 else 0
    g = [0]
    for x in range((1 << width) - 1):
        step = (f(x) - 1 - x) & m
        g.append((g[-1] + (step >> 1)) & half)
    return g


def lift_compose(f: Callable[[int], int], v: Callable[[int], int],
                 variant: int, check_depth: int = 8) -> Callable[[int], int]:
    """Combine an ergodic f with a compatible v; all four variants stay
    ergodic: 1: f(x+4v(x))  2: f(x^(4v(x)))  3: f(x)+4v(x)  4: f(x)^(4v(x))."""
    if variant not in (1, 2, 3, 4):
        raise MappingError(f"variant must be 1..4, got {variant}")
    if not is_ergodic_to_depth(f, min(check_depth, 8)):
        raise MappingError("f is not ergodic at the checked depth")
    rep = is_compatible(v, min(check_depth, 8))
    if not rep.compatible:
        raise MappingError(f"v is not compatible, witness {rep.witness}")
    if variant == 1:
        return lambda x: f(x + 4 * v(x))
    if variant == 2:
        return lambda x: f(x ^ (4 * v(x)))
    if variant == 3:
        return lambda x: f(x) + 4 * v(x)
    return lambda x: f(x) ^ (4 * v(x))


# ---------------------------------------------------------------------------
# family criteria

FAMILY_KINDS = ("klimov-shamir", "larin", "xor-sum", "kotomina-chain",
                "delta-series", "rational-poly", "entire", "exp-affine")


def _poly_eval(coeffs: Sequence, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def family_map(kind: str, params: dict, width: int) -> Callable[[int], int]:
    """Evaluator for a family instance, usable at any depth <= width."""
    if kind == "klimov-shamir":
        c = params["c"]
        return lambda x: x + ((x * x) | c)
    if kind == "larin":
        coeffs = list(params["coeffs"])
        return lambda x: _poly_eval(coeffs, x)
    if kind == "xor-sum":
        a = params["a"]
        terms = [(int(ai), int(bi)) for ai, bi in params["terms"]]
        return lambda x: a + sum(ai * (x ^ bi) for ai, bi in terms)
    if kind == "kotomina-chain":
        cs = list(params["cs"])
        ds = list(params["ds"])
        if len(cs) != len(ds):
            raise MappingError("chain needs equal-length constant lists")

        def chain(x):
            for c, d in zip(cs, ds):
                x = (x + c) ^ d
            return x
        return chain
    if kind == "delta-series":
        a = params["a"]
        coeffs = list(params["coeffs"])
        return lambda x: a + sum(ai * ((x >> i) & 1)
                                 for i, ai in enumerate(coeffs))
    if kind == "rational-poly":
        coeffs = [Fraction(c) for c in params["coeffs"]]

        def rpoly(x):
            val = _poly_eval(coeffs, x)
            if val.denominator != 1:
                raise MappingError(f"non-integral value at {x}")
            return int(val)
        return rpoly
    if kind == "entire":
        u = list(params["u"])
        v = list(params["v"])

        def entire(x):
            den = (1 + 2 * _poly_eval(v, x)) & mask(width)
            return _poly_eval(u, x) * uinv(den, width)
        return entire
    if kind == "exp-affine":
        a = params["a"]
        if a & 1 == 0:
            raise MappingError("base must be odd")
        # exact 2-adic value for inputs below 2**64
        return lambda x: a * x + pow(a, x, 1 << 66)
    raise MappingError(f"unknown family kind {kind!r}")


def family_criterion(kind: str, params: dict) -> bool:
    """Closed-form ergodicity verdict for the named family."""
    if kind == "klimov-shamir":
        return params["c"] % 8 in (5, 7)
    if kind == "larin":
        a = list(params["coeffs"])
        a += [0] * max(0, 2 - len(a) + 1)
        odd_tail = sum(a[3::2]) % 4
        even_tail = sum(a[4::2]) % 4
        return (odd_tail == (2 * a[2]) % 4
                and even_tail == (a[1] + a[2] - 1) % 4
                and a[1] % 2 == 1
                and a[0] % 2 == 1)
    if kind == "xor-sum":
        return is_transitive_mod(family_map(kind, params, 2), 2)
    if kind == "kotomina-chain":
        return is_transitive_mod(family_map(kind, params, 2), 2)
    if kind == "delta-series":
        a = params["a"]
        coeffs = list(params["coeffs"])
        if a % 2 != 1 or not coeffs or coeffs[0] % 4 != 1:
            return False
        for i, ai in enumerate(coeffs[1:], start=1):
            if ai % (1 << i) != 0 or ai % (1 << (i + 1)) == 0:
                return False
        return True
    if kind == "rational-poly":
        coeffs = [Fraction(c) for c in params["coeffs"]]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        d = len(coeffs) - 1
        if d < 1:
            raise MappingError("need degree at least 1")
        w = d.bit_length() - 1 + 3  # modulus 2**w is the largest power of 2 <= 8d
        values = []
        for x in range(1 << w):
            val = _poly_eval(coeffs, x)
            if val.denominator != 1:
                return False
            values.append(int(val))
        fn = lambda x: values[x & mask(w)]
        if not is_compatible(fn, w).compatible:
            return False
        return is_transitive_mod(fn, w)
    if kind == "entire":
        return is_transitive_mod(family_map(kind, params, 3), 3)
    if kind == "exp-affine":
        return params["a"] % 2 == 1
    raise MappingError(f"unknown family kind {kind!r}")


# ---------------------------------------------------------------------------
# carry formula

def add_carry_anf(j: int, i: int) -> BooleanANF:
    """ANF of bit j of z+i in the variables x0..xj (digits of z):

        xj ^ bit_j(i) ^ sum_{r<j} bit_r(i) * xr * prod_{t=r+1}^{j-1} (bit_t(i) ^ xt)

    expanded and reduced over GF(2).
    """
    if j > CARRY_INDEX_MAX:
        raise BudgetError(f"bit index {j} over budget {CARRY_INDEX_MAX}")
    k = j + 1
    acc = BooleanANF.var(k, j)
    if (i >> j) & 1:
        acc ^= BooleanANF.one(k)
    for r in range(j):
        if not (i >> r) & 1:
            continue
        term = BooleanANF.var(k, r)
        for t in range(r + 1, j):
            factor = BooleanANF.var(k, t)
            if (i >> t) & 1:
                factor ^= BooleanANF.one(k)
            term = term * factor
        acc ^= term
    return acc
