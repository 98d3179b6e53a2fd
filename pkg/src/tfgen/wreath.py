"""Counter-dependent generator construction and validation.

A generator couples a control source (explicit symbol array, LFSR, or an
inner generator) with a clock family of state-update maps indexed by the
control symbol, plus an output rule.  At step i the control symbol c(i)
selects the update, so the state advances x_{i+1} = g_{c(i)}(x_i) mod 2**n
and the step emits F(x_i) first.

validate_wp checks the three period/uniformity conditions on the
effective per-step family (the updates as scheduled by one control
period): the parity word of the members at 0 must have shortest period
exactly m, the member values at 0 must have odd sum, and at each bit
level an odd number of members must carry an odd-weight adjustment.
The raw level sums are also computed in two literal forms and reported
for reference, but never gate the verdict.

Generator instances own their mutable cursor; specs, families and
controls are immutable and shareable.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Callable, Sequence

from . import analysis, anf, dsl
from .words import mask, urev, urotl1

DEFAULT_STEP_BUDGET = 1 << 26
STEP_BUDGET_CAP = 1 << 30


class SpecError(ValueError):
    pass


class ValidationFailure(SpecError):
    """A spec failed validation and generation was not forced."""


class FamilyError(SpecError):
    """A clock member is not measure preserving at the checked depth."""


class BudgetExceeded(SpecError):
    pass


def step_budget() -> int:
    raw = os.environ.get("TFGEN_BUDGET")
    if not raw:
        return DEFAULT_STEP_BUDGET
    return min(int(raw), STEP_BUDGET_CAP)


# ---------------------------------------------------------------------------
# control sources

class ExplicitControl:
    def __init__(self, symbols: Sequence[int]):
        if not symbols:
            raise SpecError("control array must be non-empty")
        self.symbols = tuple(int(s) for s in symbols)

    def period(self) -> int:
        return len(self.symbols)

    def symbol(self, i: int) -> int:
        return self.symbols[i % len(self.symbols)]

    def to_json(self):
        return {"type": "explicit", "data": list(self.symbols)}


class LfsrControl:
    """Fibonacci LFSR over GF(2): feedback is the XOR of the tapped
    cells, the emitted symbol is cell 0.  The register must have maximum
    period 2**cells - 1 (checked at construction)."""

    def __init__(self, cells: int, taps: Sequence[int], init: int):
        if init == 0 or init >> cells:
            raise SpecError("LFSR seed must be a non-zero state")
        self.cells = cells
        self.taps = tuple(sorted(taps))
        self.init = init
        bits = []
        state = init
        for _ in range((1 << cells) - 1):
            bits.append(state & 1)
            fb = 0
            for t in self.taps:
                fb ^= (state >> t) & 1
            state = (state >> 1) | (fb << (cells - 1))
        if state != init:
            raise SpecError("feedback taps do not give a maximum-period register")
        self.bits = tuple(bits)

    def period(self) -> int:
        return len(self.bits)

    def symbol(self, i: int) -> int:
        return self.bits[i % len(self.bits)]

    def to_json(self):
        return {"type": "lfsr", "cells": self.cells,
                "taps": list(self.taps), "init": self.init}


class InnerControl:
    """Symbols produced by another generator; one full output period is
    unrolled at construction."""

    def __init__(self, spec: "GeneratorSpec"):
        self.spec = spec
        info = measure_period(spec, force=True)
        words = generate(spec, info.state_period, force=True)
        t = analysis.shortest_period(words)
        self.symbols = tuple(words[:t])

    def period(self) -> int:
        return len(self.symbols)

    def symbol(self, i: int) -> int:
        return self.symbols[i % len(self.symbols)]

    def to_json(self):
        return {"type": "inner", "spec": spec_to_dict(self.spec)}


Control = ExplicitControl | LfsrControl | InnerControl


# ---------------------------------------------------------------------------
# clock families and outputs

UpdateMap = Callable[[int], int]


@dataclass(frozen=True)
class ClockFamily:
    updates: tuple[UpdateMap, ...]

    def sources(self, width: int) -> list[str]:
        out = []
        for u in self.updates:
            if isinstance(u, dsl.BoundExpr):
                out.append(u.text)
            else:
                out.append(dsl.to_text(dsl.mapping_to_expr(u, min(width, 12))))
        return out


def family_from_exprs(exprs: Sequence[str], width: int) -> ClockFamily:
    return ClockFamily(tuple(dsl.BoundExpr(e, width) for e in exprs))


@dataclass(frozen=True)
class TruncateOutput:
    k: int

    def functions(self, n: int):
        shift = n - self.k
        return (lambda x: x >> shift,)

    def to_json(self):
        return {"type": "truncate", "k": self.k}


@dataclass(frozen=True)
class ReverseErgodicOutput:
    """F_j(x) = H_j(perm(x)) mod 2**k with a bit permutation sending the
    top bit to position 0 (full reversal by default, or rotl1)."""

    exprs: tuple[str, ...]
    k: int
    perm: str = "reverse"

    def functions(self, n: int):
        low = mask(self.k)
        pi = (lambda x: urev(x, n)) if self.perm == "reverse" else \
             (lambda x: urotl1(x, n))
        fns = []
        for e in self.exprs:
            h = dsl.BoundExpr(e, n)
            fns.append(lambda x, h=h: h(pi(x)) & low)
        return tuple(fns)

    def to_json(self):
        return {"type": "reversed", "k": self.k, "perm": self.perm,
                "exprs": list(self.exprs)}


@dataclass(frozen=True)
class FamilyOutput:
    exprs: tuple[str, ...]
    k: int

    def functions(self, n: int):
        low = mask(self.k)
        return tuple(lambda x, f=dsl.BoundExpr(e, n): f(x) & low
                     for e in self.exprs)

    def to_json(self):
        return {"type": "family", "k": self.k, "exprs": list(self.exprs)}


OutputSpec = TruncateOutput | ReverseErgodicOutput | FamilyOutput


def output_reverse_ergodic(h_exprs: Sequence[str], k: int, n: int,
                           perm: str = "reverse",
                           check: bool = True) -> ReverseErgodicOutput:
    """Build the reversed-ergodic output family, verifying that every
    H is ergodic at a small depth and that the resulting output is
    balanced (preimage counting, width capped at 12)."""
    if perm not in ("reverse", "rotl1"):
        raise SpecError(f"unknown bit permutation {perm!r}")
    out = ReverseErgodicOutput(tuple(h_exprs), k, perm)
    if check:
        for e in out.exprs:
            h = dsl.BoundExpr(e, min(n, 10))
            if not anf.is_ergodic_to_depth(h, min(n, 10)):
                raise SpecError(f"output base {e!r} is not ergodic")
        w = min(n, 12)
        for fn in out.functions(w):
            counts = [0] * (1 << k)
            for x in range(1 << w):
                counts[fn(x)] += 1
            if len(set(counts)) != 1:
                raise SpecError("output is not balanced")
    return out


# ---------------------------------------------------------------------------
# generator specs

@dataclass(frozen=True)
class GeneratorSpec:
    n: int
    control: Control
    family: ClockFamily
    output: OutputSpec
    seed: int

    def __post_init__(self):
        if not 1 <= self.n <= 64:
            raise SpecError(f"width {self.n} out of range")
        if self.seed >> self.n:
            raise SpecError("seed does not fit the width")
        k = getattr(self.output, "k", self.n)
        if not 1 <= k <= self.n:
            raise SpecError(f"output width {k} out of range")
        for j in range(self.control.period()):
            if not 0 <= self.control.symbol(j) < len(self.family.updates):
                raise SpecError(
                    f"control symbol {self.control.symbol(j)} has no update")

    @property
    def m(self) -> int:
        return self.control.period()


# ---------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class LevelRow:
    k: int
    coef_parity: int            # parity of odd-weight adjustments (gates)
    literal_sum: int            # sum of member values over 0..2**k-1, mod 2**(k+1)
    literal_target: int         # 2**k
    shifted_sum: int            # same sum with the identity subtracted


@dataclass(frozen=True)
class WpReport:
    m: int
    depth: int
    parity_word: tuple[int, ...]
    parity_period: int
    parity_period_ok: bool      # condition 1
    zero_sum_parity: int
    zero_sum_ok: bool           # condition 2
    levels: tuple[LevelRow, ...]
    levels_ok: bool             # condition 3 (parity form)
    valid: bool

    def to_json(self):
        return {
            "m": self.m, "depth": self.depth,
            "parity_word": list(self.parity_word),
            "parity_period": self.parity_period,
            "conditions": {"parity_period": self.parity_period_ok,
                           "odd_zero_sum": self.zero_sum_ok,
                           "level_parities": self.levels_ok},
            "levels": [{"k": r.k, "coef_parity": r.coef_parity,
                        "literal_sum": r.literal_sum,
                        "literal_target": r.literal_target,
                        "shifted_sum": r.shifted_sum} for r in self.levels],
            "valid": self.valid,
        }


def _check_member_mp(g: UpdateMap, depth: int, who: str,
                     check_compat: bool) -> None:
    for k in range(depth + 1):
        step = 1 << k
        for z in range(step):
            a = (g(z) >> k) & 1
            b = (g(z + step) >> k) & 1
            if a == b:
                raise FamilyError(
                    f"{who}: bit {k} does not toggle with input bit {k}")
    if check_compat:
        w = min(depth + 1, 10)
        rep = anf.is_compatible(g, w)
        if not rep.compatible:
            raise FamilyError(f"{who}: not compatible, witness {rep.witness}")


def validate_wp(family: ClockFamily, control: Control, depth: int,
                check_compat: bool = True) -> WpReport:
    """Check the period/uniformity conditions of a wreath family.

    Conditions on the effective members g_j = updates[control(j)],
    j < m: (1) the parity word (g_j(0) mod 2) has shortest period
    exactly m; (2) sum_j g_j(0) is odd; (3) for each bit level k in
    1..depth an odd number of members carry an odd-weight level-k
    adjustment.  Raw level sums are reported but do not gate.
    """
    if depth > 16:
        raise SpecError("validation depth capped at 16")
    m = control.period()
    members = [family.updates[control.symbol(j)] for j in range(m)]
    for idx in {control.symbol(j) for j in range(m)}:
        _check_member_mp(family.updates[idx], depth, f"update {idx}",
                         check_compat)

    word = tuple(g(0) & 1 for g in members)
    ppd = analysis.shortest_period(list(word))
    zero_parity = sum(g(0) for g in members) & 1

    levels = []
    ok3 = True
    for k in range(1, depth + 1):
        size = 1 << k
        coef = 0
        lit = 0
        shifted = 0
        for g in members:
            tparity = 0
            for z in range(size):
                v = g(z)
                tparity ^= (v >> k) & 1
                lit += v
                shifted += v - z
            coef ^= tparity
        row = LevelRow(k, coef, lit % (size << 1), size, shifted % (size << 1))
        levels.append(row)
        ok3 = ok3 and coef == 1

    valid = ppd == m and zero_parity == 1 and ok3
    return WpReport(m, depth, word, ppd, ppd == m, zero_parity,
                    zero_parity == 1, tuple(levels), ok3, valid)


def validate_spec(spec: GeneratorSpec, depth: int | None = None,
                  check_compat: bool | None = None) -> WpReport:
    d = min(depth if depth is not None else spec.n - 1, spec.n - 1, 16)
    d = max(d, 1)
    if check_compat is None:
        check_compat = len(spec.family.updates) <= 64
    return validate_wp(spec.family, spec.control, d, check_compat)


# ---------------------------------------------------------------------------
# running

class Generator:
    """Single-owner running instance of a spec."""

    def __init__(self, spec: GeneratorSpec, force: bool = False):
        self.spec = spec
        if not force:
            report = validate_spec(spec)
            if not report.valid:
                raise ValidationFailure(
                    "spec fails validation; run with force to generate anyway")
        self._outputs = spec.output.functions(spec.n)
        self._mask = mask(spec.n)
        self.state = spec.seed
        self.step = 0

    def emit(self, count: int) -> list[int]:
        out = []
        ctrl = self.spec.control
        updates = self.spec.family.updates
        outs = self._outputs
        n_out = len(outs)
        msk = self._mask
        x = self.state
        i = self.step
        for _ in range(count):
            sym = ctrl.symbol(i)
            out.append(outs[sym % n_out](x))
            x = updates[sym](x) & msk
            i += 1
        self.state = x
        self.step = i
        return out


def generate(spec: GeneratorSpec, count: int, force: bool = False) -> list[int]:
    return Generator(spec, force=force).emit(count)


def state_sequence(spec: GeneratorSpec, count: int) -> list[int]:
    out = []
    x = spec.seed
    msk = mask(spec.n)
    updates = spec.family.updates
    ctrl = spec.control
    for i in range(count):
        out.append(x)
        x = updates[ctrl.symbol(i)](x) & msk
    return out


@dataclass(frozen=True)
class PeriodInfo:
    pair_period: int
    state_period: int
    preperiod: int
    states: tuple[int, ...]


def measure_period(spec: GeneratorSpec, budget: int | None = None,
                   force: bool = True) -> PeriodInfo:
    """Measure the exact state period by cycling the (step mod m, state)
    pair; the state period is the shortest period of the collected
    states.  Refuses past the step budget."""
    limit = budget if budget is not None else step_budget()
    m = spec.m
    msk = mask(spec.n)
    updates = spec.family.updates
    ctrl = spec.control
    seen: dict[tuple[int, int], int] = {}
    states: list[int] = []
    x = spec.seed
    i = 0
    while True:
        key = (i % m, x)
        if key in seen:
            start = seen[key]
            cycle = states[start:]
            return PeriodInfo(i - start, analysis.shortest_period(cycle),
                              start, tuple(cycle))
        if i >= limit:
            raise BudgetExceeded(f"no cycle within {limit} steps")
        seen[key] = i
        states.append(x)
        x = updates[ctrl.symbol(i)](x) & msk
        i += 1


# ---------------------------------------------------------------------------
# named constructions

def _require(cond: bool, what: str) -> None:
    if not cond:
        raise SpecError(f"construction precondition violated: {what}")


def _parity_word_period(cs: Sequence[int]) -> int:
    return analysis.shortest_period([c & 1 for c in cs])


def build_example(kind: str, **params):
    """Construct one of the named generator shapes; returns the spec and
    its validation report."""
    builder = _EXAMPLES.get(kind)
    if builder is None:
        raise SpecError(f"unknown example kind {kind!r}; "
                        f"have {sorted(_EXAMPLES)}")
    return builder(**params)


def _build_intro(n: int, m: int, v_exprs: Sequence[str],
                 w_exprs: Sequence[str] | None = None, seed: int = 0,
                 k: int | None = None):
    _require(m % 4 == 3, "m = 3 (mod 4)")
    _require(3 <= m <= (1 << n) // n, "3 <= m <= 2**n / n")
    _require(len(v_exprs) == m, "one v per member")
    for e in v_exprs:
        _require(dsl.classify(dsl.parse(e)).compatible is True,
                 f"v {e!r} must be a compatible composition")
    updates = [f"{j} + x + 4*({v})" for j, v in enumerate(v_exprs)]
    if w_exprs is None:
        w_exprs = ["0"] * m
    _require(len(w_exprs) == m, "one w per member")
    out = output_reverse_ergodic(
        [f"1 + x + 4*({w})" for w in w_exprs], k or n, n)
    spec = GeneratorSpec(n, ExplicitControl(range(m)),
                         family_from_exprs(updates, n), out, seed)
    return spec, validate_spec(spec)


def _build_wp1(n: int, s: int, odd_count: int, h_exprs: Sequence[str],
               order: Sequence[int] | None = None, seed: int = 0,
               k: int | None = None):
    m = 1 << s
    _require(odd_count % 2 == 1 and 0 < odd_count <= m,
             "the twisted prefix length must be odd")
    _require(len(h_exprs) == m, "one ergodic base per member")
    updates = []
    for j, h in enumerate(h_exprs):
        if j < odd_count:
            updates.append(f"x ^ (x+1) ^ ({h})")
        else:
            updates.append(f"({h})")
    if order is None:
        order = list(range(m))
    _require(sorted(order) == list(range(m)),
             "control order must be a permutation of 0..m-1")
    spec = GeneratorSpec(n, ExplicitControl(order),
                         family_from_exprs(updates, n),
                         TruncateOutput(k or n), seed)
    return spec, validate_spec(spec)


def _build_wp2(n: int, cs: Sequence[int], h_exprs: Sequence[str],
               seed: int = 0, k: int | None = None):
    m = len(cs)
    _require(m >= 1 and m & (m - 1) == 0, "m must be a power of two")
    _require(sum(cs) % 2 == 1, "sum of the control constants must be odd")
    _require(len(h_exprs) == m, "one ergodic base per member")
    updates = [f"{c} + ({h})" for c, h in zip(cs, h_exprs)]
    spec = GeneratorSpec(n, ExplicitControl(range(m)),
                         family_from_exprs(updates, n),
                         TruncateOutput(k or n), seed)
    return spec, validate_spec(spec)


def _build_wp3(n: int, cs: Sequence[int], h_exprs: Sequence[str],
               use_xor: bool = False, seed: int = 0, k: int | None = None):
    m = len(cs)
    _require(m > 1 and m % 2 == 1, "m must be odd and greater than 1")
    _require(sum(cs) % 2 == 0, "sum of the control constants must be even")
    _require(_parity_word_period(cs) == m,
             "control parities must have shortest period m")
    _require(len(h_exprs) == m, "one ergodic base per member")
    op = "^" if use_xor else "+"
    updates = [f"{c} {op} ({h})" for c, h in zip(cs, h_exprs)]
    spec = GeneratorSpec(n, ExplicitControl(range(m)),
                         family_from_exprs(updates, n),
                         TruncateOutput(k or n), seed)
    return spec, validate_spec(spec)


def _build_wp4(n: int, cells: int, taps: Sequence[int], init: int,
               h0: str, h1: str, seed: int = 0, k: int | None = None):
    control = LfsrControl(cells, taps, init)
    updates = [f"({h0})", f"1 ^ ({h1})"]
    spec = GeneratorSpec(n, control, family_from_exprs(updates, n),
                         TruncateOutput(k or n), seed)
    return spec, validate_spec(spec)


def _build_klsh(n: int, Cs: Sequence[int], cs: Sequence[int], seed: int = 0,
                k: int | None = None):
    m = len(Cs)
    _require(m > 1 and m % 2 == 1, "m must be odd and greater than 1")
    for C in Cs:
        _require(C & 1 == 1 and (C >> 2) & 1 == 1,
                 "every C must have bits 0 and 2 set")
    _require(len(cs) == m, "one additive constant per member")
    _require(sum(cs) % 2 == 0, "sum of the additive constants must be even")
    _require(_parity_word_period(cs) == m,
             "additive-constant parities must have shortest period m")
    updates = [f"x + {c} + ((x*x) | {C})" for c, C in zip(cs, Cs)]
    spec = GeneratorSpec(n, ExplicitControl(range(m)),
                         family_from_exprs(updates, n),
                         TruncateOutput(k or n), seed)
    return spec, validate_spec(spec)


def _psi_expr(monomials: Sequence[int], width: int) -> str:
    if not monomials:
        return "0"
    parts = []
    for m in monomials:
        if m == 0:
            parts.append("1")
            continue
        parts.append("&".join(f"bit({t},x)" for t in range(width)
                              if (m >> t) & 1))
    return " ^ ".join(f"({p})" if "&" in p else p for p in parts)


def _build_sec5(n: int, k: int, rng, seed: int = 0):
    """Hard-inversion shape: every member updates by
    d ^ ((1+x) ^ 2**(n+1) * F(x)) where F packs k random sparse ANFs of
    the low n state bits, and the output truncates to bits n+1..n+k."""
    _require(n <= 8 and 1 <= k <= 4, "sizes capped at n <= 8, k <= 4")
    width = n + k + 1
    m = 1 << n
    updates = []
    for i in range(m):
        d = 1 if i >= m - 2 else 0
        terms = []
        for t in range(k):
            mons = sorted({rng.randrange(1 << n)
                           for _ in range(rng.randint(1, 8))})
            terms.append(f"{1 << (n + 1 + t)}*({_psi_expr(mons, n)})")
        body = f"(1+x) ^ ({' + '.join(terms)})"
        updates.append(f"{d} ^ ({body})" if d else body)
    out = FamilyOutput((f"x >> {n + 1}",), k)
    spec = GeneratorSpec(width, ExplicitControl(range(m)),
                         family_from_exprs(updates, width), out, seed)
    depth = min(width - 1, 8 if m <= 32 else 3)
    try:
        report = validate_wp(spec.family, spec.control, depth,
                             check_compat=False)
    except FamilyError:
        report = None
    return spec, report


_EXAMPLES = {
    "intro": _build_intro,
    "wp1": _build_wp1,
    "wp2": _build_wp2,
    "wp3": _build_wp3,
    "wp4": _build_wp4,
    "klsh": _build_klsh,
    "sec5": _build_sec5,
}


# ---------------------------------------------------------------------------
# keystream packing: words bit-packed low-bit-first, zero padding at EOF

def pack_words(words: Sequence[int], k: int) -> bytes:
    acc = 0
    nbits = 0
    out = bytearray()
    low = mask(k)
    for w in words:
        acc |= (w & low) << nbits
        nbits += k
        while nbits >= 8:
            out.append(acc & 0xFF)
            acc >>= 8
            nbits -= 8
    if nbits:
        out.append(acc & 0xFF)
    return bytes(out)


def unpack_words(data: bytes, k: int, count: int | None = None) -> list[int]:
    total = len(data) * 8
    n = total // k if count is None else count
    if count is not None and count * k > total:
        raise SpecError("file too short for the requested word count")
    acc = int.from_bytes(data, "little")
    low = mask(k)
    out = []
    for _ in range(n):
        out.append(acc & low)
        acc >>= k
    return out


# ---------------------------------------------------------------------------
# JSON spec files

def _control_from_dict(doc: dict) -> Control:
    t = doc.get("type")
    if t == "explicit":
        return ExplicitControl(doc["data"])
    if t == "lfsr":
        return LfsrControl(doc["cells"], doc["taps"], doc["init"])
    if t == "inner":
        return InnerControl(spec_from_dict(doc["spec"]))
    raise SpecError(f"unknown control type {t!r}")


def _output_from_dict(doc: dict, n: int) -> OutputSpec:
    t = doc.get("type")
    if t == "truncate":
        return TruncateOutput(doc["k"])
    if t == "reversed":
        return output_reverse_ergodic(doc["exprs"], doc["k"], n,
                                      doc.get("perm", "reverse"))
    if t == "family":
        return FamilyOutput(tuple(doc["exprs"]), doc["k"])
    raise SpecError(f"unknown output type {t!r}")


def spec_from_dict(doc: dict) -> GeneratorSpec:
    n = int(doc["n"])
    control = _control_from_dict(doc["control"])
    family = family_from_exprs(doc["update"], n)
    output = _output_from_dict(doc["output"], n)
    seed = int(doc["seed"], 16) if isinstance(doc["seed"], str) else int(doc["seed"])
    spec = GeneratorSpec(n, control, family, output, seed)
    if "m" in doc and int(doc["m"]) != spec.m:
        raise SpecError(f"declared m {doc['m']} != control period {spec.m}")
    return spec


def spec_to_dict(spec: GeneratorSpec) -> dict:
    return {
        "n": spec.n,
        "m": spec.m,
        "seed": hex(spec.seed),
        "control": spec.control.to_json(),
        "update": spec.family.sources(spec.n),
        "output": spec.output.to_json(),
    }


def load_spec(path: str) -> GeneratorSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))


def save_spec(spec: GeneratorSpec, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")
