"""Exact analyses of generated sequences.

Covers shortest periods, strict uniformity of residues, k-chain censuses
of cyclic bit strings, the Q1 finite-sequence randomness bound, linear
complexity via Berlekamp-Massey, exhaustive l-error linear complexity,
per-bit coordinate structure, and realisation of prescribed coordinate
half-periods.  All analyses are pure over immutable buffers; every
verdict keeps the raw counts it came from.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .anf import MeasureShapeMap


class AnalysisError(ValueError):
    pass


# ---------------------------------------------------------------------------
# periods and uniformity

def shortest_period(seq: Sequence[int]) -> int:
    """Minimal t dividing len(seq) with seq[i+t] == seq[i] cyclically.

    The input must be one full period of a purely periodic sequence."""
    n = len(seq)
    if n == 0:
        raise AnalysisError("empty sequence")
    seq = list(seq)
    for t in range(1, n + 1):
        if n % t:
            continue
        if seq[t:] + seq[:t] == seq:
            return t
    return n


@dataclass(frozen=True)
class UniformityReport:
    k: int
    period: int
    counts: tuple[int, ...]
    uniform: bool


def strict_uniformity(seq: Sequence[int], k: int) -> UniformityReport:
    """Residue counts modulo 2**k over the shortest period of seq."""
    t = shortest_period(seq)
    counts = [0] * (1 << k)
    m = (1 << k) - 1
    for v in list(seq)[:t]:
        counts[v & m] += 1
    return UniformityReport(k, t, tuple(counts), len(set(counts)) == 1)


# ---------------------------------------------------------------------------
# bit cycles

def words_to_bits(seq: Sequence[int], width: int) -> list[int]:
    """Binary counterpart: base-2 digits of each word, low bit first."""
    out = []
    for v in seq:
        for j in range(width):
            out.append((v >> j) & 1)
    return out


def k_chain_census(bits: Sequence[int], k: int) -> tuple[tuple[int, ...], bool]:
    """Wraparound counts of all 2**k chains in the cyclic bit string.

    A chain starting at position p is encoded with its first label as
    the low bit.  Returns (counts, k_full)."""
    n = len(bits)
    if k == 0:
        return (n,), True
    if k > n.bit_length():
        raise AnalysisError(f"chain length {k} too long for cycle of {n}")
    arr = np.asarray(bits, dtype=np.int64)
    ext = np.concatenate([arr, arr[: k - 1]])
    codes = np.zeros(n, dtype=np.int64)
    for t in range(k):
        codes |= ext[t:t + n] << t
    counts = np.bincount(codes, minlength=1 << k)
    full = bool(counts.min() == counts.max())
    return tuple(int(c) for c in counts), full


def is_k_full(bits: Sequence[int], k: int) -> bool:
    return k_chain_census(bits, k)[1]


# ---------------------------------------------------------------------------
# Q1

@dataclass(frozen=True)
class Q1Row:
    k: int
    worst_margin: float          # finite-substring counting (the verdict)
    worst_margin_cyclic: float   # wraparound counting, for reference
    threshold: float
    passed: bool


@dataclass(frozen=True)
class Q1Report:
    length: int
    rows: tuple[Q1Row, ...]
    passed: bool


def q1_check(bits: Sequence[int]) -> Q1Report:
    """Knuth Q1 bound: |count/N - 2**-k| <= 1/sqrt(N) for 0 < k <= log2 N.

    Occurrences are counted as plain substrings of the finite string
    (that convention reproduces the published pass/fail boundary cases);
    wraparound counts are reported alongside.  The verdict per k uses
    exact integer arithmetic: (count*2**k - N)**2 <= N*4**k.
    """
    n = len(bits)
    if n < 2:
        raise AnalysisError("need at least two bits")
    arr = np.asarray(bits, dtype=np.int64)
    rows = []
    kmax = n.bit_length() - 1  # floor(log2 n)
    for k in range(1, kmax + 1):
        codes = np.zeros(n - k + 1, dtype=np.int64)
        for t in range(k):
            codes |= arr[t:t + n - k + 1] << t
        counts = np.bincount(codes, minlength=1 << k)
        ext = np.concatenate([arr, arr[: k - 1]])
        ccodes = np.zeros(n, dtype=np.int64)
        for t in range(k):
            ccodes |= ext[t:t + n] << t
        ccounts = np.bincount(ccodes, minlength=1 << k)
        worst = int(np.abs(counts * (1 << k) - n).max())
        worst_c = int(np.abs(ccounts * (1 << k) - n).max())
        ok = worst * worst <= n * (1 << (2 * k))
        rows.append(Q1Row(k, worst / (n << k), worst_c / (n << k),
                          n ** -0.5, ok))
    return Q1Report(n, tuple(rows), all(r.passed for r in rows))


# ---------------------------------------------------------------------------
# linear complexity

@dataclass(frozen=True)
class BmResult:
    complexity: int
    poly: tuple[int, ...]  # connection coefficients c_0=1 .. c_L

    def regenerates(self, bits: Sequence[int]) -> bool:
        L = self.complexity
        for i in range(L, len(bits)):
            acc = 0
            for j in range(1, L + 1):
                acc ^= self.poly[j] & bits[i - j]
            if acc != bits[i]:
                return False
        return True


def berlekamp_massey(bits: Sequence[int]) -> BmResult:
    """Length and connection polynomial of the shortest GF(2) linear
    recurrence generating the bit sequence."""
    s = np.asarray(bits, dtype=np.uint8)
    n = len(s)
    c = np.zeros(n + 1, dtype=np.uint8)
    b = np.zeros(n + 1, dtype=np.uint8)
    c[0] = b[0] = 1
    L, m = 0, 1
    for i in range(n):
        if L:
            d = int(s[i]) ^ (int(np.count_nonzero(c[1:L + 1] & s[i - L:i][::-1])) & 1)
        else:
            d = int(s[i])
        if d == 0:
            m += 1
        elif 2 * L <= i:
            t = c.copy()
            hi = min(n + 1, m + L + 1)
            c[m:hi] ^= b[:hi - m]
            L, b, m = i + 1 - L, t, 1
        else:
            hi = min(n + 1, m + L + 1)
            c[m:hi] ^= b[:hi - m]
            m += 1
    return BmResult(L, tuple(int(v) for v in c[:L + 1]))


def l_error_lc(bits: Sequence[int], ell: int) -> int:
    """Minimum linear complexity over all periodic error patterns of
    weight at most ell (exhaustive; the period is doubled before the
    complexity measurement so the result is exact for the periodic
    sequence)."""
    n = len(bits)
    if n > 64:
        raise AnalysisError("period over the exhaustive budget of 64")
    if ell > 3:
        raise AnalysisError("error weight over the exhaustive budget of 3")
    best = berlekamp_massey(list(bits) * 2).complexity
    base = list(bits)
    for w in range(1, ell + 1):
        for pos in itertools.combinations(range(n), w):
            mod = base[:]
            for p in pos:
                mod[p] ^= 1
            best = min(best, berlekamp_massey(mod * 2).complexity)
            if best == 0:
                return 0
    return best


# ---------------------------------------------------------------------------
# coordinate sequences

@dataclass(frozen=True)
class CoordinateReport:
    j: int
    period: int
    negation: bool   # second half of the shortest period complements the first
    complexity: int
    gamma: int


def coordinate_bits(states: Sequence[int], j: int) -> list[int]:
    return [(x >> j) & 1 for x in states]


def gamma_of(states: Sequence[int], j: int, m: int) -> int:
    """Integer whose base-2 digits are the first 2**j * m coordinate-j bits."""
    acc = 0
    for i in range((1 << j) * m):
        acc |= ((states[i] >> j) & 1) << i
    return acc


def coordinate_analysis(states: Sequence[int], j: int, m: int) -> CoordinateReport:
    """Structure of the bit-j stream of one full state period."""
    bits = coordinate_bits(states, j)
    t = shortest_period(bits)
    half = t // 2
    neg = t % 2 == 0 and all(bits[i + half] == bits[i] ^ 1 for i in range(half))
    lc = berlekamp_massey(bits[:t] * 2).complexity
    return CoordinateReport(j, t, neg, lc, gamma_of(states, j, m))


# ---------------------------------------------------------------------------
# realising prescribed coordinate half-periods

@dataclass(frozen=True)
class RealizedFamily:
    width: int
    members: tuple[MeasureShapeMap, ...]
    seed: int


def realize_gamma(gammas: Sequence[int], m: int,
                  level0: Sequence[int] | None = None) -> RealizedFamily:
    """Build m clock maps and a seed whose state sequence realises the
    given coordinate half-periods.

    gammas[j-1] prescribes the first 2**j * m bits of the coordinate-j
    stream, for j = 1..J.  level0 optionally fixes the first m bits of
    the coordinate-0 stream (default all zeros).  The family satisfies
    the period and uniformity conditions up to depth J+1.

    Works level by level: the pairs (step index mod m, state mod 2**j)
    visited over the first 2**j * m steps are pairwise distinct and
    exhaust the table of the level-j adjustments, so the required bit
    differences pin all entries but one, and the last entry is spent on
    the level parity condition.
    """
    J = len(gammas)
    if m < 1:
        raise AnalysisError("m must be at least 1")
    if J > 4 or m > 4:
        raise AnalysisError("table budget: at most 4 levels and m <= 4")
    for j, g in enumerate(gammas, start=1):
        if not 0 <= g < 1 << ((1 << j) * m):
            raise AnalysisError(f"target {j} out of range")
    width = J + 2
    if level0 is None:
        level0 = [0] * m
    if len(level0) != m:
        raise AnalysisError("level-0 bits must have length m")

    # level 0: constants; difference-pinned, last entry fixes the parity
    phi0 = [0] * m
    for i in range(m - 1):
        phi0[i] = level0[i] ^ level0[i + 1]
    phi0[m - 1] = 1 ^ (sum(phi0[:m - 1]) & 1)
    word = [phi0[i % m] for i in range(m)]
    if shortest_period(word) != m:
        raise AnalysisError("level-0 bits force a short control period")

    # per-member tables, filled level by level
    tables: list[list[int]] = [[phi0[c]] for c in range(m)]
    for j in range(1, J + 1):
        size = 1 << j
        target = gammas[j - 1]
        bits = [(target >> i) & 1 for i in range(size * m)]
        # simulate the low j bits with the levels already fixed
        level_tables = [[tables[c][k] for k in range(j)] for c in range(m)]
        assign: dict[tuple[int, int], int] = {}
        x = 0
        for jj in range(1, j):
            x |= ((gammas[jj - 1]) & 1) << jj
        x |= level0[0]
        x &= size - 1
        seen = set()
        for i in range(size * m - 1):
            c = i % m
            z = x & (size - 1)
            key = (c, z)
            if key in seen:
                raise AnalysisError("internal: revisited pair before filling")
            seen.add(key)
            assign[key] = bits[i] ^ bits[i + 1]
            # advance the low j bits
            nxt = 0
            for k in range(j):
                pk = level_tables[c][k]
                bk = ((x >> k) ^ (pk >> (x & ((1 << k) - 1)))) & 1
                nxt |= bk << k
            x = nxt
        last_key = (size * m - 1) % m, x & (size - 1)
        parity = 0
        for v in assign.values():
            parity ^= v
        assign[last_key] = 1 ^ parity
        for c in range(m):
            table = 0
            for z in range(size):
                table |= assign[(c, z)] << z
            tables[c].append(table)

    # one extra level keeps the validator happy at depth J+1: member 0
    # carries the odd-weight adjustment, the others none
    top = 1 << J + 1
    for c in range(m):
        tables[c].append((1 << (top - 1)) if c == 0 else 0)

    seed = level0[0]
    for j in range(1, J + 1):
        seed |= (gammas[j - 1] & 1) << j
    members = tuple(MeasureShapeMap(width, tuple(tabs)) for tabs in tables)
    return RealizedFamily(width, members, seed)


def run_family(fam: RealizedFamily, steps: int) -> list[int]:
    """State sequence of the realised family from its seed."""
    out = []
    x = fam.seed
    m = len(fam.members)
    msk = (1 << fam.width) - 1
    for i in range(steps):
        out.append(x)
        x = fam.members[i % m](x) & msk
    return out


# ---------------------------------------------------------------------------
# aggregate report

@dataclass
class AnalysisReport:
    """Bundle of analysis results with JSON and flat-CSV serialisation."""

    word_bits: int
    count: int
    seed_note: str | None = None
    period: int | None = None
    uniformity: dict = field(default_factory=dict)
    kdist: dict = field(default_factory=dict)
    q1: Q1Report | None = None
    lc: BmResult | None = None
    coordinates: dict = field(default_factory=dict)

    def verdicts(self) -> dict[str, bool]:
        out = {}
        for k, rep in self.uniformity.items():
            out[f"uniform_mod_2^{k}"] = rep.uniform
        for k, (counts, full) in self.kdist.items():
            out[f"kdist_{k}"] = full
        if self.q1 is not None:
            out["q1"] = self.q1.passed
        return out

    def to_json(self) -> str:
        doc: dict = {"word_bits": self.word_bits, "count": self.count}
        if self.seed_note:
            doc["seed"] = self.seed_note
        if self.period is not None:
            doc["period"] = self.period
        if self.uniformity:
            doc["uniformity"] = {
                str(k): {"period": r.period, "counts": list(r.counts),
                         "uniform": r.uniform}
                for k, r in self.uniformity.items()}
        if self.kdist:
            doc["kdist"] = {
                str(k): {"counts": list(counts), "full": full}
                for k, (counts, full) in self.kdist.items()}
        if self.q1 is not None:
            doc["q1"] = {
                "length": self.q1.length,
                "passed": self.q1.passed,
                "rows": [{"k": r.k, "margin": r.worst_margin,
                          "margin_cyclic": r.worst_margin_cyclic,
                          "threshold": r.threshold, "passed": r.passed}
                         for r in self.q1.rows]}
        if self.lc is not None:
            doc["linear_complexity"] = {
                "L": self.lc.complexity,
                "poly": "".join(str(b) for b in self.lc.poly)}
        if self.coordinates:
            doc["coordinates"] = {
                str(j): {"period": r.period, "negation": r.negation,
                         "complexity": r.complexity, "gamma": r.gamma}
                for j, r in self.coordinates.items()}
        doc["verdicts"] = self.verdicts()
        return json.dumps(doc, indent=2)

    def to_csv_rows(self) -> list[tuple[str, str, str]]:
        rows: list[tuple[str, str, str]] = []
        if self.period is not None:
            rows.append(("period", "", str(self.period)))
        for k, r in self.uniformity.items():
            rows.append(("uniform", str(k), str(int(r.uniform))))
            for v, c in enumerate(r.counts):
                rows.append(("residue_count", f"{k}:{v}", str(c)))
        for k, (counts, full) in self.kdist.items():
            rows.append(("kdist_full", str(k), str(int(full))))
            for v, c in enumerate(counts):
                rows.append(("chain_count", f"{k}:{v}", str(c)))
        if self.q1 is not None:
            for r in self.q1.rows:
                rows.append(("q1_margin", str(r.k), repr(r.worst_margin)))
                rows.append(("q1_pass", str(r.k), str(int(r.passed))))
        if self.lc is not None:
            rows.append(("linear_complexity", "", str(self.lc.complexity)))
        for j, r in self.coordinates.items():
            rows.append(("coord_period", str(j), str(r.period)))
            rows.append(("coord_negation", str(j), str(int(r.negation))))
            rows.append(("coord_lc", str(j), str(r.complexity)))
        return rows

    def to_csv(self) -> str:
        lines = ["metric,parameter,value"]
        lines += [",".join(row) for row in self.to_csv_rows()]
        return "\n".join(lines) + "\n"
