import numpy as np
import pytest

from tfgen import wreath

# validated family shapes, one per multiplier; width-generic expressions
FAMILY_EXPRS = {
    1: ["x + ((x*x) | 5)"],
    2: ["1 + (x + ((x*x)|5))", "0 + (x+1)"],
    3: ["0 + (x+1)", "1 + (x + ((x*x)|5))", "1 + (x+3)"],
    4: ["1 + (x+1)", "0 + (x+3)", "0 + (x + ((x*x)|5))", "0 + (x + ((x*x)|7))"],
    6: ["1 + (x+1)", "0 + (x+3)", "0 + (x + ((x*x)|5))",
        "0 + (x+1)", "0 + (x + ((x*x)|7))", "0 + (x+5)"],
}


def make_spec(n, exprs, output=None, seed=0):
    return wreath.GeneratorSpec(
        n, wreath.ExplicitControl(range(len(exprs))),
        wreath.family_from_exprs(exprs, n),
        output or wreath.TruncateOutput(n), seed)


@pytest.fixture(scope="session")
def battery():
    """Validated specs spanning n in 4..10 and m in {1,2,3,4,6}, with
    their validation reports and measured full periods."""
    out = []
    for n in (4, 6, 8, 10):
        for m, exprs in FAMILY_EXPRS.items():
            spec = make_spec(n, exprs)
            report = wreath.validate_spec(spec)
            info = wreath.measure_period(spec)
            out.append((f"m{m}_n{n}", spec, report, info))
    for n in (5, 7, 9):
        spec = make_spec(n, FAMILY_EXPRS[3])
        out.append((f"m3_n{n}", spec, wreath.validate_spec(spec),
                    wreath.measure_period(spec)))
    ispec, irep = wreath.build_example(
        "intro", n=8, m=3, v_exprs=["x", "x*x", "0"], w_exprs=["0", "x", "x*x"])
    out.append(("intro_n8_m3", ispec, irep, wreath.measure_period(ispec)))
    return out


def map_value_table(fn, width):
    """Full value table of a per-bit-table map, vectorised."""
    xs = np.arange(1 << width, dtype=np.int64)
    out = np.zeros(1 << width, dtype=np.int64)
    for i in range(width):
        tab = fn.bit_table(i)
        idx = xs & ((2 << i) - 1)
        bits = np.array([(tab >> int(u)) & 1 for u in range(2 << i)],
                        dtype=np.int64)
        out |= bits[idx] << i
    return [int(v) for v in out]
