"""Command-line surface.

Subcommands: check, gen, analyze, enumerate, sweep, bench.
Exit codes: 0 all verdicts pass, 2 a verdict failed, 1 usage or runtime
error.  All randomness flows from --seed through one named generator and
is recorded in reports.  TFGEN_BUDGET caps period-measurement steps.
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
import sys
import time

from . import analysis, anf, dsl, wreath

PASS, FAIL, ERROR = 0, 2, 1


def _cmd_check(args) -> int:
    try:
        expr = dsl.parse(args.expr)
    except dsl.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return ERROR
    depth = args.depth
    cls = dsl.classify(expr)
    if cls.compatible is True:
        print("compatible: yes (all operators compatible)")
    elif cls.compatible is False:
        u, v, r = cls.witness
        print(f"compatible: no (witness x={u}, x'={v} differ mod 2^{r} "
              f"at width {cls.checked_width})")
    else:
        print(f"compatible: unknown (suspect operators, no witness up to "
              f"width {cls.checked_width})")
    fn = dsl.BoundExpr(expr, max(depth, 3))
    try:
        mp = anf.is_mp_to_depth(fn, depth)
        erg = anf.is_ergodic_to_depth(fn, depth)
    except dsl.EvalError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return ERROR
    print(f"measure-preserving to depth {depth}: {'yes' if mp else 'no'}")
    if erg:
        print(f"ergodic to depth {depth}: yes")
    else:
        first = next((k for k in range(1, depth + 1)
                      if not anf.is_transitive_mod(fn, k)), None)
        suffix = f" (first failure mod 2^{first})" if first else ""
        print(f"ergodic to depth {depth}: no{suffix}")
    return PASS if (cls.compatible is not False and mp and erg) else FAIL


def _cmd_gen(args) -> int:
    try:
        spec = wreath.load_spec(args.spec)
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot load spec: {exc}", file=sys.stderr)
        return ERROR
    report = wreath.validate_spec(spec)
    if not report.valid and not args.force:
        print("spec fails validation (use --force to generate anyway):",
              file=sys.stderr)
        print(json.dumps(report.to_json(), indent=2), file=sys.stderr)
        return FAIL
    words = wreath.generate(spec, args.count, force=True)
    k = getattr(spec.output, "k", spec.n)
    with open(args.out, "wb") as fh:
        fh.write(wreath.pack_words(words, k))
    print(f"wrote {args.count} words of {k} bits to {args.out}"
          f" (valid={report.valid})")
    return PASS if report.valid else FAIL


def _cmd_analyze(args) -> int:
    try:
        with open(args.infile, "rb") as fh:
            data = fh.read()
        words = wreath.unpack_words(data, args.word_bits, args.count)
    except (OSError, ValueError) as exc:
        print(f"cannot read keystream: {exc}", file=sys.stderr)
        return ERROR
    if not words:
        print("empty keystream", file=sys.stderr)
        return ERROR
    rep = analysis.AnalysisReport(args.word_bits, len(words),
                                  seed_note=str(args.seed))
    bits = analysis.words_to_bits(words, args.word_bits)
    if args.full_period:
        rep.period = analysis.shortest_period(words)
        for k in range(1, args.word_bits + 1):
            rep.uniformity[k] = analysis.strict_uniformity(words, k)
    if args.kdist:
        for k in range(1, args.kdist + 1):
            rep.kdist[k] = analysis.k_chain_census(bits, k)
    if args.q1:
        rep.q1 = analysis.q1_check(bits)
    if args.lc:
        rep.lc = analysis.berlekamp_massey(bits)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(rep.to_json() + "\n")
    if args.csv_out:
        with open(args.csv_out, "w", encoding="utf-8") as fh:
            fh.write(rep.to_csv())
    print(rep.to_json())
    return PASS if all(rep.verdicts().values()) else FAIL


def _cmd_enumerate(args) -> int:
    n = args.n
    if args.transitive:
        try:
            got = anf.count_transitive(n)
        except anf.BudgetError as exc:
            print(str(exc), file=sys.stderr)
            return ERROR
        want = 1 << ((1 << n) - n - 1)
        print(f"transitive compatible maps at width {n}: "
              f"enumerated {got}, formula {want}")
        return PASS if got == want else FAIL
    if n > 3:
        print("full compatible enumeration capped at width 3", file=sys.stderr)
        return ERROR
    got = sum(1 for _ in anf.iter_compatible_tables(n))
    want = 1 << ((1 << (n + 1)) - 2)
    print(f"compatible maps at width {n}: enumerated {got}, formula {want}")
    return PASS if got == want else FAIL


def _cmd_sweep(args) -> int:
    try:
        with open(args.template, "r", encoding="utf-8") as fh:
            template = fh.read()
    except OSError as exc:
        print(f"cannot read template: {exc}", file=sys.stderr)
        return ERROR
    axes = []
    for spec in args.param or []:
        name, _, values = spec.partition("=")
        if not values:
            print(f"bad --param {spec!r}, want name=v1,v2,...", file=sys.stderr)
            return ERROR
        axes.append((name, values.split(",")))
    rng = random.Random(args.seed)
    rows = []
    all_ok = True
    for combo in itertools.product(*(vals for _, vals in axes)) or [()]:
        subs = dict(zip((name for name, _ in axes), combo))
        text = template
        for name, val in subs.items():
            text = text.replace("{" + name + "}", val)
        try:
            spec = wreath.spec_from_dict(json.loads(text))
            report = wreath.validate_spec(spec)
            info = wreath.measure_period(spec)
        except (ValueError, KeyError, wreath.SpecError) as exc:
            rows.append({**subs, "error": str(exc)})
            all_ok = False
            continue
        expected = (1 << spec.n) * spec.m
        ok = report.valid and info.state_period == expected
        all_ok = all_ok and ok
        rows.append({**subs, "n": spec.n, "m": spec.m,
                     "valid": int(report.valid),
                     "period": info.state_period,
                     "expected_period": expected, "ok": int(ok)})
    cols: list[str] = []
    for row in rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    lines = [",".join(cols)]
    lines += [",".join(str(row.get(c, "")) for c in cols) for row in rows]
    lines.append(f"# seed={args.seed} rng=python-random")
    out = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    print(out, end="")
    _ = rng
    return PASS if all_ok else FAIL


def _cmd_bench(args) -> int:
    try:
        spec = wreath.load_spec(args.spec)
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot load spec: {exc}", file=sys.stderr)
        return ERROR
    if args.seconds <= 0:
        print("0 words in 0.0 s")
        return PASS
    gen = wreath.Generator(spec, force=True)
    total = 0
    chunk = 4096
    t0 = time.perf_counter()
    while True:
        gen.emit(chunk)
        total += chunk
        dt = time.perf_counter() - t0
        if dt >= args.seconds:
            break
    print(f"{total} words in {dt:.3f} s: {total / dt:,.0f} words/s")
    return PASS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tfgen",
                                description="counter-dependent generator lab")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="classify an update expression")
    c.add_argument("expr")
    c.add_argument("--depth", type=int, default=10)
    c.set_defaults(fn=_cmd_check)

    g = sub.add_parser("gen", help="generate a keystream file")
    g.add_argument("--spec", required=True)
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--force", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(fn=_cmd_gen)

    a = sub.add_parser("analyze", help="analyze a keystream file")
    a.add_argument("--in", dest="infile", required=True)
    a.add_argument("--word-bits", type=int, required=True)
    a.add_argument("--count", type=int, default=None,
                   help="exact word count (padding can hide it)")
    a.add_argument("--full-period", action="store_true")
    a.add_argument("--lc", action="store_true")
    a.add_argument("--kdist", type=int, default=0)
    a.add_argument("--q1", action="store_true")
    a.add_argument("--json", dest="json_out")
    a.add_argument("--csv", dest="csv_out")
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(fn=_cmd_analyze)

    e = sub.add_parser("enumerate", help="count small compatible maps")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--transitive", action="store_true")
    e.set_defaults(fn=_cmd_enumerate)

    s = sub.add_parser("sweep", help="run a spec template over parameters")
    s.add_argument("--template", required=True)
    s.add_argument("--param", action="append",
                   help="name=v1,v2,... substituted for {name}")
    s.add_argument("--out")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(fn=_cmd_sweep)

    b = sub.add_parser("bench", help="measure generator throughput")
    b.add_argument("--spec", required=True)
    b.add_argument("--seconds", type=float, default=1.0)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(fn=_cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (wreath.SpecError, anf.BudgetError, analysis.AnalysisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
