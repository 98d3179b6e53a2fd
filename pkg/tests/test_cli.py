import json

from tfgen import wreath
from tfgen.cli import main

from conftest import make_spec

INTRO_SPEC = {
    "n": 4, "m": 3, "seed": "0x0",
    "control": {"type": "explicit", "data": [0, 1, 2]},
    "update": ["0 + x + 4*(0)", "1 + x + 4*(0)", "2 + x + 4*(0)"],
    "output": {"type": "truncate", "k": 4},
}


def _write_spec(tmp_path, doc, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_check_ergodic(capsys):
    assert main(["check", "x+(x*x|5)"]) == 0
    out = capsys.readouterr().out
    assert "ergodic to depth 10: yes" in out


def test_check_not_ergodic(capsys):
    assert main(["check", "x"]) == 2
    assert "ergodic to depth 10: no" in capsys.readouterr().out


def test_check_wrong_constant(capsys):
    assert main(["check", "x+(x*x|1)"]) == 2


def test_check_parse_error():
    assert main(["check", "x + * 2"]) == 1


def test_gen_full_period(tmp_path):
    spec = _write_spec(tmp_path, INTRO_SPEC)
    out = tmp_path / "ks.bin"
    assert main(["gen", "--spec", spec, "--count", "48",
                 "--out", str(out)]) == 0
    data = out.read_bytes()
    assert len(data) == 48 * 4 // 8
    words = wreath.unpack_words(data, 4, 48)
    assert words == wreath.generate(wreath.spec_from_dict(INTRO_SPEC), 48)


def test_gen_doubled_count_repeats_period(tmp_path):
    spec = _write_spec(tmp_path, INTRO_SPEC)
    out = tmp_path / "ks.bin"
    main(["gen", "--spec", spec, "--count", "96", "--out", str(out)])
    words = wreath.unpack_words(out.read_bytes(), 4, 96)
    assert words[:48] == words[48:]


def test_gen_invalid_spec_refused(tmp_path):
    bad = dict(INTRO_SPEC)
    bad["update"] = ["0 + x + 4*(0)", "2 + x + 4*(0)", "2 + x + 4*(0)"]
    bad["m"] = 3
    spec = _write_spec(tmp_path, bad)
    out = tmp_path / "ks.bin"
    assert main(["gen", "--spec", spec, "--count", "8",
                 "--out", str(out)]) == 2
    assert not out.exists()
    assert main(["gen", "--spec", spec, "--count", "8", "--out", str(out),
                 "--force"]) == 2
    assert out.exists()


def test_gen_determinism(tmp_path):
    spec = _write_spec(tmp_path, INTRO_SPEC)
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    main(["gen", "--spec", spec, "--count", "64", "--out", str(a)])
    main(["gen", "--spec", spec, "--count", "64", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_analyze_round_trip(tmp_path, capsys):
    spec = _write_spec(tmp_path, INTRO_SPEC)
    ks = tmp_path / "ks.bin"
    main(["gen", "--spec", spec, "--count", "48", "--out", str(ks)])
    code = main(["analyze", "--in", str(ks), "--word-bits", "4",
                 "--count", "48", "--full-period", "--kdist", "4", "--q1",
                 "--json", str(tmp_path / "rep.json"),
                 "--csv", str(tmp_path / "rep.csv")])
    assert code == 0
    doc = json.loads((tmp_path / "rep.json").read_text())
    assert doc["period"] == 48
    assert all(doc["verdicts"].values())
    assert (tmp_path / "rep.csv").read_text().startswith("metric,")


def test_analyze_q1_counterexample(tmp_path):
    bits = [int(c) for c in "1111111100000111"]
    ks = tmp_path / "bits.bin"
    ks.write_bytes(wreath.pack_words(bits, 1))
    code = main(["analyze", "--in", str(ks), "--word-bits", "1",
                 "--count", "16", "--q1",
                 "--json", str(tmp_path / "rep.json")])
    assert code == 2
    doc = json.loads((tmp_path / "rep.json").read_text())
    rows = {r["k"]: r["passed"] for r in doc["q1"]["rows"]}
    assert rows[4] and not rows[3]


def test_analyze_all_zero_uniformity_fails(tmp_path):
    ks = tmp_path / "zeros.bin"
    ks.write_bytes(wreath.pack_words([0] * 32, 4))
    assert main(["analyze", "--in", str(ks), "--word-bits", "4",
                 "--count", "32", "--full-period"]) == 2


def test_enumerate_counts():
    for n in (1, 2, 3):
        assert main(["enumerate", "--n", str(n), "--transitive"]) == 0


def test_enumerate_budget():
    assert main(["enumerate", "--n", "9", "--transitive"]) == 1


def test_sweep(tmp_path):
    template = {
        "n": "{n}", "seed": "0x0",
        "control": {"type": "explicit", "data": [0, 1, 2]},
        "update": ["0 + (x+1)", "1 + (x + ((x*x)|5))", "1 + (x+3)"],
        "output": {"type": "truncate", "k": "{n}"},
    }
    text = json.dumps(template).replace('"{n}"', "{n}")
    tpl = tmp_path / "tpl.json"
    tpl.write_text(text)
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--template", str(tpl), "--param", "n=4,5,6",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("n,")
    assert len([l for l in lines if not l.startswith("#")]) == 4


def test_bench_zero_seconds(tmp_path, capsys):
    spec = _write_spec(tmp_path, INTRO_SPEC)
    assert main(["bench", "--spec", spec, "--seconds", "0"]) == 0
    assert "0 words" in capsys.readouterr().out


def test_bench_reports_throughput(tmp_path, capsys):
    spec = _write_spec(tmp_path, INTRO_SPEC)
    assert main(["bench", "--spec", spec, "--seconds", "0.05"]) == 0
    assert "words/s" in capsys.readouterr().out
