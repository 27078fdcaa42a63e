import csv
import io

import pytest

from cgmysim import cli, validation


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_price_one_row_per_strike(capsys):
    code, out, _ = run(["price", "--strikes", "80,90,100,110,120", "--trials", "500"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "strike,method,estimate,stderr,elapsed_sec,n_trials,seed"
    got = rows(out)
    assert [float(r["strike"]) for r in got] == [80, 90, 100, 110, 120]
    assert all(r["method"] == "exact" and r["n_trials"] == "500" and r["seed"] == "1" for r in got)
    assert float(got[0]["estimate"]) > float(got[-1]["estimate"])


def test_shortest_roundtrip_numbers(capsys):
    _, out, _ = run(["price", "--trials", "300", "--no-timing"], capsys)
    r = rows(out)[0]
    assert repr(float(r["estimate"])) == r["estimate"]
    assert r["elapsed_sec"] == ""


def test_repeat_runs_are_byte_identical(tmp_path, capsys):
    argv = ["price", "--option", "asian", "--method", "tcd-app", "--trials", "400", "--seed", "9", "--no-timing"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(argv + ["--out", str(a), "--threads", "1"]) == 0
    assert cli.main(argv + ["--out", str(b), "--threads", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_equivalent_to_flags(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# weekly Asian put\n"
        "design = II\noption = asian-put\nweekly = 5\nmethod = tcd-app\neps = 1e-3\n"
        "eps-tilde = 1e-5\nstrikes = 95,105\ntrials = 300\nseed = 4\nno-timing = true\n"
    )
    flags = ["price", "--design", "II", "--option", "asian-put", "--weekly", "5", "--method", "tcd-app",
             "--eps", "1e-3", "--eps-tilde", "1e-5", "--strikes", "95,105", "--trials", "300", "--seed", "4",
             "--no-timing"]
    _, via_flags, _ = run(flags, capsys)
    _, via_file, _ = run(["price", "--config", str(cfg)], capsys)
    assert via_file == via_flags and len(rows(via_file)) == 2
    _, override, _ = run(["price", "--config", str(cfg), "--seed", "5"], capsys)
    assert rows(override)[0]["seed"] == "5"


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(["price", "--config", str(bad)], capsys)[0] == 2
    bad.write_text("trials\n")
    assert run(["price", "--config", str(bad)], capsys)[0] == 2
    assert run(["price", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == 2


@pytest.mark.parametrize(
    "argv,code",
    [
        (["validate", "--eps-tilde", "-1"], 2),
        (["price", "--eps", "0"], 2),
        (["price", "--trials", "0"], 2),
        (["price", "--Y", "2.5"], 2),
        (["price", "--option", "barrier"], 2),
        (["price", "--strikes", "abc"], 2),
        (["price", "--bogus"], 2),
        (["sample-paths", "--weekly", "0"], 2),
        (["sample-paths", "--trials", "10001"], 2),
        (["price", "--design", "II", "--method", "exact", "--trials", "10"], 3),
        (["price", "--G", "0", "--method", "tcd-app", "--trials", "10"], 3),
    ],
)
def test_exit_codes(argv, code, capsys):
    got, _, err = run(argv, capsys)
    assert got == code
    assert err.strip()


def test_validation_message_is_one_line(capsys):
    _, _, err = run(["validate", "--eps-tilde", "-1"], capsys)
    assert len(err.strip().splitlines()) == 1 and "eps_tilde" in err


def test_sample_paths_shape(capsys):
    code, out, _ = run(["sample-paths", "--trials", "3", "--weekly", "13", "--method", "tcd-app"], capsys)
    assert code == 0
    got = rows(out)
    assert len(got) == 3 * 14
    start = [r for r in got if float(r["t"]) == 0.0]
    assert len(start) == 3
    assert all(float(r["S"]) == 100.0 and float(r["X"]) == 0.0 for r in start)
    assert float(got[-1]["t"]) == 0.25


def test_validate_only_filter(capsys):
    code, out, _ = run(["validate", "--only", "series-tail"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 1 and lines[0].startswith("PASS series-tail")
    assert run(["validate", "--only", "nope"], capsys)[0] == 2


def test_validate_reports_failure(monkeypatch, capsys):
    def broken(p, T, cfg, seed):
        return validation.CheckResult("broken", False, "forced")

    monkeypatch.setitem(validation.CHECKS, "broken", broken)
    code, out, _ = run(["validate", "--only", "broken,lmin-boundary"], capsys)
    assert code == 1
    assert out.splitlines()[0] == "FAIL broken: forced"


def test_design_ii_skips_cross_method(capsys):
    code, out, _ = run(["validate", "--design", "II", "--only", "ks-cross-method"], capsys)
    assert code == 0 and out.startswith("SKIP")


def test_env_threads(monkeypatch, capsys):
    monkeypatch.setenv("CGMY_SIM_THREADS", "2")
    code, out, _ = run(["price", "--trials", "200", "--no-timing"], capsys)
    monkeypatch.delenv("CGMY_SIM_THREADS")
    assert code == 0 and out == run(["price", "--trials", "200", "--no-timing"], capsys)[1]


def test_lookback_has_no_strike(capsys):
    code, out, _ = run(["price", "--option", "lookback", "--lookback-min", "--trials", "200"], capsys)
    r = rows(out)
    assert code == 0 and len(r) == 1 and r[0]["strike"] == "" and float(r[0]["estimate"]) > 0
