import json
import time

import numpy as np
import pytest

from heisenberg_hodge import cli
from heisenberg_hodge.config import RunConfig, config_load, parse_config
from heisenberg_hodge.oscillator import ConfigError, DEFAULT_LAMBDAS
from heisenberg_hodge.suites import SuiteReport, check_rng, run_suite


def test_empty_config_gives_defaults(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("")
    cfg = config_load(p)
    assert cfg.model.n == 1 and cfg.model.M == 8 and cfg.model.tol == 1e-10
    assert cfg.model.lambdas == DEFAULT_LAMBDAS
    assert sorted(abs(x) for x in DEFAULT_LAMBDAS)[::2] == [2.0 ** e for e in range(-2, 4)]
    assert cfg.norms["J"] == 8
    assert cfg.seed == 0 and cfg.format == "json"


def test_override_n_and_M():
    cfg = parse_config("[model]\nn = 2\nM = 6\n")
    assert (cfg.model.n, cfg.model.M) == (2, 6)
    flat = parse_config("n = 2\nM = 6\nseed = 7\n")
    assert (flat.model.n, flat.model.M, flat.seed) == (2, 6, 7)


def test_small_M_rejected():
    with pytest.raises(ConfigError, match="M"):
        parse_config("[model]\nM = 2\n")


def test_errors_are_aggregated():
    with pytest.raises(ConfigError) as exc:
        parse_config("[model]\nM = 2\nn = 0\n[run]\nsuites = nope\nbogus = 1\n")
    msg = str(exc.value)
    for part in ("M", "n", "nope", "bogus"):
        assert part in msg


def test_parse_error_mentions_source():
    with pytest.raises(ConfigError, match="cfg.ini"):
        parse_config("[model\nn = 1", source="cfg.ini")


def test_report_emit_empty(tmp_path, capsys):
    cli.report_emit([], "json")
    assert capsys.readouterr().out == "[]\n"
    p = tmp_path / "r.csv"
    cli.report_emit([], "csv", p)
    assert p.read_text() == "suite,check,anchor,max_error,tolerance,pass,runtime_ms\n"


def test_report_emit_unwritable_path(tmp_path):
    with pytest.raises(cli.ReportError, match="missing"):
        cli.report_emit([], "json", tmp_path / "missing" / "r.json")


def test_suite_report_pass_rule():
    assert SuiteReport("s", "c", "a", 0.5, 1.0, 0).passed
    assert not SuiteReport("s", "c", "a", 1.0, 1.0, 0).passed
    assert SuiteReport("s", "c", "a", 0.5, 1.0, 0).to_json()["pass"] is True


def test_mixed_results_exit_one_and_write_file(tmp_path, monkeypatch):
    reports = [SuiteReport("x", "good", "a", 0.0, 1.0, 0.0), SuiteReport("x", "bad", "b", 2.0, 1.0, 0.0)]
    monkeypatch.setattr(cli, "run_suite", lambda name, cfg, timing=False: list(reports))
    out = tmp_path / "r.json"
    assert cli.main(["verify", "exterior", "--out", str(out)]) == 1
    rows = json.loads(out.read_text())
    assert [r["check"] for r in rows] == ["bad", "good"]
    assert [r["pass"] for r in rows] == [False, True]


def test_same_seed_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert cli.main(["verify", "exterior", "--seed", "5", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_check_rng_is_named_pcg64():
    g = check_rng(3, "operators", "ccr")
    assert isinstance(g.bit_generator, np.random.PCG64)
    assert g.integers(0, 2 ** 62) == check_rng(3, "operators", "ccr").integers(0, 2 ** 62)


def test_fan_eigen_suite_fast_and_green(tmp_path):
    t0 = time.perf_counter()
    code = cli.main(["verify", "fan-eigen", "--format", "csv", "--out", str(tmp_path / "f.csv")])
    assert code == 0 and time.perf_counter() - t0 < 5
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == ",".join(cli.REPORT_FIELDS)
    assert all(line.split(",")[-2] == "true" for line in lines[1:])


def test_multiplier_heat_agreement():
    reps = {r.check: r for r in run_suite("multiplier", RunConfig())}
    assert reps["agreement_heat_1"].max_error < 1e-8


def test_unknown_suite_rejected():
    with pytest.raises(ValueError):
        run_suite("nope")


def test_random_form_decompose_and_multiplier(tmp_path):
    form = tmp_path / "form.json"
    assert cli.main(["random-form", "--seed", "4", "--out", str(form)]) == 0
    out = tmp_path / "dec.json"
    assert cli.main(["decompose", str(form), "--out", str(out)]) == 0
    dec = json.loads(out.read_text())
    assert max(dec["symbol_errors"].values()) < 1e-10
    assert set(dec["parts"]) == {"exact", "coclosed10", "coclosed01", "v3plus", "v3minus"}
    out = tmp_path / "mult.json"
    assert cli.main(["multiplier", "heat", "--t", "1", str(form), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["oracle_error"] < 1e-8


def test_mh_norm_report_fields(tmp_path):
    out = tmp_path / "mh.json"
    assert cli.main(["mh-norm", "heat", "--t", "1", "--tau", "1", "-J", "4", "--resolution", "256",
                     "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert {"per_r_norms", "sup", "stability_ratio"} <= set(rep)
    assert len(rep["per_r_norms"]) == 9
    assert abs(rep["stability_ratio"] - 1) < 0.02


def test_bad_config_exits_two(tmp_path, capsys):
    p = tmp_path / "bad.ini"
    p.write_text("M = 2\n")
    assert cli.main(["verify", "exterior", "--config", str(p)]) == 2
    assert "M" in capsys.readouterr().err


def test_fan_command_csv(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[fan]\nlambda_count = 4\nm_max = 2\n")
    out = tmp_path / "fan.csv"
    assert cli.main(["fan", "--config", str(p), "--format", "csv", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 1 + 4 * 3
