import csv
import io
import json

import pytest

from ectwists import cli
from ectwists.curve import an_table, get_curve
from ectwists.dirichlet import CharacterSpec, enumerate_classes, enumerate_conductors
from ectwists.lvalue import AfeParams, TwistEvaluator, truncation_length
from ectwists.rmt import GROWTH_BOUNDED, GROWTH_POWER, GROWTH_SUBPOLYNOMIAL
from ectwists.survey import (
    CSV_COLUMNS,
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_PRECISION,
    ConfigError,
    SurveyConfig,
    dyadic_window,
    predict_report,
    read_survey_csv,
    run_survey,
    write_report_csv,
)


def _config(tmp_path, name="out.csv", ckpt=True, **kw):
    kw.setdefault("curve", "11a1")
    kw.setdefault("k", 3)
    kw.setdefault("X_max", 1500)
    return SurveyConfig(
        out=str(tmp_path / name),
        checkpoint=str(tmp_path / (name + ".ckpt")) if ckpt else None,
        **kw,
    )


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        _config(tmp_path, X_max=2)
    with pytest.raises(ConfigError):
        _config(tmp_path, eps=1e-3)
    with pytest.raises(ConfigError):
        _config(tmp_path, eps=0)
    with pytest.raises(ConfigError):
        _config(tmp_path, jobs=0)


def test_small_survey_conductors(tmp_path):
    result = run_survey(_config(tmp_path, X_max=30))
    rows = read_survey_csv(tmp_path / "out.csv")
    assert sorted({int(r["m"]) for r in rows}) == [7, 9, 13, 19]
    assert [r["t"] for r in rows] == ["1"] * 4
    s = result.summary
    assert (s.conductors, s.classes, s.characters) == (4, 4, 8)
    assert result.completed and result.exit_code == EXIT_OK


def test_summary_invariants(tmp_path):
    result = run_survey(_config(tmp_path, k=5, X_max=8000))
    s = result.summary
    rows = read_survey_csv(tmp_path / "out.csv")
    assert len(rows) == 2 * s.classes
    assert s.characters == 4 * s.classes
    assert s.vanishing_characters == 4 * s.vanishing_classes
    assert s.vanishing_classes > 0
    assert sum(s.window_classes.values()) == s.classes
    assert sum(s.window_vanishing.values()) == s.vanishing_classes
    assert s.vanishing_classes == sum(r["vanishing"] == "1" for r in rows) // 2
    assert s.max_residual < 1e-6 and s.max_imag < 1e-6
    assert s.split_checks > 0 and s.split_max_diff < 1e-9
    saved = json.loads((tmp_path / "out.csv.summary.json").read_text())
    assert saved["classes"] == s.classes and saved["characters"] == s.characters
    for r in rows:
        assert r["vanishing"] == ("1" if set(r["n_coords"].split(";")) == {"0"} else "0")


def test_resume_byte_identical(tmp_path):
    full = run_survey(_config(tmp_path, "full.csv", ckpt=False))
    reference = (tmp_path / "full.csv").read_bytes()
    cfg = _config(tmp_path, "part.csv")
    for chunk in (3, 17, 40):
        partial = run_survey(cfg, stop_after=chunk)
        assert not partial.completed
    done = run_survey(cfg)
    assert done.completed and done.resumed_from is not None
    assert (tmp_path / "part.csv").read_bytes() == reference
    assert done.summary.to_dict() == full.summary.to_dict()
    # a finished checkpoint short-circuits
    again = run_survey(cfg)
    assert again.summary.classes == full.summary.classes
    assert (tmp_path / "part.csv").read_bytes() == reference


def test_resume_discards_torn_write(tmp_path):
    reference_cfg = _config(tmp_path, "ref.csv", ckpt=False)
    run_survey(reference_cfg)
    cfg = _config(tmp_path)
    run_survey(cfg, stop_after=10)
    with open(cfg.out, "ab") as fh:
        fh.write(b"3,9999,0,garbage")
    run_survey(cfg)
    assert (tmp_path / "out.csv").read_bytes() == (tmp_path / "ref.csv").read_bytes()


def test_checkpoint_mismatch(tmp_path):
    run_survey(_config(tmp_path), stop_after=2)
    with pytest.raises(ConfigError, match="different survey configuration"):
        run_survey(_config(tmp_path, eps=1e-9))


def test_jobs_independent(tmp_path):
    run_survey(_config(tmp_path, "one.csv", ckpt=False, k=5, X_max=2500))
    run_survey(_config(tmp_path, "two.csv", ckpt=False, k=5, X_max=2500, jobs=2))
    assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()


def test_nested_monotone(tmp_path):
    small = run_survey(_config(tmp_path, "a.csv", ckpt=False, X_max=1000)).summary
    large = run_survey(_config(tmp_path, "b.csv", ckpt=False, X_max=2000)).summary
    assert large.vanishing_classes >= small.vanishing_classes
    a = (tmp_path / "a.csv").read_bytes()
    assert (tmp_path / "b.csv").read_bytes().startswith(a)


def test_other_representative_rule():
    """Choosing the last prime's exponent as 1 instead of the first changes no flag."""
    curve = get_curve("11a1")
    table = an_table(curve, truncation_length(3000, 11, 1e-12))
    ev = TwistEvaluator(curve, table, AfeParams())
    checked = 0
    for k in (3, 5):
        for fac in enumerate_conductors(k, 3000, 11):
            if fac.rank < 2:
                continue
            for cls in enumerate_classes(k, fac):
                ex = cls.representative.exponents
                inv = pow(ex[-1], -1, k)
                alt = CharacterSpec(k, fac, tuple(e * inv % k for e in ex))
                assert ev.record(alt).vanishing == ev.record(cls).vanishing
                checked += 1
                if checked == 100:
                    return
    assert checked == 100


def test_dyadic_window():
    assert [dyadic_window(m) for m in (1, 2, 3, 4, 7, 8, 1023, 1024)] == [0, 1, 1, 2, 2, 3, 9, 10]


def test_predict_examples():
    assert predict_report(7, 10**4)["summary"]["classification"] == GROWTH_BOUNDED
    assert predict_report(5, 10**4)["summary"]["classification"] == GROWTH_SUBPOLYNOMIAL
    assert predict_report(3, 10**4)["summary"]["classification"] == GROWTH_POWER


def test_predict_with_observed(tmp_path):
    run_survey(_config(tmp_path, X_max=4000, ckpt=False))
    rows = read_survey_csv(tmp_path / "out.csv")
    report = predict_report(3, 4000, observed=rows, coprime_to=11)
    windows = report["windows"]
    assert windows[0]["window_lo"] == 1 and windows[-1]["window_hi"] == 4000
    vanishing = sum(r["vanishing"] == "1" for r in rows if r["t"] == "1")
    assert sum(w["observed_vanishing_classes"] for w in windows) == vanishing
    assert sum(w["heuristic_characters"] for w in windows) == pytest.approx(report["summary"]["sum"])
    buf = io.StringIO()
    write_report_csv(report, buf)
    lines = list(csv.reader(io.StringIO(buf.getvalue())))
    assert tuple(lines[0]) == ("k", "X", "N", "sum", "classification", "C_E", "aE_half")
    assert lines[1][4] == GROWTH_POWER
    with pytest.raises(ConfigError):
        predict_report(5, 4000, observed=rows)


def test_read_rejects_foreign_csv(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        read_survey_csv(path)
    assert CSV_COLUMNS[0] == "k" and CSV_COLUMNS[-1] == "vanishing"


def test_cli_survey_and_predict(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code = cli.main(["survey", "--curve", "11a1", "--order", "5", "--max-cond", "500", "--out", str(out),
                     "--checkpoint", str(tmp_path / "s.ckpt")])
    assert code == EXIT_OK
    assert "vanishing_classes=" in capsys.readouterr().out
    pred = tmp_path / "p.csv"
    code = cli.main(["predict", "--order", "5", "--max-cond", "500", "--observed", str(out), "--out", str(pred)])
    assert code == EXIT_OK
    assert pred.read_text().startswith("k,X,N,sum,classification,C_E,aE_half\n5,500,")


def test_cli_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "o.csv")
    assert cli.main(["survey", "--curve", "11a1", "--order", "3", "--max-cond", "30", "--out", out, "--eps", "0.1"]) == EXIT_CONFIG
    assert cli.main(["survey", "--curve", "99z9", "--order", "3", "--max-cond", "30", "--out", out]) == EXIT_CONFIG
    assert cli.main(["survey", "--curve", "11a1", "--order", "4", "--max-cond", "30", "--out", out]) == EXIT_CONFIG
    # without the coprime filter the conductors 11 and 55 cannot be evaluated
    code = cli.main(["survey", "--curve", "11a1", "--order", "5", "--max-cond", "60", "--out", out, "--all-conductors"])
    assert code == EXIT_PRECISION
    assert "not coprime" in capsys.readouterr().err
    assert cli.main(["rmt-moment", "--size", "3", "--s", "-1"]) == EXIT_CONFIG
    assert cli.main(["lvalue", "--curve", "11a1", "--order", "3", "--cond", "10"]) == EXIT_CONFIG


def test_cli_small_commands(capsys):
    assert cli.main(["rmt-moment", "--size", "3", "--s", "2"]) == EXIT_OK
    assert float(capsys.readouterr().out) == pytest.approx(4.0)
    assert cli.main(["lvalue", "--curve", "11a1", "--order", "3", "--cond", "7"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "m=7;factors=7^1;t=1" in out and "vanishing=False" in out
    assert cli.main(["mc-haar", "--size", "2", "--s", "1", "--samples", "2000", "--seed", "1"]) == EXIT_OK
    assert "estimate=" in capsys.readouterr().out


def test_cli_check(capsys):
    assert cli.main(["check"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("PASS") == 6
