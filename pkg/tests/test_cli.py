import json
import math

import pytest

from fdivkit import cli, props
from fdivkit.ratedist import RDPoint
from fdivkit.reporting import read_csv_table


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rd_csv_header_and_values(capsys):
    code, out, _ = run(capsys, "rd", "--source", "0.5,0.5", "--d-grid", "0.1,0.25", "--unit", "bits")
    assert code == 0
    t = read_csv_table(out)
    assert t.meta == {"generator": "shannon", "unit": "bits"}
    assert t.columns == ["D", "R_bits"]
    # 1 - H2(0.25) bits
    assert t.rows[1][1] == pytest.approx(1 - (0.25 * math.log2(4) + 0.75 * math.log2(4 / 3)), abs=1e-9)
    assert len(out.splitlines()[2].split(",")[1].replace(".", "").lstrip("0")) <= 12


def test_rd_rate_grid_and_flavor(capsys):
    code, out, _ = run(capsys, "rd", "--source", "0.5,0.5", "--r-grid", "0.04", "--flavor", "ckz",
                       "--generator", "sq")
    assert code == 0
    t = read_csv_table(out)
    assert t.columns == ["R_nats", "D"]
    # (2D - 1)^2 = R
    assert t.rows[0][1] == pytest.approx(0.4, abs=1e-6)


def test_output_is_byte_identical(tmp_path):
    paths = [tmp_path / f"a{i}.csv" for i in range(2)]
    for p in paths:
        assert cli.main(["rd", "--source", "0.3,0.7", "--d-grid", "0:0.3:4", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("source = 0.5,0.5\nd-grid = 0.1,0.2\nunit = bits\n")
    code, out, _ = run(capsys, "rd", "--config", str(cfg))
    assert code == 0 and len(read_csv_table(out).rows) == 2
    code, out, _ = run(capsys, "rd", "--config", str(cfg), "--d-grid", "0.3")
    t = read_csv_table(out)
    assert [r[0] for r in t.rows] == [0.3] and t.meta["unit"] == "bits"


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    code, _, err = run(capsys, "rd", "--config", str(cfg))
    assert code == 1 and "colour" in err


def test_missing_source(capsys):
    code, _, err = run(capsys, "rd")
    assert code == 1 and "--source" in err


def test_nonconvergence_exit(monkeypatch, capsys):
    def stuck(P, d, D):
        return RDPoint(0.1, D, 1.0, None, converged=False)
    monkeypatch.setattr(cli, "rd_classical_point", stuck)
    code, _, err = run(capsys, "rd", "--source", "0.5,0.5", "--d-grid", "0.1")
    assert code == cli.EXIT_NONCONVERGENCE and "non-convergence" in err


def test_invariant_exit_from_props(monkeypatch, capsys):
    def broken(seed=0, trials=1):
        rep = props.SuiteReport("broken", seed, trials, 1e-9)
        rep.record(-1.0, "planted")
        return rep
    monkeypatch.setitem(props.SUITES, "claim1", broken)
    code, out, _ = run(capsys, "props", "claim1")
    assert code == cli.EXIT_INVARIANT and out.startswith("FAIL broken")


def test_props_pass(capsys):
    code, out, _ = run(capsys, "props", "supermodularity", "--trials", "5", "--seed", "3")
    assert code == 0 and out.startswith("PASS supermodularity seed=3 trials=5")


def test_lb(capsys):
    code, out, _ = run(capsys, "lb", "--source", "0.5,0.01,0.49", "--r-grid", "0,0.3",
                       "--generator", "kl-norm")
    t = read_csv_table(out)
    assert code == 0 and t.columns == ["R_nats", "LB1", "LB2", "LB_f"]
    assert t.rows[1][3] == pytest.approx(t.rows[1][2], abs=1e-8)


def test_sanov_json(tmp_path, capsys):
    loss = tmp_path / "loss.csv"
    loss.write_text("0\n1\n")
    code, out, _ = run(capsys, "sanov", "--px", "0.7,0.3", "--pw", str(_one(tmp_path)),
                       "--loss", str(loss), "--n", "5", "--delta", "0.6")
    rec = json.loads(out)
    assert code == 0
    assert rec["chernoff_exponent"] == pytest.approx(rec["sanov_exponent"], abs=1e-6)
    assert rec["exact_tail"] <= rec["tail_bound"]


def _one(tmp_path):
    p = tmp_path / "pw.csv"
    p.write_text("1\n")
    return p


def test_sanov_requires_inputs(capsys):
    assert run(capsys, "sanov", "--px", "0.5,0.5")[0] == 1


def test_gen_reports(capsys):
    code, out, _ = run(capsys, "gen", "--bound", "u2,xr,psi", "--generator", "kl-norm",
                       "--budget", "0.1")
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and [r["bound_name"] for r in recs] == ["u2", "xr", "psi"]
    assert recs[0]["value"] <= recs[2]["value"] <= recs[1]["value"] + 1e-12
    assert recs[0]["unit"] == "nats"


def test_gen_explicit_bounds(capsys):
    code, out, _ = run(capsys, "gen", "--bound", "finite,gaussmean", "--card-w", "4",
                       "--alpha", "optimal", "--sigma2", "1", "--n", "100")
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0
    assert recs[0]["value"] == pytest.approx(0.157222, abs=1e-6)
    assert recs[1]["value"] == pytest.approx(0.04, abs=1e-12)


def test_gen_aux(capsys):
    code, out, _ = run(capsys, "gen", "--bound", "u2,aux,auxdual", "--aux", "mismatch",
                       "--n", "10", "--budget", "0.2")
    v = {r["bound_name"]: r["value"] for r in map(json.loads, out.splitlines())}
    assert code == 0 and v["aux"] <= v["u2"] and v["auxdual"] >= v["aux"] - 1e-6


@pytest.mark.parametrize("argv", [["gen", "--bound", "nope"], ["gen", "--bound", "psi"],
                                  ["gen", "--bound", "aux", "--aux", "no-such-file.csv"]])
def test_gen_bad_input(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_mi(tmp_path, capsys):
    J = tmp_path / "j.csv"
    J.write_text("0.4,0.1\n0.1,0.4\n")
    code, out, _ = run(capsys, "mi", "--joint", str(J), "--generator", "alpha:2")
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and [r["flavor"] for r in recs] == ["ckz", "pv", "mbgya"]
    assert all(set(r) == {"flavor", "generator", "value_nats", "residual"} for r in recs)
    assert recs[0]["value_nats"] >= recs[1]["value_nats"] - 1e-12
    assert recs[1]["value_nats"] >= recs[2]["value_nats"] - 1e-12
    assert run(capsys, "mi", "--joint", str(J), "--flavor", "xx")[0] == 1


def test_figure_lb_rf(tmp_path, capsys):
    code, _, _ = run(capsys, "figure", "lb-rf", "--out-dir", str(tmp_path), "--n-list", "1,8",
                     "--d-grid", "0.3:0.5:5")
    assert code == 0
    t = read_csv_table((tmp_path / "lb-rf.csv").read_text())
    assert t.columns == ["D", "R_bits", "LB_n1_bits", "claim1_n1", "LB_n8_bits", "claim1_n8"]
    assert (tmp_path / "lb-rf.svg").read_text().startswith("<svg")


def test_figure_lb_compare_reports_ordering_breaks(tmp_path, capsys):
    code, _, err = run(capsys, "figure", "lb-compare", "--out-dir", str(tmp_path), "--steps", "16")
    assert code == cli.EXIT_INVARIANT and "LB1" in err
    assert (tmp_path / "lb-compare.csv").exists()
