import json
import math

import numpy as np
import pytest

from circumnav import load_config, run
from circumnav.config import load_dict
from circumnav.errors import OutputError
from circumnav.metrics import summarize
from circumnav.output import header, read_trajectory, trajectory_csv, write_outputs
from circumnav.sim import pe_report

HEADER_2 = ("t,c_x,c_y,r,c_hat_x,c_hat_y,r_hat,c_hat_dot_x,c_hat_dot_y,r_hat_dot,"
            "p1_x,p1_y,beta_1,Dc_1,Db_1,u1_x,u1_y,U1_x,U1_y,"
            "p2_x,p2_y,beta_2,Dc_2,Db_2,u2_x,u2_y,U2_x,U2_y")


def test_header_is_stable():
    assert ",".join(header(2)) == HEADER_2
    assert len(header(4)) == 10 + 4 * 9


def test_equilibrium_csv(runs, tmp_path):
    rec = runs("equilibrium")
    b = write_outputs(rec, summarize(rec), tmp_path)
    cols = read_trajectory(b.trajectory)
    assert cols["t"].size == 2001
    for i in range(1, 5):
        assert np.abs(cols[f"Db_{i}"]).max() < 1e-6
        assert np.allclose(cols[f"beta_{i}"], math.pi / 2, atol=1e-8)
    assert b.plots == []


def test_csv_nine_significant_digits(runs):
    text = trajectory_csv(runs("equilibrium"))
    first = text.splitlines()[1].split(",")
    assert first[0] == "0"
    assert first[12] == "1.57079633"
    assert "-0," not in text


def test_same_seed_byte_identical(tmp_path):
    cfg = load_config("paper-fig3")
    from dataclasses import replace

    cfg = replace(cfg, horizon=15.0, transient_cutoff=1.0)
    out = []
    for k in range(2):
        rec = run(cfg)
        b = write_outputs(rec, summarize(rec), tmp_path / str(k), pe=pe_report(rec))
        out.append((b.trajectory.read_bytes(), b.summary.read_bytes()))
    assert out[0] == out[1]


def test_summary_round_trips_and_echoes_config(runs, tmp_path):
    rec = runs("stationary")
    s = summarize(rec)
    b = write_outputs(rec, s, tmp_path, pe=pe_report(rec))
    doc = json.loads(b.summary.read_text())
    assert load_dict(doc["config"]) == rec.config
    assert doc["summary"] == json.loads(json.dumps(s.to_dict()))
    assert doc["ring_order"] == [0, 1, 2, 3]
    assert doc["invariants"]["count"] == 0
    assert doc["pe"]["p1_dot"]["verdict"] is True


def test_plots_written(runs, tmp_path):
    rec = runs("paper-fig3")
    b = write_outputs(rec, summarize(rec), tmp_path, plot=True)
    names = sorted(p.name for p in b.plots)
    assert names == ["control.svg", "estimates.svg", "tracking.svg", "trajectory.svg"]
    for p in b.plots:
        text = p.read_text()
        assert text.lstrip().startswith("<?xml") and "<svg" in text


def test_plots_deterministic(runs, tmp_path):
    rec = runs("equilibrium")
    a = write_outputs(rec, summarize(rec), tmp_path / "a", plot=True)
    b = write_outputs(rec, summarize(rec), tmp_path / "b", plot=True)
    for pa, pb in zip(a.plots, b.plots):
        assert pa.read_bytes() == pb.read_bytes()


def test_unwritable_directory(runs, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    rec = runs("equilibrium")
    with pytest.raises(OutputError):
        write_outputs(rec, summarize(rec), blocker / "sub")


def test_read_missing_trajectory(tmp_path):
    with pytest.raises(OutputError):
        read_trajectory(tmp_path / "none.csv")
