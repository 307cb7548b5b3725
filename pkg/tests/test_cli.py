import csv
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from tactile_her.cli import main
from tactile_her.curves import Z95, aggregate, band, render_svg
from tactile_her.trainer import MetricsRow, write_metrics

TINY = {"epochs": 1, "episodes_per_epoch": 2, "optimizer_steps_per_episode": 1, "eval_episodes": 2,
        "buffer_capacity": 10, "ddpg": {"hidden": [8, 8], "batch_size": 16}}


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(TINY))
    return p


def test_missing_config_exit_code(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["run", str(missing)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_invalid_config_reports_field(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"epochs": -3, "lam": 0}))
    assert main(["run", str(p)]) != 0
    err = capsys.readouterr().err
    assert "epochs" in err and "lam" in err


def test_run_overrides(tmp_path, cfg_path):
    out = tmp_path / "runs"
    assert main(["run", str(cfg_path), "--seed", "3", "--epochs", "1", "--arm", "CPER", "--out", str(out)]) == 0
    run = out / "Push-Simple-CPER-seed3"
    rows = list(csv.reader(open(run / "metrics.csv")))
    assert len(rows) == 2
    snap = json.loads((run / "config.json").read_text())
    assert snap["seed"] == 3 and snap["arm"] == "CPER" and len(snap["config_hash"]) == 12


def test_run_twice_identical(tmp_path, cfg_path):
    assert main(["run", str(cfg_path), "--out", str(tmp_path / "a")]) == 0
    assert main(["run", str(cfg_path), "--out", str(tmp_path / "b")]) == 0
    name = "Push-Simple-CPER+IR-seed1/metrics.csv"
    assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def grid_file(tmp_path, **kw):
    doc = {"base": TINY, "arms": ["UniformHER", "CPER+IR"], "difficulties": ["Simple"], "seeds": [1, 2]}
    doc.update(kw)
    p = tmp_path / "grid.json"
    p.write_text(json.dumps(doc))
    return p


def test_grid_runs_every_cell_and_skips_existing(tmp_path, capsys):
    out = tmp_path / "runs"
    g = grid_file(tmp_path)
    assert main(["grid", str(g), "--out", str(out)]) == 0
    assert len([d for d in out.iterdir() if d.is_dir()]) == 4
    capsys.readouterr()
    assert main(["grid", str(g), "--out", str(out), "--skip-existing"]) == 0
    assert "0 to run" in capsys.readouterr().out
    assert json.loads((out / "grid_summary.json").read_text())["ran"] == 0


def test_grid_records_failures_and_continues(tmp_path):
    out = tmp_path / "runs"
    g = grid_file(tmp_path, arms=["CPER+IR"], seeds=[1], tasks=["Push", "Juggle"])
    assert main(["grid", str(g), "--out", str(out)]) != 0
    # an absurd learning rate blows up training in every cell, yet the grid runs them all
    g = grid_file(tmp_path, arms=["CPER+IR"], seeds=[1, 2],
                  base={**TINY, "ddpg": {"hidden": [8, 8], "batch_size": 16, "lr_critic": 1e300}})
    code = main(["grid", str(g), "--out", str(out)])
    summary = json.loads((out / "grid_summary.json").read_text())
    assert code != 0 and summary["ran"] == 2 and len(summary["failures"]) == 2


def test_full_grid_has_75_cells(capsys):
    assert main(["grid", "--full", "--list"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1] == "75 cells" and len(set(lines[:-1])) == 75


def write_seed(root, arm, seed, values):
    d = root / f"Push-Simple-{arm}-seed{seed}"
    d.mkdir(parents=True)
    write_metrics(d / "metrics.csv", [MetricsRow(e + 1, 0.0, float(v), 0.0, 0.0, 0.0) for e, v in enumerate(values)])


def test_curves_single_seed_zero_band(tmp_path):
    write_seed(tmp_path, "CPER+IR", 1, [0.1, 0.5, 0.9])
    agg = aggregate(sorted(tmp_path.glob("*/metrics.csv")))
    assert [(m, h) for _, _, m, h in agg["CPER+IR"]] == [(0.1, 0.0), (0.5, 0.0), (0.9, 0.0)]


def test_curves_two_constant_seeds(tmp_path):
    write_seed(tmp_path, "UniformHER", 1, [0.4] * 4)
    write_seed(tmp_path, "UniformHER", 2, [0.6] * 4)
    agg = aggregate(sorted(tmp_path.glob("*/metrics.csv")))
    for _, n, m, _ in agg["UniformHER"]:
        assert n == 2 and m == pytest.approx(0.5)


def test_band_matches_closed_form(rng):
    for _ in range(20):
        v = rng.normal(0.5, 0.1, 5)
        mean, hw = band(v)
        assert mean == pytest.approx(v.mean(), abs=1e-12)
        assert hw == pytest.approx(1.96 * v.std(ddof=1) / np.sqrt(5), abs=1e-12)
    assert Z95 == 1.96


def test_curves_command_outputs(tmp_path, rng):
    for arm in ("CPER+IR", "UniformHER"):
        for s in range(1, 6):
            write_seed(tmp_path / "runs", arm, s, np.clip(rng.normal(0.5, 0.1, 6), 0, 1))
    out = tmp_path / "agg" / "curves.csv"
    pattern = str(tmp_path / "runs" / "*" / "metrics.csv")
    assert main(["curves", pattern, str(out)]) == 0
    first = out.read_bytes()
    assert main(["curves", pattern, str(out)]) == 0
    assert out.read_bytes() == first
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 12 and {r["arm"] for r in rows} == {"CPER+IR", "UniformHER"}
    root = ET.fromstring(out.with_suffix(".svg").read_text())
    groups = [g for g in root.iter() if g.get("data-arm")]
    assert {g.get("data-arm") for g in groups} == {"CPER+IR", "UniformHER"}
    series = dict(g.get("data-series").split(";")[0].split(":", 1) for g in groups[:1])
    cper = [r for r in rows if r["arm"] == groups[0].get("data-arm")][0]
    assert series["1"].split(":")[0] == cper["mean"]


def test_curves_no_match(tmp_path):
    assert main(["curves", str(tmp_path / "*.csv"), str(tmp_path / "o.csv")]) != 0


def test_svg_escapes_names():
    svg = render_svg({"A&B<x>": [(1, 1, 0.5, 0.1), (2, 1, 0.6, 0.0)]})
    ET.fromstring(svg)
