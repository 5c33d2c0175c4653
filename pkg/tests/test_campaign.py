import json
import math
from pathlib import Path

import numpy as np
import pytest

from shoalsbench.campaign import (
    CampaignConfig,
    ConfigError,
    SolverSpec,
    TRAJECTORY_COLUMNS,
    initial_point,
    parse_config,
    run_campaign,
    run_sweep,
    summarize,
    sweep_csv,
    trajectory_csv,
    write_campaign,
)
from shoalsbench.cli import main
from shoalsbench.costmodel import quantile
from shoalsbench.estimators import CostSnapshot, DeviceModel
from shoalsbench.optimizers import Budget, IterationRecord, Trajectory

FAST_CONFIG = """
problem = "toy-1q"
master_seed = 7
seeds = 3
accuracy = 0.0016

[budget]
max_seconds = 1.0e4
max_iterations = 5000

[device]
c1 = 1.0e-5
c2 = 0.1
c3 = 4.0

[[solvers]]
kind = "shoals"

[[solvers]]
kind = "adam"
batch = 100
"""


@pytest.fixture
def fast_config(tmp_path):
    path = tmp_path / "campaign.toml"
    path.write_text(FAST_CONFIG, encoding="utf-8")
    return parse_config(path)


def fabricate_trajectory(solver, crossings, fstar=-1.0):
    """Build a trajectory whose k-th record sits at the given cumulative
    shot count; the last record crosses the accuracy threshold."""
    device = DeviceModel(1.0, 0.0, 0.0)
    records = []
    for k, shots in enumerate(crossings, start=1):
        exact = fstar if k == len(crossings) else fstar + 1.0
        snap = CostSnapshot(shots, k, k)
        records.append(IterationRecord(
            iteration=k, exact_f=exact, f0_est=None, fs_est=None,
            grad_norm_est=0.1, alpha=1.0, accepted=True, n_f=None,
            n_g=(2,), costs=snap, wall_clock_s=device.seconds(snap),
        ))
    return Trajectory(problem="toy-1q", solver=solver, fstar=fstar,
                      initial_exact_f=fstar + 1.0, device=device,
                      records=records, status="converged",
                      final_theta=np.array([0.0]))


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def test_parse_config_roundtrip(fast_config):
    assert fast_config.problem_ref == "toy-1q"
    assert [s.label for s in fast_config.solvers] == ["shoals", "adam-100"]
    assert fast_config.seeds == (0, 1, 2)
    assert fast_config.budget.max_seconds == 1.0e4
    assert fast_config.device.c2 == 0.1


@pytest.mark.parametrize("mutation,match", [
    ("problem = \"toy-1q\"", "at least one"),                 # no solvers
    (FAST_CONFIG.replace('kind = "adam"', 'kind = "nope"'), "unknown solver"),
    (FAST_CONFIG.replace("seeds = 3", "seeds = 0"), "seed count"),
    (FAST_CONFIG.replace("seeds = 3", "seeds = [1, 1]"), "duplicate seeds"),
    (FAST_CONFIG.replace("accuracy = 0.0016", "accuracy = -1.0"), "accuracy"),
    (FAST_CONFIG + "\n[[solvers]]\nkind = \"sgd\"\n", "explicit alpha"),
    (FAST_CONFIG + "\n[[solvers]]\nkind = \"shoals\"\n", "duplicate solver label"),
    (FAST_CONFIG + "\n[[solvers]]\nkind = \"adam\"\nbogus = 1\n", "unknown options"),
    (FAST_CONFIG.replace('problem = "toy-1q"', 'problem = "missing"'), "neither"),
])
def test_parse_config_validation(tmp_path, mutation, match):
    path = tmp_path / "bad.toml"
    path.write_text(mutation, encoding="utf-8")
    with pytest.raises(ConfigError, match=match):
        parse_config(path)


def test_parse_config_missing_budget(tmp_path):
    text = FAST_CONFIG.replace("[budget]", "[ignored]").replace(
        "max_seconds = 1.0e4", "x = 1").replace("max_iterations = 5000", "y = 2")
    path = tmp_path / "nobudget.toml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError, match="budget"):
        parse_config(path)


# ---------------------------------------------------------------------------
# Campaign runs
# ---------------------------------------------------------------------------

def test_initial_points_shared_across_solvers(fast_config):
    grouped = run_campaign(fast_config)
    for runs in zip(*grouped.values()):
        assert len({t.initial_exact_f for t in runs}) == 1


def test_run_campaign_writes_files(fast_config, tmp_path):
    grouped = run_campaign(fast_config)
    summary = write_campaign(fast_config, grouped, tmp_path / "out")
    for label in ("shoals", "adam-100"):
        for seed in (0, 1, 2):
            assert (tmp_path / "out" / f"{label}__seed{seed}.csv").exists()
        assert summary["solvers"][label]["total"] == 3
    assert (tmp_path / "out" / "summary.json").exists()


def test_parallel_jobs_match_serial(fast_config, tmp_path):
    serial = write_campaign(fast_config, run_campaign(fast_config, jobs=1),
                            tmp_path / "serial")
    parallel = write_campaign(fast_config, run_campaign(fast_config, jobs=2),
                              tmp_path / "parallel")
    assert serial == parallel
    for path in sorted((tmp_path / "serial").iterdir()):
        assert path.read_bytes() == (tmp_path / "parallel" / path.name).read_bytes()


def test_rerun_is_byte_identical(fast_config, tmp_path):
    write_campaign(fast_config, run_campaign(fast_config), tmp_path / "a")
    write_campaign(fast_config, run_campaign(fast_config), tmp_path / "b")
    files_a = sorted((tmp_path / "a").iterdir())
    files_b = sorted((tmp_path / "b").iterdir())
    assert [p.name for p in files_a] == [p.name for p in files_b]
    for a, b in zip(files_a, files_b):
        assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# Trajectory CSV schema
# ---------------------------------------------------------------------------

def test_trajectory_csv_schema(fast_config):
    grouped = run_campaign(fast_config)
    trajectory = grouped["shoals"][0]
    lines = trajectory_csv(trajectory).splitlines()
    assert lines[0] == TRAJECTORY_COLUMNS
    assert len(lines) == len(trajectory.records) + 2
    first = lines[1].split(",")
    assert first[0] == "0"
    assert float(first[1]) == trajectory.initial_exact_f
    assert first[10:13] == ["0", "0", "0"]
    row = lines[2].split(",")
    assert row[0] == "1"
    assert row[7] in ("0", "1")
    # wall clock column equals the re-priced ledger under the campaign device
    rec = trajectory.records[0]
    assert float(row[13]) == fast_config.device.seconds(rec.costs)


def test_csv_empty_fields_for_sg_records(fast_config):
    grouped = run_campaign(fast_config)
    lines = trajectory_csv(grouped["adam-100"][0]).splitlines()
    row = lines[2].split(",")
    assert row[3] == "" and row[4] == "" and row[8] == ""   # f0, fs, n_f
    assert row[7] == "1"                                     # every step taken


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------

def make_summary_config():
    return CampaignConfig(
        problem_ref="toy-1q",
        solvers=(SolverSpec(kind="sgd", label="fab", options=(("alpha", 0.1),)),),
        seeds=(0, 1, 2),
        master_seed=0,
        budget=Budget(max_iterations=10),
        device=DeviceModel(1.0, 0.0, 0.0),
        accuracy=0.0016,
    )


def test_summary_quantile_arithmetic():
    config = make_summary_config()
    runs = [fabricate_trajectory("fab", [50, 100]),
            fabricate_trajectory("fab", [150, 200]),
            fabricate_trajectory("fab", [300, 400])]
    summary = summarize(config, {"fab": runs})
    stats = summary["solvers"]["fab"]
    assert stats["reached"] == 3
    assert stats["shots"]["q50"] == 200.0
    assert stats["shots"]["mean"] == pytest.approx(700.0 / 3.0)
    assert stats["wall_clock_s"]["q50"] == 200.0  # c1 = 1, others 0


def test_summary_infinity_marker():
    config = make_summary_config()
    never = fabricate_trajectory("fab", [100, 200])
    never.records = [r for r in never.records if abs(r.exact_f - never.fstar) > 0.0016]
    never.status = "incomplete"
    summary = summarize(config, {"fab": [never] * 3})
    stats = summary["solvers"]["fab"]
    assert stats["reached"] == 0
    for block in ("shots", "switches", "communications", "wall_clock_s"):
        assert stats[block]["q50"] == "inf"
        assert stats[block]["mean"] == "inf"


def test_summary_matches_recomputation_from_csv(fast_config, tmp_path):
    # every quantile block in the summary JSON must be recomputable exactly
    # from the trajectory files alone
    grouped = run_campaign(fast_config)
    summary = write_campaign(fast_config, grouped, tmp_path / "out")
    columns = {"shots": 10, "switches": 11, "communications": 12, "wall_clock_s": 13}
    for label in ("shoals", "adam-100"):
        crossings = {name: [] for name in columns}
        for seed in fast_config.seeds:
            lines = (tmp_path / "out" / f"{label}__seed{seed}.csv").read_text().splitlines()
            values = {name: math.inf for name in columns}
            for line in lines[1:]:
                fields = line.split(",")
                if float(fields[2]) <= fast_config.accuracy:
                    values = {name: float(fields[col]) for name, col in columns.items()}
                    break
            for name in columns:
                crossings[name].append(values[name])
        for name in columns:
            for q, key in ((0.25, "q25"), (0.5, "q50"), (0.75, "q75")):
                expected = quantile(crossings[name], q)
                got = summary["solvers"][label][name][key]
                assert got == ("inf" if math.isinf(expected) else expected)


# ---------------------------------------------------------------------------
# Sweep plumbing
# ---------------------------------------------------------------------------

def test_run_sweep_and_csv(fast_config):
    result = run_sweep(fast_config, [1e-6, 1e2])
    text = sweep_csv(result)
    lines = text.splitlines()
    assert lines[0] == "ratio,q25,q50,q75,crossing"
    assert len(lines) == 3
    first = lines[1].split(",")
    assert float(first[0]) == 1e-6


def test_run_sweep_needs_two_solvers(fast_config):
    solo = CampaignConfig(
        problem_ref=fast_config.problem_ref,
        solvers=fast_config.solvers[:1],
        seeds=fast_config.seeds,
        master_seed=fast_config.master_seed,
        budget=fast_config.budget,
        device=fast_config.device,
        accuracy=fast_config.accuracy,
    )
    with pytest.raises(ConfigError, match="exactly two"):
        run_sweep(solo, [1.0])
    with pytest.raises(ConfigError, match="empty"):
        run_sweep(fast_config, [])
    with pytest.raises(ConfigError, match="positive"):
        run_sweep(fast_config, [-1.0])


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_problems(capsys):
    assert main(["problems"]) == 0
    out = capsys.readouterr().out
    for name in ("toy-1q", "toy-2q", "h2"):
        assert name in out
    assert "-1.857275030202" in out


def test_cli_run(tmp_path, capsys):
    config = tmp_path / "c.toml"
    config.write_text(FAST_CONFIG, encoding="utf-8")
    out_dir = tmp_path / "results"
    assert main(["run", "--config", str(config), "--out", str(out_dir)]) == 0
    assert (out_dir / "summary.json").exists()
    summary = json.loads((out_dir / "summary.json").read_text())
    assert set(summary["solvers"]) == {"shoals", "adam-100"}


def test_cli_run_rejects_bad_config(tmp_path, capsys):
    config = tmp_path / "bad.toml"
    config.write_text("problem = \"toy-1q\"\n", encoding="utf-8")
    assert main(["run", "--config", str(config)]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_run_missing_file_is_runtime_failure(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.toml")]) == 2


def test_cli_sweep(tmp_path, capsys):
    config = tmp_path / "c.toml"
    config.write_text(FAST_CONFIG, encoding="utf-8")
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--config", str(config), "--ratios", "1e-6,1e2",
                 "--out", str(out)])
    assert code == 0
    assert out.read_text().splitlines()[0] == "ratio,q25,q50,q75,crossing"


def test_cli_sweep_rejects_bad_ratios(tmp_path, capsys):
    config = tmp_path / "c.toml"
    config.write_text(FAST_CONFIG, encoding="utf-8")
    assert main(["sweep", "--config", str(config), "--ratios", "abc"]) == 1
    assert main(["sweep", "--config", str(config), "--ratios", ""]) == 1


def test_demo_config_parses():
    demo = Path(__file__).resolve().parents[1] / "configs" / "toy2q-demo.toml"
    config = parse_config(demo)
    assert config.problem_ref == "toy-2q"
    assert len(config.solvers) == 3


def test_initial_point_reproducible(toy2q):
    a = initial_point(toy2q, 5, 3)
    b = initial_point(toy2q, 5, 3)
    assert np.array_equal(a, b)
    assert np.all(a >= -math.pi) and np.all(a < math.pi)
