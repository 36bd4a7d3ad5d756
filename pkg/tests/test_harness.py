# test_harness.py
# 配置 / CSV / SVG / 诊断 / 命令行 / 校验套件测试
#
# @date 26-10-18
#

import csv
import math

import numpy as np
import pytest

from src import config
from src.errors import ConfigError, ContractError
from src.harness import (
    CURVE_COLUMNS,
    CurveRow,
    RunConfig,
    SeedWorker,
    WorkerManager,
    aggregate_runs,
    parse_seeds,
    read_curve_csv,
    write_curve_csv,
)
from src.harness import verify
from src.harness.csvlog import tail_return_mean
from src.harness.diagnostics import asymmetry_grid, bound_vs_dimension, sigma_axis
from src.harness.svg import Curve, render_curves
from src.main import main


def curve_row(i: int, ret: float, nonfinite: int = 0) -> CurveRow:
    return CurveRow(
        iteration=i,
        env_steps=32 * (i + 1),
        return_mean=ret,
        return_std_over_seeds=0.0,
        penalty_value=0.1 + 0.2,
        beta=0.5,
        wall_time_s=0.0,
        nonfinite_grad_count=nonfinite,
    )


def read_table(path) -> list[list[str]]:
    with open(path, encoding="utf-8", newline="") as fp:
        return list(csv.reader(fp))


@pytest.fixture
def small_verify(monkeypatch):
    monkeypatch.setattr(config, "VERIFY_PAIRS", 9)
    monkeypatch.setattr(config, "VERIFY_CIM_TRIPLES", 20)
    monkeypatch.setattr(config, "VERIFY_PINSKER_PAIRS", 6)
    monkeypatch.setattr(config, "VERIFY_PINSKER_SAMPLES", 10_000)
    monkeypatch.setattr(config, "VERIFY_GRAD_DRAWS", 1)


# === 运行配置 ===

def test_config_round_trip(tmp_path):
    cfg = RunConfig(algo="cim", env="pointmass", seeds=[3, 1, 4], iterations=7, timing=True,
                    bandwidth=0.1 + 0.2, kernel="laplace", sigma_mode="silverman")
    path = tmp_path / "run.ini"
    cfg.save(path)
    loaded = RunConfig.load(path)
    assert loaded == cfg
    loaded.save(tmp_path / "again.ini")
    assert RunConfig.load(tmp_path / "again.ini") == cfg


def test_config_unknown_key(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[run]\nalgo = clip\nlearning_rate = 0.1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.load(path)


def test_config_bad_value(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[run]\nalgo = clip\niterations = many\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.load(path)


def test_config_missing_section(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[train]\nalgo = clip\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.load(path)


def test_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "nope.ini")


@pytest.mark.parametrize(
    "override",
    [dict(algo=""), dict(algo="trpo"), dict(env="cartpole"), dict(seeds=[1, 1]), dict(iterations=0),
     dict(alpha=-1.0)],
)
def test_config_validation(override):
    with pytest.raises(ConfigError):
        RunConfig(**{"algo": "clip", **override}).validate()


def test_overrides_skip_none():
    cfg = RunConfig(algo="kl", iterations=5).with_overrides(iterations=None, env="pointmass")
    assert cfg.iterations == 5
    assert cfg.env == "pointmass"


def test_parse_seeds():
    assert parse_seeds("0, 1,2") == [0, 1, 2]
    with pytest.raises(ConfigError):
        parse_seeds("0,x")


def test_output_dir_precedence(monkeypatch, tmp_path):
    cfg = RunConfig(algo="clip", out=str(tmp_path / "file"))
    monkeypatch.delenv(config.OUTPUT_DIR_ENV, raising=False)
    assert cfg.output_dir() == tmp_path / "file"
    monkeypatch.setenv(config.OUTPUT_DIR_ENV, str(tmp_path / "env"))
    assert cfg.output_dir() == tmp_path / "env"
    assert cfg.output_dir(str(tmp_path / "flag")) == tmp_path / "flag"


# === 学习曲线 CSV ===

def test_curve_csv_round_trip(tmp_path):
    rows = [curve_row(0, -1234.5678901234), curve_row(1, 1 / 3, nonfinite=2)]
    path = tmp_path / "curve.csv"
    write_curve_csv(path, rows)
    assert read_curve_csv(path) == rows
    raw = path.read_bytes()
    assert b"\r\n" not in raw
    assert raw.startswith(",".join(CURVE_COLUMNS).encode("utf-8") + b"\n")


def test_curve_csv_rejects_other_schema(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(ContractError):
        read_curve_csv(path)


def test_aggregate_runs():
    merged = aggregate_runs([[curve_row(0, 1.0, 1)], [curve_row(0, 3.0, 2)]])
    assert len(merged) == 1
    assert merged[0].return_mean == 2.0
    assert merged[0].return_std_over_seeds == 1.0
    assert merged[0].nonfinite_grad_count == 3


def test_aggregate_runs_rejects_ragged_input():
    with pytest.raises(ContractError):
        aggregate_runs([[curve_row(0, 1.0)], [curve_row(0, 1.0), curve_row(1, 1.0)]])



def test_tail_return_mean():
    rows = [curve_row(i, float(i)) for i in range(30)]
    assert tail_return_mean(rows, 20) == pytest.approx(19.5)
    assert tail_return_mean(rows[:4], 20) == pytest.approx(1.5)
    with pytest.raises(ContractError):
        tail_return_mean([], 20)
    with pytest.raises(ContractError):
        tail_return_mean(rows, 0)

# === SVG ===

def test_svg_has_one_polyline_per_curve():
    curves = [Curve(f"run{i}", [curve_row(j, float(i * j)) for j in range(5)]) for i in range(3)]
    svg = render_curves(curves, title="demo <3>")
    assert svg.count("<polyline") == 3
    assert svg.count("<polygon") == 3
    assert "demo &lt;3&gt;" in svg
    assert svg.rstrip().endswith("</svg>")


def test_svg_needs_data():
    with pytest.raises(ContractError):
        render_curves([Curve("empty", [])])


# === 诊断表 ===

def test_sigma_axis():
    axis = sigma_axis(0.01, 10.0, 4)
    assert axis[0] == pytest.approx(0.01)
    assert axis[-1] == pytest.approx(10.0)
    assert np.allclose(np.diff(np.log(axis)), math.log(10))
    with pytest.raises(ContractError):
        sigma_axis(1.0, 0.5, 4)


def test_asymmetry_grid_size():
    assert len(asymmetry_grid(1.0, 2.0, 0.1, 1.0, 5, "linear")) == 25


def test_bound_grows_with_dimension():
    rows = bound_vs_dimension(2.0, 1.0, 1.0, 4)
    assert [r[0] for r in rows] == [1, 2, 3, 4]
    assert rows[0][2] == pytest.approx(math.log(4) - 15 / 8)
    assert rows[3][2] == pytest.approx(4 * rows[0][2])
    for n, h, bound, kl_pq, kl_qp in rows:
        assert bound == pytest.approx(kl_pq - kl_qp, abs=1e-12)


# === worker ===

def test_worker_manager_reports_failures():
    def boom(worker):
        raise RuntimeError("seed failed")

    manager = WorkerManager(jobs=1)
    manager.add_worker(SeedWorker(0, lambda w: w.seed * 10))
    manager.add_worker(SeedWorker(1, boom))
    assert not manager.run_all()
    assert manager.workers[0].result == 0
    assert [w.seed for w in manager.failed] == [1]
    with pytest.raises(ValueError):
        manager.add_worker(SeedWorker(0, lambda w: None))


# === 命令行 ===

TRAIN_ARGS = ["--env", "pointmass", "--iterations", "2", "--batch-size", "8", "--actor-steps", "1",
              "--critic-steps", "1"]


def test_train_writes_seed_and_merged_csv(tmp_path, capsys):
    code = main(["train", "--algo", "clip", "--seeds", "0,1", "--out", str(tmp_path), *TRAIN_ARGS])
    assert code == 0

    for seed in (0, 1):
        rows = read_curve_csv(tmp_path / f"clip_pointmass_seed{seed}.csv")
        assert [r.iteration for r in rows] == [0, 1]
        assert all(r.wall_time_s == 0.0 for r in rows)

    merged = read_curve_csv(tmp_path / "clip_pointmass_merged.csv")
    seed_rows = [read_curve_csv(tmp_path / f"clip_pointmass_seed{s}.csv") for s in (0, 1)]
    assert merged[1].return_mean == pytest.approx((seed_rows[0][1].return_mean + seed_rows[1][1].return_mean) / 2)
    assert "clip_pointmass_merged.csv" in capsys.readouterr().out


def test_train_is_reproducible(tmp_path):
    for name in ("a", "b"):
        assert main(["train", "--algo", "cim", "--out", str(tmp_path / name), *TRAIN_ARGS]) == 0
    a = (tmp_path / "a" / "cim_pointmass_seed0.csv").read_bytes()
    b = (tmp_path / "b" / "cim_pointmass_seed0.csv").read_bytes()
    assert a == b


def test_train_output_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(config.OUTPUT_DIR_ENV, str(tmp_path))
    assert main(["train", "--algo", "kl", *TRAIN_ARGS]) == 0
    assert (tmp_path / "kl_pointmass_merged.csv").exists()


def test_train_reads_config_file(tmp_path, monkeypatch):
    monkeypatch.delenv(config.OUTPUT_DIR_ENV, raising=False)
    ini = tmp_path / "run.ini"
    RunConfig(algo="kl", env="pointmass", iterations=1, batch_size=8, actor_update_steps=1,
              critic_update_steps=1, out=str(tmp_path / "from_file")).save(ini)
    assert main(["train", "--config", str(ini), "--iterations", "2"]) == 0
    assert len(read_curve_csv(tmp_path / "from_file" / "kl_pointmass_seed0.csv")) == 2


def test_train_without_algo_is_usage_error(tmp_path):
    assert main(["train", "--out", str(tmp_path)]) == 2
    assert not list(tmp_path.iterdir())


def test_train_with_bad_config_is_usage_error(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[run]\nalgo = clip\nwhatever = 1\n", encoding="utf-8")
    assert main(["train", "--config", str(ini)]) == 2
    assert main(["train", "--config", str(tmp_path / "missing.ini"), "--algo", "clip"]) == 2


def test_train_with_invalid_value_is_usage_error(tmp_path):
    assert main(["train", "--algo", "clip", "--gamma", "2.0", "--out", str(tmp_path)]) == 2


def test_plot_command(tmp_path):
    paths = []
    for i in range(2):
        p = tmp_path / f"run{i}.csv"
        write_curve_csv(p, [curve_row(j, float(j + i)) for j in range(4)])
        paths.append(str(p))
    out = tmp_path / "curves.svg"
    assert main(["plot", *paths, "--out", str(out), "--title", "returns"]) == 0
    assert out.read_text(encoding="utf-8").count("<polyline") == 2


def test_plot_rejects_header_only_csv(tmp_path):
    empty = tmp_path / "empty.csv"
    write_curve_csv(empty, [])
    out = tmp_path / "curves.svg"
    assert main(["plot", str(empty), "--out", str(out)]) == 2
    assert not out.exists()


def test_diag_bound_command(tmp_path):
    out = tmp_path / "bound.csv"
    assert main(["diag-bound", "--ratio", "2", "--max-dim", "3", "--out", str(out)]) == 0
    table = read_table(out)
    assert table[0] == ["dimension", "h", "lower_bound", "kl_pq", "kl_qp"]
    assert len(table) == 4
    assert float(table[1][2]) == pytest.approx(-0.48871, abs=1e-5)


def test_diag_asymmetry_command(tmp_path):
    out = tmp_path / "asym.csv"
    assert main(["diag-asymmetry", "--grid", "4", "--out", str(out)]) == 0
    table = read_table(out)
    assert len(table) == 1 + 16
    assert main(["diag-asymmetry", "--sigma-min", "5", "--sigma-max", "1", "--out", str(out)]) == 2


def test_unknown_subcommand_is_usage_error():
    assert main(["fly"]) == 2


# === 校验套件 ===

@pytest.mark.parametrize("suite", ["kl", "asymmetry", "cim", "pinsker", "taylor", "controller"])
def test_verify_suites_pass(small_verify, suite):
    (result,) = verify.run_suites([suite])
    assert result.passed, result.failures
    assert result.checks > 0


def test_verify_pinsker_full_sweep():
    result = verify.pinsker_suite()
    assert result.checks == config.VERIFY_PINSKER_PAIRS
    assert result.passed, result.failures


def test_verify_grad_suite_passes(small_verify):
    result = verify.grad_suite(draws=1, op_instances=3)
    assert result.passed, result.failures


def test_verify_command_prints_table(small_verify, capsys):
    assert main(["verify", "--suite", "controller", "--suite", "taylor"]) == 0
    out = capsys.readouterr().out
    assert "controller" in out and "PASS" in out


def test_verify_detects_broken_kl(small_verify, monkeypatch, capsys):
    from src.policy import gaussian

    original = gaussian.kl_closed_form
    monkeypatch.setattr(gaussian, "kl_closed_form", lambda p, q: original(p, q) + 0.01)
    assert main(["verify", "--suite", "kl"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_records_suite_exceptions(monkeypatch):
    def explode():
        raise RuntimeError("broken suite")

    monkeypatch.setitem(verify.SUITES, "controller", explode)
    (result,) = verify.run_suites(["controller"])
    assert not result.passed
    assert "broken suite" in result.failures[0]
