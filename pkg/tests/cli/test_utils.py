import pytest
from omegaconf import OmegaConf

from dwlab.cli.utils import (
    build_runner,
    build_solver_task,
    grid_from_config,
    load_run_config,
    solver_data,
    validate_run_config,
)
from dwlab.common.utils import ConfigError
from dwlab.grid.fields import SpinorField
from dwlab.grid.spec import GridSpec
from dwlab.normbench.runners import RUNNERS, DecayRunner
from dwlab.propagator.evolution import WaveDataPair


@pytest.mark.parametrize("name", sorted(RUNNERS))
def test_packaged_defaults_instantiate(name):
    assert isinstance(build_runner(name), RUNNERS[name])


def test_build_runner_overrides():
    runner = build_runner("decay", {"times": [1.0, 2.0, 4.0], "tolerance": 0.3})
    assert isinstance(runner, DecayRunner)
    assert runner.times == [1.0, 2.0, 4.0]
    assert runner.tolerance == 0.3
    with pytest.raises(ConfigError, match="probes.decay"):
        build_runner("decay", {"not_a_field": 1})
    with pytest.raises(ConfigError):
        build_runner("unknown")


def test_load_run_config_reports_yaml_position(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("seed: 0\ngrid: [1, 2\n")
    with pytest.raises(ConfigError, match=r"bad\.yaml:\d+:\d+"):
        load_run_config(path)
    with pytest.raises(ConfigError, match="does not exist"):
        load_run_config(tmp_path / "missing.yaml")


def test_load_run_config_fills_defaults(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("seed: 7\nprobes:\n  bernstein: {}\n")
    cfg = load_run_config(path)
    assert cfg.seed == 7
    assert cfg.grid.points_per_axis == 32
    assert list(cfg.probes) == ["bernstein"]
    assert cfg.solvers == []


@pytest.mark.parametrize(
    "document, message",
    [
        ({"probes": {"decay": {"times": []}}}, "sweep must be nonempty"),
        ({"probes": {"decay": 3}}, "must be a mapping"),
        ({"slack": {"nope": 0.1}}, "unknown probe"),
        ({"solvers": [{"name": "a"}, {"name": "a"}]}, "duplicate"),
        ({"solvers": [3]}, "must be a mapping"),
    ],
)
def test_validate_run_config(document, message):
    cfg = OmegaConf.merge({"probes": {}, "slack": {}, "solvers": []}, document)
    with pytest.raises(ConfigError, match=message):
        validate_run_config(cfg)


def test_grid_from_config():
    assert grid_from_config({"points_per_axis": 16, "half_period": 4.0}) == GridSpec(4.0, 16)
    with pytest.raises(ConfigError, match="grid"):
        grid_from_config({"points_per_axis": 15, "half_period": 4.0})


def test_solver_tasks(small_grid):
    task = build_solver_task({"eps": 0.1, "T": 1.0, "dt": 0.25}, 3, small_grid)
    assert task.config.name == "solve_3"
    assert task.grid == small_grid
    data = solver_data(task)
    assert isinstance(data, WaveDataPair)
    assert data.position.l2_norm() > 0 and data.velocity.l2_norm() == 0

    override = build_solver_task(
        {"name": "d", "system": "dirac_hartree", "grid": {"points_per_axis": 8, "half_period": 4.0}},
        0,
        small_grid,
    )
    assert override.grid == GridSpec(4.0, 8)
    assert isinstance(solver_data(override), SpinorField)

    with pytest.raises(ConfigError, match=r"solvers\[0\]"):
        build_solver_task({"steps": 4}, 0, small_grid)
    bad = build_solver_task({"system": "dirac_hartree", "data": {"spinor": [[], []]}}, 1, small_grid)
    with pytest.raises(ConfigError, match="data"):
        solver_data(bad)
