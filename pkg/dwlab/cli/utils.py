import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml
from hydra.errors import InstantiationException
from hydra.utils import instantiate
from omegaconf import DictConfig, ListConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from dwlab import __version__
from dwlab.angular.spectrum import AngularSpectrum
from dwlab.angular.synthesis import synthesize
from dwlab.common.log import get_logger
from dwlab.common.utils import (
    MANIFEST_NAME,
    REPORTS_DIR_NAME,
    SOLVES_DIR_NAME,
    SUMMARY_NAME,
    ConfigError,
    atomic_write_text,
    dump_json,
    format_float,
    package_version,
    resolve_threads,
    stable_seed,
    text_digest,
)
from dwlab.grid.fields import ScalarField, SpinorField
from dwlab.grid.spec import GridSpec
from dwlab.normbench.report import ProbeReport, Verdict
from dwlab.normbench.runners import RUNNERS, ProbeRunner
from dwlab.propagator.evolution import WaveDataPair
from dwlab.solver.config import PicardConfig, SolveReport
from dwlab.solver.picard import picard_solve

logger = get_logger(__name__)

PROBE_CONF_DIR = Path(__file__).parent.parent / "conf" / "probes"

SUMMARY_COLUMNS = ("probe", "estimate", "statistic", "fitted", "target", "slack", "status", "note")

# radial gaussian of unit width in the l = 0 channel
DEFAULT_DATA_TERMS = [
    {"l": 0, "n": 0, "coeff_re": 1.0, "coeff_im": 0.0, "radial_profile_id": "gaussian", "params": {"width": 1.0}}
]


@dataclass
class GridConfig:
    points_per_axis: int = 32
    half_period: float = 16.0


@dataclass
class RunConfig:
    """
    Schema of a run configuration.

    Args:
        grid (:obj:`GridConfig`): the run grid; probes may override it.
        seed (:obj:`int`): run seed; each probe derives its own from it and its name.
        output_dir (:obj:`str`): where reports, solves, summary and manifest go.
        threads (:obj:`int`, `optional`): worker pool size, ``DWL_THREADS`` wins.
        probes (:obj:`Dict`): selected probes mapped to parameter overrides.
        solvers (:obj:`List`): Picard solve entries.
        slack (:obj:`Dict`): per-probe slack overriding the target defaults.
    """

    grid: GridConfig = field(default_factory=GridConfig)
    seed: int = 0
    output_dir: str = "outputs"
    threads: Optional[int] = None
    probes: Dict[str, Any] = field(default_factory=dict)
    solvers: List[Any] = field(default_factory=list)
    slack: Dict[str, float] = field(default_factory=dict)


@dataclass
class SolverTask:
    config: PicardConfig
    grid: GridSpec
    data: Dict[str, Any]


@dataclass
class RunOutcome:
    output_dir: Path
    reports: Dict[str, ProbeReport] = field(default_factory=dict)
    verdicts: List[Verdict] = field(default_factory=list)
    solves: List[SolveReport] = field(default_factory=list)
    manifest: Dict[str, Any] = field(default_factory=dict)

    @property
    def failures(self) -> List[Verdict]:
        return [v for v in self.verdicts if not v.passed]

    @property
    def exit_code(self) -> int:
        return 2 if self.failures else 0


def _yaml_diagnostic(path: Path, error: yaml.YAMLError) -> str:
    mark = getattr(error, "problem_mark", None)
    problem = getattr(error, "problem", None) or str(error)
    if mark is None:
        return f"{path}: {problem}"
    return f"{path}:{mark.line + 1}:{mark.column + 1}: {problem}"


def _field_diagnostic(path: Path, error: OmegaConfBaseException) -> str:
    key = getattr(error, "full_key", None)
    message = getattr(error, "msg", None) or str(error)
    return f"{path}: field {key!r}: {message}" if key else f"{path}: {message}"


def load_run_config(path: Union[str, Path]) -> DictConfig:
    """
    Load a YAML run configuration and validate it against :class:`RunConfig`.

    Raises:
        :obj:`ConfigError`: with the ``line:column`` of a YAML error or the
            path of the offending field.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file {path} does not exist")
    try:
        loaded = OmegaConf.load(path)
    except yaml.YAMLError as e:
        raise ConfigError(_yaml_diagnostic(path, e)) from e
    if not isinstance(loaded, DictConfig):
        raise ConfigError(f"{path}: the top level must be a mapping")
    try:
        cfg = OmegaConf.merge(OmegaConf.structured(RunConfig), loaded)
    except OmegaConfBaseException as e:
        raise ConfigError(_field_diagnostic(path, e)) from e
    validate_run_config(cfg)
    logger.debug(f"Loaded run config from {path}")
    return cfg


def validate_run_config(cfg: DictConfig):
    """Referenced probes exist and sweeps are nonempty."""
    for name, overrides in cfg.probes.items():
        if name not in RUNNERS:
            raise ConfigError(f"probes.{name}: unknown probe; available: {', '.join(sorted(RUNNERS))}")
        if overrides is None:
            continue
        if not isinstance(overrides, DictConfig):
            raise ConfigError(f"probes.{name}: overrides must be a mapping, got {type(overrides).__name__}")
        for key, value in overrides.items():
            if isinstance(value, ListConfig) and len(value) == 0:
                raise ConfigError(f"probes.{name}.{key}: sweep must be nonempty")
    for name in cfg.slack:
        if name not in RUNNERS:
            raise ConfigError(f"slack.{name}: unknown probe")
    names = set()
    for i, entry in enumerate(cfg.solvers):
        if not isinstance(entry, DictConfig):
            raise ConfigError(f"solvers[{i}]: a solver entry must be a mapping")
        name = entry.get("name", f"solve_{i}")
        if name in names:
            raise ConfigError(f"solvers[{i}].name: duplicate solve name {name!r}")
        names.add(name)


def grid_from_config(grid_cfg: Any, where: str = "grid") -> GridSpec:
    try:
        return GridSpec.from_dict(OmegaConf.to_container(grid_cfg) if isinstance(grid_cfg, DictConfig) else grid_cfg)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from e


def probe_defaults(name: str) -> DictConfig:
    path = PROBE_CONF_DIR / f"{name}.yaml"
    if not path.is_file():
        raise ConfigError(f"probes.{name}: no packaged defaults at {path}")
    return OmegaConf.load(path)


def build_runner(name: str, overrides: Optional[Any] = None) -> ProbeRunner:
    """Merge ``overrides`` over the packaged defaults of ``name`` and instantiate the runner."""
    merged = OmegaConf.merge(probe_defaults(name), overrides or {})
    try:
        runner = instantiate(merged, _convert_="all")
    except InstantiationException as e:
        raise ConfigError(f"probes.{name}: {e}") from e
    if not isinstance(runner, ProbeRunner):
        raise ConfigError(f"probes.{name}: _target_ must be a probe runner, got {type(runner).__name__}")
    return runner


def build_solver_task(entry: Any, index: int, run_grid: GridSpec) -> SolverTask:
    entry = OmegaConf.to_container(entry) if isinstance(entry, DictConfig) else dict(entry)
    data = entry.pop("data", None) or {}
    grid_cfg = entry.pop("grid", None)
    entry.setdefault("name", f"solve_{index}")
    grid = grid_from_config(grid_cfg, f"solvers[{index}].grid") if grid_cfg else run_grid
    try:
        config = PicardConfig.from_dict(entry)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"solvers[{index}]: {e}") from e
    return SolverTask(config=config, grid=grid, data=data)


def _synthesize_terms(terms: Optional[List[Dict[str, Any]]], grid: GridSpec, max_degree: int) -> ScalarField:
    if not terms:
        return ScalarField.zeros(grid)
    return synthesize(AngularSpectrum.from_list(terms, max_degree), grid)


def solver_data(task: SolverTask) -> Union[WaveDataPair, SpinorField]:
    """
    Initial data of a solve from its ``data`` entry: ``position`` and
    ``velocity`` spectra for the wave system, four ``spinor`` component
    spectra for the Dirac system. Missing data is a unit-width gaussian.
    """
    data = task.data
    max_degree = int(data.get("max_degree", 16))
    try:
        if task.config.system == "wave_null":
            position = _synthesize_terms(data.get("position", DEFAULT_DATA_TERMS), task.grid, max_degree)
            velocity = _synthesize_terms(data.get("velocity"), task.grid, max_degree)
            return WaveDataPair(position, velocity)
        spinor = data.get("spinor", [DEFAULT_DATA_TERMS, [], [], []])
        if len(spinor) != 4:
            raise ValueError(f"a spinor needs 4 component spectra, got {len(spinor)}")
        return SpinorField.from_components([_synthesize_terms(t, task.grid, max_degree) for t in spinor])
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"solvers.{task.config.name}.data: {e}") from e


def build_manifest(cfg: DictConfig, probes: List[str], solves: List[str], threads: int) -> Dict[str, Any]:
    resolved = OmegaConf.to_yaml(cfg, resolve=True)
    return {
        "config_sha256": text_digest(resolved),
        "config": OmegaConf.to_container(cfg, resolve=True),
        "seed": cfg.seed,
        "probes": probes,
        "solves": solves,
        "threads": threads,
        "versions": {
            "dwlab": __version__,
            "numpy": package_version("numpy"),
            "scipy": package_version("scipy"),
            "sklearn": package_version("scikit-learn"),
        },
        "created_at": datetime.now(timezone.utc).isoformat(),
    }


def summary_csv(verdicts: List[Verdict]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for v in verdicts:
        writer.writerow(
            [v.probe, v.estimate, v.statistic, format_float(v.fitted), format_float(v.target),
             format_float(v.slack), v.status, v.note]
        )
    return buffer.getvalue()


def _run_probe(
    name: str, runner: ProbeRunner, grid: GridSpec, seed: int, slack: Optional[float], directory: Path
) -> Tuple[ProbeReport, List[Verdict]]:
    try:
        report, verdicts = runner.run(grid, seed, slack)
    except ValueError as e:
        raise ConfigError(f"probes.{name}: {e}") from e
    report.save(directory)
    return report, verdicts


def _run_solve(task: SolverTask, directory: Path) -> SolveReport:
    config = task.config
    if config.snapshot_stride > 0 and config.snapshot_dir is None:
        config.snapshot_dir = str(directory / f"{config.name}_snapshots")
    try:
        _, report = picard_solve(solver_data(task), config)
    except ValueError as e:
        raise ConfigError(f"solvers.{config.name}: {e}") from e
    report.save(directory / f"{config.name}.json")
    return report


def execute_run(cfg: DictConfig, output_dir: Optional[Union[str, Path]] = None) -> RunOutcome:
    """
    Run every selected probe and solve in a worker pool and write the run artifacts.

    The manifest is written before any work starts; an empty selection leaves
    the manifest as the only output.
    """
    output_dir = Path(output_dir or cfg.output_dir)
    grid = grid_from_config(cfg.grid)
    runners = {name: build_runner(name, cfg.probes[name]) for name in sorted(cfg.probes)}
    tasks = [build_solver_task(entry, i, grid) for i, entry in enumerate(cfg.solvers)]
    threads = resolve_threads(cfg.threads)

    outcome = RunOutcome(output_dir=output_dir)
    outcome.manifest = build_manifest(cfg, list(runners), [t.config.name for t in tasks], threads)
    dump_json(outcome.manifest, output_dir / MANIFEST_NAME)
    if not runners and not tasks:
        logger.info("Nothing selected; manifest written")
        return outcome

    reports_dir = output_dir / REPORTS_DIR_NAME
    solves_dir = output_dir / SOLVES_DIR_NAME
    logger.info(f"Running {len(runners)} probes and {len(tasks)} solves on {threads} workers")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        probe_futures = {
            name: pool.submit(
                _run_probe, name, runner, grid, stable_seed(cfg.seed, name), cfg.slack.get(name), reports_dir
            )
            for name, runner in runners.items()
        }
        solve_futures = [pool.submit(_run_solve, task, solves_dir) for task in tasks]
        # collected in a fixed order so that the summary does not depend on scheduling
        for name, future in probe_futures.items():
            report, verdicts = future.result()
            outcome.reports[name] = report
            outcome.verdicts.extend(verdicts)
        outcome.solves = [future.result() for future in solve_futures]

    for verdict in outcome.failures:
        logger.warning(
            f"FAIL {verdict.probe} ({verdict.estimate}) {verdict.statistic}: fitted {verdict.fitted}, "
            f"target {verdict.target} with slack {verdict.slack}"
        )
    atomic_write_text(summary_csv(outcome.verdicts), output_dir / f"{SUMMARY_NAME}.csv")
    dump_json(
        {
            "seed": cfg.seed,
            "verdicts": [v.to_dict() for v in outcome.verdicts],
            "solves": [
                {
                    "name": s.name,
                    "system": s.system,
                    "iterations": s.iterations,
                    "converged": s.converged,
                    "non_contraction": s.non_contraction,
                    "residual": s.residual,
                }
                for s in outcome.solves
            ],
        },
        output_dir / f"{SUMMARY_NAME}.json",
    )
    return outcome
