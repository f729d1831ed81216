"""
Sweep runners: each wraps one probe, sweeps it over a parameter list, fits the
merged samples and judges the fits against its :class:`ExponentTarget` list.

Runners are plain dataclasses so that ``hydra.utils.instantiate`` can build
them from the ``_target_`` entries in ``dwlab/conf/probes``.
"""
import dataclasses
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, List, Optional, Sequence, Tuple, Type

from tqdm import tqdm

from dwlab.angular.concentration import CONCENTRATION_ESTIMATE, concentration_probe
from dwlab.common.log import get_logger
from dwlab.dirac.orthogonality import ORTHOGONALITY_ESTIMATE, dirac_orthogonality_check
from dwlab.grid.spec import GridSpec
from dwlab.multiplier.littlewood_paley import annulus_symbol
from dwlab.multiplier.probes import BERNSTEIN_ESTIMATE, bernstein_probe, point_mass
from dwlab.nonlinear.null_forms import NULL_SYMBOL_ESTIMATE, null_symbol_probe
from dwlab.normbench.probes import (
    BILINEAR_ESTIMATE,
    CHAINED_ESTIMATE,
    HIGH_MODULATION_ESTIMATE,
    TRILINEAR_ESTIMATE,
    bilinear_probe,
    chained_probe,
    high_modulation_probe,
    trilinear_probe,
)
from dwlab.normbench.report import Bound, ExponentTarget, ProbeReport, Verdict, merge_reports
from dwlab.propagator.dispersion import DispersionLaw
from dwlab.propagator.probes import DECAY_ESTIMATE, STRICHARTZ_ESTIMATE, decay_probe, strichartz_exponent, strichartz_probe

logger = get_logger(__name__)

# |I| of the u = v witness counts as zero below this
ANTISYMMETRY_TOLERANCE = 1e-12


def _law(name: str, mass: float) -> DispersionLaw:
    match name:
        case "wave":
            return DispersionLaw.wave()
        case "klein_gordon":
            return DispersionLaw.klein_gordon(mass)
        case _:
            raise ValueError(f"Unknown dispersion law {name!r}, expected 'wave' or 'klein_gordon'")


def _tag(report: ProbeReport, sweep: str) -> ProbeReport:
    for sample in report.samples:
        sample.params["sweep"] = sweep
    return report


@dataclass
class ProbeRunner:
    """
    Base class of the sweep runners.

    Args:
        trials (:obj:`int`): random trials per sweep point, on top of the witness.
        grid (:obj:`Dict`, `optional`): ``{points_per_axis, half_period}`` overriding
            the run grid for this probe.
        progress (:obj:`bool`): show a ``tqdm`` bar over the sweep.
    """

    name: ClassVar[str] = ""
    estimate: ClassVar[str] = ""

    trials: int = 2
    grid: Optional[Dict[str, Any]] = None
    progress: bool = False

    def default_targets(self) -> List[ExponentTarget]:
        return []

    def sweep(self, grid: GridSpec, seed: int) -> ProbeReport:
        raise NotImplementedError

    def resolve_grid(self, grid: Optional[GridSpec]) -> GridSpec:
        if self.grid is not None:
            return GridSpec.from_dict(self.grid)
        if grid is None:
            raise ValueError(f"Probe {self.name} needs a grid")
        return grid

    def targets(self, slack: Optional[float] = None) -> List[ExponentTarget]:
        targets = self.default_targets()
        if slack is None:
            return targets
        return [dataclasses.replace(t, slack=slack) for t in targets]

    def evaluate(self, report: ProbeReport, slack: Optional[float] = None) -> List[Verdict]:
        return [v for target in self.targets(slack) for v in target.evaluate(report)]

    def run(
        self, grid: Optional[GridSpec] = None, seed: int = 0, slack: Optional[float] = None
    ) -> Tuple[ProbeReport, List[Verdict]]:
        report = self.sweep(self.resolve_grid(grid), seed)
        report.environment["seed"] = seed
        verdicts = self.evaluate(report, slack)
        for verdict in verdicts:
            logger.info(f"{verdict.status} {self.name} {verdict.statistic}: {verdict.fitted} ({verdict.note})")
        return report, verdicts

    def _iterate(self, values: Sequence[Any]):
        return tqdm(values, desc=self.name, disable=not self.progress, leave=False)

    def parameters(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "estimate": self.estimate,
            "runner": f"{type(self).__module__}.{type(self).__name__}",
            "parameters": self.parameters(),
            "targets": [
                {
                    "parameter": t.parameter,
                    "predicted": t.predicted,
                    "slack": t.slack,
                    "bound": t.bound.value,
                    "max_spread": t.max_spread,
                }
                for t in self.default_targets()
            ],
        }


@dataclass
class BernsteinRunner(ProbeRunner):
    name: ClassVar[str] = "bernstein"
    estimate: ClassVar[str] = BERNSTEIN_ESTIMATE

    scales: List[float] = field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0])
    alpha: float = 1.0
    p: float = 2.0

    def default_targets(self) -> List[ExponentTarget]:
        return [ExponentTarget("lambda", 3.0 / self.p, 0.15)]

    def sweep(self, grid: GridSpec, seed: int) -> ProbeReport:
        reports = [
            bernstein_probe(grid, scale, self.alpha, self.p, self.trials, seed)
            for scale in self._iterate(self.scales)
        ]
        report = merge_reports(self.name, self.estimate, reports)
        report.params = {"scales": list(self.scales), "alpha": self.alpha, "p": self.p}
        report.fit("lambda")
        return report


@dataclass
class StrichartzRunner(ProbeRunner):
    """``lambda`` sweep at ``N = fixed_N`` and ``N`` sweep at ``lambda = fixed_scale``."""

    name: ClassVar[str] = "strichartz"
    estimate: ClassVar[str] = STRICHARTZ_ESTIMATE

    scales: List[float] = field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0])
    Ns: List[float] = field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])
    fixed_N: float = 1.0
    fixed_scale: float = 8.0
    eta: float = 0.1
    window: float = 8.0
    law: str = "wave"
    mass: float = 1.0
    max_degree: int = 16

    def default_targets(self) -> List[ExponentTarget]:
        q = strichartz_exponent(self.eta)
        return [
            ExponentTarget("lambda", 1.0 - 3.0 / q, 0.15, eta=self.eta),
            ExponentTarget("N", 0.5 + self.eta, 0.15, eta=self.eta),
        ]

    def sweep(self, grid: GridSpec, seed: int) -> ProbeReport:
        law = _law(self.law, self.mass)
        points = [(scale, self.fixed_N, "lambda") for scale in self.scales]
        points += [(self.fixed_scale, n, "N") for n in self.Ns]
        reports = [
            _tag(
                strichartz_probe(
                    grid, scale, n, self.eta, self.window, trials=self.trials, seed=seed,
                    law=law, max_degree=self.max_degree,
                ),
                sweep,
            )
            for scale, n, sweep in self._iterate(points)
        ]
        report = merge_reports(self.name, self.estimate, reports)
        report.params = {
            "scales": list(self.scales), "Ns": list(self.Ns), "eta": self.eta,
            "window": self.window, "law": self.law,
        }
        report.fit("lambda", where={"sweep": "lambda"})
        report.fit("N", where={"sweep": "N"})
        return report


@dataclass
class ConcentrationRunner(ProbeRunner):
    """Sweep of ``alpha`` at fixed ``(lambda, N)``; the samples are already ``(alpha N)^s``-normalised."""

    name: ClassVar[str] = "concentration"
    estimate: ClassVar[str] = CONCENTRATION_ESTIMATE

    scale: float = 8.0
    N: float = 2.0
    alphas: List[float] = field(default_factory=lambda: [0.0625, 0.125, 0.25, 0.5])
    p: float = 4.0
    s: float = 0.25
    max_degree: int = 16
    max_caps: Optional[int] = None

    def default_targets(self) -> List[ExponentTarget]:
        return [ExponentTarget("alpha_n", 0.0, 0.05, bound=Bound.LOWER, s=self.s)]

    def sweep(self, grid: GridSpec, seed: int) -> ProbeReport:
        reports = [
            concentration_probe(
                grid, self.scale, self.N, alpha, self.p, self.s, self.trials, seed,
                max_degree=self.max_degree, max_caps=self.max_caps,
            )
            for alpha in self._iterate(self.alphas)
        ]
        report = merge_reports(self.name, self.estimate, reports)
        report.params = {"lambda": self.scale, "N": self.N, "alphas": list(self.alphas), "p": self.p, "s": self.s}
        report.fit("alpha_n")
        return report


@dataclass
class HighModulationRunner(ProbeRunner):
    name: ClassVar[str] = "high_modulation"
    estimate: ClassVar[str] = HIGH_MODULATION_ESTIMATE

    scale: float = 2.0
    d_multiples: List[float] = field(default_factory=lambda: [4.0, 8.0, 16.0])
    q: float = 2.0
    window: float = 8.0
    theta: int = 1
    max_degree: int = 16
    max_spread: float = 5.0

    def default_targets(self) -> List[ExponentTarget]:
        return [ExponentTarget("d", 0.0, 0.15, max_spread=self.max_spread)]

    def sweep(self, grid: GridSpec, seed: int) -> ProbeReport:
        return high_modulation_probe(
            grid, self.scale, self.d_multiples, self.q, self.window, theta=self.theta,
            trials=self.trials, seed=seed, max_degree=self.max_degree,
        )


@dataclass
class BilinearRunner(ProbeRunner):
    """
    Low-output sweep ``lambda0 = r * scale``, ``lambda1 = lambda2 = scale`` over
    ``ratios`` at ``N1 = N2 = 1``, then an ``N1 = N2 = N`` sweep at ``ratio = fixed_ratio``.
    """

    name: ClassVar[str] = "bilinear"
    estimate: ClassVar[str] = BILINEAR_ESTIMATE

    scale: float = 8.0
    ratios: List[float] = field(default_factory=lambda: [0.5, 0.25, 0.125, 0.0625])
    Ns: List[float] = field(default_factory=lambda: [1.0, 2.0, 4.0])
    fixed_ratio: float = 0.5
    thetas: List[int] = field(default_factory=lambda: [1, 1])
    mass: float = 1.0
    eta: float = 0.1
    window: float = 4.0
    max_degree: int = 16

    def default_targets(self) -> List[ExponentTarget]:
        return [
            ExponentTarget("ratio", 0.125, 0.05, bound=Bound.LOWER, eta=self.eta),
            ExponentTarget("N_min", 1.0 - self.eta, 0.15, eta=self.eta),
        ]

    def _probe(self, grid: GridSpec, seed: int, ratio: float, n: float) -> ProbeReport:
        return bilinear_probe(
            grid, ratio * self.scale, self.scale, self.scale, n, n, self.thetas[0], self.thetas[1],
            self.mass, self.eta, self.window, trials=self.trials, seed=seed, max_degree=self.max_degree,
        )

    def sweep(self, grid: GridSpec, seed: int) -> ProbeReport:
        points = [(r, 1.0, "ratio") for r in self.ratios] + [(self.fixed_ratio, n, "N") for n in self.Ns]
        reports = [_tag(self._probe(grid, seed, r, n), sweep) for r, n, sweep in self._iterate(points)]
        report = merge_reports(self.name, self.estimate, reports)
        report.params = {
            "scale": self.scale, "ratios": list(self.ratios), "Ns": list(self.Ns),
            "thetas": list(self.thetas), "mass": self.mass, "eta": self.eta, "window": self.window,
        }
        report.fit("ratio", where={"sweep": "ratio"})
        report.fit("N_min", where={"sweep": "N"})
        return report


@dataclass
class TrilinearRunner(ProbeRunner):
    """Same sweeps as :class:`BilinearRunner` for the null-form trilinear form, plus the ``u = v`` witness."""

    name: ClassVar[str] = "trilinear"
    estimate: ClassVar[str] = TRILINEAR_ESTIMATE

    scale: float = 8.0
    ratios: List[float] = field(default_factory=lambda: [0.5, 0.25, 0.125, 0.0625])
    Ns: List[float] = field(default_factory=lambda: [1.0, 2.0, 4.0])
    fixed_ratio: float = 0.5
    thetas: List[int] = field(default_factory=lambda: [1, 1, 1])
    kind: str = "Q12"
    eta: float = 0.1
    window: float = 4.0
    modulation: Optional[float] = None
    max_degree: int = 16

    def default_targets(self) -> List[ExponentTarget]:
        return [
            ExponentTarget("ratio", 0.125, 0.05, bound=Bound.LOWER, eta=self.eta),
            ExponentTarget("N_min", 1.0 - self.eta, 0.15, eta=self.eta),
        ]

    def _probe(self, grid: GridSpec, seed: int, ratio: float, n: float) -> ProbeReport:
        return trilinear_probe(
            grid, ratio * self.scale, self.scale, self.scale, 1.0, n, n, *self.thetas,
            kind=self.kind, eta=self.eta, window=self.window, modulation=self.modulation,
            trials=self.trials, seed=seed, max_degree=self.max_degree,
        )

    def sweep(self, grid: GridSpec, seed: int) -> ProbeReport:
        points = [(r, 1.0, "ratio") for r in self.ratios] + [(self.fixed_ratio, n, "N") for n in self.Ns]
        reports = [_tag(self._probe(grid, seed, r, n), sweep) for r, n, sweep in self._iterate(points)]
        report = merge_reports(self.name, self.estimate, reports)
        report.params = {
            "scale": self.scale, "ratios": list(self.ratios), "Ns": list(self.Ns),
            "thetas": list(self.thetas), "kind": self.kind, "eta": self.eta, "window": self.window,
        }
        report.fit("ratio", where={"sweep": "ratio"})
        report.fit("N_min", where={"sweep": "N"})
        return report

    def evaluate(self, report: ProbeReport, slack: Optional[float] = None) -> List[Verdict]:
        verdicts = super().evaluate(report, slack)
        witnesses = [w for w in report.extras.get("antisymmetry_witness", []) if w is not None]
        if witnesses:
            worst = max(witnesses)
            verdicts.append(
                Verdict(self.name, self.estimate, "u=v witness", worst, 0.0, ANTISYMMETRY_TOLERANCE,
                        worst <= ANTISYMMETRY_TOLERANCE, f"needs <= {ANTISYMMETRY_TOLERANCE:g}")
            )
        return verdicts


@dataclass
class DecayRunner(ProbeRunner):
    """``P_1``-localised point mass evolved by the half-wave flow; decay fitted against ``t``."""

    name: ClassVar[str] = "decay"
    estimate: ClassVar[str] = DECAY_ESTIMATE

    times: List[float] = field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0])
    predicted: float = -1.0
    tolerance: float = 0.2

    def default_targets(self) -> List[ExponentTarget]:
        return [
            ExponentTarget("t", self.predicted, self.tolerance),
            ExponentTarget("t", self.predicted, self.tolerance, bound=Bound.LOWER),
        ]

    def sweep(self, grid: GridSpec, seed: int) -> ProbeReport:
        data = point_mass(grid).apply_symbol(annulus_symbol(grid, 1.0, inhomogeneous=False))
        report = decay_probe(data, self.times)
        report.environment["seed"] = seed
        return report


@dataclass
class NullSymbolRunner(ProbeRunner):
    name: ClassVar[str] = "null_symbol"
    estimate: ClassVar[str] = NULL_SYMBOL_ESTIMATE

    angles: List[float] = field(default_factory=lambda: [0.5, 0.25, 0.125, 0.0625])
    scales: List[float] = field(default_factory=lambda: [8.0, 8.0])
    trials: int = 4
    kind: str = "Q12"

    def default_targets(self) -> List[ExponentTarget]:
        return [
            ExponentTarget("angle", 1.0, 0.1),
            ExponentTarget("angle", 1.0, 0.1, bound=Bound.LOWER),
        ]

    def sweep(self, grid: GridSpec, seed: int) -> ProbeReport:
        # the probe builds one grid per angle
        return null_symbol_probe(self.angles, self.scales, self.trials, self.kind, seed)


@dataclass
class DiracOrthogonalityRunner(ProbeRunner):
    """``H_N Pi_theta H_N'`` for every pair of ``Ns`` at least two octaves apart, both signs."""

    name: ClassVar[str] = "dirac_orthogonality"
    estimate: ClassVar[str] = ORTHOGONALITY_ESTIMATE

    Ns: List[float] = field(default_factory=lambda: [1.0, 4.0])
    mass: float = 1.0
    tolerance: float = 1e-6
    max_degree: int = 16

    def sweep(self, grid: GridSpec, seed: int) -> ProbeReport:
        pairs = [
            (n, n_prime, theta)
            for n in self.Ns
            for n_prime in self.Ns
            if n != n_prime
            for theta in (1, -1)
        ]
        reports = [
            dirac_orthogonality_check(
                grid, n, n_prime, theta, self.mass, trials=self.trials, seed=seed, max_degree=self.max_degree
            )
            for n, n_prime, theta in self._iterate(pairs)
        ]
        report = merge_reports(self.name, self.estimate, reports)
        report.params = {"Ns": list(self.Ns), "mass": self.mass}
        return report

    def evaluate(self, report: ProbeReport, slack: Optional[float] = None) -> List[Verdict]:
        values = report.values()
        worst = float(values.max()) if values.size else None
        return [
            Verdict(self.name, self.estimate, "max ratio", worst, 0.0, self.tolerance,
                    worst is not None and worst <= self.tolerance, f"needs <= {self.tolerance:g}")
        ]

    def describe(self) -> Dict[str, Any]:
        description = super().describe()
        description["targets"] = [{"statistic": "max ratio", "tolerance": self.tolerance}]
        return description


@dataclass
class ChainedRunner(ProbeRunner):
    name: ClassVar[str] = "chained"
    estimate: ClassVar[str] = CHAINED_ESTIMATE

    scales: List[float] = field(default_factory=lambda: [4.0, 8.0, 16.0])
    N: float = 1.0
    mu: float = 2.0
    alpha: float = 0.5
    eta: float = 0.1
    window: float = 4.0
    max_degree: int = 16

    def default_targets(self) -> List[ExponentTarget]:
        q = strichartz_exponent(self.eta)
        return [ExponentTarget("lambda", 1.0 - 3.0 / q, 0.15, eta=self.eta)]

    def sweep(self, grid: GridSpec, seed: int) -> ProbeReport:
        reports = [
            chained_probe(
                grid, scale, self.N, self.mu, self.alpha, self.eta, self.window,
                trials=self.trials, seed=seed, max_degree=self.max_degree,
            )
            for scale in self._iterate(self.scales)
        ]
        report = merge_reports(self.name, self.estimate, reports)
        report.params = {
            "scales": list(self.scales), "N": self.N, "mu": self.mu, "alpha": self.alpha, "eta": self.eta,
        }
        report.fit("lambda")
        return report


RUNNERS: Dict[str, Type[ProbeRunner]] = {
    cls.name: cls
    for cls in (
        BernsteinRunner,
        StrichartzRunner,
        ConcentrationRunner,
        HighModulationRunner,
        BilinearRunner,
        TrilinearRunner,
        DecayRunner,
        NullSymbolRunner,
        DiracOrthogonalityRunner,
        ChainedRunner,
    )
}


def runner_class(name: str) -> Type[ProbeRunner]:
    try:
        return RUNNERS[name]
    except KeyError:
        raise ValueError(f"Unknown probe {name!r}; available: {', '.join(sorted(RUNNERS))}") from None
