from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.linear_model import LinearRegression

from dwlab.common.log import get_logger
from dwlab.common.utils import atomic_write_text, format_float, load_json, to_config

logger = get_logger(__name__)


@dataclass(frozen=True)
class ExponentFit:
    """
    Least-squares power law ``y = C x^slope`` on log-log samples.

    ``residual`` is ``max |log y - (intercept + slope log x)|``.
    """

    slope: float
    intercept: float
    residual: float
    count: int

    @property
    def constant(self) -> float:
        return math.exp(self.intercept)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "constant": self.constant,
            "residual": self.residual,
            "count": self.count,
        }


def fit_exponent(samples: Sequence[Tuple[float, float]]) -> ExponentFit:
    """
    Ordinary least squares on ``(log x, log y)``.

    Args:
        samples (:obj:`Sequence[Tuple[float, float]]`):
            At least three ``(x, y)`` pairs with positive entries.

    Returns:
        :obj:`ExponentFit`
    """
    pairs = np.asarray(list(samples), dtype=float)
    if pairs.ndim != 2 or pairs.shape[0] < 3 or pairs.shape[1] != 2:
        raise ValueError(f"Exponent fits need >= 3 (x, y) samples, got {len(pairs)}")
    if np.any(~np.isfinite(pairs)) or np.any(pairs <= 0):
        raise ValueError("Exponent fits need finite, strictly positive samples")
    log_x = np.log(pairs[:, 0])
    log_y = np.log(pairs[:, 1])
    if np.ptp(log_x) == 0:
        raise ValueError("Exponent fits need at least two distinct x values")
    model = LinearRegression().fit(log_x[:, None], log_y)
    predicted = model.predict(log_x[:, None])
    return ExponentFit(
        slope=float(model.coef_[0]),
        intercept=float(model.intercept_),
        residual=float(np.max(np.abs(log_y - predicted))),
        count=int(pairs.shape[0]),
    )


@dataclass
class Sample:
    params: Dict[str, Any]
    value: float

    def to_dict(self) -> Dict[str, Any]:
        return {"params": to_config(self.params), "value": self.value}


@dataclass
class ProbeReport:
    """
    Samples of one probe plus power-law fits against the swept parameters.

    Args:
        name (:obj:`str`): probe name, e.g. ``"strichartz"``.
        estimate (:obj:`str`): the inequality being exercised, in words.
        params (:obj:`Dict`): probe parameters.
        samples (:obj:`List[Sample]`): one sample per sweep point (trial maxima).
        fits (:obj:`Dict[str, ExponentFit]`): fits keyed by swept parameter name.
        environment (:obj:`Dict`): grid, bump identifier, seed.
    """

    name: str
    estimate: str
    params: Dict[str, Any] = field(default_factory=dict)
    samples: List[Sample] = field(default_factory=list)
    fits: Dict[str, ExponentFit] = field(default_factory=dict)
    environment: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    skipped: int = 0
    extras: Dict[str, Any] = field(default_factory=dict)

    def add_sample(self, value: float, **params):
        self.samples.append(Sample(params=params, value=float(value)))

    def warn(self, message: str):
        logger.warning(f"[{self.name}] {message}")
        if message not in self.warnings:
            self.warnings.append(message)

    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.samples], dtype=float)

    def fit(self, parameter: str, x_transform=None, where: Optional[Dict[str, Any]] = None) -> Optional[ExponentFit]:
        """
        Fit ``value`` against ``params[parameter]`` over the samples matching
        ``where``. Non-positive samples are dropped with a warning; fewer than
        three usable samples leave the fit unset.
        """
        points = []
        for sample in self.samples:
            if parameter not in sample.params:
                continue
            if where and any(sample.params.get(k) != v for k, v in where.items()):
                continue
            x = float(sample.params[parameter])
            if x_transform is not None:
                x = x_transform(x)
            if sample.value > 0 and x > 0:
                points.append((x, sample.value))
            else:
                self.warn(f"non-positive sample at {parameter}={x} left out of the fit")
        if len(points) < 3:
            self.warn(f"fewer than 3 usable samples for {parameter}; fit skipped")
            return None
        result = fit_exponent(points)
        self.fits[parameter] = result
        return result

    @property
    def fitted_exponent(self) -> Optional[float]:
        if not self.fits:
            return None
        return next(iter(self.fits.values())).slope

    @property
    def fitted_constant(self) -> Optional[float]:
        if not self.fits:
            return None
        return next(iter(self.fits.values())).constant

    @property
    def max_residual(self) -> Optional[float]:
        if not self.fits:
            return None
        return max(f.residual for f in self.fits.values())

    def spread(self) -> Optional[float]:
        """``max / min`` of the positive sample values."""
        values = self.values()
        values = values[values > 0]
        if values.size == 0:
            return None
        return float(values.max() / values.min())

    def to_dict(self, timestamp: bool = True) -> Dict[str, Any]:
        data = {
            "name": self.name,
            "estimate": self.estimate,
            "params": to_config(self.params),
            "samples": [s.to_dict() for s in self.samples],
            "fitted_exponent": self.fitted_exponent,
            "fitted_constant": self.fitted_constant,
            "residual": self.max_residual,
            "fits": {k: v.to_dict() for k, v in self.fits.items()},
            "environment": to_config(self.environment),
            "warnings": list(self.warnings),
            "skipped": self.skipped,
            "extras": to_config(self.extras),
        }
        if timestamp:
            data["created_at"] = datetime.now(timezone.utc).isoformat()
        return data

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_csv(self) -> str:
        """One row per sample; columns are the sorted union of parameter names."""
        keys = sorted({k for s in self.samples for k in s.params})
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["probe", *keys, "value"])
        for sample in self.samples:
            row = [self.name]
            for key in keys:
                value = sample.params.get(key, "")
                row.append(format_float(value) if isinstance(value, (float, np.floating)) else value)
            row.append(format_float(sample.value))
            writer.writerow(row)
        return buffer.getvalue()

    def save(self, directory: Union[str, Path]) -> Tuple[Path, Path]:
        directory = Path(directory)
        json_path = atomic_write_text(self.to_json(), directory / f"{self.name}.json")
        csv_path = atomic_write_text(self.to_csv(), directory / f"{self.name}.csv")
        return json_path, csv_path

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProbeReport":
        report = cls(
            name=data["name"],
            estimate=data.get("estimate", ""),
            params=data.get("params", {}),
            samples=[Sample(params=s["params"], value=s["value"]) for s in data.get("samples", [])],
            environment=data.get("environment", {}),
            warnings=data.get("warnings", []),
            skipped=data.get("skipped", 0),
            extras=data.get("extras", {}),
        )
        for key, fit in data.get("fits", {}).items():
            report.fits[key] = ExponentFit(
                slope=fit["slope"],
                intercept=fit["intercept"],
                residual=fit["residual"],
                count=fit["count"],
            )
        return report

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ProbeReport":
        return cls.from_dict(load_json(path))


class Bound(Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass
class Verdict:
    probe: str
    estimate: str
    statistic: str
    fitted: Optional[float]
    target: float
    slack: float
    passed: bool
    note: str = ""

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "probe": self.probe,
            "estimate": self.estimate,
            "statistic": self.statistic,
            "fitted": self.fitted,
            "target": self.target,
            "slack": self.slack,
            "status": self.status,
            "note": self.note,
        }


@dataclass
class ExponentTarget:
    """
    Acceptance rule for one fitted exponent.

    ``bound == UPPER`` passes when ``fitted <= predicted + slack``; ``LOWER``
    passes when ``fitted >= predicted - slack``. ``max_spread`` optionally
    bounds ``max/min`` of the samples (uniform boundedness across a sweep).

    The remaining fields carry the exponent parameters the estimates are
    stated with: ``delta`` in (1/8, 1/4], the Strichartz loss ``eta``, the
    concentration exponent ``s`` and the angular regularity ``sigma``.
    """

    parameter: str
    predicted: float
    slack: float
    bound: Bound = Bound.UPPER
    max_spread: Optional[float] = None
    delta: float = 0.25
    eta: float = 0.1
    s: float = 0.25
    sigma: float = 1.0

    def __post_init__(self):
        if isinstance(self.bound, str):
            self.bound = Bound(self.bound)
        if not self.slack > 0:
            raise ValueError(f"Slack must be positive, got {self.slack}")
        if not 0.125 < self.delta <= 0.25:
            raise ValueError(f"delta must lie in (1/8, 1/4], got {self.delta}")
        if not 0 < self.eta <= 0.1:
            raise ValueError(f"eta must lie in (0, 1/10], got {self.eta}")
        if self.max_spread is not None and not self.max_spread >= 1:
            raise ValueError(f"max_spread must be >= 1, got {self.max_spread}")

    def evaluate(self, report: ProbeReport) -> List[Verdict]:
        verdicts = []
        fit = report.fits.get(self.parameter)
        statistic = f"slope[{self.parameter}]"
        if fit is None:
            verdicts.append(
                Verdict(report.name, report.estimate, statistic, None, self.predicted,
                        self.slack, False, "no fit available")
            )
        else:
            if self.bound is Bound.UPPER:
                passed = fit.slope <= self.predicted + self.slack
                note = f"needs <= {self.predicted + self.slack:.4g}"
            else:
                passed = fit.slope >= self.predicted - self.slack
                note = f"needs >= {self.predicted - self.slack:.4g}"
            verdicts.append(
                Verdict(report.name, report.estimate, statistic, fit.slope,
                        self.predicted, self.slack, passed, note)
            )
        if self.max_spread is not None:
            spread = report.spread()
            verdicts.append(
                Verdict(report.name, report.estimate, "max/min", spread, self.max_spread,
                        self.slack, spread is not None and spread <= self.max_spread,
                        f"needs <= {self.max_spread:.4g}")
            )
        return verdicts


def merge_reports(name: str, estimate: str, reports: Iterable[ProbeReport]) -> ProbeReport:
    """Concatenate samples and warnings of sweep-point reports."""
    merged = ProbeReport(name=name, estimate=estimate)
    for report in reports:
        merged.samples.extend(report.samples)
        merged.skipped += report.skipped
        for message in report.warnings:
            if message not in merged.warnings:
                merged.warnings.append(message)
        if not merged.environment:
            merged.environment = dict(report.environment)
        for key, value in report.extras.items():
            merged.extras.setdefault(key, []).append(value)
    return merged
