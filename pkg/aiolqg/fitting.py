"""Weighted log-log slopes for scaling exponents."""
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from .errors import BadRequestError, InsufficientScalesError

MIN_SCALES = 3


class ScalePoint(NamedTuple):
    log_scale: float
    log_estimate: float
    stderr: float
    samples: int = 0
    discarded: int = 0


@dataclass(frozen=True)
class ExponentFit:
    """log-estimate = intercept + slope * log-scale, weighted by 1/stderr."""

    points: List[ScalePoint]
    slope: float
    intercept: float
    slope_stderr: float
    meta: Dict[str, float] = field(default_factory=dict)

    @property
    def scales(self) -> List[float]:
        return [point.log_scale for point in self.points]

    def residuals(self) -> np.ndarray:
        log_scales = np.array(self.scales)
        estimates = np.array([point.log_estimate for point in self.points])
        return estimates - (self.intercept + self.slope * log_scales)

    def agrees_with(self, other: 'ExponentFit', sigmas: float = 3.0) -> bool:
        joint = float(np.hypot(self.slope_stderr, other.slope_stderr))
        return abs(self.slope - other.slope) <= sigmas * joint

    def to_dict(self) -> Dict[str, object]:
        return {
            'slope': self.slope,
            'intercept': self.intercept,
            'slope_stderr': self.slope_stderr,
            'points': [point._asdict() for point in self.points],
            'meta': dict(self.meta),
        }


def _unweighted(log_scales: np.ndarray, estimates: np.ndarray) -> np.ndarray:
    slope, intercept = np.polyfit(log_scales, estimates, 1)
    residuals = estimates - (intercept + slope * log_scales)
    spread = np.sum((log_scales - log_scales.mean()) ** 2)
    variance = np.sum(residuals**2) / max(len(estimates) - 2, 1) / spread
    return np.array([slope, intercept, np.sqrt(variance)])


def fit_log_log(points: Sequence[ScalePoint], meta: Optional[Dict[str, float]] = None) -> ExponentFit:
    if len(points) < MIN_SCALES:
        raise InsufficientScalesError.create(detail={'scales': len(points), 'minimum': MIN_SCALES})
    log_scales = np.array([point.log_scale for point in points])
    estimates = np.array([point.log_estimate for point in points])
    errors = np.array([point.stderr for point in points])
    if np.all(errors > 0):
        (slope, intercept), cov = np.polyfit(log_scales, estimates, 1, w=1.0 / errors, cov='unscaled')
        slope_stderr = np.sqrt(max(cov[0, 0], 0.0))
    else:
        # exact estimates carry no weights
        slope, intercept, slope_stderr = _unweighted(log_scales, estimates)
    return ExponentFit(
        points=list(points),
        slope=float(slope),
        intercept=float(intercept),
        slope_stderr=float(slope_stderr),
        meta=dict(meta or {}),
    )


def log_point(scale: float, mean: float, stderr: float, samples: int = 0, discarded: int = 0) -> ScalePoint:
    """A scale point from a positive mean and its standard error (delta method on the log)."""
    if mean <= 0:
        raise BadRequestError.create(detail={'scale': scale, 'mean': mean, 'reason': 'mean must be positive'})
    return ScalePoint(float(np.log(scale)), float(np.log(mean)), float(stderr / mean), samples, discarded)
