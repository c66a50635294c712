"""Scaling exponents, the KPZ relation and the first-passage reduction.

Euclidean exponent x: P[B_eps(z) hits K] ~ (eps^2)^x, z uniform.
Quantum exponent Delta: E mu[z : B^delta(z) hits K] ~ delta^Delta, with B^delta(z)
the largest ball about z of Liouville mass at most delta.
"""
from dataclasses import dataclass
from enum import Enum
from itertools import product
from logging import getLogger
from math import comb
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    BadRequestError,
    BoundaryTooCloseError,
    DeltaOutOfRangeError,
    GammaOutOfRangeError,
    InsufficientHitsError,
)
from .fitting import ExponentFit, ScalePoint, fit_log_log, log_point
from .geometry import UNIT_SQUARE, ArrayLike, as_points, cell_centers
from .gff import cutoff_for, sample_spectral_gff
from .liouville import (
    GridMeasure,
    RootedField,
    build_measure,
    ensure_gamma,
    root_normalizer,
    root_shift,
    rooted_circle_process,
    sample_roots,
    tilt_measure,
)
from .rng import RandomStream, run_replicates
from .utils import DEFAULT_MAX_CUTOFF

logger = getLogger(__name__)

PURE_GRAVITY = float(np.sqrt(8.0 / 3.0))
ISING = float(np.sqrt(3.0))

MIN_HITS = 100
MAX_EUCLIDEAN_SAMPLES = 2**23


# the KPZ relation


def kpz_formula(gamma: float, delta: float) -> float:
    """x = gamma^2/4 Delta^2 + (1 - gamma^2/4) Delta."""
    ensure_gamma(gamma)
    if delta < 0:
        raise BadRequestError.create(detail={'delta': delta, 'reason': 'Delta must be nonnegative'})
    # Delta = 0 and Delta = 1 map to themselves exactly in floating point
    return delta + gamma**2 / 4.0 * delta * (delta - 1.0)


def kpz_inverse(gamma: float, x: float) -> float:
    """The nonnegative root Delta of kpz_formula(gamma, Delta) = x."""
    ensure_gamma(gamma)
    if x < 0:
        raise BadRequestError.create(detail={'x': x, 'reason': 'x must be nonnegative'})
    linear = 1.0 - gamma**2 / 4.0
    if gamma == 0.0:
        return x
    # 2x / (linear + sqrt(linear^2 + gamma^2 x)) avoids cancellation for small gamma
    return 2.0 * x / (linear + np.sqrt(linear**2 + gamma**2 * x))


def a_gamma(gamma: float) -> float:
    return 2.0 / gamma - gamma / 2.0


def q_gamma(gamma: float) -> float:
    return 2.0 / gamma + gamma / 2.0


def beta_of_x(gamma: float, x: float) -> float:
    """The nonnegative root of 2x = beta a_gamma + beta^2 / 2."""
    if not 0.0 < gamma < 2.0:
        raise GammaOutOfRangeError.create(detail={'gamma': gamma, 'range': '(0, 2)'})
    if x < 0:
        raise BadRequestError.create(detail={'x': x, 'reason': 'x must be nonnegative'})
    drift = a_gamma(gamma)
    return 4.0 * x / (drift + np.sqrt(drift**2 + 4.0 * x))


def kpz_table(gammas: Sequence[float], xs: Sequence[float]) -> List[Dict[str, float]]:
    rows = []
    for gamma, x in product(gammas, xs):
        delta = kpz_inverse(gamma, x)
        beta = beta_of_x(gamma, x) if gamma > 0 else float('nan')
        rows.append({'gamma': gamma, 'x': x, 'delta': delta, 'beta': beta})
    return rows


# test sets


class FractalKind(Enum):
    SEGMENT = 'segment'
    POINT = 'point'
    BOX_FRACTAL = 'box_fractal'
    FULL_SQUARE = 'full_square'


CARPET_CORNERS = ((0, 0), (0, 2), (1, 1), (2, 0), (2, 2))


@dataclass(frozen=True)
class FractalSet:
    kind: FractalKind
    endpoints: Tuple[Tuple[float, float], Tuple[float, float]] = ((0.25, 0.5), (0.75, 0.5))
    location: Tuple[float, float] = (0.5, 0.5)
    pattern: Tuple[Tuple[int, int], ...] = CARPET_CORNERS
    side: int = 3
    depth: int = 4

    def distance(self, z: ArrayLike, chunk: int = 4096) -> np.ndarray:
        """Euclidean distance from each point to the set; exact for every kind (box fractals at ``depth``)."""
        points = as_points(z)
        if self.kind is FractalKind.FULL_SQUARE:
            outside = np.maximum(np.maximum(-points, points - 1.0), 0.0)
            return np.asarray(np.hypot(outside[..., 0], outside[..., 1]))
        if self.kind is FractalKind.POINT:
            return np.asarray(np.hypot(points[..., 0] - self.location[0], points[..., 1] - self.location[1]))
        if self.kind is FractalKind.SEGMENT:
            start, end = np.asarray(self.endpoints[0]), np.asarray(self.endpoints[1])
            direction = end - start
            along = np.clip(((points - start) @ direction) / (direction @ direction), 0.0, 1.0)
            nearest = start + along[..., None] * direction
            return np.asarray(np.hypot(*np.moveaxis(points - nearest, -1, 0)))
        lows, width = self.boxes()
        flat = points.reshape(-1, 2)
        result = np.empty(flat.shape[0])
        for start in range(0, flat.shape[0], chunk):
            block = flat[start : start + chunk, None, :]
            gap = np.maximum(np.maximum(lows - block, block - (lows + width)), 0.0)
            result[start : start + chunk] = np.min(np.hypot(gap[..., 0], gap[..., 1]), axis=1)
        return result.reshape(points.shape[:-1])

    def boxes(self) -> Tuple[np.ndarray, float]:
        """Lower-left corners and common width of the kept squares at ``depth``."""
        lows = np.zeros((1, 2))
        width = 1.0
        for _ in range(self.depth):
            width /= self.side
            offsets = np.array(self.pattern, dtype=float) * width
            lows = (lows[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
        return lows, width

    def euclidean_exponent_target(self) -> float:
        if self.kind is FractalKind.FULL_SQUARE:
            return 0.0
        if self.kind is FractalKind.POINT:
            return 1.0
        if self.kind is FractalKind.SEGMENT:
            return 0.5
        return float((2.0 - np.log(len(self.pattern)) / np.log(self.side)) / 2.0)

    def describe(self) -> Dict[str, object]:
        return {
            'kind': self.kind.value,
            'endpoints': [list(p) for p in self.endpoints],
            'location': list(self.location),
            'pattern': [list(p) for p in self.pattern],
            'side': self.side,
            'depth': self.depth,
        }


def segment(start: Tuple[float, float] = (0.25, 0.5), end: Tuple[float, float] = (0.75, 0.5)) -> FractalSet:
    return FractalSet(FractalKind.SEGMENT, endpoints=(start, end))


def point(location: Tuple[float, float] = (0.5, 0.5)) -> FractalSet:
    return FractalSet(FractalKind.POINT, location=location)


def box_fractal(pattern: Sequence[Tuple[int, int]] = CARPET_CORNERS, side: int = 3, depth: int = 4) -> FractalSet:
    kept = tuple((int(i), int(k)) for i, k in pattern)
    return FractalSet(FractalKind.BOX_FRACTAL, pattern=kept, side=side, depth=depth)


def full_square() -> FractalSet:
    return FractalSet(FractalKind.FULL_SQUARE)


def fractal_set(name: str) -> FractalSet:
    """A test set from its CLI name."""
    factories = {
        'segment': segment,
        'point': point,
        'box-fractal': box_fractal,
        'box_fractal': box_fractal,
        'full-square': full_square,
        'full_square': full_square,
    }
    try:
        return factories[name]()
    except KeyError as err:
        raise BadRequestError.create(detail={'set': name, 'known': sorted(factories)}).with_exception(err)


# Euclidean exponent


def euclidean_exponent(
    K: FractalSet,  # pylint: disable=invalid-name
    scales: Sequence[float],
    samples: int,
    rng: RandomStream,
    max_samples: int = MAX_EUCLIDEAN_SAMPLES,
    min_hits: int = MIN_HITS,
) -> ExponentFit:
    """Slope of log P[dist(z, K) <= eps] against log eps^2, z uniform on the unit square.

    The sample is doubled until every scale has ``min_hits`` hits.
    """
    eps = np.asarray(sorted(scales, reverse=True), dtype=float)
    distances = K.distance(rng.generator.uniform(size=(samples, 2)))
    while True:
        hits = np.sum(distances[:, None] <= eps[None, :], axis=0)
        if np.all(hits >= min_hits):
            break
        if 2 * distances.size > max_samples:
            raise InsufficientHitsError.create(
                detail={'hits': hits.tolist(), 'scales': eps.tolist(), 'samples': int(distances.size)}
            )
        logger.debug('Extending Euclidean sample from %d points', distances.size)
        distances = np.concatenate([distances, K.distance(rng.generator.uniform(size=(distances.size, 2)))])
    total = distances.size
    points = []
    for scale, count in zip(eps, hits):
        probability = count / total
        stderr = float(np.sqrt(probability * (1.0 - probability) / total))
        points.append(log_point(scale**2, probability, stderr, samples=total))
    return fit_log_log(points, meta={'samples': float(total)})


# quantum balls


def _radial_profile(m: GridMeasure, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Distinct center distances from z and the cell mass within each (inclusive), both increasing."""
    centers = cell_centers(m.resolution).reshape(-1, 2)
    distance = np.hypot(centers[:, 0] - z[0], centers[:, 1] - z[1])
    order = np.argsort(distance, kind='stable')
    sorted_distance = distance[order]
    cumulative = np.cumsum(m.masses.ravel()[order])
    last = np.append(sorted_distance[1:] != sorted_distance[:-1], True)
    return sorted_distance[last], cumulative[last]


def quantum_radii(m: GridMeasure, z: ArrayLike, deltas: Sequence[float]) -> np.ndarray:
    """tau(delta) = sup{r : mu(B_r(z)) <= delta} for each delta, with B_r open.

    Radii exceeding dist(z, boundary) come back as NaN (clipped balls).
    """
    center = UNIT_SQUARE.ensure_inside(z)
    values = np.asarray(deltas, dtype=float)
    total = m.total
    if np.any(values <= 0) or np.any(values >= total):
        raise DeltaOutOfRangeError.create(detail={'deltas': values.tolist(), 'total': total})
    distances, cumulative = _radial_profile(m, center)
    radii = distances[np.searchsorted(cumulative, values, side='right')]
    return np.where(radii > float(UNIT_SQUARE.distance_to_boundary(center)), np.nan, radii)


def quantum_ball(m: GridMeasure, z: ArrayLike, delta: float) -> float:
    radius = float(quantum_radii(m, z, [delta])[0])
    if np.isnan(radius):
        raise BoundaryTooCloseError.create(detail={'z': as_points(z).tolist(), 'delta': delta})
    return radius


class RootMode(Enum):
    SAMPLE_FROM_MEASURE = 'measure'
    ROOTED_DENSITY = 'rooted'


@dataclass(frozen=True)
class QuantumExponentRun:
    fit: ExponentFit
    hits: List[int]
    discarded: int
    balls: int

    @property
    def discard_rate(self) -> float:
        return self.discarded / self.balls if self.balls else 0.0


def _region_cells(n: int, margin: float) -> np.ndarray:
    centers = cell_centers(n)
    return np.asarray(np.all((centers >= margin) & (centers <= 1.0 - margin), axis=-1))


def _roots_from_measure(m: GridMeasure, region: np.ndarray, count: int, rng: RandomStream) -> np.ndarray:
    weights = np.where(region, m.masses, 0.0).ravel()
    cells = rng.generator.choice(weights.size, size=count, p=weights / weights.sum())
    corners = np.stack(np.unravel_index(cells, region.shape), axis=-1).astype(float)
    return (corners + rng.generator.uniform(size=(count, 2))) / m.resolution


def quantum_exponent(
    K: FractalSet,  # pylint: disable=invalid-name
    gamma: float,
    deltas: Sequence[float],
    replicates: int,
    n: int,
    seed: int,
    root_mode: RootMode = RootMode.SAMPLE_FROM_MEASURE,
    roots_per_field: int = 64,
    margin: float = 0.1,
    cutoff: Optional[int] = None,
    workers: Optional[int] = None,
    min_hits: int = 10,
) -> QuantumExponentRun:
    """Slope of log E mu[z : B^delta(z) hits K] against log delta.

    ``measure`` draws z from the cell masses of each field sample; ``rooted``
    draws z with density C^{gamma^2/2} and tilts the field by gamma G^z.
    Clipped balls are discarded and counted.
    """
    ensure_gamma(gamma)
    values = np.asarray(sorted(deltas, reverse=True), dtype=float)
    cutoff = cutoff or cutoff_for(1.0 / n, DEFAULT_MAX_CUTOFF)
    region = _region_cells(n, margin)
    normalizer = root_normalizer(gamma, margin, n) if root_mode is RootMode.ROOTED_DENSITY else 0.0

    def replicate(rng: RandomStream) -> Tuple[np.ndarray, np.ndarray, int]:
        spectral = sample_spectral_gff(cutoff, rng)
        base = build_measure(spectral, gamma, n)
        roots_rng = rng.child(0)
        if root_mode is RootMode.SAMPLE_FROM_MEASURE:
            roots = _roots_from_measure(base, region, roots_per_field, roots_rng)
            weight = float(np.sum(base.masses[region]))
            measures = [base] * roots_per_field
        else:
            roots = sample_roots(roots_per_field, gamma, roots_rng, margin)
            weight = normalizer
            measures = [tilt_measure(base, root_shift(spectral, root, gamma)) for root in roots]
        hits = np.zeros(values.size)
        kept = np.zeros(values.size)
        target = K.distance(roots)
        for root, measure, distance in zip(roots, measures, target):
            radii = quantum_radii(measure, root, values)
            valid = ~np.isnan(radii)
            kept += valid
            hits += valid & (distance <= np.nan_to_num(radii, nan=-1.0))
        discarded = int(roots_per_field * values.size - kept.sum())
        return weight * hits / np.maximum(kept, 1), hits, discarded

    results = run_replicates(replicate, seed, replicates, workers)
    estimates = np.array([result[0] for result in results])
    hits = np.sum([result[1] for result in results], axis=0).astype(int)
    discarded = sum(result[2] for result in results)
    if np.any(hits < min_hits):
        raise InsufficientHitsError.create(detail={'hits': hits.tolist(), 'deltas': values.tolist()})
    means = estimates.mean(axis=0)
    errors = estimates.std(axis=0, ddof=1) / np.sqrt(replicates) if replicates > 1 else np.zeros_like(means)
    points: List[ScalePoint] = [
        log_point(delta, mean, err, samples=replicates * roots_per_field, discarded=discarded)
        for delta, mean, err in zip(values, means, errors)
    ]
    balls = replicates * roots_per_field * values.size
    if discarded:
        logger.warning('%d of %d quantum balls clipped by the boundary and discarded', discarded, balls)
    fit = fit_log_log(points, meta={'gamma': gamma, 'discarded': float(discarded)})
    return QuantumExponentRun(fit=fit, hits=hits.tolist(), discarded=discarded, balls=balls)


# the first-passage reduction


class FirstPassageScheme(Enum):
    EULER = 'euler'
    INVERSE_GAUSSIAN = 'inverse-gaussian'


def first_passage_times(
    drift: float,
    level: float,
    paths: int,
    dt: float,
    rng: RandomStream,
    scheme: FirstPassageScheme = FirstPassageScheme.EULER,
    t_max: float = np.inf,
) -> np.ndarray:
    """First passage of B_t + drift t above ``level``; paths still running at ``t_max`` get +inf.

    The Euler scheme checks a Brownian bridge crossing between grid times
    (probability exp(-2 (L - x0)(L - x1) / dt)) so the step does not bias T upwards.
    """
    if drift <= 0:
        raise BadRequestError.create(detail={'drift': drift, 'reason': 'drift must be positive'})
    if level <= 0:
        return np.zeros(paths)
    if scheme is FirstPassageScheme.INVERSE_GAUSSIAN:
        return np.asarray(rng.generator.wald(level / drift, level**2, size=paths))
    times = np.full(paths, np.inf)
    alive = np.arange(paths)
    position = np.zeros(paths)
    now = 0.0
    scale = np.sqrt(dt)
    while alive.size and now < t_max:
        start = position[alive]
        end = start + drift * dt + scale * rng.generator.standard_normal(alive.size)
        crossed = end >= level
        survival = np.exp(-2.0 * (level - start) * (level - end) / dt)
        bridge = ~crossed & (rng.generator.uniform(size=alive.size) < survival)
        fraction = np.where(crossed, (level - start) / np.where(crossed, end - start, 1.0), 0.5)
        done = crossed | bridge
        times[alive[done]] = now + dt * fraction[done]
        position[alive] = end
        alive = alive[~done]
        now += dt
    return times


class FirstPassageResult(NamedTuple):
    mc_estimate: float
    stderr: float
    analytic: float

    @property
    def sigmas(self) -> float:
        gap = abs(self.mc_estimate - self.analytic)
        return gap / self.stderr if self.stderr > 0 else (0.0 if gap == 0 else float('inf'))


def first_passage_oracle(
    gamma: float,
    x: float,
    delta: float,
    paths: int,
    dt: float,
    rng: RandomStream,
    scheme: FirstPassageScheme = FirstPassageScheme.EULER,
) -> FirstPassageResult:
    """E[exp(-2x T)] for T the passage of B_t + a_gamma t to log(1/delta)/gamma, beside delta^{beta/gamma}."""
    beta = beta_of_x(gamma, x)
    if not 0.0 < delta < 1.0:
        raise DeltaOutOfRangeError.create(detail={'delta': delta, 'range': '(0, 1)'})
    if dt > 1e-3:
        raise BadRequestError.create(detail={'dt': dt, 'reason': 'dt must be at most 1e-3'})
    analytic = float(delta ** (beta / gamma))
    if x == 0:
        return FirstPassageResult(1.0, 0.0, analytic)
    level = float(np.log(1.0 / delta) / gamma)
    # exp(-2xT) < 1e-12 past this horizon
    horizon = 14.0 / x
    times = first_passage_times(a_gamma(gamma), level, paths, dt, rng, scheme, t_max=horizon)
    weights = np.exp(-2.0 * x * times)
    stderr = float(weights.std(ddof=1) / np.sqrt(paths)) if paths > 1 else 0.0
    return FirstPassageResult(float(weights.mean()), stderr, analytic)


def first_passage_exponent(
    gamma: float,
    x: float,
    deltas: Sequence[float],
    paths: int,
    dt: float,
    rng: RandomStream,
    scheme: FirstPassageScheme = FirstPassageScheme.EULER,
) -> ExponentFit:
    """Slope of log E[exp(-2x T_delta)] against log delta: an estimate of Delta = beta / gamma."""
    points = []
    for index, delta in enumerate(sorted(deltas, reverse=True)):
        result = first_passage_oracle(gamma, x, delta, paths, dt, rng.child(index), scheme)
        points.append(log_point(delta, result.mc_estimate, result.stderr, samples=paths))
    return fit_log_log(points, meta={'gamma': gamma, 'x': x})


def approximate_radius(rooted: RootedField, delta: float, t_max: float = 12.0, dt: float = 0.01) -> float:
    """sup{r : r^{gamma Q} exp(gamma h^z_r(z)) <= delta}, read off the rooted circle-average path."""
    gamma = rooted.gamma
    if gamma == 0.0:
        return float(np.sqrt(delta))
    path = rooted_circle_process(rooted, t_max, dt)
    log_mass = -gamma * q_gamma(gamma) * path.times + gamma * path.values
    below = np.nonzero(log_mass <= np.log(delta))[0]
    if below.size == 0:
        raise DeltaOutOfRangeError.create(detail={'delta': delta, 't_max': t_max})
    return float(np.exp(-path.times[below[0]]))


# planar maps


def count_quadrangulations(n: int) -> int:
    """Rooted planar quadrangulations with n faces: 2 3^n Cat_n / (n + 2)."""
    if n < 1:
        raise BadRequestError.create(detail={'n': n, 'reason': 'n must be a positive integer'})
    return 2 * 3**n * comb(2 * n, n) // ((n + 1) * (n + 2))
