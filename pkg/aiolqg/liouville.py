"""Regularized Liouville measures mu_eps = eps^{gamma^2/2} exp(gamma h_eps(z)) dz on dyadic grids."""
from dataclasses import dataclass, field
from functools import lru_cache, partial
from logging import getLogger
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import chebyshev
from scipy import integrate

from .errors import BoundaryTooCloseError, DimensionMismatchError, GammaOutOfRangeError, ResolutionTooCoarseError
from .geometry import (
    UNIT_SQUARE,
    ArrayLike,
    DomainSpec,
    _green_unchecked,
    as_points,
    cell_centers,
    conformal_radius,
    conformal_radius_grid,
    green_regularized,
    green_regularized_grid,
)
from .gff import (
    CirclePath,
    SpectralField,
    circle_average,
    circle_average_grid,
    circle_process,
    cutoff_for,
    sample_spectral_gff,
)
from .rng import RandomStream, run_replicates
from .utils import DEFAULT_MAX_CUTOFF

logger = getLogger(__name__)

SQRT2 = float(np.sqrt(2.0))
TestFunction = Union[Callable[[np.ndarray, np.ndarray], np.ndarray], np.ndarray]


@dataclass(frozen=True)
class LiouvilleParams:
    gamma: float

    def __post_init__(self) -> None:
        ensure_gamma(self.gamma)

    @property
    def Q(self) -> Optional[float]:  # pylint: disable=invalid-name
        return None if self.gamma == 0 else 2.0 / self.gamma + self.gamma / 2.0

    @property
    def a(self) -> Optional[float]:
        return None if self.gamma == 0 else 2.0 / self.gamma - self.gamma / 2.0

    @property
    def l2_regime(self) -> bool:
        return self.gamma < SQRT2


def ensure_gamma(gamma: float, upper: float = 2.0) -> float:
    if not 0.0 <= gamma < upper:
        raise GammaOutOfRangeError.create(detail={'gamma': gamma, 'range': f'[0, {upper:g})'})
    return gamma


def flag_l2_range(gamma: float, what: str) -> bool:
    """True (and a warning) when gamma is outside the range where the L^2 arguments apply."""
    if gamma >= SQRT2:
        logger.warning('%s at gamma=%g is outside the L^2 regime gamma < sqrt(2); reporting only', what, gamma)
        return True
    return False


@dataclass(frozen=True)
class GridMeasure:
    resolution: int
    eps: float
    gamma: float
    masses: np.ndarray = field(repr=False)
    boundary: np.ndarray = field(repr=False)
    seed: Optional[Dict[str, int]] = None
    root: Optional[Tuple[float, float]] = None

    def __post_init__(self) -> None:
        self.masses.setflags(write=False)
        self.boundary.setflags(write=False)

    @property
    def total(self) -> float:
        return float(np.sum(self.masses))

    @property
    def cell(self) -> float:
        return 1.0 / self.resolution


def _ensure_dyadic(n: int) -> None:
    if n < 2 or n & (n - 1):
        raise DimensionMismatchError.create(detail={'resolution': n, 'reason': 'resolution must be a power of two'})


def _boundary_cells(n: int, eps: float) -> np.ndarray:
    return np.asarray(UNIT_SQUARE.distance_to_boundary(cell_centers(n)) < eps)


def build_measure(spectral: SpectralField, gamma: float, n: int, eps: Optional[float] = None) -> GridMeasure:
    """Cell masses n^-2 eps^{gamma^2/2} exp(gamma h_eps(z_c)) at the cell centers, eps = 1/n unless given."""
    ensure_gamma(gamma)
    _ensure_dyadic(n)
    flag_l2_range(gamma, 'Measure construction')
    eps = 1.0 / n if eps is None else eps
    if gamma == 0.0:
        masses = np.full((n, n), 1.0 / n**2)
    else:
        field_values = circle_average_grid(spectral, n, eps)
        masses = eps ** (gamma**2 / 2.0) * np.exp(gamma * field_values) / n**2
    return GridMeasure(
        resolution=n,
        eps=eps,
        gamma=gamma,
        masses=masses,
        boundary=_boundary_cells(n, eps),
        seed=spectral.seed,
    )


def grid_values(phi: TestFunction, n: int) -> np.ndarray:
    """Values of a test function at the n x n cell centers."""
    if callable(phi):
        centers = cell_centers(n)
        values = np.asarray(phi(centers[..., 0], centers[..., 1]), dtype=float)
        return np.broadcast_to(values, (n, n))
    values = np.asarray(phi, dtype=float)
    if values.shape != (n, n):
        raise DimensionMismatchError.create(detail={'resolution': n, 'shape': list(values.shape)})
    return values


def measure_apply(m: GridMeasure, phi: TestFunction) -> float:
    values = grid_values(phi, m.resolution)
    if not np.all(np.isfinite(values)):
        raise DimensionMismatchError.create(detail={'reason': 'test function must be finite on every cell'})
    return float(np.sum(values * m.masses))


def first_moment_limit(phi: TestFunction, gamma: float, n: int = 64, domain: DomainSpec = UNIT_SQUARE) -> float:
    """int phi(z) C(z, D)^{gamma^2/2} dz by the midpoint rule; the eps-free mean of mu_eps(phi)."""
    ensure_gamma(gamma)
    weights = conformal_radius_grid(domain, n) ** (gamma**2 / 2.0)
    return float(np.sum(grid_values(phi, n) * weights) / n**2)


@lru_cache(maxsize=32)
def self_interaction(alpha: float) -> float:
    """int over [0,1]^2 x [0,1]^2 of |x - y|^-alpha, alpha < 2 (polar form of 4 int |u|^-alpha (1-u1)(1-u2) du)."""

    def radial(theta: float) -> float:
        cos, sin = np.cos(theta), np.sin(theta)
        reach = 1.0 / max(cos, sin)
        return float(
            reach ** (2 - alpha) / (2 - alpha)
            - (cos + sin) * reach ** (3 - alpha) / (3 - alpha)
            + cos * sin * reach ** (4 - alpha) / (4 - alpha)
        )

    value, _ = integrate.quad(radial, 0.0, np.pi / 2.0, points=[np.pi / 4.0], epsabs=1e-13, epsrel=1e-12)
    return 4.0 * float(value)


class QuadratureResult(NamedTuple):
    value: float
    error: float


def _second_moment_midpoint(phi: TestFunction, gamma: float, n: int, chunk: int = 256) -> float:
    alpha = gamma**2
    radius = conformal_radius_grid(UNIT_SQUARE, n).ravel()
    weights = grid_values(phi, n).ravel() * radius ** (alpha / 2.0)
    centers = cell_centers(n).reshape(-1, 2)
    cell = 1.0 / n
    total = 0.0
    for start in range(0, centers.shape[0], chunk):
        rows = slice(start, min(start + chunk, centers.shape[0]))
        kernel = np.exp(alpha * _green_unchecked(UNIT_SQUARE, centers[rows, None, :], centers[None, :, :]))
        block = np.arange(rows.start, rows.stop)
        kernel[block - rows.start, block] = 0.0
        total += float(weights[rows] @ kernel @ weights)
    diagonal = float(np.sum(weights**2 * radius**alpha)) * self_interaction(alpha) * cell ** (4.0 - alpha)
    return total * cell**4 + diagonal


def second_moment_quadrature(phi: TestFunction, gamma: float, n: int = 32) -> QuadratureResult:
    """The limit of E[mu_eps(phi)^2] with its refinement error.

    Off-diagonal cells use the midpoint rule; the log-singular self-cell term
    integrates |x - y|^{-gamma^2} exactly. The two refinements n/2 and n are
    extrapolated with the h^{2 - gamma^2} error law.
    """
    ensure_gamma(gamma, upper=SQRT2)
    _ensure_dyadic(n)
    fine = _second_moment_midpoint(phi, gamma, n)
    coarse = _second_moment_midpoint(phi, gamma, n // 2)
    gain = 2.0 ** (2.0 - gamma**2) - 1.0
    extrapolated = fine + (fine - coarse) / gain
    return QuadratureResult(value=extrapolated, error=abs(extrapolated - fine))


def second_moment_limit(phi: TestFunction, gamma: float, n: int = 32) -> float:
    return second_moment_quadrature(phi, gamma, n).value


class CauchyRow(NamedTuple):
    k: int
    mean_square: float
    stderr: float


class CauchyStep(NamedTuple):
    """Drop of the coupled difference from level k to k + 1, with the stderr of the paired samples."""

    k: int
    drop: float
    stderr: float


@dataclass(frozen=True)
class CauchyDiagnostic:
    gamma: float
    rows: List[CauchyRow]
    out_of_range: bool
    replicates: int
    steps: List[CauchyStep] = field(default_factory=list)


def cauchy_diagnostic(
    gamma: float,
    phi: TestFunction,
    k_max: int,
    replicates: int,
    seed: int,
    k_min: int = 3,
    cutoff: Optional[int] = None,
    workers: Optional[int] = None,
) -> CauchyDiagnostic:
    """E[(mu_{2^-k}(phi) - mu_{2^-k-1}(phi))^2] for k_min..k_max, both measures built from one field sample."""
    ensure_gamma(gamma)
    out_of_range = flag_l2_range(gamma, 'Cauchy diagnostic')
    finest = 2.0 ** -(k_max + 1)
    cutoff = cutoff or cutoff_for(finest, DEFAULT_MAX_CUTOFF)
    levels = list(range(k_min, k_max + 2))

    def replicate(rng: RandomStream) -> np.ndarray:
        spectral = sample_spectral_gff(cutoff, rng)
        values = np.array([measure_apply(build_measure(spectral, gamma, 2**k), phi) for k in levels])
        return np.diff(values) ** 2

    samples = np.array(run_replicates(replicate, seed, replicates, workers))
    means = samples.mean(axis=0)
    drops = samples[:, :-1] - samples[:, 1:]

    def stderr(values: np.ndarray) -> np.ndarray:
        return values.std(axis=0, ddof=1) / np.sqrt(replicates) if replicates > 1 else np.zeros(values.shape[1])

    rows = [CauchyRow(k, float(mean), float(err)) for k, mean, err in zip(levels[:-1], means, stderr(samples))]
    steps = [
        CauchyStep(k, float(drop), float(err))
        for k, drop, err in zip(levels[:-2], drops.mean(axis=0), stderr(drops))
    ]
    return CauchyDiagnostic(gamma=gamma, rows=rows, out_of_range=out_of_range, replicates=replicates, steps=steps)


def chebyshev_basis(count: int) -> List[Callable[[np.ndarray, np.ndarray], np.ndarray]]:
    """T_p(2x1 - 1) T_q(2x2 - 1) ordered by total degree p + q; every member has sup norm 1."""

    def member(p: int, q: int, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        return np.asarray(chebyshev.chebval(2 * x1 - 1, [0] * p + [1]) * chebyshev.chebval(2 * x2 - 1, [0] * q + [1]))

    basis: List[Callable[[np.ndarray, np.ndarray], np.ndarray]] = []
    degree = 0
    while len(basis) < count:
        for p in range(degree, -1, -1):
            if len(basis) < count:
                basis.append(partial(member, p, degree - p))
        degree += 1
    return basis


class WeakStarDistance(NamedTuple):
    distance: float
    tail_bound: float


def weak_star_distance(m1: GridMeasure, m2: GridMeasure, basis: Sequence[TestFunction]) -> WeakStarDistance:
    """sum_{j <= J} |m1(phi_j) - m2(phi_j)| / 2^j, with (total1 + total2) 2^-J bounding the omitted tail."""
    distance = 0.0
    for j, phi in enumerate(basis, start=1):
        distance += abs(measure_apply(m1, phi) - measure_apply(m2, phi)) / 2.0**j
    tail = (m1.total + m2.total) * 2.0 ** -len(basis)
    return WeakStarDistance(distance=distance, tail_bound=tail)


# rooted measures


@dataclass(frozen=True)
class RootedField:
    base: SpectralField
    root: Tuple[float, float]
    gamma: float

    def shift(self, z: ArrayLike, eps: float) -> np.ndarray:
        """gamma G^root_eps(z): the circle average of gamma G^root over the circle of radius eps about z."""
        return np.asarray(self.gamma * np.asarray(green_regularized(self.base.domain, self.root, z, eps)))

    def shift_grid(self, n: int, eps: float) -> np.ndarray:
        """The shift at every cell center of the n x n grid."""
        return self.gamma * green_regularized_grid(self.base.domain, self.root, n, eps)

    def circle_average(self, z: ArrayLike, eps: float) -> np.ndarray:
        return np.asarray(circle_average(self.base, z, eps)) + self.shift(z, eps)


def root_shift(spectral: SpectralField, z: ArrayLike, gamma: float) -> RootedField:
    point = spectral.domain.ensure_inside(z)
    ensure_gamma(gamma)
    return RootedField(base=spectral, root=(float(point[0]), float(point[1])), gamma=gamma)


def tilt_measure(m: GridMeasure, rooted: RootedField) -> GridMeasure:
    """Reweight ``m`` (built from ``rooted.base``) by exp(gamma^2 G^z_eps) cell by cell."""
    if m.gamma != rooted.gamma:
        raise GammaOutOfRangeError.create(detail={'measure': m.gamma, 'rooted': rooted.gamma})
    masses = np.array(m.masses)
    if rooted.gamma != 0.0:
        masses = masses * np.exp(rooted.gamma * rooted.shift_grid(m.resolution, m.eps))
    return GridMeasure(
        resolution=m.resolution,
        eps=m.eps,
        gamma=m.gamma,
        masses=masses,
        boundary=np.array(m.boundary),
        seed=m.seed,
        root=rooted.root,
    )


def build_rooted_measure(rooted: RootedField, n: int) -> GridMeasure:
    """The measure of h + gamma G^z: cell masses carry the tilt exp(gamma^2 G^z_eps)."""
    return tilt_measure(build_measure(rooted.base, rooted.gamma, n), rooted)


def ball_mass(m: GridMeasure, z: ArrayLike, r: float) -> float:
    """Mass of the cells whose centers lie in the open ball B_r(z)."""
    point = as_points(z)
    centers = cell_centers(m.resolution)
    distance = np.hypot(centers[..., 0] - point[0], centers[..., 1] - point[1])
    return float(np.sum(m.masses[distance < r]))


def _check_ball(rooted: RootedField, r: float, n: int) -> None:
    if r < 2.0 / n:
        raise ResolutionTooCoarseError.create(detail={'radius': r, 'resolution': n, 'minimum': 2.0 / n})
    if r > float(rooted.base.domain.distance_to_boundary(rooted.root)):
        raise BoundaryTooCloseError.create(detail={'root': list(rooted.root), 'radius': r})


def rooted_ball_mass(rooted: RootedField, r: float, n: int, measure: Optional[GridMeasure] = None) -> float:
    _check_ball(rooted, r, n)
    measure = measure if measure is not None else build_rooted_measure(rooted, n)
    return ball_mass(measure, rooted.root, r)


def ball_mass_log_ratio(rooted: RootedField, r: float, n: int, measure: Optional[GridMeasure] = None) -> float:
    """log[mu^z(B_r(z)) / (r^{gamma Q} exp(gamma h^z_r(z)))]; flat in r when the approximation holds."""
    mass = rooted_ball_mass(rooted, r, n, measure)
    gamma = rooted.gamma
    exponent = 2.0 + gamma**2 / 2.0
    rooted_average = float(rooted.circle_average(rooted.root, r))
    return float(np.log(mass) - exponent * np.log(r) - gamma * rooted_average)


def rooted_circle_process(rooted: RootedField, t_max: float, dt: float) -> CirclePath:
    """Circle averages of h + gamma G^z about the root; increments are a Brownian motion with drift gamma."""
    path = circle_process(rooted.base, rooted.root, t_max, dt)
    shift = rooted.gamma * (path.times + np.log(float(conformal_radius(rooted.base.domain, rooted.root))))
    return CirclePath(center=path.center, t0=path.t0, times=path.times, values=path.values + shift)


def _root_density_ceiling(domain: DomainSpec, gamma: float) -> float:
    return float(conformal_radius(domain, (0.5, 0.5))) ** (gamma**2 / 2.0)


def sample_roots(
    count: int, gamma: float, rng: RandomStream, margin: float = 0.0, domain: DomainSpec = UNIT_SQUARE
) -> np.ndarray:
    """Roots drawn with density proportional to C(z, D)^{gamma^2/2} on [margin, 1 - margin]^2 (rejection)."""
    ensure_gamma(gamma)
    ceiling = _root_density_ceiling(domain, gamma)
    accepted: List[np.ndarray] = []
    found = 0
    while found < count:
        proposals = rng.generator.uniform(margin, 1.0 - margin, size=(max(2 * (count - found), 16), 2))
        inside = proposals[np.asarray(domain.contains(proposals))]
        weights = np.asarray(conformal_radius(domain, inside)) ** (gamma**2 / 2.0) / ceiling
        keep = inside[rng.generator.uniform(size=inside.shape[0]) < weights]
        accepted.append(keep)
        found += keep.shape[0]
    return np.concatenate(accepted)[:count]


def sample_root(gamma: float, rng: RandomStream, margin: float = 0.0, domain: DomainSpec = UNIT_SQUARE) -> np.ndarray:
    return sample_roots(1, gamma, rng, margin, domain)[0]


def root_normalizer(gamma: float, margin: float = 0.0, n: int = 64, domain: DomainSpec = UNIT_SQUARE) -> float:
    """int over [margin, 1 - margin]^2 of C(z, D)^{gamma^2/2} dz (midpoint rule)."""
    centers = cell_centers(n)
    inside = np.all((centers >= margin) & (centers <= 1.0 - margin), axis=-1)
    weights = conformal_radius_grid(domain, n) ** (gamma**2 / 2.0)
    return float(np.sum(weights[inside]) / n**2)


# equal-mass dyadic squares


class DyadicSquare(NamedTuple):
    x: float
    y: float
    size: float
    mass: float


def dyadic_decomposition(m: GridMeasure, delta: float) -> List[DyadicSquare]:
    """Split dyadic squares until each has mass <= delta (or is a single cell)."""
    n = m.resolution
    table = np.zeros((n + 1, n + 1))
    table[1:, 1:] = np.cumsum(np.cumsum(m.masses, axis=0), axis=1)

    def mass(i: int, k: int, width: int) -> float:
        return float(table[i + width, k + width] - table[i, k + width] - table[i + width, k] + table[i, k])

    squares: List[DyadicSquare] = []
    stack = [(0, 0, n)]
    while stack:
        i, k, width = stack.pop()
        value = mass(i, k, width)
        if value <= delta or width == 1:
            squares.append(DyadicSquare(x=i / n, y=k / n, size=width / n, mass=value))
            continue
        half = width // 2
        stack.extend([(i, k, half), (i + half, k, half), (i, k + half, half), (i + half, k + half, half)])
    return sorted(squares)


def decomposition_spread(squares: Sequence[DyadicSquare]) -> float:
    """Variance of log2 side lengths: zero for a uniform decomposition."""
    return float(np.var(np.log2([square.size for square in squares])))
