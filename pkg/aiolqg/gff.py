"""Gaussian free field samplers.

The continuum field on the unit square is the series

    h = sum_{j,k} a_{j,k} c_{j,k} sin(j pi x1) sin(k pi x2),   c_{j,k} = 2 sqrt(2/pi) / sqrt(j^2 + k^2),

whose terms are orthonormal for the Dirichlet inner product (1/2pi) int grad f . grad g.
The discrete field lives on the lattice (1/N) Z^2 in [0, 1]^2 with zero boundary values.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from logging import getLogger
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy import fft, special
from scipy.sparse import csc_matrix, diags, identity, kron
from scipy.sparse.linalg import factorized

from .errors import BoundaryTooCloseError, DimensionMismatchError, InvalidCutoffError, OutOfDomainError
from .geometry import UNIT_SQUARE, ArrayLike, DomainSpec, Real, _real, as_points
from .rng import RandomStream
from .utils import DEFAULT_MAX_CUTOFF

logger = getLogger(__name__)

NORMALIZATION = 2.0 * np.sqrt(2.0 / np.pi)
# pi * M * eps >= 50 keeps the modes beyond the cutoff under 1% of Var(h_eps).
CUTOFF_RULE = 50.0


@dataclass(frozen=True)
class SpectralField:
    cutoff: int
    coeffs: np.ndarray = field(repr=False)
    domain: DomainSpec = UNIT_SQUARE
    seed: Optional[Dict[str, int]] = None

    def __post_init__(self) -> None:
        if self.coeffs.shape != (self.cutoff, self.cutoff):
            raise DimensionMismatchError.create(detail={'cutoff': self.cutoff, 'shape': list(self.coeffs.shape)})
        self.coeffs.setflags(write=False)


@dataclass(frozen=True)
class DiscreteField:
    n: int
    values: np.ndarray = field(repr=False)
    seed: Optional[Dict[str, int]] = None

    def __post_init__(self) -> None:
        self.values.setflags(write=False)

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1, 1:-1]


@dataclass(frozen=True)
class CirclePath:
    center: Tuple[float, float]
    t0: float
    times: np.ndarray
    values: np.ndarray

    @property
    def increments(self) -> np.ndarray:
        """B_t = Y_{t0 + t} - Y_{t0}, indexed like ``times``."""
        return self.values - self.values[0]

    @property
    def elapsed(self) -> np.ndarray:
        return self.times - self.t0


def _modes(cutoff: int) -> np.ndarray:
    return np.arange(1, cutoff + 1, dtype=float)


@lru_cache(maxsize=8)
def mode_norms(cutoff: int) -> np.ndarray:
    """sqrt(j^2 + k^2) for 1 <= j, k <= cutoff."""
    modes = _modes(cutoff)
    norms = np.sqrt(modes[:, None] ** 2 + modes[None, :] ** 2)
    norms.setflags(write=False)
    return norms


@lru_cache(maxsize=8)
def normalization(cutoff: int) -> np.ndarray:
    """c_{j,k}; c_{j,k}^2 = 8 / (pi (j^2 + k^2))."""
    weights = NORMALIZATION / mode_norms(cutoff)
    weights.setflags(write=False)
    return weights


@lru_cache(maxsize=4)
def bessel_multiplier(cutoff: int, eps: float) -> np.ndarray:
    """J0(pi eps sqrt(j^2 + k^2)): circle average of each mode at radius eps relative to its center value."""
    multiplier = np.asarray(special.j0(np.pi * eps * mode_norms(cutoff)))
    multiplier.setflags(write=False)
    return multiplier


def cutoff_for(eps: float, max_cutoff: int = DEFAULT_MAX_CUTOFF) -> int:
    wanted = int(np.ceil(CUTOFF_RULE / (np.pi * eps)))
    if wanted > max_cutoff:
        logger.warning(
            'Cutoff %d required by pi*M*eps >= %.0f at eps=%g exceeds the maximum %d; using %d',
            wanted,
            CUTOFF_RULE,
            eps,
            max_cutoff,
            max_cutoff,
        )
        return max_cutoff
    return wanted


def warn_if_truncated(cutoff: int, eps: float) -> bool:
    if np.pi * cutoff * eps < CUTOFF_RULE:
        logger.warning('Cutoff M=%d at eps=%g violates pi*M*eps >= %.0f', cutoff, eps, CUTOFF_RULE)
        return True
    return False


def sample_spectral_gff(cutoff: int, rng: RandomStream) -> SpectralField:
    if cutoff < 1:
        raise InvalidCutoffError.create(detail={'cutoff': cutoff})
    coeffs = rng.generator.standard_normal((cutoff, cutoff))
    return SpectralField(cutoff=cutoff, coeffs=coeffs, seed=rng.record())


def zero_field(cutoff: int) -> SpectralField:
    return SpectralField(cutoff=cutoff, coeffs=np.zeros((cutoff, cutoff)))


def single_mode_field(cutoff: int, j: int = 1, k: int = 1) -> SpectralField:
    coeffs = np.zeros((cutoff, cutoff))
    coeffs[j - 1, k - 1] = 1.0
    return SpectralField(cutoff=cutoff, coeffs=coeffs)


def _fold_axis(values: np.ndarray, n: int, axis: int) -> np.ndarray:
    """Alias modes j >= 1 onto 1..n for the cell centers (i + 1/2)/n.

    With j = r + 2nq: sin(j pi x_i) = (-1)^q sin(r pi x_i), and for n < r < 2n,
    sin(r pi x_i) = sin((2n - r) pi x_i). Modes with r = 0 vanish on the lattice.
    """
    moved = np.moveaxis(values, axis, 0)
    count = moved.shape[0]
    period = 2 * n
    blocks = -(-(count + 1) // period)
    padded = np.zeros((blocks * period,) + moved.shape[1:])
    padded[1 : count + 1] = moved
    shaped = padded.reshape((blocks, period) + moved.shape[1:])
    signs = np.where(np.arange(blocks) % 2 == 0, 1.0, -1.0).reshape((blocks,) + (1,) * moved.ndim)
    residues = np.sum(shaped * signs, axis=0)
    folded = residues[1 : n + 1].copy()
    folded[: n - 1] += residues[period - 1 : n : -1]
    return np.moveaxis(folded, 0, axis)


def lattice_sum(amplitudes: np.ndarray, n: int) -> np.ndarray:
    """sum_{j,k} amplitudes[j-1, k-1] sin(j pi x1) sin(k pi x2) at the n x n cell centers."""
    folded = _fold_axis(_fold_axis(amplitudes, n, 0), n, 1)
    folded[-1, :] *= 2.0
    folded[:, -1] *= 2.0
    return np.asarray(fft.dstn(folded, type=3)) / 4.0


def evaluate_field(spectral: SpectralField, n: int) -> np.ndarray:
    """Field values at the cell centers ((i + 1/2)/n, (k + 1/2)/n), indexed [i, k]."""
    if n < 2:
        raise DimensionMismatchError.create(detail={'resolution': n, 'reason': 'resolution must be >= 2'})
    return lattice_sum(spectral.coeffs * normalization(spectral.cutoff), n)


def circle_average_grid(spectral: SpectralField, n: int, eps: float) -> np.ndarray:
    """h_eps at every cell center of the n x n grid (boundary cells included)."""
    if n < 2:
        raise DimensionMismatchError.create(detail={'resolution': n, 'reason': 'resolution must be >= 2'})
    amplitudes = spectral.coeffs * normalization(spectral.cutoff) * bessel_multiplier(spectral.cutoff, eps)
    return lattice_sum(amplitudes, n)


def _sines(cutoff: int, coordinate: np.ndarray) -> np.ndarray:
    return np.sin(np.pi * coordinate[..., None] * _modes(cutoff))


def evaluate_at(spectral: SpectralField, z: ArrayLike, amplitudes: Optional[np.ndarray] = None) -> Real:
    """Direct summation of the series at arbitrary points."""
    points = as_points(z)
    if amplitudes is None:
        amplitudes = spectral.coeffs * normalization(spectral.cutoff)
    first = _sines(spectral.cutoff, points[..., 0])
    second = _sines(spectral.cutoff, points[..., 1])
    return _real(np.asarray(np.sum((first @ amplitudes) * second, axis=-1)))


def pair_h_f(spectral: SpectralField, f_coeffs: np.ndarray) -> float:
    """<h, f>_grad = sum a_{j,k} alpha_{j,k} for f = sum alpha_{j,k} e_{j,k}."""
    alpha = np.atleast_2d(np.asarray(f_coeffs, dtype=float))
    rows, cols = alpha.shape
    if rows > spectral.cutoff or cols > spectral.cutoff:
        raise DimensionMismatchError.create(detail={'cutoff': spectral.cutoff, 'shape': [rows, cols]})
    return float(np.sum(spectral.coeffs[:rows, :cols] * alpha))


def _ensure_clear_of_boundary(domain: DomainSpec, points: np.ndarray, eps: float) -> None:
    if eps <= 0 or np.any(domain.distance_to_boundary(points) < eps):
        distance = np.asarray(domain.distance_to_boundary(points)).tolist()
        raise BoundaryTooCloseError.create(detail={'points': points.tolist(), 'eps': eps, 'distance': distance})


def circle_average(spectral: SpectralField, z: ArrayLike, eps: float) -> Real:
    """h_eps(z), exact for the truncated series through the Bessel identity."""
    points = spectral.domain.ensure_inside(z)
    _ensure_clear_of_boundary(spectral.domain, points, eps)
    amplitudes = spectral.coeffs * normalization(spectral.cutoff) * bessel_multiplier(spectral.cutoff, eps)
    return evaluate_at(spectral, points, amplitudes)


def circle_average_kernel(cutoff: int, z: ArrayLike, eps: float, domain: DomainSpec = UNIT_SQUARE) -> np.ndarray:
    """The array k with h_eps(z) = sum(coeffs * k) for every field truncated at ``cutoff``."""
    point = domain.ensure_inside(z)
    _ensure_clear_of_boundary(domain, point, eps)
    weights = normalization(cutoff) * bessel_multiplier(cutoff, eps)
    return np.asarray(weights * np.outer(_sines(cutoff, point[0]), _sines(cutoff, point[1])))


def truncated_variance(cutoff: int, z: ArrayLike, eps: float) -> Real:
    """Var h_eps(z) for the series truncated at ``cutoff``."""
    points = as_points(z)
    weights = (normalization(cutoff) * bessel_multiplier(cutoff, eps)) ** 2
    first = _sines(cutoff, points[..., 0]) ** 2
    second = _sines(cutoff, points[..., 1]) ** 2
    return _real(np.asarray(np.sum((first @ weights) * second, axis=-1)))


def _circle_profile(cutoff: int, point: np.ndarray, coefficients: np.ndarray, radii: np.ndarray) -> np.ndarray:
    local = (coefficients * normalization(cutoff)) * np.outer(_sines(cutoff, point[0]), _sines(cutoff, point[1]))
    norms = mode_norms(cutoff).ravel()
    flat = local.ravel()
    return np.array([float(special.j0(np.pi * radius * norms) @ flat) for radius in radii])


def circle_process(spectral: SpectralField, z: ArrayLike, t_max: float, dt: float) -> CirclePath:
    """Y_t = h_{e^{-t}}(z) on t0, t0 + dt, ... <= t_max with t0 = log 1/dist(z, boundary)."""
    point = spectral.domain.ensure_inside(z)
    if dt <= 0:
        raise InvalidCutoffError.create(detail={'dt': dt, 'reason': 'dt must be positive'})
    t0 = float(np.log(1.0 / spectral.domain.distance_to_boundary(point)))
    if t_max <= t0:
        raise BoundaryTooCloseError.create(detail={'t_max': t_max, 't0': t0})
    times = t0 + dt * np.arange(int(np.floor((t_max - t0) / dt + 1e-9)) + 1)
    warn_if_truncated(spectral.cutoff, float(np.exp(-times[-1])))
    values = _circle_profile(spectral.cutoff, point, spectral.coeffs, np.exp(-times))
    return CirclePath(center=(float(point[0]), float(point[1])), t0=t0, times=times, values=values)


# discrete field


def _dgff_eigenvalues(n: int) -> np.ndarray:
    modes = np.arange(1, n)
    one_dimensional = 4.0 * np.sin(modes * np.pi / (2.0 * n)) ** 2
    return one_dimensional[:, None] + one_dimensional[None, :]


def sample_dgff(n: int, rng: RandomStream) -> DiscreteField:
    """Exact DGFF sample: independent Gaussians on the discrete sine modes, scaled by 1/sqrt(eigenvalue)."""
    if n < 2:
        raise InvalidCutoffError.create(detail={'grid_side': n, 'reason': 'grid side must be >= 2'})
    noise = rng.generator.standard_normal((n - 1, n - 1))
    values = np.zeros((n + 1, n + 1))
    values[1:-1, 1:-1] = fft.dstn(noise / np.sqrt(_dgff_eigenvalues(n)), type=1, norm='ortho')
    return DiscreteField(n=n, values=values, seed=rng.record())


def dirichlet_laplacian(n: int) -> csc_matrix:
    """Graph Laplacian of the lattice restricted to the (n-1)^2 interior vertices."""
    side = n - 1
    path = diags([-np.ones(side - 1), 2.0 * np.ones(side), -np.ones(side - 1)], [-1, 0, 1])
    eye = identity(side)
    return csc_matrix(kron(path, eye) + kron(eye, path))


@lru_cache(maxsize=8)
def _dirichlet_solver(n: int):  # type: ignore[no-untyped-def]
    return factorized(dirichlet_laplacian(n))


def _lattice_index(n: int, point: Iterable[int]) -> int:
    i1, i2 = (int(value) for value in point)
    if not (1 <= i1 <= n - 1 and 1 <= i2 <= n - 1):
        raise OutOfDomainError.create(detail={'grid_side': n, 'point': [i1, i2], 'reason': 'not an interior vertex'})
    return (i1 - 1) * (n - 1) + (i2 - 1)


def dgff_covariance(n: int, x: Tuple[int, int], y: Tuple[int, int]) -> float:
    """G_N(x, y) from a direct solve of the discrete Dirichlet problem; x, y are integer lattice indices."""
    if n < 2:
        raise InvalidCutoffError.create(detail={'grid_side': n})
    column = np.zeros((n - 1) ** 2)
    column[_lattice_index(n, y)] = 1.0
    solution = _dirichlet_solver(n)(column)
    return float(solution[_lattice_index(n, x)])


def dgff_covariance_matrix(n: int) -> np.ndarray:
    """Dense inverse Laplacian over interior vertices, flattened row-major in (i1, i2)."""
    return np.asarray(np.linalg.inv(dirichlet_laplacian(n).toarray()))


def dgff_center_variance(sides: Iterable[int]) -> List[float]:
    """G_N(center, center) for each even grid side N."""
    return [dgff_covariance(side, (side // 2, side // 2), (side // 2, side // 2)) for side in sides]
