"""Green's functions, regularized Green's functions and conformal radii.

Normalization: -(1/2pi) Laplacian G(x, .) = delta_x with Dirichlet boundary
conditions, so that G(x, y) ~ log 1/|x - y| on the diagonal.

On the unit square the Green's function is the double-sine series

    G(x, y) = sum_{j,k>=1} 8 / (pi (j^2 + k^2)) sin(j pi x1) sin(j pi y1) sin(k pi x2) sin(k pi y2).

``green_series`` evaluates it literally, truncated at ``cutoff``. ``green`` sums it
to infinity: the inner sum is a one-dimensional resolvent and the remaining sum
over j is a sum of logarithms, one per image of y in the second coordinate.
"""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from logging import getLogger
from typing import List, Optional, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial
from scipy import interpolate

from .errors import (
    BoundaryTooCloseError,
    CoincidentPointsError,
    DegenerateAngleError,
    InvalidCutoffError,
    OutOfDomainError,
)
from .utils import DEFAULT_GREEN_CUTOFF, DEFAULT_IMAGES

logger = getLogger(__name__)

ArrayLike = Union[float, Tuple[float, float], np.ndarray]
Real = Union[float, np.ndarray]

# Offsets 2^-4 ... 2^-9 used to extrapolate the harmonic part onto the diagonal.
CONFORMAL_RADIUS_OFFSETS = np.array([2.0**-k for k in range(4, 10)])
_UNIT_DIRECTIONS = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
# Grid side on which the harmonic part of the square is tabulated before spline interpolation.
HARMONIC_NODES = 64


class DomainKind(Enum):
    UNIT_SQUARE = 'unit_square'
    UNIT_DISC = 'unit_disc'


@dataclass(frozen=True)
class DomainSpec:
    kind: DomainKind = DomainKind.UNIT_SQUARE
    boundary_margin: float = 0.0

    @property
    def diameter(self) -> float:
        return float(np.sqrt(2.0)) if self.kind is DomainKind.UNIT_SQUARE else 2.0

    def distance_to_boundary(self, z: ArrayLike) -> np.ndarray:
        points = as_points(z)
        if self.kind is DomainKind.UNIT_DISC:
            return np.asarray(1.0 - np.hypot(points[..., 0], points[..., 1]))
        first = np.minimum(points[..., 0], 1.0 - points[..., 0])
        return np.asarray(np.minimum(first, np.minimum(points[..., 1], 1.0 - points[..., 1])))

    def contains(self, z: ArrayLike) -> np.ndarray:
        return np.asarray(self.distance_to_boundary(z) > self.boundary_margin * self.diameter)

    def ensure_inside(self, z: ArrayLike, name: str = 'z') -> np.ndarray:
        points = as_points(z)
        if not np.all(self.contains(points)):
            raise OutOfDomainError.create(
                detail={'domain': self.kind.value, 'argument': name, 'points': np.asarray(points).tolist()}
            )
        return points


UNIT_SQUARE = DomainSpec(DomainKind.UNIT_SQUARE)
UNIT_DISC = DomainSpec(DomainKind.UNIT_DISC)


def as_points(z: ArrayLike) -> np.ndarray:
    points = np.asarray(z, dtype=float)
    if points.shape[-1:] != (2,):
        raise OutOfDomainError.create(
            detail={'shape': list(points.shape), 'reason': 'points must have a last axis of size 2'}
        )
    return points


def _real(value: np.ndarray) -> Real:
    return float(value) if np.ndim(value) == 0 else value


def _log_abs_one_minus_exp(s: np.ndarray, u: np.ndarray) -> np.ndarray:
    """log |1 - exp(-pi (s + i u))|, i.e. minus the sum over j of cos(j pi u) exp(-j pi s) / j."""
    return np.log(np.abs(np.expm1(-np.pi * (s + 1j * u))))


def _square_image_shifts(x2: np.ndarray, y2: np.ndarray, images: int) -> List[Tuple[np.ndarray, float]]:
    low, high = np.minimum(x2, y2), np.maximum(x2, y2)
    shifts: List[Tuple[np.ndarray, float]] = []
    for m in range(images + 1):
        shifts.extend(
            [
                (high - low + 2 * m, 1.0),
                (high + low + 2 * m, -1.0),
                (2 - low - high + 2 * m, -1.0),
                (2 + low - high + 2 * m, 1.0),
            ]
        )
    return shifts


def _square_green(x: np.ndarray, y: np.ndarray, images: int, harmonic: bool) -> np.ndarray:
    u_minus = x[..., 0] - y[..., 0]
    u_plus = x[..., 0] + y[..., 0]
    total = np.zeros(np.broadcast(u_minus, x[..., 1], y[..., 1]).shape)
    for index, (shift, sign) in enumerate(_square_image_shifts(x[..., 1], y[..., 1], images)):
        total = total + sign * _log_abs_one_minus_exp(shift, u_plus)
        if index == 0 and harmonic:
            w = shift + 1j * u_minus
            small = np.abs(w) < 1e-9
            safe = np.where(small, 1.0, w)
            ratio = np.where(small, np.pi - 0.5 * np.pi**2 * w, -np.expm1(-np.pi * safe) / safe)
            total = total - np.log(np.abs(ratio))
        else:
            total = total - sign * _log_abs_one_minus_exp(shift, u_minus)
    return total


def _disc_green(x: np.ndarray, y: np.ndarray, harmonic: bool) -> np.ndarray:
    zx = x[..., 0] + 1j * x[..., 1]
    zy = y[..., 0] + 1j * y[..., 1]
    correction = np.log(np.abs(1.0 - np.conj(zx) * zy))
    if harmonic:
        return np.asarray(correction)
    return np.asarray(correction - np.log(np.abs(zx - zy)))


def _green_unchecked(domain: DomainSpec, x: np.ndarray, y: np.ndarray, images: int = DEFAULT_IMAGES) -> np.ndarray:
    if domain.kind is DomainKind.UNIT_DISC:
        return _disc_green(x, y, harmonic=False)
    return _square_green(x, y, images, harmonic=False)


def _harmonic_unchecked(domain: DomainSpec, x: np.ndarray, y: np.ndarray, images: int = DEFAULT_IMAGES) -> np.ndarray:
    if domain.kind is DomainKind.UNIT_DISC:
        return _disc_green(x, y, harmonic=True)
    return _square_green(x, y, images, harmonic=True)


def green(
    domain: DomainSpec, x: ArrayLike, y: ArrayLike, images: int = DEFAULT_IMAGES, cutoff: Optional[int] = None
) -> Real:
    """G_D(x, y); broadcasts over leading axes of ``x`` and ``y``.

    On the square, ``cutoff`` selects the double-sine series truncated at j, k <= cutoff
    instead of the resummed kernel.
    """
    px = domain.ensure_inside(x, 'x')
    py = domain.ensure_inside(y, 'y')
    if np.any(np.all(px - py == 0.0, axis=-1)):
        raise CoincidentPointsError.create(detail={'x': px.tolist(), 'y': py.tolist()})
    if cutoff is not None and domain.kind is DomainKind.UNIT_SQUARE:
        return _real(_series_unchecked(px, py, cutoff))
    return _real(_green_unchecked(domain, px, py, images))


@lru_cache(maxsize=8)
def _series_weights(cutoff: int) -> np.ndarray:
    modes = np.arange(1, cutoff + 1, dtype=float)
    weights = 8.0 / (np.pi * (modes[:, None] ** 2 + modes[None, :] ** 2))
    weights.setflags(write=False)
    return weights


def _series_unchecked(px: np.ndarray, py: np.ndarray, cutoff: int) -> np.ndarray:
    if cutoff < 1:
        raise InvalidCutoffError.create(detail={'cutoff': cutoff})
    modes = np.arange(1, cutoff + 1, dtype=float)
    first = np.sin(modes * np.pi * px[..., :1]) * np.sin(modes * np.pi * py[..., :1])
    second = np.sin(modes * np.pi * px[..., 1:]) * np.sin(modes * np.pi * py[..., 1:])
    return np.asarray(np.einsum('...j,jk,...k->...', first, _series_weights(cutoff), second))


def green_series(x: ArrayLike, y: ArrayLike, cutoff: int = DEFAULT_GREEN_CUTOFF) -> Real:
    """The square's double-sine series truncated at j, k <= cutoff.

    Truncation error is O(1 / (cutoff |x - y|)).
    """
    return green(UNIT_SQUARE, x, y, cutoff=cutoff)


def harmonic_part(domain: DomainSpec, x: ArrayLike, y: ArrayLike, images: int = DEFAULT_IMAGES) -> Real:
    """G~^x(y) = G(x, y) - log 1/|x - y|, continuous across y = x."""
    px = domain.ensure_inside(x, 'x')
    py = domain.ensure_inside(y, 'y')
    return _real(_harmonic_unchecked(domain, px, py, images))


def conformal_radius(domain: DomainSpec, z: ArrayLike) -> Real:
    """C(z, D) = exp G~^z(z).

    On the square the limit of G(z, y) + log|z - y| is taken numerically: the
    four-direction average over offsets r kills the odd and quadratic terms, and
    a cubic in r fitted over six dyadic offsets is evaluated at r = 0.
    """
    points = domain.ensure_inside(z)
    if domain.kind is DomainKind.UNIT_DISC:
        return _real(np.asarray(1.0 - np.sum(points**2, axis=-1)))
    flat = points.reshape(-1, 2)
    base = np.minimum(CONFORMAL_RADIUS_OFFSETS[0], 0.5 * domain.distance_to_boundary(flat))
    scaled = CONFORMAL_RADIUS_OFFSETS / CONFORMAL_RADIUS_OFFSETS[0]
    samples = np.empty((scaled.size, flat.shape[0]))
    for row, factor in enumerate(scaled):
        radius = base * factor
        values = [
            _green_unchecked(domain, flat, flat + radius[:, None] * direction) + np.log(radius)
            for direction in _UNIT_DIRECTIONS
        ]
        samples[row] = np.mean(values, axis=0)
    coefficients = polynomial.polyfit(scaled, samples, deg=3)
    log_radius = coefficients[0].reshape(points.shape[:-1])
    return _real(np.exp(log_radius))


@lru_cache(maxsize=16)
def conformal_radius_grid(domain: DomainSpec, n: int) -> np.ndarray:
    """C at the n x n cell centers ((i + 1/2)/n, (k + 1/2)/n); NaN where a center lies outside D."""
    centers = cell_centers(n)
    inside = domain.contains(centers)
    radius = np.full((n, n), np.nan)
    radius[inside] = conformal_radius(domain, centers[inside])
    radius.setflags(write=False)
    return radius


def cell_centers(n: int) -> np.ndarray:
    """Cell centers of the n x n grid on [0, 1]^2, indexed [i1, i2] -> (x1, x2)."""
    axis = (np.arange(n) + 0.5) / n
    first, second = np.meshgrid(axis, axis, indexing='ij')
    return np.stack([first, second], axis=-1)


def _ensure_regular_center(domain: DomainSpec, x: ArrayLike, eps: float) -> np.ndarray:
    if eps <= 0:
        raise BoundaryTooCloseError.create(detail={'eps': eps, 'reason': 'eps must be positive'})
    px = domain.ensure_inside(x, 'x')
    if np.any(domain.distance_to_boundary(px) < eps):
        raise BoundaryTooCloseError.create(
            detail={'x': px.tolist(), 'eps': eps, 'distance': np.asarray(domain.distance_to_boundary(px)).tolist()}
        )
    return px


def green_regularized(domain: DomainSpec, x: ArrayLike, y: ArrayLike, eps: float) -> Real:
    """G^x_eps(y) = log 1/(eps v |x - y|) + G~^x(y); ``y`` may be an array of points."""
    px = _ensure_regular_center(domain, x, eps)
    py = domain.ensure_inside(y, 'y')
    distance = np.hypot(*np.moveaxis(px - py, -1, 0))
    far = distance >= eps
    result = np.empty(np.shape(distance))
    px_b, py_b = np.broadcast_arrays(px, py)
    if np.any(far):
        result[far] = _green_unchecked(domain, px_b[far], py_b[far])
    near = ~far
    if np.any(near):
        result[near] = np.log(1.0 / eps) + _harmonic_unchecked(domain, px_b[near], py_b[near])
    return _real(result)


def green_regularized_grid(
    domain: DomainSpec, x: ArrayLike, n: int, eps: float, nodes: int = HARMONIC_NODES
) -> np.ndarray:
    """G^x_eps at the n x n cell centers, indexed like ``cell_centers(n)``.

    The harmonic part of the square is smooth up to the boundary: it is evaluated
    on a ``nodes`` x ``nodes`` grid of cell centers and read off a bicubic spline.
    """
    px = _ensure_regular_center(domain, x, eps)
    if px.shape != (2,):
        raise OutOfDomainError.create(detail={'shape': list(px.shape), 'reason': 'x must be a single point'})
    centers = cell_centers(n)
    if domain.kind is DomainKind.UNIT_DISC or n <= nodes:
        harmonic = _harmonic_unchecked(domain, px, centers)
    else:
        axis = (np.arange(nodes) + 0.5) / nodes
        coarse = _harmonic_unchecked(domain, px, cell_centers(nodes))
        spline = interpolate.RectBivariateSpline(axis, axis, coarse, bbox=[0.0, 1.0, 0.0, 1.0])
        fine = (np.arange(n) + 0.5) / n
        harmonic = spline(fine, fine)
    distance = np.hypot(centers[..., 0] - px[0], centers[..., 1] - px[1])
    return np.asarray(-np.log(np.maximum(distance, eps)) + harmonic)


def sphere_green(theta: Real) -> Real:
    """log cot(theta / 2): the sphere Green's function in terms of the angle between the two points."""
    angle = np.asarray(theta, dtype=float)
    if np.any(angle <= 0.0) or np.any(angle >= np.pi):
        raise DegenerateAngleError.create(detail={'theta': angle.tolist(), 'range': '(0, pi)'})
    return _real(np.asarray(-np.log(np.tan(angle / 2.0))))
