"""Named verification checks run by ``aiolqg verify``.

Every check returns rows of (target, estimate, stderr, tolerance); a row passes
when |estimate - target| <= tolerance + 3 stderr unless the check decides otherwise.
Monte Carlo sizes default to the full acceptance sizes; ``replicates`` overrides them.
"""
from dataclasses import dataclass
from logging import getLogger
from math import gamma as gamma_function
from math import comb
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import CheckNotRegisteredError
from .fitting import fit_log_log, log_point
from .geometry import UNIT_DISC, UNIT_SQUARE, DomainSpec, conformal_radius, green, green_series
from .gff import (
    circle_average_kernel,
    circle_process,
    cutoff_for,
    dgff_center_variance,
    dgff_covariance_matrix,
    sample_dgff,
    sample_spectral_gff,
)
from .kpz import (
    ISING,
    PURE_GRAVITY,
    FirstPassageScheme,
    RootMode,
    beta_of_x,
    count_quadrangulations,
    euclidean_exponent,
    first_passage_oracle,
    kpz_formula,
    kpz_inverse,
    quantum_exponent,
    segment,
)
from .liouville import (
    ball_mass_log_ratio,
    build_measure,
    build_rooted_measure,
    cauchy_diagnostic,
    first_moment_limit,
    measure_apply,
    root_shift,
    rooted_ball_mass,
    second_moment_quadrature,
)
from .rng import RandomStream, run_replicates, stream
from .testing import mean_stderr, median_stderr, within
from .utils import DEFAULT_GREEN_CUTOFF

logger = getLogger(__name__)

SIGMAS = 3.0
# C(center, [0,1]^2) = Gamma(1/4)^2 / (4 pi^{3/2})
SQUARE_CENTER_RADIUS = gamma_function(0.25) ** 2 / (4.0 * np.pi**1.5)


class CheckResult(NamedTuple):
    name: str
    target: float
    estimate: float
    stderr: float
    tolerance: float
    passed: bool

    @property
    def verdict(self) -> str:
        return 'PASS' if self.passed else 'FAIL'

    def row(self) -> Dict[str, object]:
        return {**self._asdict(), 'verdict': self.verdict}


RESULT_FIELDS = ('name', 'target', 'estimate', 'stderr', 'tolerance', 'verdict')


def result(name: str, target: float, estimate: float, stderr: float = 0.0, tolerance: float = 0.0) -> CheckResult:
    passed = within(estimate, target, stderr, tolerance, SIGMAS)
    return CheckResult(name, float(target), float(estimate), float(stderr), float(tolerance), passed)


@dataclass(frozen=True)
class CheckContext:
    seed: int = 0
    replicates: Optional[int] = None
    workers: Optional[int] = None
    green_cutoff: int = DEFAULT_GREEN_CUTOFF

    def size(self, default: int) -> int:
        return self.replicates or default

    def rng(self, index: int = 0) -> RandomStream:
        return stream(self.seed).child(index)


CheckFunction = Callable[[CheckContext], List[CheckResult]]


@dataclass(frozen=True)
class Check:
    name: str
    description: str
    run: CheckFunction


CHECKS: Dict[str, Check] = {}


def check(name: str, description: str) -> Callable[[CheckFunction], CheckFunction]:
    def register(fn: CheckFunction) -> CheckFunction:
        CHECKS[name] = Check(name, description, fn)
        return fn

    return register


def find_check(name: str) -> Check:
    try:
        return CHECKS[name]
    except KeyError as err:
        raise CheckNotRegisteredError.create(detail={'check': name, 'known': list(CHECKS)}).with_exception(err)


def run_checks(names: Sequence[str], context: CheckContext) -> List[CheckResult]:
    selected = [find_check(name) for name in (names or list(CHECKS))]
    results: List[CheckResult] = []
    for item in selected:
        logger.info('Running check %s', item.name)
        rows = item.run(context)
        for row in rows:
            logger.info('%s: %s (estimate %.6g, target %.6g)', row.name, row.verdict, row.estimate, row.target)
        results.extend(rows)
    return results


def bump(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """A C^1 test function supported on [1/4, 3/4]^2."""

    def profile(t: np.ndarray) -> np.ndarray:
        return np.where(np.abs(t - 0.5) < 0.25, np.sin(2.0 * np.pi * (t - 0.25)) ** 2, 0.0)

    return np.asarray(profile(np.asarray(x1)) * profile(np.asarray(x2)))


_DIRECTIONS = ((1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0))


def _diagonal_error(domain: DomainSpec, points: Sequence[Tuple[float, float]], offsets: Sequence[float]) -> float:
    worst = 0.0
    for z in points:
        log_radius = float(np.log(conformal_radius(domain, z)))
        for r in offsets:
            values = [float(green(domain, z, (z[0] + r * d[0], z[1] + r * d[1]))) + np.log(r) for d in _DIRECTIONS]
            worst = max(worst, abs(float(np.mean(values)) - log_radius))
    return worst


@check('green-diagonal', 'G(x, y) + log|x - y| tends to log C(x, D) on the diagonal')
def green_diagonal(_: CheckContext) -> List[CheckResult]:
    offsets = (2.0**-8, 2.0**-9, 2.0**-10)
    square = _diagonal_error(UNIT_SQUARE, ((0.5, 0.5), (0.3, 0.6), (0.2, 0.25)), offsets)
    disc = _diagonal_error(UNIT_DISC, ((0.0, 0.0), (0.3, -0.2)), offsets)
    center = float(conformal_radius(UNIT_SQUARE, (0.5, 0.5)))
    return [
        result('green-diagonal[square-center-radius]', SQUARE_CENTER_RADIUS, center, tolerance=1e-3),
        result('green-diagonal[square]', 0.0, square, tolerance=1e-3),
        result('green-diagonal[disc]', 0.0, disc, tolerance=1e-3),
    ]


@check('green-symmetry', 'G(x, y) = G(y, x); the truncated sine series agrees with the resummed kernel')
def green_symmetry(context: CheckContext) -> List[CheckResult]:
    points = context.rng().generator.uniform(0.05, 0.95, size=(2, 200, 2))
    forward = np.asarray(green(UNIT_SQUARE, points[0], points[1]))
    backward = np.asarray(green(UNIT_SQUARE, points[1], points[0]))
    pairs = (((0.3, 0.4), (0.6, 0.7)), ((0.5, 0.5), (0.2, 0.8)), ((0.1, 0.3), (0.35, 0.3)))
    cutoff = context.green_cutoff
    series = max(abs(float(green_series(x, y, cutoff)) - float(green(UNIT_SQUARE, x, y))) for x, y in pairs)
    return [
        result('green-symmetry[swap]', 0.0, float(np.max(np.abs(forward - backward))), tolerance=1e-10),
        # truncation error is O(1 / (cutoff |x - y|))
        result(f'green-symmetry[series;M={cutoff}]', 0.0, series, tolerance=40.0 / cutoff),
    ]


@check('var-circle-average', 'Var h_eps(z) = log 1/eps + log C(z, D)')
def var_circle_average(context: CheckContext) -> List[CheckResult]:
    radii = [2.0**-k for k in range(3, 7)]
    points = ((0.5, 0.5), (0.3, 0.6))
    cutoff = cutoff_for(min(radii))
    kernels = np.array([[circle_average_kernel(cutoff, z, eps) for eps in radii] for z in points])
    replicates = context.size(10_000)

    def replicate(rng: RandomStream) -> np.ndarray:
        coeffs = sample_spectral_gff(cutoff, rng).coeffs
        return np.tensordot(kernels, coeffs, axes=([2, 3], [0, 1]))

    samples = np.array(run_replicates(replicate, context.seed, replicates, context.workers))
    variance = samples.var(axis=0, ddof=1)
    stderr = variance * np.sqrt(2.0 / (replicates - 1))
    rows = []
    for p, z in enumerate(points):
        log_radius = float(np.log(conformal_radius(UNIT_SQUARE, z)))
        for e, eps in enumerate(radii):
            target = np.log(1.0 / eps) + log_radius
            name = f'var-circle-average[z={z[0]:g},{z[1]:g};eps={eps:g}]'
            rows.append(result(name, target, variance[p, e], stderr[p, e], tolerance=0.03 * target))
    return rows


@check('bm-circle-average', 'circle averages h_{e^-t}(z) - h_{e^-t0}(z) form a standard Brownian motion')
def bm_circle_average(context: CheckContext) -> List[CheckResult]:
    center = (0.5, 0.5)
    t0 = float(np.log(2.0))
    cutoff = cutoff_for(0.5 * np.exp(-2.0))

    def replicate(rng: RandomStream) -> np.ndarray:
        path = circle_process(sample_spectral_gff(cutoff, rng), center, t0 + 2.0, 1.0)
        return path.increments[1:]

    samples = np.array(run_replicates(replicate, context.seed, context.size(10_000), context.workers))
    count = samples.shape[0]
    variance = samples.var(axis=0, ddof=1)
    var_stderr = variance * np.sqrt(2.0 / (count - 1))
    products = samples[:, 0] * samples[:, 1]
    covariance, cov_stderr = mean_stderr(products)
    return [
        result('bm-circle-average[var-B1]', 1.0, variance[0], var_stderr[0], tolerance=0.05),
        result('bm-circle-average[var-B2]', 2.0, variance[1], var_stderr[1], tolerance=0.10),
        result('bm-circle-average[cov-B1-B2]', 1.0, float(covariance), float(cov_stderr)),
    ]


@check('dgff-exact', 'DGFF sample covariance matches the inverse lattice Laplacian entrywise')
def dgff_exact(context: CheckContext) -> List[CheckResult]:
    side = 8
    samples = np.array(
        run_replicates(
            lambda rng: sample_dgff(side, rng).interior.ravel(),
            context.seed,
            context.size(100_000),
            context.workers,
        )
    )
    count = samples.shape[0]
    exact = dgff_covariance_matrix(side)
    empirical = np.cov(samples, rowvar=False)
    diagonal = np.diag(exact)
    stderr = np.sqrt((np.outer(diagonal, diagonal) + exact**2) / count)
    upper = np.triu_indices_from(exact)
    inside = np.abs(empirical - exact)[upper] <= SIGMAS * stderr[upper]
    # at most 1% of the entries may fall outside their 3-sigma band
    return [result('dgff-exact[fraction-within-3-sigma]', 1.0, float(np.mean(inside)), tolerance=0.01)]


@check('dgff-log-growth', 'DGFF center variance grows like (1/2 pi) log N')
def dgff_log_growth(_: CheckContext) -> List[CheckResult]:
    sides = [16, 32, 64, 128, 256]
    variance = np.array(dgff_center_variance(sides))
    logs = np.log(sides)
    slope, intercept = np.polyfit(logs, variance, 1)
    residuals = variance - (slope * logs + intercept)
    r_squared = 1.0 - np.sum(residuals**2) / np.sum((variance - variance.mean()) ** 2)
    target = 1.0 / (2.0 * np.pi)
    return [
        result('dgff-log-growth[r-squared]', 1.0, float(r_squared), tolerance=0.01),
        result('dgff-log-growth[slope]', target, float(slope), tolerance=0.05 * target),
    ]


@check('measure-first-moment', 'E mu_eps(phi) = int phi C^{gamma^2/2} for every eps at gamma = 1')
def measure_first_moment(context: CheckContext) -> List[CheckResult]:
    gamma = 1.0
    levels = [6, 7, 8]
    cutoff = cutoff_for(2.0 ** -levels[-1], max_cutoff=4096)

    def replicate(rng: RandomStream) -> List[float]:
        spectral = sample_spectral_gff(cutoff, rng)
        return [measure_apply(build_measure(spectral, gamma, 2**k), bump) for k in levels]

    samples = np.array(run_replicates(replicate, context.seed, context.size(2_000), context.workers))
    mean, stderr = mean_stderr(samples)
    target = first_moment_limit(bump, gamma, n=256)
    rows = [result(f'measure-first-moment[eps=2^-{k}]', target, mean[i], stderr[i]) for i, k in enumerate(levels)]
    # coarsest against finest level on the same fields
    drift, drift_stderr = mean_stderr(samples[:, 0] - samples[:, -1])
    rows.append(result('measure-first-moment[eps-invariance]', 0.0, float(drift), float(drift_stderr)))
    return rows


@check('measure-second-moment', 'E mu_eps(phi)^2 at eps = 2^-7 matches the double integral of exp(gamma^2 G)')
def measure_second_moment(context: CheckContext) -> List[CheckResult]:
    gammas = (0.5, 1.0)
    n = 128
    cutoff = cutoff_for(1.0 / n)

    def replicate(rng: RandomStream) -> List[float]:
        spectral = sample_spectral_gff(cutoff, rng)
        return [measure_apply(build_measure(spectral, gamma, n), bump) ** 2 for gamma in gammas]

    samples = np.array(run_replicates(replicate, context.seed, context.size(1_000), context.workers))
    mean, stderr = mean_stderr(samples)
    rows = []
    for i, gamma in enumerate(gammas):
        reference = second_moment_quadrature(bump, gamma)
        tolerance = 0.05 * reference.value + reference.error
        rows.append(result(f'measure-second-moment[gamma={gamma:g}]', reference.value, mean[i], stderr[i], tolerance))
    return rows


@check('cauchy-l2', 'coupled differences E(mu_{2^-k} - mu_{2^-k-1})^2 strictly decrease over k = 3..7 at gamma = 1')
def cauchy_l2(context: CheckContext) -> List[CheckResult]:
    gamma = 1.0
    diagnostic = cauchy_diagnostic(gamma, bump, k_max=7, replicates=context.size(200), seed=context.seed, k_min=3)
    rows = []
    for step in diagnostic.steps:
        passed = step.drop > SIGMAS * step.stderr
        rows.append(CheckResult(f'cauchy-l2[drop;k={step.k}]', 0.0, step.drop, step.stderr, 0.0, passed))
    points = [log_point(2.0**-row.k, row.mean_square, row.stderr) for row in diagnostic.rows]
    fit = fit_log_log(points)
    # positive slope in log 2^-k means the differences shrink as k grows
    passed = fit.slope - SIGMAS * fit.slope_stderr > 0.0
    rows.append(CheckResult('cauchy-l2[decay-rate]', 2.0 - gamma**2, fit.slope, fit.slope_stderr, 0.0, passed))
    return rows


@check('rooted-ball-scaling', 'E mu^z(B_r(z)) ~ r^{2 - gamma^2}; the median ball-mass ratio is flat in r')
def rooted_ball_scaling(context: CheckContext) -> List[CheckResult]:
    gammas = (0.5, 1.0)
    n = 256
    root = (0.5, 0.5)
    radii = [2.0**-k for k in range(3, 7)]
    cutoff = cutoff_for(1.0 / n)

    def replicate(rng: RandomStream) -> np.ndarray:
        spectral = sample_spectral_gff(cutoff, rng)
        values = []
        for gamma in gammas:
            rooted = root_shift(spectral, root, gamma)
            measure = build_rooted_measure(rooted, n)
            values.append(
                [
                    [rooted_ball_mass(rooted, r, n, measure) for r in radii],
                    [ball_mass_log_ratio(rooted, r, n, measure) for r in radii],
                ]
            )
        return np.array(values)

    samples = np.array(run_replicates(replicate, context.seed, context.size(200), context.workers))
    mean, stderr = mean_stderr(samples[:, :, 0])
    median, median_error = median_stderr(samples[:, :, 1], context.rng(1).generator)
    rows = []
    for i, gamma in enumerate(gammas):
        points = [log_point(r, mean[i, j], stderr[i, j]) for j, r in enumerate(radii)]
        fit = fit_log_log(points)
        ratios = median[i]
        half_range = float(np.max(ratios) - np.min(ratios)) / 2.0
        rows.append(
            result(f'rooted-ball-scaling[gamma={gamma:g};slope]', 2.0 - gamma**2, fit.slope, fit.slope_stderr, 0.1)
        )
        rows.append(
            result(f'rooted-ball-scaling[gamma={gamma:g};ratio]', 0.0, half_range, float(np.max(median_error[i])), 0.15)
        )
    return rows


@check('fp-oracle', 'E exp(-2x T_delta) = delta^{beta/gamma} for the drifted Brownian passage time')
def fp_oracle(context: CheckContext) -> List[CheckResult]:
    paths = context.size(100_000)
    rows = []
    grid = [(g, x, d) for g in (0.5, 1.0, 1.5) for x in (0.25, 0.5, 1.0) for d in (0.1, 0.01)]
    for index, (gamma, x, delta) in enumerate(grid):
        outcome = first_passage_oracle(gamma, x, delta, paths, 1e-3, context.rng(index), FirstPassageScheme.EULER)
        name = f'fp-oracle[gamma={gamma:g};x={x:g};delta={delta:g}]'
        rows.append(result(name, outcome.analytic, outcome.mc_estimate, outcome.stderr))
    return rows


@check('kpz-fixed-points', 'Delta = 0 and Delta = 1 are fixed by the KPZ relation for every gamma')
def kpz_fixed_points(_: CheckContext) -> List[CheckResult]:
    gammas = (0.0, 0.5, 1.0, PURE_GRAVITY, ISING, 1.99)
    error = max(max(abs(kpz_formula(g, 0.0)), abs(kpz_formula(g, 1.0) - 1.0)) for g in gammas)
    return [result('kpz-fixed-points', 0.0, error)]


@check('kpz-analytic', 'closed-form values, inverse round trip and the beta parametrization of the KPZ relation')
def kpz_analytic(context: CheckContext) -> List[CheckResult]:
    generator = context.rng().generator
    gammas = generator.uniform(0.0, 2.0, size=100)
    xs = generator.uniform(0.0, 2.0, size=100)
    round_trip = max(abs(kpz_formula(g, kpz_inverse(g, x)) - x) for g, x in zip(gammas, xs))
    positive = gammas[gammas > 0]
    identity = max(abs(beta_of_x(g, x) / g - kpz_inverse(g, x)) for g, x in zip(positive, xs))
    limit = max(abs(kpz_formula(1e-6, d) - d) for d in np.linspace(0.0, 1.0, 101))
    return [
        result('kpz-analytic[frontier]', 1.0 / 3.0, kpz_formula(PURE_GRAVITY, 0.5), tolerance=1e-12),
        result('kpz-analytic[cut-points]', 5.0 / 8.0, kpz_formula(PURE_GRAVITY, 0.75), tolerance=1e-12),
        result('kpz-analytic[inverse-gamma-1]', (np.sqrt(17.0) - 3.0) / 2.0, kpz_inverse(1.0, 0.5), tolerance=1e-12),
        result('kpz-analytic[round-trip]', 0.0, round_trip, tolerance=1e-12),
        result('kpz-analytic[beta-identity]', 0.0, identity, tolerance=1e-12),
        result('kpz-analytic[small-gamma]', 0.0, limit, tolerance=1e-6),
    ]


@check('kpz-end-to-end', 'Euclidean and quantum exponents of a segment satisfy the KPZ relation at gamma = 1')
def kpz_end_to_end(context: CheckContext) -> List[CheckResult]:
    gamma = 1.0
    target_set = segment()
    scales = [2.0**-k for k in range(6, 11)]
    deltas = [2.0**-k for k in range(6, 13, 2)]
    replicates = context.size(200)
    n = 256
    # pi M eps >= 50 at eps = 1/n
    cutoff = cutoff_for(1.0 / n, max_cutoff=4096)
    euclid = euclidean_exponent(target_set, scales, 2**17, context.rng(0))
    fits = {
        mode: quantum_exponent(
            target_set, gamma, deltas, replicates, n, context.seed, mode, cutoff=cutoff, workers=context.workers
        ).fit
        for mode in (RootMode.SAMPLE_FROM_MEASURE, RootMode.ROOTED_DENSITY)
    }
    expected = kpz_inverse(gamma, 0.5)
    measure, rooted = fits[RootMode.SAMPLE_FROM_MEASURE], fits[RootMode.ROOTED_DENSITY]
    joint = float(np.hypot(measure.slope_stderr, rooted.slope_stderr))
    return [
        result('kpz-end-to-end[euclidean]', 0.5, euclid.slope, tolerance=0.02),
        result('kpz-end-to-end[quantum-measure]', expected, measure.slope, tolerance=0.1),
        result('kpz-end-to-end[quantum-rooted]', expected, rooted.slope, tolerance=0.1),
        result('kpz-end-to-end[root-modes-agree]', 0.0, measure.slope - rooted.slope, joint),
    ]


@check('count-quads', 'rooted quadrangulations with n faces: 2, 9, 54, ... in exact integer arithmetic')
def count_quads(_: CheckContext) -> List[CheckResult]:
    small = [count_quadrangulations(n) for n in (1, 2, 3)]
    large = count_quadrangulations(200)
    exact = large * 201 * 202 == 2 * 3**200 * comb(400, 200)
    rows = [result(f'count-quads[n={n}]', expected, value) for n, expected, value in zip((1, 2, 3), (2, 9, 54), small)]
    rows.append(CheckResult('count-quads[n=200-exact]', 1.0, float(exact), 0.0, 0.0, bool(exact)))
    return rows
