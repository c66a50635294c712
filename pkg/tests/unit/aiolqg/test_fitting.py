import numpy as np
import pytest

from aiolqg.errors import BadRequestError, InsufficientScalesError
from aiolqg.fitting import ScalePoint, fit_log_log, log_point


def _line(slope: float, intercept: float, stderr: float = 0.0) -> list:
    return [ScalePoint(scale, intercept + slope * scale, stderr) for scale in (-6.0, -5.0, -4.0, -3.0)]


def test_exact_points_give_an_exact_unweighted_fit() -> None:
    fit = fit_log_log(_line(0.5, 2.0))
    assert fit.slope == pytest.approx(0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(2.0, abs=1e-12)
    assert fit.slope_stderr == pytest.approx(0.0, abs=1e-10)
    assert np.allclose(fit.residuals(), 0.0, atol=1e-12)


def test_weighted_fit_reports_the_propagated_slope_error() -> None:
    fit = fit_log_log(_line(-1.25, 0.3, stderr=0.1))
    assert fit.slope == pytest.approx(-1.25)
    # unscaled covariance: 0.1 / sqrt(sum (s - mean s)^2) with spread 5
    assert fit.slope_stderr == pytest.approx(0.1 / np.sqrt(5.0))


def test_fit_needs_three_scales() -> None:
    pytest.raises(InsufficientScalesError, lambda: fit_log_log(_line(1.0, 0.0)[:2]))


def test_fits_agree_within_the_joint_error() -> None:
    first = fit_log_log(_line(0.5, 0.0, stderr=0.1))
    second = fit_log_log(_line(0.6, 0.0, stderr=0.1))
    assert first.agrees_with(second)
    assert not first.agrees_with(second, sigmas=0.1)


def test_fit_to_dict() -> None:
    fit = fit_log_log(_line(0.5, 2.0), meta={'samples': 10.0})
    payload = fit.to_dict()
    assert payload['meta'] == {'samples': 10.0}
    first = {'log_scale': -6.0, 'log_estimate': -1.0, 'stderr': 0.0, 'samples': 0, 'discarded': 0}
    assert payload['points'][0] == first
    assert fit.scales == [-6.0, -5.0, -4.0, -3.0]


def test_log_point_uses_the_relative_error() -> None:
    scale_point = log_point(4.0, np.e, 0.1 * np.e, samples=7)
    assert scale_point.log_scale == pytest.approx(np.log(4.0))
    assert scale_point.log_estimate == pytest.approx(1.0)
    assert scale_point.stderr == pytest.approx(0.1)
    assert scale_point.samples == 7
    pytest.raises(BadRequestError, lambda: log_point(0.5, 0.0, 0.1))
