"""Monte Carlo assertion helpers shared by the verification checks and the test-suite."""
from typing import Tuple, Union
from unittest.mock import AsyncMock, MagicMock, Mock

import numpy as np
from scipy import stats

__all__ = ('AsyncMock', 'MagicMock', 'Mock', 'mean_stderr', 'median_stderr', 'within')

Number = Union[float, np.ndarray]


def mean_stderr(samples: np.ndarray, axis: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Sample mean and its standard error along ``axis`` (zero error for a single sample)."""
    values = np.asarray(samples, dtype=float)
    count = values.shape[axis]
    mean = values.mean(axis=axis)
    if count < 2:
        return mean, np.zeros_like(mean)
    return mean, values.std(axis=axis, ddof=1) / np.sqrt(count)


def median_stderr(
    samples: np.ndarray, generator: np.random.Generator, axis: int = 0, resamples: int = 1000
) -> Tuple[np.ndarray, np.ndarray]:
    """Sample median and its bootstrap standard error along ``axis``."""
    values = np.asarray(samples, dtype=float)
    median = np.median(values, axis=axis)
    if values.shape[axis] < 2:
        return median, np.zeros_like(median)
    spread = stats.bootstrap(
        (values,),
        np.median,
        n_resamples=resamples,
        axis=axis,
        vectorized=True,
        method='percentile',
        random_state=generator,
    )
    return median, np.asarray(spread.standard_error)


def within(estimate: Number, target: Number, stderr: Number = 0.0, tolerance: float = 0.0, sigmas: float = 3.0) -> bool:
    """|estimate - target| <= tolerance + sigmas * stderr, elementwise."""
    gap = np.abs(np.asarray(estimate) - np.asarray(target))
    return bool(np.all(gap <= tolerance + sigmas * np.asarray(stderr)))
