from typing import Optional

import pytest

from aiolqg.checks import CheckContext, find_check, run_checks


@pytest.mark.parametrize('name', ['green-diagonal', 'green-symmetry', 'dgff-log-growth'])
def test_deterministic_checks_pass(name: str) -> None:
    rows = find_check(name).run(CheckContext(seed=0))
    assert rows
    assert all(row.passed for row in rows), [row for row in rows if not row.passed]


def test_dgff_covariance_check_at_reduced_size() -> None:
    rows = run_checks(['dgff-exact'], CheckContext(seed=1, replicates=20_000))
    assert [row.name for row in rows] == ['dgff-exact[fraction-within-3-sigma]']
    assert rows[0].passed


def test_circle_average_increments_at_reduced_size() -> None:
    rows = run_checks(['bm-circle-average'], CheckContext(seed=2, replicates=2_000))
    assert len(rows) == 3
    assert all(row.passed for row in rows), rows


def test_first_passage_oracle_grid_at_reduced_size() -> None:
    rows = run_checks(['fp-oracle'], CheckContext(seed=3, replicates=30_000))
    assert len(rows) == 18
    assert all(row.passed for row in rows), [row for row in rows if not row.passed]


@pytest.mark.parametrize(
    'name, replicates, count',
    [
        ('var-circle-average', 2_000, 8),
        ('measure-first-moment', 100, 4),
        ('measure-second-moment', 200, 2),
        ('cauchy-l2', None, 5),
        ('rooted-ball-scaling', 100, 4),
    ],
)
def test_statistical_checks_at_reduced_size(name: str, replicates: Optional[int], count: int) -> None:
    rows = run_checks([name], CheckContext(seed=4, replicates=replicates))
    assert len(rows) == count
    assert all(row.passed for row in rows), [row for row in rows if not row.passed]
