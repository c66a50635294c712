import pytest

from aiolqg.errors import RunIdInvalidError, SeedInvalidError, TimestampInvalidError
from aiolqg.value_objects import RunId, Seed, Timestamp


def test_run_id_fails_with_invalid_uuid() -> None:
    pytest.raises(RunIdInvalidError, lambda: RunId('0'))


def test_run_id_is_not_valid() -> None:
    assert not RunId.validate('0')


def test_run_id_generated_is_valid() -> None:
    run_id = RunId.generate()
    assert RunId.validate(run_id.value())
    assert run_id.value() == str(run_id)


@pytest.mark.parametrize('value', [-1, 2**64, 'seed', 1.5e30])
def test_seed_rejects_values_outside_64_bits(value: object) -> None:
    pytest.raises(SeedInvalidError, lambda: Seed(value))  # type: ignore[arg-type]
    assert not Seed.validate(value)  # type: ignore[arg-type]


def test_seed_accepts_the_full_unsigned_range() -> None:
    assert int(Seed(0)) == 0
    assert Seed('18446744073709551615').value() == 2**64 - 1
    assert Seed(7) == Seed('7')
    assert len({Seed(7), Seed(7)}) == 1


def test_timestamp_fails_with_invalid_value() -> None:
    pytest.raises(TimestampInvalidError, lambda: Timestamp(float('nan')))


def test_timestamp_measures_elapsed_seconds() -> None:
    start = Timestamp(1_000.0)
    assert start.seconds_until(Timestamp(1_002.5)) == 2.5
    assert start.isoformat() == '1970-01-01T00:16:40+00:00'
