from datetime import datetime, timezone
from time import time
from typing import Union
from uuid import UUID, uuid4

from .errors import RunIdInvalidError, SeedInvalidError, TimestampInvalidError

_SEED_LIMIT = 2**64


class RunId:
    __slots__ = '_value'

    def __init__(self, value: str) -> None:
        try:
            self._value = str(UUID(value))
        except Exception as err:
            raise RunIdInvalidError.create(detail={'run_id': value}).with_exception(err)

    @classmethod
    def generate(cls) -> 'RunId':
        return cls(str(uuid4()))

    @staticmethod
    def validate(value: str) -> bool:
        try:
            RunId(value)
            return True
        except RunIdInvalidError:
            return False

    def value(self) -> str:
        return self._value

    def __str__(self) -> str:
        return self._value


class Seed:
    """A 64-bit unsigned seed; the root of every random stream of a run."""

    __slots__ = '_value'

    def __init__(self, value: Union[int, str]) -> None:
        try:
            parsed = int(value)
        except Exception as err:
            raise SeedInvalidError.create(detail={'seed': str(value)}).with_exception(err)
        if not 0 <= parsed < _SEED_LIMIT:
            raise SeedInvalidError.create(detail={'seed': parsed, 'limit': _SEED_LIMIT})
        self._value = parsed

    @staticmethod
    def validate(value: Union[int, str]) -> bool:
        try:
            Seed(value)
            return True
        except SeedInvalidError:
            return False

    def value(self) -> int:
        return self._value

    def __int__(self) -> int:
        return self._value

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Seed) and other.value() == self._value

    def __hash__(self) -> int:
        return hash(self._value)


class Timestamp:
    __slots__ = '_value'

    def __init__(self, value: float) -> None:
        try:
            datetime.fromtimestamp(value, tz=timezone.utc)
            self._value = float(value)
        except Exception as err:
            raise TimestampInvalidError.create(detail={'timestamp': value}).with_exception(err)

    @classmethod
    def now(cls) -> 'Timestamp':
        return cls(time())

    def seconds_until(self, other: 'Timestamp') -> float:
        return other.value() - self._value

    def isoformat(self) -> str:
        return datetime.fromtimestamp(self._value, tz=timezone.utc).isoformat()

    def value(self) -> float:
        return self._value
