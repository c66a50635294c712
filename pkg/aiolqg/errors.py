from json import dumps
from typing import Any, Dict, Optional
from uuid import uuid4


class BaseError(Exception):
    _id: str
    _code: str = 'code'
    _title: str = 'title'
    _detail: str
    _meta: Dict[str, Any]

    def __init__(self, *args, **kwargs) -> None:  # type: ignore
        super().__init__(*args)
        self._id = kwargs.get('id', str(uuid4()))
        self._code = kwargs.get('code', self._code)
        self._title = kwargs.get('title', self._title)
        self._detail = dumps(kwargs.get('detail', {}), default=str)
        self._meta = kwargs.get('meta', {})
        self.ensure_there_is_not_a_system_exit()

    @classmethod
    def create(
        cls,
        detail: Optional[Dict[str, Any]] = None,
        meta: Optional[Dict[str, Any]] = None,
        **kwargs: Dict[str, Any],
    ) -> 'BaseError':
        return cls(detail=detail or {}, meta=meta or {}, **kwargs)

    def with_exception(self, err: BaseException) -> 'BaseError':
        self._meta.update({'exception': str(err), 'exception_type': str(type(err))})
        self.ensure_there_is_not_a_system_exit()
        return self

    def ensure_there_is_not_a_system_exit(self) -> None:
        if self._meta.get('exception_type', None) == '<class \'SystemExit\'>':
            raise SystemExit(self._meta.get('exception'))

    def id(self) -> str:
        return self._id

    def code(self) -> str:
        return self._code

    def title(self) -> str:
        return self._title

    def detail(self) -> str:
        return self._detail

    def meta(self) -> Dict[str, Any]:
        return self._meta

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self._id,
            'code': self._code,
            'title': self._title,
            'detail': self._detail,
            'meta': self._meta,
        }

    def __str__(self) -> str:
        return dumps(self.to_dict(), indent=2, default=str)


class NotFoundError(BaseError):
    _code = 'not_found'
    _title = 'Not found'


class BadRequestError(BaseError):
    _code = 'bad_request'
    _title = 'Bad Request'


class UnknownError(BaseError):
    _code = 'unknown'
    _title = 'Unknown error'


# geometry


class CoincidentPointsError(BadRequestError):
    _code = 'coincident_points'
    _title = 'Coincident points'


class OutOfDomainError(BadRequestError):
    _code = 'out_of_domain'
    _title = 'Point outside the domain'


class BoundaryTooCloseError(BadRequestError):
    _code = 'boundary_too_close'
    _title = 'Too close to the boundary'


class DegenerateAngleError(BadRequestError):
    _code = 'degenerate_angle'
    _title = 'Degenerate angle'


# fields and measures


class InvalidCutoffError(BadRequestError):
    _code = 'invalid_cutoff'
    _title = 'Invalid cutoff'


class DimensionMismatchError(BadRequestError):
    _code = 'dimension_mismatch'
    _title = 'Dimension mismatch'


class GammaOutOfRangeError(BadRequestError):
    _code = 'gamma_out_of_range'
    _title = 'Gamma out of range'


class ResolutionTooCoarseError(BadRequestError):
    _code = 'resolution_too_coarse'
    _title = 'Resolution too coarse'


# exponents


class DeltaOutOfRangeError(BadRequestError):
    _code = 'delta_out_of_range'
    _title = 'Quantum area out of range'


class InsufficientHitsError(BaseError):
    _code = 'insufficient_hits'
    _title = 'Insufficient hits'


class InsufficientScalesError(BadRequestError):
    _code = 'insufficient_scales'
    _title = 'Insufficient scales'


# value objects


class SeedInvalidError(BadRequestError):
    _code = 'seed_invalid'
    _title = 'Invalid seed'


class RunIdInvalidError(BadRequestError):
    _code = 'run_id_invalid'
    _title = 'Invalid run id'


class TimestampInvalidError(BadRequestError):
    _code = 'timestamp_invalid'
    _title = 'Invalid timestamp'


# driver


class InvalidConfigError(BadRequestError):
    _code = 'invalid_config'
    _title = 'Invalid config'


class CommandNotRegisteredError(NotFoundError):
    _code = 'command_not_registered_error'
    _title = 'Command not registered'


class CheckNotRegisteredError(NotFoundError):
    _code = 'check_not_registered_error'
    _title = 'Check not registered'


class QueryNotRegisteredError(NotFoundError):
    _code = 'query_not_registered_error'
    _title = 'Query not registered'


class EventMapperNotFoundError(NotFoundError):
    _code = 'event_mapper_not_found_error'
    _title = 'Event Mapper not found'


class ChecksFailedError(BaseError):
    _code = 'checks_failed'
    _title = 'Verification checks failed'


class RunAlreadyFinishedError(BaseError):
    _code = 'run_already_finished'
    _title = 'Run already finished'
