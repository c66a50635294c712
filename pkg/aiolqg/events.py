from abc import ABC, abstractmethod
from calendar import timegm
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from logging import getLogger
from typing import Any, Dict, List, Type
from uuid import uuid4

from .errors import EventMapperNotFoundError

logger = getLogger(__name__)


def _now() -> int:
    return timegm(datetime.now(tz=timezone.utc).utctimetuple())


@dataclass
class Event:
    """Class for keeping track of an Event."""

    @dataclass
    class Attributes:
        """Class for keeping track of an Attributes of Event."""

    @dataclass
    class Meta:
        """Class for keeping track of a Metas of Event."""

        __slots__ = ('id', 'type', 'occurred_on')
        id: str
        type: str
        occurred_on: int

    attributes: Attributes = field(default_factory=lambda: Event.Attributes())
    meta: Meta = field(default_factory=lambda: Event.Meta(id=str(uuid4()), type='event', occurred_on=_now()))


@dataclass
class RunStarted(Event):
    @dataclass
    class Attributes:
        __slots__ = ('run_id', 'command', 'config_hash')
        run_id: str
        command: str
        config_hash: str

    attributes: Attributes


@dataclass
class OutputWritten(Event):
    @dataclass
    class Attributes:
        __slots__ = ('run_id', 'name', 'sha256', 'size')
        run_id: str
        name: str
        sha256: str
        size: int

    attributes: Attributes


@dataclass
class RunWarningRaised(Event):
    @dataclass
    class Attributes:
        __slots__ = ('run_id', 'category', 'message')
        run_id: str
        category: str
        message: str

    attributes: Attributes


@dataclass
class RunFinished(Event):
    @dataclass
    class Attributes:
        __slots__ = ('run_id', 'wall_time', 'status')
        run_id: str
        wall_time: float
        status: str

    attributes: Attributes


class EventMapper:
    __slots__ = ('event_type', 'service_name', 'event_name')

    event_type: Type[Event]
    service_name: str
    event_name: str

    def belongs_to(self, msg: Event) -> bool:
        return isinstance(msg, self.event_type)

    def encode(self, msg: Event) -> Dict[str, Any]:
        return {
            **asdict(msg.meta),
            'attributes': self.map_attributes(msg.attributes),
            'meta': {'message': f'{self.service_name}.{self.event_name}'},
        }

    @staticmethod
    def map_attributes(attributes: Event.Attributes) -> Dict[str, Any]:
        return asdict(attributes)


class RunStartedMapper(EventMapper):
    event_type = RunStarted
    service_name = 'aiolqg'
    event_name = 'run_started'


class OutputWrittenMapper(EventMapper):
    event_type = OutputWritten
    service_name = 'aiolqg'
    event_name = 'output_written'


class RunWarningRaisedMapper(EventMapper):
    event_type = RunWarningRaised
    service_name = 'aiolqg'
    event_name = 'run_warning_raised'


class RunFinishedMapper(EventMapper):
    event_type = RunFinished
    service_name = 'aiolqg'
    event_name = 'run_finished'


RUN_EVENT_MAPPERS: List[EventMapper] = [
    RunStartedMapper(),
    OutputWrittenMapper(),
    RunWarningRaisedMapper(),
    RunFinishedMapper(),
]


def find_event_mapper_by_type(msg: Event, mappers: List[EventMapper]) -> EventMapper:
    for mapper in mappers:
        if mapper.belongs_to(msg):
            return mapper
    raise EventMapperNotFoundError.create(detail={'type': str(type(msg))})


def encode_events(events: List[Event], mappers: List[EventMapper] = RUN_EVENT_MAPPERS) -> List[Dict[str, Any]]:
    return [find_event_mapper_by_type(event, mappers).encode(event) for event in events]


class EventHandler(ABC):
    @abstractmethod
    def subscribed_to(self) -> List[Type[Event]]:
        pass  # pragma: no cover

    @abstractmethod
    async def handle(self, events: List[Event]) -> None:
        pass  # pragma: no cover


class EventBus(ABC):
    @abstractmethod
    async def notify(self, events: List[Event]) -> None:
        pass  # pragma: no cover


class SimpleEventBus(EventBus):
    _handlers: List[EventHandler]

    def __init__(self, handlers: List[EventHandler]):
        self._handlers = handlers

    async def notify(self, events: List[Event]) -> None:
        for event in events:
            for handler in self._handlers:
                for event_type in handler.subscribed_to():
                    if isinstance(event, event_type):
                        await handler.handle([event])


class LogRunEventHandler(EventHandler):
    """Reports run progress and warnings through the ``aiolqg`` loggers."""

    def subscribed_to(self) -> List[Type[Event]]:
        return [RunStarted, OutputWritten, RunWarningRaised, RunFinished]

    async def handle(self, events: List[Event]) -> None:
        for event in events:
            if isinstance(event, RunWarningRaised):
                logger.warning('[%s] %s', event.attributes.category, event.attributes.message)
            elif isinstance(event, OutputWritten):
                logger.info('Wrote %s (%s)', event.attributes.name, event.attributes.sha256[:12])
            elif isinstance(event, RunStarted):
                logger.info('Run %s started: %s', event.attributes.run_id, event.attributes.command)
            elif isinstance(event, RunFinished):
                attributes = event.attributes
                logger.info('Run %s %s in %.2fs', attributes.run_id, attributes.status, attributes.wall_time)
