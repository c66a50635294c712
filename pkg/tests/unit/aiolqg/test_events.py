from dataclasses import asdict
from logging import INFO, WARNING

from pytest import LogCaptureFixture, raises

from aiolqg.errors import EventMapperNotFoundError
from aiolqg.events import (
    RUN_EVENT_MAPPERS,
    Event,
    LogRunEventHandler,
    OutputWritten,
    RunFinished,
    RunStarted,
    RunWarningRaised,
    SimpleEventBus,
    encode_events,
    find_event_mapper_by_type,
)
from aiolqg.testing import AsyncMock, Mock
from aiolqg.value_objects import RunId


def _started() -> RunStarted:
    attributes = RunStarted.Attributes(run_id=str(RunId.generate()), command='verify', config_hash='ab')
    return RunStarted(attributes=attributes)


def test_run_event_and_its_mapper() -> None:
    event = _started()

    assert RunId.validate(event.attributes.run_id)
    assert event.meta.type == 'event'

    mapper = find_event_mapper_by_type(msg=event, mappers=RUN_EVENT_MAPPERS)
    encoded = mapper.encode(event)

    assert encoded['attributes'] == asdict(event.attributes)
    assert encoded['meta'] == {'message': 'aiolqg.run_started'}


def test_encode_a_run_history() -> None:
    run_id = str(RunId.generate())
    history = [
        _started(),
        OutputWritten(attributes=OutputWritten.Attributes(run_id=run_id, name='fit.csv', sha256='00', size=12)),
        RunWarningRaised(attributes=RunWarningRaised.Attributes(run_id=run_id, category='gff', message='cutoff')),
        RunFinished(attributes=RunFinished.Attributes(run_id=run_id, wall_time=1.5, status='completed')),
    ]

    encoded = encode_events(history)

    assert [row['meta']['message'] for row in encoded] == [
        'aiolqg.run_started',
        'aiolqg.output_written',
        'aiolqg.run_warning_raised',
        'aiolqg.run_finished',
    ]
    assert encoded[1]['attributes'] == asdict(history[1].attributes)


def test_encode_events_fails_for_an_unmapped_event() -> None:
    class _EventTest(Event):
        pass

    raises(EventMapperNotFoundError, lambda: encode_events([_started(), _EventTest()]))


def test_not_find_event_mapper_by_type() -> None:
    class _EventTest(Event):
        pass

    raises(EventMapperNotFoundError, lambda: find_event_mapper_by_type(msg=_EventTest(), mappers=RUN_EVENT_MAPPERS))


async def test_simple_event_bus() -> None:
    event_handler_mock1 = Mock()
    event_handler_mock2 = Mock()
    event_handler_mock3 = Mock()

    event_handler_mock1.subscribed_to = lambda: [RunStarted]
    event_handler_mock1.handle = AsyncMock(return_value=None)
    event_handler_mock2.subscribed_to = lambda: [RunStarted]
    event_handler_mock2.handle = AsyncMock(return_value=None)
    event_handler_mock3.subscribed_to = lambda: [RunFinished]
    event_handler_mock3.handle = AsyncMock(return_value=None)

    bus = SimpleEventBus(handlers=[event_handler_mock1, event_handler_mock2, event_handler_mock3])

    await bus.notify(events=[_started()])

    event_handler_mock1.handle.assert_called_once()
    event_handler_mock2.handle.assert_called_once()
    event_handler_mock3.handle.assert_not_called()


async def test_log_run_event_handler_reports_warnings(caplog: LogCaptureFixture) -> None:
    run_id = str(RunId.generate())
    warning = RunWarningRaised(attributes=RunWarningRaised.Attributes(run_id=run_id, category='kpz', message='clip'))
    bus = SimpleEventBus(handlers=[LogRunEventHandler()])

    with caplog.at_level(INFO, logger='aiolqg'):
        await bus.notify(events=[_started(), warning])

    levels = [record.levelno for record in caplog.records]
    assert levels == [INFO, WARNING]
    assert '[kpz] clip' in caplog.records[-1].getMessage()
