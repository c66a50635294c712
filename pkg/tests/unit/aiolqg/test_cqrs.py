from pytest import raises

from aiolqg import (
    Command,
    CommandNotRegisteredError,
    CountQuadsCommand,
    KpzTableCommand,
    ListChecksQuery,
    Query,
    QueryNotRegisteredError,
    RunConfig,
    SimpleCommandBus,
    SimpleQueryBus,
    VerifyCommand,
)
from aiolqg.checks import CHECKS
from aiolqg.cqrs import COMMAND_TYPES, command_for
from aiolqg.handlers import ListChecksHandler
from aiolqg.testing import AsyncMock, Mock


async def test_simple_command_bus() -> None:
    command_handler_mock1 = Mock()
    command_handler_mock2 = Mock()
    command_handler_mock3 = Mock()

    command = KpzTableCommand(RunConfig('kpz-table'))

    command_handler_mock1.subscribed_to = lambda: KpzTableCommand
    command_handler_mock1.handle = AsyncMock(return_value=None)
    command_handler_mock2.subscribed_to = lambda: CountQuadsCommand
    command_handler_mock2.handle = AsyncMock(return_value=None)
    command_handler_mock3.subscribed_to = lambda: VerifyCommand
    command_handler_mock3.handle = AsyncMock(return_value=None)

    bus = SimpleCommandBus(handlers=[command_handler_mock1, command_handler_mock2, command_handler_mock3])

    await bus.dispatch(command=command)

    command_handler_mock1.handle.assert_called_once_with(command)
    command_handler_mock2.handle.assert_not_called()
    command_handler_mock3.handle.assert_not_called()


async def test_simple_command_bus_fails_because_command_was_not_registered() -> None:
    class _CommandTest(Command):
        pass

    bus = SimpleCommandBus(handlers=[])

    with raises(CommandNotRegisteredError):
        await bus.dispatch(command=_CommandTest())


def test_every_subcommand_has_a_command_type() -> None:
    for name, command_type in COMMAND_TYPES.items():
        command = command_for(RunConfig(name))
        assert type(command) is command_type
        assert command.config.command == name


async def test_simple_query_bus() -> None:
    query_handler_mock = Mock()
    query_handler_mock.subscribed_to = lambda: ListChecksQuery
    query_handler_mock.handle = AsyncMock(return_value='test')

    bus = SimpleQueryBus(handlers=[query_handler_mock])

    assert await bus.ask(query=ListChecksQuery()) == 'test'
    query_handler_mock.handle.assert_called_once()


async def test_simple_query_bus_fails_because_query_was_not_registered() -> None:
    class _QueryTest(Query):
        pass

    bus = SimpleQueryBus(handlers=[ListChecksHandler()])

    with raises(QueryNotRegisteredError):
        await bus.ask(query=_QueryTest())


async def test_list_checks_query_returns_the_registry_in_order() -> None:
    bus = SimpleQueryBus(handlers=[ListChecksHandler()])

    rows = await bus.ask(query=ListChecksQuery())

    assert [row['name'] for row in rows] == list(CHECKS)
    assert all(row['description'] for row in rows)
