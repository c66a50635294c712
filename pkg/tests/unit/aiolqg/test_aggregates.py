from pathlib import Path

from pytest import raises

from aiolqg import AggregateRoot, Event
from aiolqg.aggregates import MANIFEST_NAME, ExperimentRun
from aiolqg.errors import RunAlreadyFinishedError
from aiolqg.events import OutputWritten, RunFinished, RunStarted, RunWarningRaised
from aiolqg.io import checksum, read_json


def test_aggregates() -> None:
    class _TestAggregateRoot(AggregateRoot):
        pass

    class _TestEvent(Event):
        pass

    agg = _TestAggregateRoot()
    evt = _TestEvent(_TestEvent.Attributes())

    assert not len(agg.pull_aggregate_events())

    agg.record_aggregate_event(evt)
    events = agg.pull_aggregate_events()

    assert len(events) == 1
    assert not len(agg.pull_aggregate_events())


def _run(tmp_path: Path) -> ExperimentRun:
    return ExperimentRun.start('kpz-table', {'gamma': 1.0}, 'cafe', tmp_path, '0.1.0')


def test_experiment_run_records_its_lifecycle(tmp_path: Path) -> None:
    run = _run(tmp_path)
    target = tmp_path / 'kpz_table.csv'
    target.write_text('gamma,x\n1.0,0.5\n', encoding='utf-8')

    run.output(target)
    run.warn('gamma_range', 'outside')
    run.finish()

    types = [type(event) for event in run.pull_aggregate_events()]
    assert types == [RunStarted, OutputWritten, RunWarningRaised, RunFinished]


def test_manifest_is_written_last_with_checksums(tmp_path: Path) -> None:
    run = _run(tmp_path)
    target = tmp_path / 'count_quads.csv'
    target.write_text('n,count\n1,2\n', encoding='utf-8')
    run.output(target)
    run.count('rows', 1)
    run.count('rows', 2)

    manifest_path = run.finish()
    manifest = read_json(manifest_path)

    assert manifest_path == tmp_path / MANIFEST_NAME
    assert manifest['outputs'] == {'count_quads.csv': {'sha256': checksum(target), 'bytes': target.stat().st_size}}
    assert manifest['counters'] == {'rows': 3.0}
    assert manifest['config_hash'] == 'cafe'
    assert manifest['wall_time'] >= 0.0
    assert [event['meta']['message'] for event in manifest['events']][-1] == 'aiolqg.run_finished'
    assert sorted(path.name for path in tmp_path.iterdir()) == ['count_quads.csv', MANIFEST_NAME]


def test_finished_run_rejects_further_changes(tmp_path: Path) -> None:
    run = _run(tmp_path)
    run.finish()

    raises(RunAlreadyFinishedError, lambda: run.warn('late', 'too late'))
    raises(RunAlreadyFinishedError, run.finish)
