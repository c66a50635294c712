from abc import ABC
from pathlib import Path
from typing import Any, Dict, List, Optional

from .errors import RunAlreadyFinishedError
from .events import Event, OutputWritten, RunFinished, RunStarted, RunWarningRaised, encode_events
from .io import checksum, write_json_atomic
from .value_objects import RunId, Timestamp

MANIFEST_NAME = 'manifest.json'


class Aggregate(ABC):
    pass


class AggregateRoot(Aggregate):
    _events: List[Event]

    def __init__(self) -> None:
        self._events = []

    def pull_aggregate_events(self) -> List[Event]:
        _events = self._events
        self._events = []
        return _events

    def record_aggregate_event(self, event: Event) -> None:
        self._events.append(event)


class ExperimentRun(AggregateRoot):
    """One CLI invocation: the outputs it wrote, the warnings it raised and its manifest."""

    def __init__(
        self,
        run_id: RunId,
        command: str,
        config: Dict[str, Any],
        config_hash: str,
        output_dir: Path,
        code_version: str,
    ) -> None:
        super().__init__()
        self._run_id = run_id
        self._command = command
        self._config = config
        self._config_hash = config_hash
        self._output_dir = output_dir
        self._code_version = code_version
        self._started = Timestamp.now()
        self._finished: Optional[Timestamp] = None
        self._outputs: Dict[str, Dict[str, Any]] = {}
        self._warnings: List[Dict[str, str]] = []
        self._counters: Dict[str, float] = {}
        self._history: List[Event] = []

    @classmethod
    def start(
        cls, command: str, config: Dict[str, Any], config_hash: str, output_dir: Path, code_version: str
    ) -> 'ExperimentRun':
        run = cls(RunId.generate(), command, config, config_hash, output_dir, code_version)
        attributes = RunStarted.Attributes(run_id=str(run.run_id), command=command, config_hash=config_hash)
        run._record(RunStarted(attributes=attributes))
        return run

    @property
    def run_id(self) -> RunId:
        return self._run_id

    @property
    def output_dir(self) -> Path:
        return self._output_dir

    @property
    def outputs(self) -> Dict[str, Dict[str, Any]]:
        return dict(self._outputs)

    @property
    def warnings(self) -> List[Dict[str, str]]:
        return list(self._warnings)

    def _record(self, event: Event) -> None:
        self._history.append(event)
        self.record_aggregate_event(event)

    def _ensure_running(self) -> None:
        if self._finished is not None:
            raise RunAlreadyFinishedError.create(detail={'run_id': str(self._run_id)})

    def output(self, path: Path) -> Path:
        """Register a file written under the output directory."""
        self._ensure_running()
        name = path.relative_to(self._output_dir).as_posix()
        digest = checksum(path)
        size = path.stat().st_size
        self._outputs[name] = {'sha256': digest, 'bytes': size}
        self._record(
            OutputWritten(
                attributes=OutputWritten.Attributes(run_id=str(self._run_id), name=name, sha256=digest, size=size)
            )
        )
        return path

    def warn(self, category: str, message: str) -> None:
        self._ensure_running()
        self._warnings.append({'category': category, 'message': message})
        self._record(
            RunWarningRaised(
                attributes=RunWarningRaised.Attributes(run_id=str(self._run_id), category=category, message=message)
            )
        )

    def count(self, name: str, value: float) -> None:
        self._counters[name] = self._counters.get(name, 0.0) + value

    def finish(self, status: str = 'completed') -> Path:
        """Record the end of the run and write the manifest atomically; the manifest is the last file written."""
        self._ensure_running()
        self._finished = Timestamp.now()
        wall_time = self._started.seconds_until(self._finished)
        self._record(
            RunFinished(attributes=RunFinished.Attributes(run_id=str(self._run_id), wall_time=wall_time, status=status))
        )
        return write_json_atomic(self._output_dir / MANIFEST_NAME, self.manifest())

    def manifest(self) -> Dict[str, Any]:
        finished = self._finished or Timestamp.now()
        return {
            'run_id': str(self._run_id),
            'command': self._command,
            'code_version': self._code_version,
            'config': self._config,
            'config_hash': self._config_hash,
            'started': self._started.isoformat(),
            'finished': finished.isoformat(),
            'wall_time': self._started.seconds_until(finished),
            'outputs': dict(sorted(self._outputs.items())),
            'warnings': list(self._warnings),
            'counters': dict(sorted(self._counters.items())),
            'events': encode_events(self._history),
        }
