"""Run configuration.

Precedence, lowest first: built-in defaults, ``AIOLQG_*`` environment variables,
the ``--config`` JSON document, explicit command-line flags.
"""
import hashlib
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Iterator, Mapping, Optional, Tuple

from .checks import CHECKS
from .errors import InvalidConfigError
from .io import canonical_json
from .kpz import fractal_set
from .utils import DEFAULT_GREEN_CUTOFF, get_env, get_int_env, get_str_env
from .value_objects import Seed

COMMANDS = (
    'sample-field',
    'build-measure',
    'euclid-exponent',
    'quantum-exponent',
    'verify',
    'kpz-table',
    'count-quads',
)
ROOT_MODES = ('measure', 'rooted')
FIELD_KINDS = ('spectral', 'dgff')
# keys that never change an output bit
_UNHASHED = ('output_dir', 'workers')


@dataclass(frozen=True)
class RunConfig:
    command: str
    gamma: float = 1.0
    seed: int = 0
    resolution: int = 128
    cutoff: Optional[int] = None
    green_cutoff: int = DEFAULT_GREEN_CUTOFF
    scales: Tuple[float, ...] = tuple(2.0**-k for k in range(6, 11))
    delta_scales: Tuple[float, ...] = tuple(2.0**-k for k in range(6, 13, 2))
    replicates: Optional[int] = None
    samples: int = 2**17
    workers: int = 1
    fractal: str = 'segment'
    root_mode: str = 'measure'
    kind: str = 'spectral'
    overlay: bool = False
    mass_delta: float = 2.0**-8
    checks: Tuple[str, ...] = ()
    gammas: Tuple[float, ...] = (0.5, 1.0, (8.0 / 3.0) ** 0.5, 3.0**0.5)
    xs: Tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    max_faces: int = 10
    output_dir: str = 'out'

    def __post_init__(self) -> None:
        problems = list(self._problems())
        if problems:
            raise InvalidConfigError.create(detail={'problems': problems, 'command': self.command})

    def _problems(self) -> Iterator[str]:
        if self.command not in COMMANDS:
            yield f'unknown command {self.command!r}'
        if not 0.0 <= self.gamma < 2.0:
            yield f'gamma must lie in [0, 2), got {self.gamma}'
        if not Seed.validate(self.seed):
            yield f'seed must be a 64-bit unsigned integer, got {self.seed}'
        if self.resolution < 2 or self.resolution & (self.resolution - 1):
            yield f'resolution must be a power of two >= 2, got {self.resolution}'
        if self.cutoff is not None and self.cutoff < 1:
            yield f'cutoff must be positive, got {self.cutoff}'
        if self.green_cutoff < 1:
            yield f'green_cutoff must be positive, got {self.green_cutoff}'
        unknown_checks = [name for name in self.checks if name not in CHECKS]
        if unknown_checks:
            yield f'unknown checks {unknown_checks}; run `verify --list` for the registered names'
        for name in ('scales', 'delta_scales'):
            values = getattr(self, name)
            if len(values) < 3 or any(not 0.0 < value < 1.0 for value in values):
                yield f'{name} needs at least three values in (0, 1)'
        if self.replicates is not None and self.replicates < 1:
            yield f'replicates must be positive, got {self.replicates}'
        if self.samples < 1 or self.workers < 1 or self.max_faces < 1:
            yield 'samples, workers and max_faces must be positive'
        if self.root_mode not in ROOT_MODES:
            yield f'root_mode must be one of {ROOT_MODES}'
        if self.kind not in FIELD_KINDS:
            yield f'kind must be one of {FIELD_KINDS}'
        if not 0.0 < self.mass_delta < 1.0:
            yield f'mass_delta must lie in (0, 1), got {self.mass_delta}'
        try:
            fractal_set(self.fractal)
        except Exception:  # pylint: disable=broad-except
            yield f'unknown set {self.fractal!r}'

    def to_dict(self) -> Dict[str, Any]:
        return dict(json.loads(canonical_json(asdict(self))))

    def config_hash(self) -> str:
        data = {key: value for key, value in self.to_dict().items() if key not in _UNHASHED}
        return hashlib.sha256(canonical_json(data).encode('utf-8')).hexdigest()

    @property
    def out(self) -> Path:
        return Path(self.output_dir)


_FIELD_NAMES = {item.name for item in fields(RunConfig)}
_TUPLE_FIELDS = ('scales', 'delta_scales', 'checks', 'gammas', 'xs')


def _from_env() -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    if get_env('AIOLQG_SEED', None, cast_default_to_str=False):
        values['seed'] = get_int_env('AIOLQG_SEED')
    if get_env('AIOLQG_REPLICATES', None, cast_default_to_str=False):
        values['replicates'] = get_int_env('AIOLQG_REPLICATES')
    if get_env('AIOLQG_WORKERS', None, cast_default_to_str=False):
        values['workers'] = get_int_env('AIOLQG_WORKERS', 1)
    if get_env('AIOLQG_OUT', None, cast_default_to_str=False):
        values['output_dir'] = get_str_env('AIOLQG_OUT')
    return values


def read_config_file(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, ValueError) as err:
        raise InvalidConfigError.create(detail={'config': path}).with_exception(err)
    if not isinstance(data, dict):
        raise InvalidConfigError.create(detail={'config': path, 'reason': 'config must be a JSON object'})
    unknown = sorted(set(data) - _FIELD_NAMES)
    if unknown:
        raise InvalidConfigError.create(detail={'config': path, 'unknown_keys': unknown})
    return data


def _normalize(values: Dict[str, Any]) -> Dict[str, Any]:
    for name in _TUPLE_FIELDS:
        if name in values and values[name] is not None:
            values[name] = tuple(values[name])
    return values


def build_config(command: str, flags: Mapping[str, Any], config_path: Optional[str] = None) -> RunConfig:
    """Merge the configuration layers; ``None`` flags fall through to the layer below."""
    values: Dict[str, Any] = {}
    values.update(_from_env())
    values.update(read_config_file(config_path))
    values.update({key: value for key, value in flags.items() if value is not None and key in _FIELD_NAMES})
    values['command'] = command
    try:
        return RunConfig(**_normalize(values))
    except TypeError as err:
        raise InvalidConfigError.create(detail={'command': command}).with_exception(err)
