import json
from pathlib import Path

import pytest

from aiolqg.config import COMMANDS, RunConfig, build_config, read_config_file
from aiolqg.errors import InvalidConfigError


def test_defaults_are_valid_for_every_command() -> None:
    for command in COMMANDS:
        assert RunConfig(command).command == command


@pytest.mark.parametrize(
    'overrides, problem',
    [
        ({'gamma': 2.0}, 'gamma must lie in [0, 2)'),
        ({'resolution': 100}, 'resolution must be a power of two'),
        ({'scales': (0.5, 0.25)}, 'scales needs at least three values'),
        ({'delta_scales': (0.5, 0.25, 1.5)}, 'delta_scales needs at least three values'),
        ({'fractal': 'circle'}, "unknown set 'circle'"),
        ({'root_mode': 'random'}, 'root_mode must be one of'),
        ({'seed': -1}, 'seed must be a 64-bit unsigned integer'),
        ({'replicates': 0}, 'replicates must be positive'),
        ({'green_cutoff': 0}, 'green_cutoff must be positive'),
        ({'checks': ('nope',)}, 'unknown checks'),
    ],
)
def test_invalid_values_are_reported(overrides: dict, problem: str) -> None:
    with pytest.raises(InvalidConfigError) as err:
        RunConfig('verify', **overrides)
    assert problem in err.value.detail()


def test_unknown_command_is_rejected() -> None:
    pytest.raises(InvalidConfigError, lambda: RunConfig('plot'))


def test_config_hash_ignores_where_and_how_fast() -> None:
    base = RunConfig('kpz-table')
    assert base.config_hash() == RunConfig('kpz-table', output_dir='elsewhere', workers=8).config_hash()
    assert base.config_hash() != RunConfig('kpz-table', seed=1).config_hash()


def test_to_dict_is_plain_json() -> None:
    data = RunConfig('kpz-table', gammas=(0.5, 1.0)).to_dict()
    assert data['gammas'] == [0.5, 1.0]
    assert data['cutoff'] is None


def test_layers_apply_in_order(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    config_path = tmp_path / 'run.json'
    config_path.write_text(json.dumps({'seed': 7, 'gammas': [0.5]}), encoding='utf-8')
    monkeypatch.setenv('AIOLQG_SEED', '5')
    monkeypatch.setenv('AIOLQG_WORKERS', '3')

    assert build_config('kpz-table', {}).seed == 5
    from_file = build_config('kpz-table', {}, str(config_path))
    assert from_file.seed == 7
    assert from_file.gammas == (0.5,)
    assert from_file.workers == 3
    assert build_config('kpz-table', {'seed': 9, 'gamma': None}, str(config_path)).seed == 9


def test_flags_outside_the_config_are_ignored() -> None:
    config = build_config('verify', {'log_level': 'DEBUG', 'checks': ['kpz-analytic']})
    assert config.checks == ('kpz-analytic',)


def test_config_file_problems(tmp_path: Path) -> None:
    unknown = tmp_path / 'unknown.json'
    unknown.write_text(json.dumps({'colour': 'red'}), encoding='utf-8')
    listing = tmp_path / 'list.json'
    listing.write_text('[1, 2]', encoding='utf-8')

    assert read_config_file(None) == {}
    pytest.raises(InvalidConfigError, lambda: read_config_file(str(unknown)))
    pytest.raises(InvalidConfigError, lambda: read_config_file(str(listing)))
    pytest.raises(InvalidConfigError, lambda: read_config_file(str(tmp_path / 'missing.json')))
