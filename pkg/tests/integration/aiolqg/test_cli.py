from pathlib import Path
from typing import List

import numpy as np
import pytest
from matplotlib.image import imread

from aiolqg import __version__
from aiolqg.aggregates import MANIFEST_NAME
from aiolqg.checks import CHECKS, Check, CheckContext, CheckResult
from aiolqg.cli import EXIT_CHECKS_FAILED, EXIT_INVALID_CONFIG, EXIT_OK, EXIT_RUNTIME_ERROR, main, number_list
from aiolqg.io import checksum, read_csv, read_grid, read_json


def _checksums(out: Path) -> dict:
    return {name: entry['sha256'] for name, entry in read_json(out / MANIFEST_NAME)['outputs'].items()}


def test_number_list_accepts_powers() -> None:
    assert number_list('2^-2, 0.5,2^3') == [0.25, 0.5, 8.0]


def test_kpz_table(tmp_path: Path) -> None:
    assert main(['kpz-table', '--out', str(tmp_path), '--gammas', '0.5,1', '--xs', '0,0.5']) == EXIT_OK

    pairs = [(row['gamma'], row['x']) for row in read_csv(tmp_path / 'kpz_table.csv')]
    assert pairs == [('0.5', '0.0'), ('0.5', '0.5'), ('1.0', '0.0'), ('1.0', '0.5')]
    manifest = read_json(tmp_path / MANIFEST_NAME)
    assert manifest['command'] == 'kpz-table'
    assert manifest['code_version'] == __version__
    assert manifest['outputs']['kpz_table.csv']['sha256'] == checksum(tmp_path / 'kpz_table.csv')


def test_count_quads(tmp_path: Path) -> None:
    assert main(['count-quads', '--out', str(tmp_path), '--max-faces', '4']) == EXIT_OK
    assert [row['count'] for row in read_csv(tmp_path / 'count_quads.csv')] == ['2', '9', '54', '378']


def test_repeated_runs_are_bit_identical(tmp_path: Path) -> None:
    arguments = ['sample-field', '--seed', '3', '--resolution', '16', '--cutoff', '32']
    assert main([*arguments, '--out', str(tmp_path / 'first')]) == EXIT_OK
    assert main([*arguments, '--out', str(tmp_path / 'second'), '--workers', '4']) == EXIT_OK

    assert _checksums(tmp_path / 'first') == _checksums(tmp_path / 'second')
    assert read_json(tmp_path / 'first' / MANIFEST_NAME)['run_id'] != read_json(tmp_path / 'second' / MANIFEST_NAME)[
        'run_id'
    ]


def test_different_seeds_give_different_fields(tmp_path: Path) -> None:
    arguments = ['sample-field', '--resolution', '16', '--cutoff', '32']
    main([*arguments, '--seed', '1', '--out', str(tmp_path / 'one')])
    main([*arguments, '--seed', '2', '--out', str(tmp_path / 'two')])

    assert _checksums(tmp_path / 'one')['field.bin'] != _checksums(tmp_path / 'two')['field.bin']


def test_sample_field_snapshots(tmp_path: Path) -> None:
    assert main(['sample-field', '--kind', 'dgff', '--resolution', '8', '--out', str(tmp_path / 'dgff')]) == EXIT_OK
    values, meta = read_grid(tmp_path / 'dgff' / 'field.bin')
    assert values.shape == (9, 9)
    assert meta['kind'] == 'dgff'
    assert meta['domain'] == 'unit_square'
    assert meta['code_version'] == __version__
    assert 'Laplacian' in meta['normalization']

    assert main(['sample-field', '--resolution', '16', '--cutoff', '24', '--out', str(tmp_path / 'gff')]) == EXIT_OK
    values, meta = read_grid(tmp_path / 'gff' / 'field.bin')
    assert values.shape == (16, 16)
    assert meta['cutoff'] == 24
    assert meta['normalization_constant'] == pytest.approx(np.sqrt(8.0 / np.pi))
    assert meta['code_version'] == __version__


def test_sample_field_with_a_single_mode(tmp_path: Path) -> None:
    assert main(['sample-field', '--resolution', '8', '--cutoff', '1', '--out', str(tmp_path)]) == EXIT_OK

    values, meta = read_grid(tmp_path / 'field.bin')
    axis = np.sin(np.pi * (np.arange(8) + 0.5) / 8)
    shape = np.outer(axis, axis)
    assert meta['cutoff'] == 1
    assert np.allclose(values, values[3, 3] / shape[3, 3] * shape)


def test_dgff_boundary_renders_mid_gray(tmp_path: Path) -> None:
    assert main(['sample-field', '--kind', 'dgff', '--resolution', '256', '--out', str(tmp_path)]) == EXIT_OK

    image = imread(tmp_path / 'field.png')[..., 0]
    boundary = np.concatenate([image[0], image[-1], image[:, 0], image[:, -1]])
    assert image.shape == (257, 257)
    assert np.allclose(boundary, 0.5, atol=1.0 / 255)


def test_build_measure_with_overlay(tmp_path: Path) -> None:
    arguments = ['build-measure', '--gamma', '0.5', '--resolution', '16', '--cutoff', '32', '--overlay']
    assert main([*arguments, '--mass-delta', '2^-4', '--out', str(tmp_path)]) == EXIT_OK

    summary = read_json(tmp_path / 'summary.json')
    assert summary['mass_delta'] == 0.0625
    assert summary['squares'] >= summary['total_mass'] / 0.0625
    assert {'overlay.png', 'squares.csv', 'measure.bin', 'measure.png'} <= set(_checksums(tmp_path))


def test_build_measure_overlay_is_reproducible(tmp_path: Path) -> None:
    arguments = ['build-measure', '--gamma', '1', '--resolution', '16', '--cutoff', '32', '--overlay']
    main([*arguments, '--out', str(tmp_path / 'first')])
    main([*arguments, '--out', str(tmp_path / 'second')])

    assert _checksums(tmp_path / 'first') == _checksums(tmp_path / 'second')


def test_euclid_exponent_of_the_full_square(tmp_path: Path) -> None:
    arguments = ['euclid-exponent', '--set', 'full-square', '--scales', '0.1,0.05,0.01', '--samples', '1000']
    assert main([*arguments, '--out', str(tmp_path)]) == EXIT_OK

    report = read_json(tmp_path / 'fit.json')
    assert report['expected'] == 0.0
    assert report['fit']['slope'] == pytest.approx(0.0, abs=1e-12)
    rows = read_csv(tmp_path / 'fit.csv')
    assert [float(row['scale']) for row in rows] == pytest.approx([0.1, 0.05, 0.01])
    estimates = [np.exp(float(row['log_estimate'])) for row in rows]
    assert [float(row['estimate']) for row in rows] == pytest.approx(estimates)


def test_quantum_exponent_of_the_full_square(tmp_path: Path) -> None:
    arguments = ['quantum-exponent', '--set', 'full-square', '--gamma', '0', '--resolution', '32', '--cutoff', '8']
    options = ['--replicates', '2', '--delta-scales', '0.01,0.004,0.002', '--root-mode', 'rooted']
    assert main([*arguments, *options, '--out', str(tmp_path)]) == EXIT_OK

    report = read_json(tmp_path / 'fit.json')
    assert report['root_mode'] == 'rooted'
    assert 0.0 <= report['discard_rate'] < 1.0
    counters = read_json(tmp_path / MANIFEST_NAME)['counters']
    assert sorted(counters) == ['balls', 'discarded']
    assert counters['discarded'] == pytest.approx(report['discard_rate'] * counters['balls'])


def test_verify_selected_checks(tmp_path: Path) -> None:
    assert main(['verify', '--checks', 'kpz-fixed-points,count-quads', '--out', str(tmp_path)]) == EXIT_OK

    report = read_json(tmp_path / 'verify.json')
    assert report['passed']
    assert [row['name'] for row in report['results']][0] == 'kpz-fixed-points'


def _always_fails(_: CheckContext) -> List[CheckResult]:
    return [CheckResult('always-fails', 0.0, 1.0, 0.0, 0.0, False)]


def test_failing_check_exits_with_two(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    monkeypatch.setitem(CHECKS, 'always-fails', Check('always-fails', 'never passes', _always_fails))

    assert main(['verify', '--checks', 'always-fails', '--out', str(tmp_path)]) == EXIT_CHECKS_FAILED
    assert (tmp_path / MANIFEST_NAME).exists()


@pytest.mark.parametrize(
    'arguments',
    [
        ['kpz-table', '--gamma', '2.5'],
        ['kpz-table', '--bogus'],
        ['build-measure', '--resolution', '100'],
        ['quantum-exponent', '--root-mode', 'random'],
        ['euclid-exponent', '--scales', 'a,b'],
    ],
)
def test_invalid_configuration_exits_with_three(
    arguments: List[str], tmp_path: Path, capsys: pytest.CaptureFixture
) -> None:
    assert main([*arguments, '--out', str(tmp_path)]) == EXIT_INVALID_CONFIG
    assert 'invalid_config' in capsys.readouterr().err
    assert not (tmp_path / MANIFEST_NAME).exists()


def test_unknown_check_is_an_invalid_configuration(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    assert main(['verify', '--checks', 'nope', '--out', str(tmp_path)]) == EXIT_INVALID_CONFIG
    err = capsys.readouterr().err
    assert 'invalid_config' in err
    assert 'unknown checks' in err
    assert not (tmp_path / MANIFEST_NAME).exists()


def _crashes(_: CheckContext) -> List[CheckResult]:
    raise RuntimeError('boom')


def test_failed_run_leaves_no_stale_manifest(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    assert main(['kpz-table', '--out', str(tmp_path)]) == EXIT_OK
    assert (tmp_path / MANIFEST_NAME).exists()
    monkeypatch.setitem(CHECKS, 'crashes', Check('crashes', 'raises', _crashes))

    assert main(['verify', '--checks', 'crashes', '--out', str(tmp_path)]) == EXIT_RUNTIME_ERROR
    assert not (tmp_path / MANIFEST_NAME).exists()


def test_verify_green_cutoff_flag(tmp_path: Path) -> None:
    arguments = ['verify', '--checks', 'green-symmetry', '--green-cutoff', '400', '--out', str(tmp_path)]
    assert main(arguments) == EXIT_OK

    report = read_json(tmp_path / 'verify.json')
    assert report['passed']
    assert 'green-symmetry[series;M=400]' in [row['name'] for row in report['results']]


def test_list_checks(capsys: pytest.CaptureFixture) -> None:
    assert main(['verify', '--list']) == EXIT_OK
    names = [line.split('\t')[0] for line in capsys.readouterr().out.splitlines()]
    assert names == list(CHECKS)


def test_config_file_is_merged_under_flags(tmp_path: Path) -> None:
    config = tmp_path / 'run.json'
    config.write_text('{"gammas": [0.5], "xs": [0.25, 0.75]}', encoding='utf-8')
    out = tmp_path / 'out'

    assert main(['kpz-table', '--config', str(config), '--xs', '0.5', '--out', str(out)]) == EXIT_OK
    assert [(row['gamma'], row['x']) for row in read_csv(out / 'kpz_table.csv')] == [('0.5', '0.5')]


def test_version(capsys: pytest.CaptureFixture) -> None:
    pytest.raises(SystemExit, lambda: main(['--version']))
    assert __version__ in capsys.readouterr().out
