from pathlib import Path

import numpy as np
import pytest
from matplotlib.image import imread

from aiolqg.io import (
    canonical_json,
    checksum,
    log_mass,
    read_csv,
    read_grid,
    read_json,
    write_csv,
    write_field_image,
    write_grid,
    write_json_atomic,
    write_log_mass_image,
    write_overlay_image,
    write_squares,
)
from aiolqg.liouville import DyadicSquare


def test_checksum_is_sha256(tmp_path: Path) -> None:
    target = tmp_path / 'abc.txt'
    target.write_bytes(b'abc')
    assert checksum(target) == 'ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad'


def test_canonical_json_sorts_keys_and_unwraps_numpy() -> None:
    document = canonical_json({'b': np.float64(1.5), 'a': np.arange(2), 'c': np.int64(3)})
    assert document == '{\n  "a": [\n    0,\n    1\n  ],\n  "b": 1.5,\n  "c": 3\n}\n'


def test_atomic_json_leaves_no_scratch_file(tmp_path: Path) -> None:
    target = write_json_atomic(tmp_path / 'manifest.json', {'ok': True})
    assert read_json(target) == {'ok': True}
    assert [path.name for path in tmp_path.iterdir()] == ['manifest.json']


def test_grid_is_raw_little_endian_with_a_sidecar(tmp_path: Path) -> None:
    values = np.arange(6.0).reshape(2, 3)
    binary, sidecar = write_grid(tmp_path / 'field', values, meta={'kind': 'dgff'})
    assert binary.name == 'field.bin' and sidecar.name == 'field.json'
    assert binary.stat().st_size == 6 * 8
    assert read_json(sidecar) == {'shape': [2, 3], 'dtype': '<f8', 'order': 'C', 'meta': {'kind': 'dgff'}}
    loaded, meta = read_grid(binary)
    assert np.array_equal(loaded, values)
    assert meta == {'kind': 'dgff'}


def test_csv_keeps_full_float_precision(tmp_path: Path) -> None:
    target = write_csv(tmp_path / 'table.csv', [{'a': 0.1, 'b': None, 'c': 'skip'}], ('a', 'b'))
    assert target.read_text(encoding='utf-8') == 'a,b\n0.1,\n'
    assert read_csv(target) == [{'a': '0.1', 'b': ''}]


def test_log_mass_of_lebesgue_measure_vanishes() -> None:
    assert np.allclose(log_mass(np.full((4, 4), 1.0 / 16)), 0.0)


def test_field_image_puts_x2_up(tmp_path: Path) -> None:
    values = np.zeros((8, 8))
    values[0, 7] = 3.0
    image = imread(write_field_image(tmp_path / 'field', values))
    assert image.shape[:2] == (8, 8)
    assert image[0, 0, 0] == pytest.approx(1.0)
    assert image[4, 4, 0] == pytest.approx(0.5, abs=0.01)


def test_log_mass_image(tmp_path: Path) -> None:
    target = write_log_mass_image(tmp_path / 'measure', np.full((4, 4), 1.0 / 16))
    assert imread(target).shape[:2] == (4, 4)


def test_overlay_image_is_reproducible(tmp_path: Path) -> None:
    masses = np.full((8, 8), 1.0 / 64)
    squares = [DyadicSquare(0.0, 0.0, 0.5, 0.25), DyadicSquare(0.5, 0.5, 0.5, 0.25)]
    first = checksum(write_overlay_image(tmp_path / 'first', masses, squares))
    second = checksum(write_overlay_image(tmp_path / 'second', masses, squares))
    assert first == second


def test_squares_table(tmp_path: Path) -> None:
    target = write_squares(tmp_path / 'squares.csv', [DyadicSquare(0.0, 0.5, 0.5, 0.25)])
    assert read_csv(target) == [{'x': '0.0', 'y': '0.5', 'size': '0.5', 'mass': '0.25'}]
