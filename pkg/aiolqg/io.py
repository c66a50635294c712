"""Run outputs: flat binary grids with JSON sidecars, CSV tables, JSON summaries and raster images."""
import csv
import hashlib
import json
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from matplotlib.image import imsave
from matplotlib.patches import Rectangle

from .liouville import DyadicSquare

PathLike = Union[str, Path]

# fixed value -> color maps so images are comparable across runs
FIELD_RANGE = (-3.0, 3.0)
LOG_MASS_RANGE = (-4.0, 4.0)
FIELD_CMAP = 'gray'
LOG_MASS_CMAP = 'magma'
BINARY_DTYPE = '<f8'


def checksum(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as stream:
        for block in iter(lambda: stream.read(1 << 20), b''):
            digest.update(block)
    return digest.hexdigest()


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False, default=_jsonable) + '\n'


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    return str(value)


def write_json(path: PathLike, payload: Any) -> Path:
    target = Path(path)
    target.write_text(canonical_json(payload), encoding='utf-8')
    return target


def write_json_atomic(path: PathLike, payload: Any) -> Path:
    """Write through a temporary file and ``os.replace`` so readers never see a partial document."""
    target = Path(path)
    scratch = target.with_name(f'.{target.name}.tmp')
    scratch.write_text(canonical_json(payload), encoding='utf-8')
    os.replace(scratch, target)
    return target


def read_json(path: PathLike) -> Any:
    return json.loads(Path(path).read_text(encoding='utf-8'))


def write_grid(path: PathLike, values: np.ndarray, meta: Optional[Mapping[str, Any]] = None) -> Tuple[Path, Path]:
    """Little-endian float64, row-major, plus a ``.json`` sidecar with shape, dtype and ``meta``."""
    target = Path(path).with_suffix('.bin')
    array = np.ascontiguousarray(values, dtype=BINARY_DTYPE)
    array.tofile(target)
    sidecar = write_json(
        target.with_suffix('.json'),
        {'shape': list(array.shape), 'dtype': BINARY_DTYPE, 'order': 'C', 'meta': dict(meta or {})},
    )
    return target, sidecar


def read_grid(path: PathLike) -> Tuple[np.ndarray, Dict[str, Any]]:
    target = Path(path).with_suffix('.bin')
    sidecar = read_json(target.with_suffix('.json'))
    values = np.fromfile(target, dtype=sidecar['dtype']).reshape(sidecar['shape'])
    return values, sidecar['meta']


def write_csv(path: PathLike, rows: Iterable[Mapping[str, Any]], header: Sequence[str]) -> Path:
    target = Path(path)
    with open(target, 'w', encoding='utf-8', newline='') as stream:
        writer = csv.DictWriter(stream, fieldnames=list(header), extrasaction='ignore')
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(row.get(key)) for key in header})
    return target


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, np.generic):
        return repr(value.item())
    return '' if value is None else value


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    with open(path, encoding='utf-8', newline='') as stream:
        return list(csv.DictReader(stream))


def _image_rows(values: np.ndarray) -> np.ndarray:
    # grids are indexed [x1, x2]; images put x2 up
    return np.flipud(np.asarray(values).T)


def write_field_image(path: PathLike, values: np.ndarray) -> Path:
    """Grayscale heatmap on the fixed range [-3, 3]; a zero value renders mid-gray."""
    target = Path(path).with_suffix('.png')
    imsave(target, _image_rows(values), cmap=FIELD_CMAP, vmin=FIELD_RANGE[0], vmax=FIELD_RANGE[1])
    return target


def log_mass(masses: np.ndarray) -> np.ndarray:
    """log(n^2 mass): zero everywhere for Lebesgue measure."""
    n = masses.shape[0]
    return np.log(np.asarray(masses) * n * n)


def write_log_mass_image(path: PathLike, masses: np.ndarray) -> Path:
    target = Path(path).with_suffix('.png')
    imsave(
        target,
        _image_rows(log_mass(masses)),
        cmap=LOG_MASS_CMAP,
        vmin=LOG_MASS_RANGE[0],
        vmax=LOG_MASS_RANGE[1],
    )
    return target


def write_overlay_image(path: PathLike, masses: np.ndarray, squares: Sequence[DyadicSquare]) -> Path:
    """The log-mass map with the equal-mass dyadic squares drawn on top."""
    target = Path(path).with_suffix('.png')
    figure = Figure(figsize=(6, 6), dpi=100)
    FigureCanvasAgg(figure)
    axes = figure.add_axes((0.0, 0.0, 1.0, 1.0))
    axes.imshow(
        _image_rows(log_mass(masses)),
        cmap=LOG_MASS_CMAP,
        vmin=LOG_MASS_RANGE[0],
        vmax=LOG_MASS_RANGE[1],
        extent=(0.0, 1.0, 0.0, 1.0),
    )
    for square in squares:
        axes.add_patch(Rectangle((square.x, square.y), square.size, square.size, fill=False, lw=0.4, ec='cyan'))
    axes.set_axis_off()
    figure.savefig(target, metadata={'Software': None})
    return target


def write_squares(path: PathLike, squares: Sequence[DyadicSquare]) -> Path:
    return write_csv(path, [square._asdict() for square in squares], DyadicSquare._fields)
