"""Run-directory outputs: CSV tables, legacy VTK grids, Matrix Market bundles, manifests."""
import csv
import json
import logging
import platform
import traceback
from importlib import metadata
from pathlib import Path

import numpy as np

from app.errors import DimensionError
from app.models.system import PHSystemBundle
from app.numerics.sparse_core import read_matrix_market, write_matrix_market

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
VERSIONED_PACKAGES = ('numpy', 'scipy', 'click', 'tqdm')


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    return str(value)


def write_rows_csv(path, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise DimensionError(f'row of length {len(row)} for {len(columns)} columns')
            writer.writerow([_cell(v) for v in row])
    logger.debug('wrote %s (%d rows)', path, len(rows))
    return path


def write_series_csv(path, series):
    return write_rows_csv(path, series.columns, series.rows)


def read_rows_csv(path):
    """Header and float rows of a table written by ``write_rows_csv``"""
    with Path(path).open(newline='', encoding='utf-8') as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader))
        return header, [tuple(float(v) for v in row) for row in reader]


def write_vtk_structured(path, xs, ys, fields, title='phkit'):
    """Legacy ASCII STRUCTURED_GRID with nodal scalars of shape (len(ys), len(xs))"""
    xs, ys = np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64)
    nx, ny = xs.size, ys.size
    lines = ['# vtk DataFile Version 3.0', title, 'ASCII', 'DATASET STRUCTURED_GRID',
             f'DIMENSIONS {nx} {ny} 1', f'POINTS {nx * ny} double']
    X, Y = np.meshgrid(xs, ys)
    lines.extend(f'{FLOAT_FORMAT % x} {FLOAT_FORMAT % y} 0' for x, y in zip(X.ravel(), Y.ravel()))
    lines.append(f'POINT_DATA {nx * ny}')
    for name, values in fields.items():
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (ny, nx):
            raise DimensionError(f'field {name} has shape {values.shape}, expected {(ny, nx)}')
        lines.extend([f'SCALARS {name} double 1', 'LOOKUP_TABLE default'])
        lines.extend(FLOAT_FORMAT % v for v in values.ravel())
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text('\n'.join(lines) + '\n', encoding='ascii')
    return path


def write_bundle(directory, bundle):
    """One .mtx file per block plus ``manifest.json`` with the dimension labels"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {}
    for name, block in bundle.blocks().items():
        if 0 in block.shape:
            continue
        target = directory / f'{name}.mtx'
        write_matrix_market(target, block)
        files[name] = {'file': target.name, 'shape': list(block.shape), 'nnz': int(block.nnz)}
    manifest = {'labels': bundle.labels(), 'blocks': files}
    (directory / 'manifest.json').write_text(json.dumps(manifest, indent=2), encoding='utf-8')
    logger.info('wrote bundle %s to %s', bundle.name or 'bundle', directory)
    return directory


def read_bundle(directory):
    directory = Path(directory)
    manifest = json.loads((directory / 'manifest.json').read_text(encoding='utf-8'))
    blocks = {name: read_matrix_market(directory / entry['file']) for name, entry in manifest['blocks'].items()}
    labels = manifest['labels']
    return PHSystemBundle(P=blocks['P'], S=blocks['S'], J=blocks['J'], R=blocks.get('R'),
                          M_weight=blocks['M_weight'], B_D=blocks.get('B_D'), B_L=blocks.get('B_L'),
                          n=labels['n'], n_L=labels['n_L'], n_D=labels['n_D'], r=labels['r'],
                          name=labels['name'])


def package_versions():
    versions = {'python': platform.python_version()}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def write_versions(directory):
    path = Path(directory) / 'versions.json'
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(package_versions(), indent=2), encoding='utf-8')
    return path


def write_resolved_config(directory, text):
    path = Path(directory) / 'resolved.cfg'
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')
    return path


def write_error_log(directory, error):
    path = Path(directory) / 'error.log'
    path.parent.mkdir(parents=True, exist_ok=True)
    text = ''.join(traceback.format_exception(type(error), error, error.__traceback__))
    path.write_text(text, encoding='utf-8')
    return path


def write_summary(directory, data, name='summary.json'):
    path = Path(directory) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, default=float), encoding='utf-8')
    return path
