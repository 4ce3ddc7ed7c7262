import json

import numpy as np
import pytest
import scipy.sparse as sp

from app.errors import DimensionError
from app.models.states import TimeSeries
from app.models.system import PHSystemBundle
from app.utils import writers


def test_csv_uses_full_precision(tmp_path):
    series = TimeSeries(('t', 'H'))
    series.append(0.0, 1.0 / 3.0)
    series.append(0.1, 2.0 / 3.0)
    path = writers.write_series_csv(tmp_path / 'series.csv', series)
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0] == 't,H'
    assert lines[1] == '0,0.33333333333333331'
    header, rows = writers.read_rows_csv(path)
    assert header == ('t', 'H')
    assert rows[1][1] == 2.0 / 3.0


def test_csv_rejects_ragged_rows(tmp_path):
    with pytest.raises(DimensionError):
        writers.write_rows_csv(tmp_path / 'bad.csv', ('a', 'b'), [(1.0,)])


def test_vtk_header_and_sizes(tmp_path):
    xs, ys = np.linspace(0.0, 1.0, 3), np.linspace(0.0, 2.0, 4)
    field = np.arange(12, dtype=float).reshape(4, 3)
    path = writers.write_vtk_structured(tmp_path / 'snap.vtk', xs, ys, {'omega': field}, title='test')
    lines = path.read_text(encoding='ascii').splitlines()
    assert lines[0] == '# vtk DataFile Version 3.0'
    assert lines[3] == 'DATASET STRUCTURED_GRID'
    assert lines[4] == 'DIMENSIONS 3 4 1'
    assert lines[5] == 'POINTS 12 double'
    assert 'POINT_DATA 12' in lines
    assert 'SCALARS omega double 1' in lines
    assert lines[-1] == '11'


def test_vtk_rejects_mismatched_field(tmp_path):
    with pytest.raises(DimensionError):
        writers.write_vtk_structured(tmp_path / 'bad.vtk', [0.0, 1.0], [0.0, 1.0], {'psi': np.zeros((3, 2))})


def test_bundle_round_trip(tmp_path):
    J = sp.csr_matrix([[0.0, 1.0, 0.5], [-1.0, 0.0, 0.0], [-0.5, 0.0, 0.0]])
    bundle = PHSystemBundle(P=sp.diags([2.0, 3.0]), S=sp.identity(2), J=J, n=2, n_D=1,
                            B_D=sp.csr_matrix([[0.0], [1.0]]), name='toy')
    directory = writers.write_bundle(tmp_path / 'bundle', bundle)
    manifest = json.loads((directory / 'manifest.json').read_text(encoding='utf-8'))
    assert manifest['labels'] == {'name': 'toy', 'n': 2, 'n_L': 0, 'n_D': 1, 'r': 0}
    assert 'R' not in manifest['blocks']
    loaded = writers.read_bundle(directory)
    for name in ('P', 'S', 'J', 'M_weight', 'B_D'):
        assert abs(getattr(loaded, name) - getattr(bundle, name)).max() == 0.0
    assert loaded.R.shape == (0, 0)
    assert loaded.name == 'toy'


def test_manifests(tmp_path):
    versions = json.loads(writers.write_versions(tmp_path).read_text(encoding='utf-8'))
    assert versions['numpy'] == np.__version__
    writers.write_summary(tmp_path, {'drift': np.float64(1e-12)})
    assert json.loads((tmp_path / 'summary.json').read_text(encoding='utf-8')) == {'drift': 1e-12}
    try:
        raise DimensionError('boom')
    except DimensionError as exc:
        text = writers.write_error_log(tmp_path, exc).read_text(encoding='utf-8')
    assert 'DimensionError: boom' in text
