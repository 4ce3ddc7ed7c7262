import numpy as np
import pytest

from app import create_app
from app.numerics import fem1d, fem2d


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help='run resolution-gated acceptance tests')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def cli():
    return create_app('testing')


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def unit_forms_1d():
    mesh = fem1d.uniform_mesh(0.0, 1.0, 11)
    return mesh, fem1d.assemble_forms(mesh)


@pytest.fixture(scope='session')
def small_forms_2d():
    """4x4 uniform mesh of the unit square"""
    return fem2d.assemble_static(fem2d.build_mesh(((0.0, 0.0), (1.0, 1.0)), 4, 4))


@pytest.fixture(scope='session')
def graded_forms_2d():
    """6x6 graded mesh of [-1, 1]^2"""
    return fem2d.assemble_static(fem2d.build_mesh(((-1.0, -1.0), (1.0, 1.0)), 6, 6, grading=1.2))
