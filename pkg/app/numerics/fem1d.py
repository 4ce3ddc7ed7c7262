"""P1 Lagrange elements on interval meshes."""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from app.errors import ConfigError
from app.models.mesh import Mesh1D
from app.numerics.sparse_core import as_csr, assemble

logger = logging.getLogger(__name__)

# two-point Gauss rule on [0, 1]
_GAUSS2_POINTS = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
_GAUSS2_WEIGHTS = np.array([0.5, 0.5])


@dataclass
class Forms1D:
    """Assembled P1 matrices: M, Mρ, K, D (N×N), B (N×2), M∂ (2×2)"""
    M: sp.csr_matrix
    M_rho: sp.csr_matrix
    K: sp.csr_matrix
    D: sp.csr_matrix
    B: sp.csr_matrix
    M_bd: sp.csr_matrix

    @property
    def n(self):
        return self.M.shape[0]


def uniform_mesh(a, b, n_nodes):
    return Mesh1D(np.linspace(a, b, n_nodes))


def graded_gridlines(a, b, n_elements, grading, max_ratio=6.0):
    """Gridlines whose widths grow geometrically from both ends toward the middle.

    Growth stops once a width reaches ``max_ratio`` times the wall width.
    """
    if n_elements < 1:
        raise ConfigError('need at least one element')
    if grading == 1.0:
        return np.linspace(a, b, n_elements + 1)
    half = n_elements // 2
    growth = np.minimum(grading ** np.arange(half), max_ratio)
    middle = [min(grading ** half, max_ratio)] if n_elements % 2 else []
    widths = np.concatenate([growth, middle, growth[::-1]])
    widths *= (b - a) / widths.sum()
    nodes = a + np.concatenate([[0.0], np.cumsum(widths)])
    nodes[-1] = b
    return nodes


def _element_triplets(mesh, local):
    """Scatter (n_elements, 2, 2) local blocks into global triplets"""
    first = np.arange(mesh.n_elements)
    dofs = np.stack([first, first + 1], axis=1)
    rows = np.repeat(dofs[:, :, None], 2, axis=2)
    cols = np.repeat(dofs[:, None, :], 2, axis=1)
    return rows, cols, local


def _sample_rho(rho, x):
    x = np.asarray(x, dtype=np.float64)
    if callable(rho):
        values = np.broadcast_to(np.asarray(rho(x), dtype=np.float64), x.shape)
    else:
        values = np.full(x.shape, float(rho))
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise ConfigError('density must be positive on the whole interval')
    return values


def assemble_forms(mesh, rho=1.0):
    """Assemble every P1 matrix of the 1D models on ``mesh``."""
    h = mesh.widths
    N = mesh.n_nodes
    ones = np.ones_like(h)

    mass = (h / 6.0)[:, None, None] * np.array([[2.0, 1.0], [1.0, 2.0]])
    stiffness = (1.0 / h)[:, None, None] * np.array([[1.0, -1.0], [-1.0, 1.0]])
    # D_ij = ∫ φ_i φ_j'
    derivative = ones[:, None, None] * np.array([[-0.5, 0.5], [-0.5, 0.5]])

    x_q = mesh.nodes[:-1, None] + h[:, None] * _GAUSS2_POINTS[None, :]
    rho_q = _sample_rho(rho, x_q)
    _sample_rho(rho, mesh.nodes)
    phi = np.stack([1.0 - _GAUSS2_POINTS, _GAUSS2_POINTS])  # (2 basis, 2 points)
    weighted_mass = np.einsum('eq,iq,jq->eij', rho_q * h[:, None] * _GAUSS2_WEIGHTS, phi, phi)

    def build(local):
        rows, cols, vals = _element_triplets(mesh, local)
        return assemble(rows, cols, vals, (N, N))

    B = assemble([0, N - 1], [0, 1], [1.0, 1.0], (N, 2))
    forms = Forms1D(M=build(mass), M_rho=build(weighted_mass), K=build(stiffness),
                    D=build(derivative), B=B, M_bd=as_csr(sp.identity(2)))
    logger.debug('assembled 1D forms on %d nodes', N)
    return forms


def interpolate_p1(mesh, f):
    """Nodal values of f (callable or constant)"""
    x = mesh.nodes
    values = f(x) if callable(f) else f
    return np.broadcast_to(np.asarray(values, dtype=np.float64), x.shape).copy()


def l2_norm(mesh, forms, u):
    u = np.asarray(u, dtype=np.float64)
    return float(np.sqrt(max(u @ (forms.M @ u), 0.0)))


def l2_error(mesh, u, f, points=5):
    """‖u_h − f‖_{L²} with Gauss quadrature on each element"""
    t, w = np.polynomial.legendre.leggauss(points)
    t, w = 0.5 * (t + 1.0), 0.5 * w
    h = mesh.widths
    x_q = mesh.nodes[:-1, None] + h[:, None] * t[None, :]
    u = np.asarray(u, dtype=np.float64)
    u_q = u[:-1, None] * (1.0 - t)[None, :] + u[1:, None] * t[None, :]
    diff = u_q - np.asarray(f(x_q), dtype=np.float64)
    return float(np.sqrt(np.sum(h[:, None] * w[None, :] * diff ** 2)))


def boundary_selector(n):
    """Index arrays of interior and boundary (first, last) dofs"""
    return np.arange(1, n - 1), np.array([0, n - 1])
