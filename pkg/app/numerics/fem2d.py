"""Finite elements on graded rectangle meshes of a rectangle.

Three spaces share one mesh:

* ``PsiSpace``: C1 bicubic Hermite rectangles (Bogner-Fox-Schmit), four dofs per mesh
  node ordered (value, ∂x, ∂y, ∂xy), global dof ``4*node + k``.
* ``OmegaSpace``: Q3 tensor Lagrange elements on the (3nx+1)x(3ny+1) lattice of
  equispaced points per cell, dof ``jj*(3nx+1) + ii``.
* ``TraceSpace``: P1 functions on the closed boundary polygon, one dof per boundary
  mesh node, numbered counterclockwise from the lower-left corner.

Volume integrals use a 5x5 Gauss rule per cell and boundary integrals a 5 point Gauss
rule per boundary edge.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from app.errors import ConfigError, MeshError
from app.models.mesh import Mesh2D
from app.numerics.fem1d import graded_gridlines
from app.numerics.sparse_core import as_csr, assemble, factorize

logger = logging.getLogger(__name__)

QUADRATURE_POINTS = 5
_GAUSS_T, _GAUSS_W = np.polynomial.legendre.leggauss(QUADRATURE_POINTS)
GAUSS_POINTS = 0.5 * (_GAUSS_T + 1.0)
GAUSS_WEIGHTS = 0.5 * _GAUSS_W

# outward normals of the bottom, right, top and left walls
_NORMALS = np.array([[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])


def hermite_1d(t, h, order=0):
    """Cubic Hermite basis (left value, left slope, right value, right slope) at t in [0, 1].

    Slopes are scaled by the cell width ``h`` so dofs are physical derivatives; ``order``
    differentiates with respect to the physical coordinate. Returns shape ``t.shape[:-1] + (4,) + t.shape[-1:]``
    when ``h`` broadcasts over the leading axes of ``t``.
    """
    t = np.asarray(t, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)[..., None]
    if order == 0:
        table = [1 - 3 * t ** 2 + 2 * t ** 3, h * (t - 2 * t ** 2 + t ** 3),
                 3 * t ** 2 - 2 * t ** 3, h * (t ** 3 - t ** 2)]
    elif order == 1:
        table = [(-6 * t + 6 * t ** 2) / h, 1 - 4 * t + 3 * t ** 2,
                 (6 * t - 6 * t ** 2) / h, 3 * t ** 2 - 2 * t]
    elif order == 2:
        table = [(-6 + 12 * t) / h ** 2, (-4 + 6 * t) / h,
                 (6 - 12 * t) / h ** 2, (6 * t - 2) / h]
    else:
        raise ValueError(f'unsupported derivative order {order}')
    return np.stack([np.broadcast_to(f, t.shape) for f in table], axis=-2)


def lagrange3_1d(t, h, order=0):
    """Cubic Lagrange basis on the points 0, 1/3, 2/3, 1 of the unit interval"""
    t = np.asarray(t, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)[..., None]
    if order == 0:
        table = [-4.5 * (t - 1 / 3) * (t - 2 / 3) * (t - 1),
                 13.5 * t * (t - 2 / 3) * (t - 1),
                 -13.5 * t * (t - 1 / 3) * (t - 1),
                 4.5 * t * (t - 1 / 3) * (t - 2 / 3)]
    elif order == 1:
        table = [(-13.5 * t ** 2 + 18 * t - 5.5) / h,
                 (40.5 * t ** 2 - 45 * t + 9) / h,
                 (-40.5 * t ** 2 + 36 * t - 4.5) / h,
                 (13.5 * t ** 2 - 9 * t + 1) / h]
    else:
        raise ValueError(f'unsupported derivative order {order}')
    return np.stack([np.broadcast_to(f, t.shape) for f in table], axis=-2)


def build_mesh(corners, nx, ny, grading=1.0, max_ratio=6.0):
    """Tensor-product mesh of the rectangle ``corners = ((x0, y0), (x1, y1))`` graded toward all four walls."""
    (x0, y0), (x1, y1) = corners
    if nx < 2 or ny < 2:
        raise ConfigError('nx and ny must be at least 2')
    if grading < 1:
        raise ConfigError('grading must be at least 1')
    if not (x0 < x1 and y0 < y1):
        raise MeshError('degenerate cell: empty rectangle')
    xs = graded_gridlines(x0, x1, nx, grading, max_ratio)
    ys = graded_gridlines(y0, y1, ny, grading, max_ratio)
    mesh = Mesh2D(xs, ys, grading=grading, max_ratio=max_ratio)
    logger.debug('built mesh %s', mesh.describe())
    return mesh


def _locate(lines, x):
    """Cell index and local coordinate of points along one axis"""
    x = np.asarray(x, dtype=np.float64)
    index = np.clip(np.searchsorted(lines, x, side='right') - 1, 0, lines.size - 2)
    width = lines[index + 1] - lines[index]
    return index, (x - lines[index]) / width


class _Space:
    """Tensor-product space: a 1D basis family per axis plus a cell dof map"""
    family = None

    def __init__(self, mesh):
        self.mesh = mesh
        self.cell_dofs = self._cell_dofs()
        self.volume_tables = {}

    def _cell_dofs(self):
        raise NotImplementedError

    @property
    def n_dofs(self):
        raise NotImplementedError

    def axis_tables(self, t, order_x=0, order_y=0):
        """1D basis tables of every column and row of cells at local points ``t``"""
        mesh = self.mesh
        tx = np.broadcast_to(t, (mesh.nx, t.size))
        ty = np.broadcast_to(t, (mesh.ny, t.size))
        return type(self).family(tx, mesh.hx, order_x), type(self).family(ty, mesh.hy, order_y)

    def cell_tables(self, order_x=0, order_y=0):
        """Basis values of every cell at the 5x5 Gauss points, shape (cells, 16, 25)"""
        X, Y = self.axis_tables(GAUSS_POINTS, order_x, order_y)
        i, j = self.mesh.cell_indices()
        table = np.einsum('cpa,cqb->cpqab', X[i], Y[j])
        return table.reshape(i.size, 16, GAUSS_POINTS.size ** 2)

    def point_tables(self, i, j, t, s, order_x=0, order_y=0):
        """Basis values of cells (i, j) at local points (t, s), shape (cells, 16, points)"""
        mesh = self.mesh
        X = type(self).family(t, mesh.hx[i], order_x)
        Y = type(self).family(s, mesh.hy[j], order_y)
        table = np.einsum('cpa,cqa->cpqa', X, Y)
        return table.reshape(len(i), 16, t.shape[-1])

    def evaluate(self, coefficients, x, y, order_x=0, order_y=0):
        """Point values (or derivatives) of the field with the given dof vector"""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        y = np.broadcast_to(np.asarray(y, dtype=np.float64), x.shape)
        i, t = _locate(self.mesh.xs, x.ravel())
        j, s = _locate(self.mesh.ys, y.ravel())
        table = self.point_tables(i, j, t[:, None], s[:, None], order_x, order_y)[:, :, 0]
        cells = j * self.mesh.nx + i
        values = np.einsum('cl,cl->c', np.asarray(coefficients)[self.cell_dofs[cells]], table)
        return values.reshape(x.shape)


class PsiSpace(_Space):
    family = staticmethod(hermite_1d)

    @property
    def n_dofs(self):
        return 4 * self.mesh.n_nodes

    def _cell_dofs(self):
        mesh = self.mesh
        i, j = mesh.cell_indices()
        dofs = np.empty((mesh.n_cells, 4, 4), dtype=np.int64)
        for p in range(4):
            a, fx = divmod(p, 2)
            for q in range(4):
                b, fy = divmod(q, 2)
                node = (j + b) * (mesh.nx + 1) + (i + a)
                dofs[:, p, q] = 4 * node + fx + 2 * fy
        return dofs.reshape(mesh.n_cells, 16)

    def interpolate(self, value, dx, dy, dxy):
        """Hermite interpolation from a function and its derivatives ∂x, ∂y, ∂xy"""
        X, Y = self.mesh.node_coordinates()
        dofs = np.empty((X.size, 4))
        for k, f in enumerate((value, dx, dy, dxy)):
            dofs[:, k] = np.broadcast_to(np.asarray(f(X, Y), dtype=np.float64), X.shape)
        return dofs.ravel()

    def node_values(self, psi_bar):
        return np.asarray(psi_bar)[0::4]

    def boundary_dirichlet_dofs(self):
        """Value and tangential-derivative dofs of the boundary nodes"""
        mesh = self.mesh
        j, i = np.divmod(np.arange(mesh.n_nodes), mesh.nx + 1)
        on_x_wall = (i == 0) | (i == mesh.nx)
        on_y_wall = (j == 0) | (j == mesh.ny)
        nodes = np.flatnonzero(on_x_wall | on_y_wall)
        dofs = [4 * nodes]
        dofs.append(4 * np.flatnonzero(on_y_wall) + 1)  # ∂x along bottom and top
        dofs.append(4 * np.flatnonzero(on_x_wall) + 2)  # ∂y along left and right
        return np.unique(np.concatenate(dofs))


class OmegaSpace(_Space):
    family = staticmethod(lagrange3_1d)

    @property
    def n_dofs(self):
        return (3 * self.mesh.nx + 1) * (3 * self.mesh.ny + 1)

    def _cell_dofs(self):
        mesh = self.mesh
        i, j = mesh.cell_indices()
        row = 3 * mesh.nx + 1
        dofs = np.empty((mesh.n_cells, 4, 4), dtype=np.int64)
        for p in range(4):
            for q in range(4):
                dofs[:, p, q] = (3 * j + q) * row + 3 * i + p
        return dofs.reshape(mesh.n_cells, 16)

    def lattice(self):
        """Coordinates of the Q3 points along x and y"""
        def refine(lines):
            inner = lines[:-1, None] + np.diff(lines)[:, None] * np.array([0.0, 1 / 3, 2 / 3])
            return np.append(inner.ravel(), lines[-1])
        return refine(self.mesh.xs), refine(self.mesh.ys)

    def coordinates(self):
        X, Y = np.meshgrid(*self.lattice())
        return X.ravel(), Y.ravel()

    def interpolate(self, f):
        X, Y = self.coordinates()
        return np.broadcast_to(np.asarray(f(X, Y), dtype=np.float64), X.shape).copy()

    def vertex_values(self, omega_bar):
        """Values at the mesh nodes, shape (ny+1, nx+1)"""
        mesh = self.mesh
        grid = np.asarray(omega_bar).reshape(3 * mesh.ny + 1, 3 * mesh.nx + 1)
        return grid[::3, ::3]


@dataclass
class _BoundaryEdge:
    """Per-edge quadrature data of the boundary loop, arrays over edges"""
    cell_i: np.ndarray
    cell_j: np.ndarray
    t: np.ndarray
    s: np.ndarray
    tau: np.ndarray
    length: np.ndarray
    normal: np.ndarray
    loop: np.ndarray


class TraceSpace:
    """P1 functions on the closed boundary polygon"""

    def __init__(self, mesh):
        self.mesh = mesh
        self.nodes = self._loop_nodes()
        self.edges = self._edges()

    @property
    def n_dofs(self):
        return self.nodes.size

    def _loop_nodes(self):
        mesh = self.mesh
        nx, ny = mesh.nx, mesh.ny
        row = nx + 1
        bottom = np.arange(0, nx)
        right = nx + row * np.arange(0, ny)
        top = ny * row + np.arange(nx, 0, -1)
        left = row * np.arange(ny, 0, -1)
        return np.concatenate([bottom, right, top, left])

    def coordinates(self):
        X, Y = self.mesh.node_coordinates()
        return X[self.nodes], Y[self.nodes]

    def arc_length(self):
        """Arc length of every loop node measured from the lower-left corner"""
        X, Y = self.coordinates()
        steps = np.hypot(np.diff(X), np.diff(Y))
        return np.concatenate([[0.0], np.cumsum(steps)])

    def _edges(self):
        mesh = self.mesh
        nx, ny = mesh.nx, mesh.ny
        tau = np.broadcast_to(GAUSS_POINTS, (2 * (nx + ny), GAUSS_POINTS.size))
        zero, one = np.zeros_like(GAUSS_POINTS), np.ones_like(GAUSS_POINTS)
        ci, cj, ts, ss, lengths, walls = [], [], [], [], [], []
        for k in range(nx):
            ci.append(k), cj.append(0), ts.append(GAUSS_POINTS), ss.append(zero)
            lengths.append(mesh.hx[k]), walls.append(0)
        for k in range(ny):
            ci.append(nx - 1), cj.append(k), ts.append(one), ss.append(GAUSS_POINTS)
            lengths.append(mesh.hy[k]), walls.append(1)
        for k in range(nx - 1, -1, -1):
            ci.append(k), cj.append(ny - 1), ts.append(1.0 - GAUSS_POINTS), ss.append(one)
            lengths.append(mesh.hx[k]), walls.append(2)
        for k in range(ny - 1, -1, -1):
            ci.append(0), cj.append(k), ts.append(zero), ss.append(1.0 - GAUSS_POINTS)
            lengths.append(mesh.hy[k]), walls.append(3)
        count = len(ci)
        loop = np.stack([np.arange(count), (np.arange(count) + 1) % count], axis=1)
        return _BoundaryEdge(cell_i=np.array(ci), cell_j=np.array(cj), t=np.array(ts),
                             s=np.array(ss), tau=tau, length=np.array(lengths),
                             normal=_NORMALS[np.array(walls)], loop=loop)

    def edge_basis(self):
        """Trace basis (1-τ, τ) at the edge quadrature points, shape (edges, 2, points)"""
        tau = self.edges.tau
        return np.stack([1.0 - tau, tau], axis=1)

    def edge_weights(self):
        return self.edges.length[:, None] * GAUSS_WEIGHTS[None, :]

    def mass(self):
        e = self.edges
        local = e.length[:, None, None] * np.array([[1 / 3, 1 / 6], [1 / 6, 1 / 3]])
        rows = np.repeat(e.loop[:, :, None], 2, axis=2)
        cols = np.repeat(e.loop[:, None, :], 2, axis=1)
        return assemble(rows, cols, local, (self.n_dofs, self.n_dofs))


@dataclass
class Forms2D:
    """State-independent matrices of the vorticity / stream-function system"""
    M: sp.csr_matrix
    K: sp.csr_matrix
    R1: sp.csr_matrix
    R2: sp.csr_matrix
    M_bd: sp.csr_matrix
    B1: sp.csr_matrix
    B3: sp.csr_matrix
    B5: sp.csr_matrix
    M_mix: sp.csr_matrix
    psi_space: PsiSpace
    omega_space: OmegaSpace
    trace_space: TraceSpace

    @property
    def mesh(self):
        return self.psi_space.mesh


def _cell_weights(mesh):
    i, j = mesh.cell_indices()
    w = np.outer(GAUSS_WEIGHTS, GAUSS_WEIGHTS).ravel()
    return (mesh.hx[i] * mesh.hy[j])[:, None] * w[None, :]


def _scatter(row_dofs, col_dofs, local, shape):
    rows = np.repeat(row_dofs[:, :, None], col_dofs.shape[1], axis=2)
    cols = np.repeat(col_dofs[:, None, :], row_dofs.shape[1], axis=1)
    return assemble(rows, cols, local, shape)


class _VolumeTables:
    """Cached basis tables of both volume spaces at the cell quadrature points"""

    def __init__(self, psi_space, omega_space):
        mesh = psi_space.mesh
        self.weights = _cell_weights(mesh)
        self.psi = psi_space.cell_tables()
        self.psi_dx = psi_space.cell_tables(1, 0)
        self.psi_dy = psi_space.cell_tables(0, 1)
        self.psi_lap = psi_space.cell_tables(2, 0) + psi_space.cell_tables(0, 2)
        self.omega = omega_space.cell_tables()
        self.omega_dx = omega_space.cell_tables(1, 0)
        self.omega_dy = omega_space.cell_tables(0, 1)


def _tables(psi_space, omega_space):
    tables = psi_space.volume_tables.get(omega_space)
    if tables is None:
        tables = psi_space.volume_tables[omega_space] = _VolumeTables(psi_space, omega_space)
    return tables


def _boundary_tables(space, trace):
    e = trace.edges
    values = space.point_tables(e.cell_i, e.cell_j, e.t, e.s)
    dx = space.point_tables(e.cell_i, e.cell_j, e.t, e.s, 1, 0)
    dy = space.point_tables(e.cell_i, e.cell_j, e.t, e.s, 0, 1)
    normal = e.normal[:, 0, None, None] * dx + e.normal[:, 1, None, None] * dy
    cells = e.cell_j * space.mesh.nx + e.cell_i
    return values, normal, space.cell_dofs[cells]


def _boundary_matrix(table, dofs, trace, n_rows, modulation=None):
    weights = trace.edge_weights()
    if modulation is not None:
        weights = weights * modulation
    local = np.einsum('eq,eiq,ekq->eik', weights, table, trace.edge_basis())
    return _scatter(dofs, trace.edges.loop, local, (n_rows, trace.n_dofs))


def assemble_static(mesh):
    """Assemble every state-independent matrix on ``mesh``."""
    psi_space, omega_space, trace = PsiSpace(mesh), OmegaSpace(mesh), TraceSpace(mesh)
    T = _tables(psi_space, omega_space)
    w = T.weights
    n_psi, n_omega = psi_space.n_dofs, omega_space.n_dofs

    def volume(left, right, row_space, col_space):
        local = np.einsum('cq,ciq,cjq->cij', w, left, right)
        return _scatter(row_space.cell_dofs, col_space.cell_dofs, local,
                        (row_space.n_dofs, col_space.n_dofs))

    M = volume(T.omega, T.omega, omega_space, omega_space)
    K = volume(T.psi_dx, T.psi_dx, psi_space, psi_space) + volume(T.psi_dy, T.psi_dy, psi_space, psi_space)
    R1 = volume(T.psi_lap, T.psi_lap, psi_space, psi_space)
    R2 = (volume(T.omega_dx, T.omega_dx, omega_space, omega_space)
          + volume(T.omega_dy, T.omega_dy, omega_space, omega_space))
    M_mix = volume(T.psi, T.omega, psi_space, omega_space)

    psi_bd, psi_normal, psi_bd_dofs = _boundary_tables(psi_space, trace)
    omega_bd, _, omega_bd_dofs = _boundary_tables(omega_space, trace)
    B1 = _boundary_matrix(psi_bd, psi_bd_dofs, trace, n_psi)
    B3 = _boundary_matrix(psi_normal, psi_bd_dofs, trace, n_psi)
    B5 = _boundary_matrix(omega_bd, omega_bd_dofs, trace, n_omega)

    forms = Forms2D(M=M, K=K, R1=R1, R2=R2, M_bd=trace.mass(), B1=B1, B3=B3, B5=B5,
                    M_mix=M_mix, psi_space=psi_space, omega_space=omega_space, trace_space=trace)
    logger.info('assembled static forms on %s: N_psi=%d N_omega=%d M_bd=%d',
                mesh.describe(), n_psi, n_omega, trace.n_dofs)
    return forms


def _field_at_quadrature(space, coefficients, table):
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if coefficients.size != space.n_dofs:
        raise ConfigError(f'field with {coefficients.size} dofs, expected {space.n_dofs}')
    return np.einsum('cl,clq->cq', coefficients[space.cell_dofs], table)


def _skew_part(A):
    return as_csr(0.5 * (A - A.T))


def assemble_D1_raw(psi_space, omega_space, omega_bar):
    """∫ ω grad φ_i · grad⊥ φ_j with grad⊥ = (∂y, -∂x), before skew-symmetrization"""
    T = _tables(psi_space, omega_space)
    omega_q = _field_at_quadrature(omega_space, omega_bar, T.omega) * T.weights
    local = (np.einsum('cq,ciq,cjq->cij', omega_q, T.psi_dx, T.psi_dy)
             - np.einsum('cq,ciq,cjq->cij', omega_q, T.psi_dy, T.psi_dx))
    return _scatter(psi_space.cell_dofs, psi_space.cell_dofs, local, (psi_space.n_dofs,) * 2)


def assemble_D1(psi_space, omega_space, omega_bar):
    return _skew_part(assemble_D1_raw(psi_space, omega_space, omega_bar))


def assemble_D2_raw(psi_space, omega_space, psi_bar):
    """∫ ψ grad⊥ φ_i · grad φ_j, before skew-symmetrization"""
    T = _tables(psi_space, omega_space)
    psi_q = _field_at_quadrature(psi_space, psi_bar, T.psi) * T.weights
    local = (np.einsum('cq,ciq,cjq->cij', psi_q, T.omega_dy, T.omega_dx)
             - np.einsum('cq,ciq,cjq->cij', psi_q, T.omega_dx, T.omega_dy))
    return _scatter(omega_space.cell_dofs, omega_space.cell_dofs, local, (omega_space.n_dofs,) * 2)


def assemble_D2(psi_space, omega_space, psi_bar):
    return _skew_part(assemble_D2_raw(psi_space, omega_space, psi_bar))


def assemble_B2_B4(forms, omega_bar, psi_bar):
    """Boundary matrices modulated by the traces of ω and ψ"""
    trace = forms.trace_space
    psi_bd, _, psi_dofs = _boundary_tables(forms.psi_space, trace)
    omega_bd, _, omega_dofs = _boundary_tables(forms.omega_space, trace)
    omega_trace = np.einsum('el,elq->eq', np.asarray(omega_bar, dtype=np.float64)[omega_dofs], omega_bd)
    psi_trace = np.einsum('el,elq->eq', np.asarray(psi_bar, dtype=np.float64)[psi_dofs], psi_bd)
    B2 = _boundary_matrix(psi_bd, psi_dofs, trace, forms.psi_space.n_dofs, omega_trace)
    B4 = _boundary_matrix(omega_bd, omega_dofs, trace, forms.omega_space.n_dofs, psi_trace)
    return B2, B4


def solve_poisson_dirichlet(forms, omega_bar):
    """Solve -Δψ = ω weakly with ψ = 0 on the boundary; Dirichlet dofs are eliminated."""
    psi_space = forms.psi_space
    omega_bar = np.asarray(omega_bar, dtype=np.float64)
    rhs = forms.M_mix @ omega_bar
    psi = np.zeros(psi_space.n_dofs)
    if not np.any(rhs):
        return psi
    fixed = psi_space.boundary_dirichlet_dofs()
    free = np.setdiff1d(np.arange(psi_space.n_dofs), fixed)
    K_ff = forms.K[free][:, free]
    F = factorize(K_ff, symmetric=True)
    psi[free] = F.solve(rhs[free])
    return psi


def kinetic_energy(forms, psi_bar, rho0=1.0):
    psi_bar = np.asarray(psi_bar, dtype=np.float64)
    return 0.5 * rho0 * float(psi_bar @ (forms.K @ psi_bar))


def enstrophy(forms, omega_bar, rho0=1.0):
    omega_bar = np.asarray(omega_bar, dtype=np.float64)
    return 0.5 * rho0 * float(omega_bar @ (forms.M @ omega_bar))


def psi_l2_error(psi_space, psi_bar, exact):
    """L² distance between the Hermite field and ``exact(x, y)``"""
    mesh = psi_space.mesh
    values = _field_at_quadrature(psi_space, psi_bar, psi_space.cell_tables())
    i, j = mesh.cell_indices()
    X = mesh.xs[i][:, None] + mesh.hx[i][:, None] * np.repeat(GAUSS_POINTS, GAUSS_POINTS.size)[None, :]
    Y = mesh.ys[j][:, None] + mesh.hy[j][:, None] * np.tile(GAUSS_POINTS, GAUSS_POINTS.size)[None, :]
    diff = values - np.asarray(exact(X, Y), dtype=np.float64)
    return float(np.sqrt(np.sum(_cell_weights(mesh) * diff ** 2)))
