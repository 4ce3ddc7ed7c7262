from dataclasses import dataclass

import numpy as np

from app.errors import MeshError

MAX_ASPECT_RATIO = 50.0


@dataclass
class Mesh1D:
    """Interval mesh a = x_1 < ... < x_N = b carrying P1 dofs"""
    nodes: np.ndarray

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=np.float64).ravel()
        if self.nodes.size < 2:
            raise MeshError('a 1D mesh needs at least two nodes')
        if not np.all(np.diff(self.nodes) > 0):
            raise MeshError('mesh nodes must be strictly increasing')

    @property
    def n_nodes(self):
        return self.nodes.size

    @property
    def n_elements(self):
        return self.nodes.size - 1

    @property
    def a(self):
        return float(self.nodes[0])

    @property
    def b(self):
        return float(self.nodes[-1])

    @property
    def length(self):
        return self.b - self.a

    @property
    def widths(self):
        return np.diff(self.nodes)

    def same_as(self, other):
        return self.nodes.shape == other.nodes.shape and np.array_equal(self.nodes, other.nodes)


@dataclass
class Mesh2D:
    """Tensor-product rectangle mesh given by its x and y gridlines.

    Nodes are numbered row by row (``node = j*(nx+1) + i``) and cells likewise
    (``cell = j*nx + i``).
    """
    xs: np.ndarray
    ys: np.ndarray
    grading: float = 1.0
    max_ratio: float = 1.0

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=np.float64).ravel()
        self.ys = np.asarray(self.ys, dtype=np.float64).ravel()
        if self.xs.size < 3 or self.ys.size < 3:
            raise MeshError('a 2D mesh needs at least two cells per axis')
        hx, hy = np.diff(self.xs), np.diff(self.ys)
        if np.any(hx <= 0) or np.any(hy <= 0):
            raise MeshError('degenerate cell: gridlines must be strictly increasing')
        aspect = max(hx.max() / hy.min(), hy.max() / hx.min())
        if aspect > MAX_ASPECT_RATIO:
            raise MeshError(f'degenerate cell: aspect ratio {aspect:.1f} exceeds {MAX_ASPECT_RATIO:g}')

    @property
    def nx(self):
        return self.xs.size - 1

    @property
    def ny(self):
        return self.ys.size - 1

    @property
    def hx(self):
        return np.diff(self.xs)

    @property
    def hy(self):
        return np.diff(self.ys)

    @property
    def n_nodes(self):
        return (self.nx + 1) * (self.ny + 1)

    @property
    def n_cells(self):
        return self.nx * self.ny

    @property
    def corners(self):
        return (float(self.xs[0]), float(self.ys[0])), (float(self.xs[-1]), float(self.ys[-1]))

    @property
    def area(self):
        (x0, y0), (x1, y1) = self.corners
        return (x1 - x0) * (y1 - y0)

    @property
    def perimeter(self):
        (x0, y0), (x1, y1) = self.corners
        return 2.0 * ((x1 - x0) + (y1 - y0))

    def cell_indices(self):
        """Return (i, j) arrays of every cell in cell order"""
        j, i = np.divmod(np.arange(self.n_cells), self.nx)
        return i, j

    def node_coordinates(self):
        X, Y = np.meshgrid(self.xs, self.ys)
        return X.ravel(), Y.ravel()

    def describe(self):
        return f'{self.nx}x{self.ny} grading={self.grading:g}'
