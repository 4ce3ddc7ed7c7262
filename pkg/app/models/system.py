from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from app.numerics.sparse_core import as_csr


def _vector(values):
    return np.asarray(values if values is not None else [], dtype=np.float64).ravel()


@dataclass
class PHSystemBundle:
    """Matrix set (P, S, J, R, weight, input maps) of one discrete pH-DAE.

    Dimension labels follow the flow/effort split: ``n`` storage variables, ``n_L``
    energy ports, ``n_D`` power ports and ``r`` resistive ports. ``P`` and ``S`` are
    square of size ``n + n_L``; ``J`` is square of size ``n + r + n_D``.
    """
    P: sp.csr_matrix
    S: sp.csr_matrix
    J: sp.csr_matrix
    n: int
    n_L: int = 0
    n_D: int = 0
    r: int = 0
    R: sp.csr_matrix = None
    M_weight: sp.csr_matrix = None
    B_D: sp.csr_matrix = None
    B_L: sp.csr_matrix = None
    name: str = ''

    def __post_init__(self):
        self.P = as_csr(self.P)
        self.S = as_csr(self.S)
        self.J = as_csr(self.J)
        self.R = as_csr(self.R) if self.R is not None else sp.csr_matrix((self.r, self.r))
        size = self.n + self.n_L
        self.M_weight = as_csr(self.M_weight) if self.M_weight is not None else as_csr(sp.identity(size))
        if self.B_D is not None:
            self.B_D = as_csr(self.B_D)
        if self.B_L is not None:
            self.B_L = as_csr(self.B_L)

    @property
    def latent_size(self):
        return self.n + self.n_L

    @property
    def interconnection_size(self):
        return self.n + self.r + self.n_D

    @property
    def weight_is_s(self):
        """True when S equals the weight, so that M⁻¹S is the identity"""
        if self.S.shape != self.M_weight.shape:
            return False
        return (self.S != self.M_weight).nnz == 0

    def blocks(self):
        named = {'P': self.P, 'S': self.S, 'J': self.J, 'R': self.R, 'M_weight': self.M_weight}
        if self.B_D is not None:
            named['B_D'] = self.B_D
        if self.B_L is not None:
            named['B_L'] = self.B_L
        return named

    def labels(self):
        return {'name': self.name, 'n': self.n, 'n_L': self.n_L, 'n_D': self.n_D, 'r': self.r}


@dataclass
class LatentPair:
    """Latent state and latent control (λ, ũ_L)"""
    lam: np.ndarray
    u_tilde: np.ndarray = None

    def __post_init__(self):
        self.lam = _vector(self.lam)
        self.u_tilde = _vector(self.u_tilde)

    @property
    def z(self):
        return np.concatenate([self.lam, self.u_tilde])

    @classmethod
    def split(cls, z, n):
        z = _vector(z)
        return cls(z[:n], z[n:])


@dataclass
class PortSnapshot:
    """Port variables at one instant"""
    time: float = 0.0
    u_D: np.ndarray = None
    y_D: np.ndarray = None
    u_L: np.ndarray = None
    y_L: np.ndarray = None
    f_R: np.ndarray = None
    e_R: np.ndarray = None

    def __post_init__(self):
        for name in ('u_D', 'y_D', 'u_L', 'y_L', 'f_R', 'e_R'):
            setattr(self, name, _vector(getattr(self, name)))

    def check_lengths(self, bundle):
        expected = {'u_D': bundle.n_D, 'y_D': bundle.n_D, 'u_L': bundle.n_L,
                    'y_L': bundle.n_L, 'f_R': bundle.r, 'e_R': bundle.r}
        for name, length in expected.items():
            value = getattr(self, name)
            if value.size not in (0, length):
                return False, f'{name} has length {value.size}, expected {length}'
        return True, ''


@dataclass
class StructureReport:
    """Outcome of a structure verification"""
    skew_defect: float
    lagrange_defect: float
    lagrange_scale: float
    r_min_rayleigh: float
    r_scale: float
    rank_ok: bool
    rank_method: str
    details: dict = field(default_factory=dict)

    @property
    def skew_ok(self):
        return self.skew_defect == 0.0 or self.skew_defect <= 1e-12 * self.details.get('j_scale', 1.0)

    @property
    def lagrange_ok(self):
        return self.lagrange_defect <= 1e-12 * max(self.lagrange_scale, np.finfo(float).tiny)

    @property
    def resistive_ok(self):
        return self.r_min_rayleigh >= -1e-12 * self.r_scale

    @property
    def passed(self):
        return self.skew_ok and self.lagrange_ok and self.resistive_ok and self.rank_ok

    def as_dict(self):
        return {
            'passed': self.passed,
            'skew_ok': self.skew_ok, 'skew_defect': self.skew_defect,
            'lagrange_ok': self.lagrange_ok, 'lagrange_defect': self.lagrange_defect,
            'lagrange_scale': self.lagrange_scale,
            'resistive_ok': self.resistive_ok, 'r_min_rayleigh': self.r_min_rayleigh,
            'rank_ok': self.rank_ok, 'rank_method': self.rank_method,
        }
