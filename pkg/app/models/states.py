from dataclasses import dataclass, field, replace

import numpy as np


def _vec(values):
    return np.asarray(values if values is not None else [], dtype=np.float64).ravel()


@dataclass
class NanorodState:
    """Stress and velocity dofs of the nanorod at time t"""
    sigma_bar: np.ndarray
    v_bar: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.sigma_bar = _vec(self.sigma_bar)
        self.v_bar = _vec(self.v_bar)

    @property
    def z(self):
        return np.concatenate([self.sigma_bar, self.v_bar])

    @classmethod
    def from_vector(cls, z, t=0.0):
        half = z.size // 2
        return cls(z[:half].copy(), z[half:].copy(), t)


@dataclass
class BeamState:
    """Beam dofs plus the boundary port values (two entries each, left end first)"""
    sigma_bar: np.ndarray
    v_bar: np.ndarray
    w_bar: np.ndarray
    t: float = 0.0
    y_L: np.ndarray = None
    y1_D: np.ndarray = None
    y2_D: np.ndarray = None
    u_L: np.ndarray = None
    u1_D: np.ndarray = None
    u2_D: np.ndarray = None

    def __post_init__(self):
        self.sigma_bar = _vec(self.sigma_bar)
        self.v_bar = _vec(self.v_bar)
        self.w_bar = _vec(self.w_bar)
        for name in ('y_L', 'y1_D', 'y2_D', 'u_L', 'u1_D', 'u2_D'):
            value = getattr(self, name)
            setattr(self, name, np.zeros(2) if value is None else _vec(value))


@dataclass
class InseState:
    """Stream function and vorticity dofs with their boundary multipliers.

    ``t_psi`` runs half a step ahead of ``t_omega`` once the scheme is initialized.
    """
    psi_bar: np.ndarray
    omega_bar: np.ndarray
    u1_D: np.ndarray
    u5_D: np.ndarray
    u_tilde: np.ndarray
    t_psi: float = 0.0
    t_omega: float = 0.0

    def __post_init__(self):
        for name in ('psi_bar', 'omega_bar', 'u1_D', 'u5_D', 'u_tilde'):
            setattr(self, name, _vec(getattr(self, name)))

    def evolve(self, **changes):
        return replace(self, **changes)


@dataclass
class EnstrophyLedger:
    """Discrete kinetic-energy and enstrophy bookkeeping of one staggered step"""
    t: float = 0.0
    kinetic: float = 0.0
    enstrophy: float = 0.0
    kinetic_at_t: float = None
    diss_K: float = 0.0
    diss_E: float = 0.0
    gen_E_boundary: float = 0.0
    port_K: float = 0.0
    res_power: float = 0.0
    res_enstrophy: float = 0.0
    b1_norm: float = 0.0
    b3_norm: float = 0.0

    CSV_COLUMNS = ('t', 'K', 'E', 'diss_K', 'diss_E', 'gen_E_boundary',
                   'res_power', 'res_enstrophy', 'B1T_psi', 'B3T_psi')

    def as_row(self):
        return (self.t, self.kinetic, self.enstrophy, self.diss_K, self.diss_E, self.gen_E_boundary,
                self.res_power, self.res_enstrophy, self.b1_norm, self.b3_norm)


@dataclass
class TimeSeries:
    """Column store for per-step records"""
    columns: tuple
    rows: list = field(default_factory=list)

    def append(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f'expected {len(self.columns)} values, got {len(values)}')
        self.rows.append(tuple(float(v) for v in values))

    def column(self, name):
        index = self.columns.index(name)
        return np.array([row[index] for row in self.rows], dtype=np.float64)

    def __len__(self):
        return len(self.rows)


@dataclass
class BalanceReport:
    """Scalar summary of one run's Hamiltonian trace and balance residuals"""
    n_steps: int
    reference: float
    max_drift: float
    final_drift: float
    drift_slope: float
    max_residual: float
    mean_residual: float

    def as_dict(self):
        return {'n_steps': self.n_steps, 'reference': self.reference, 'max_drift': self.max_drift,
                'final_drift': self.final_drift, 'drift_slope': self.drift_slope,
                'max_residual': self.max_residual, 'mean_residual': self.mean_residual}
