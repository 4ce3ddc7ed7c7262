import math
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from app.errors import ConfigError
from app.models.enums import ModelKind
from app.models.mesh import Mesh1D
from app.utils.validators import (validate_interval, validate_non_negative,
                                  validate_poisson_ratio, validate_positive)


def _check(result):
    ok, value = result
    if not ok:
        raise ConfigError(value)
    return value


def gaussian(x, center=0.3, width=80.0, amplitude=1.0):
    """amplitude * exp(-width (x - center)^2)"""
    return amplitude * np.exp(-width * (np.asarray(x, dtype=np.float64) - center) ** 2)


def zero_field(x):
    return np.zeros_like(np.asarray(x, dtype=np.float64))


@dataclass
class NanorodConfig:
    """Nonlocal nanorod parameters; defaults reproduce the reference conservation run"""
    E: float = 1.0
    rho: object = 10.0
    ell: float = 0.0
    mesh: Mesh1D = None
    n: int = 100
    a: float = 0.0
    b: float = 1.0
    v0: object = field(default=partial(gaussian, center=0.3, width=80.0))
    sigma0: object = field(default=zero_field)
    dt: float = 0.1
    t_final: float = 10.0

    def __post_init__(self):
        _check(validate_positive(self.E, 'E'))
        _check(validate_non_negative(self.ell, 'ell'))
        _check(validate_positive(self.dt, 'dt'))
        _check(validate_non_negative(self.t_final, 't_final'))
        if not callable(self.rho):
            self.rho = _check(validate_positive(self.rho, 'rho'))
        if self.mesh is None:
            if self.n < 2:
                raise ConfigError('nanorod mesh needs at least 2 nodes')
            _check(validate_interval(self.a, self.b, 'nanorod domain'))
            self.mesh = Mesh1D(np.linspace(self.a, self.b, self.n))

    def rho_at(self, x):
        x = np.asarray(x, dtype=np.float64)
        if callable(self.rho):
            return np.broadcast_to(np.asarray(self.rho(x), dtype=np.float64), x.shape).copy()
        return np.full(x.shape, float(self.rho))

    @property
    def n_steps(self):
        return int(round(self.t_final / self.dt))


@dataclass
class BeamConfig:
    """Simply supported steel beam with a circular cross-section of radius r.

    The cross-section area h = πr² plays the role of the thickness in the model,
    and the flexural rigidity D = E h³ / (12 (1 - ν²)) is always derived.
    """
    rho: float = 7.86e3
    E: float = 2.02e11
    nu: float = 0.3
    r: float = 0.05
    length: float = 1.0
    dx: float = 5e-4
    implicit: bool = True
    dt0: float = 1e-6
    dt_max: float = None
    t_final: float = 1e-2
    tol: float = 1e-8
    bump_amplitude: float = 1e-3
    bump_width: float = 80.0
    bump_center: float = 0.5
    mesh: Mesh1D = None

    def __post_init__(self):
        for name in ('rho', 'E', 'r', 'length', 'dx', 'dt0', 'tol'):
            _check(validate_positive(getattr(self, name), name))
        _check(validate_poisson_ratio(self.nu))
        _check(validate_non_negative(self.t_final, 't_final'))
        if self.dt_max is None:
            self.dt_max = max(self.t_final / 50.0, self.dt0)
        if self.mesh is None:
            n = int(round(self.length / self.dx)) + 1
            if n < 3:
                raise ConfigError('beam mesh needs at least three nodes')
            self.mesh = Mesh1D(np.linspace(0.0, self.length, n))

    @property
    def h(self):
        return math.pi * self.r ** 2

    @property
    def D(self):
        return self.E * self.h ** 3 / (12.0 * (1.0 - self.nu ** 2))

    @property
    def rho_h(self):
        return self.rho * self.h

    @property
    def rotary_inertia(self):
        """ρh³/12, zero for the explicit model"""
        return self.rho * self.h ** 3 / 12.0 if self.implicit else 0.0

    def initial_position(self, x):
        return gaussian(x, center=self.bump_center, width=self.bump_width, amplitude=self.bump_amplitude)


@dataclass
class InseConfig:
    """Dipole-wall collision in the square [-L, L]^2"""
    rho0: float = 1.0
    mu: float = 1.0 / 625.0
    nx: int = 48
    ny: int = 48
    grading: float = 1.15
    max_ratio: float = 6.0
    half_width: float = 1.0
    c1: tuple = (0.0, 0.1)
    c2: tuple = (0.0, -0.1)
    r0: float = 0.1
    omega_e: float = 300.0
    dt: float = 1.0 / 300.0
    t_final: float = 0.5
    calibrate: bool = False
    profile_y: tuple = (-0.6, 0.0)

    def __post_init__(self):
        for name in ('rho0', 'r0', 'dt', 'half_width'):
            _check(validate_positive(getattr(self, name), name))
        _check(validate_non_negative(self.mu, 'mu'))
        _check(validate_non_negative(self.t_final, 't_final'))
        if self.nx < 2 or self.ny < 2:
            raise ConfigError('nx and ny must be at least 2')
        if self.grading < 1:
            raise ConfigError('grading must be at least 1')
        self.c1 = tuple(float(c) for c in self.c1)
        self.c2 = tuple(float(c) for c in self.c2)

    @property
    def n_steps(self):
        return int(math.ceil(self.t_final / self.dt - 1e-9))


@dataclass
class RunConfig:
    """Validated contents of one configuration file"""
    model: ModelKind
    params: dict = field(default_factory=dict)
    out_dir: Path = Path('runs')
    snapshots: tuple = ()
    seed: int = 0
    threads: int = 1
    target: str = ''
