"""One-step integrators for linear pH-DAE pencils and the staggered driver."""
import logging
import math
from collections import namedtuple
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from app.errors import DimensionError, StepSizeUnderflowError
from app.numerics.sparse_core import as_csr, ensure_finite, factorize

logger = logging.getLogger(__name__)

StepResult = namedtuple('StepResult', ['x', 'multipliers'])
AdaptiveStep = namedtuple('AdaptiveStep', ['x', 'dt', 'error', 'dt_next', 'multipliers'])

MIN_FACTOR, MAX_FACTOR = 0.5, 2.0
SAFETY = 0.9
UNDERFLOW = 1e-15
CACHE_SIZE = 16


@dataclass
class StepProblem:
    """Linear step 𝔐 ẋ = 𝔄 x + f with constraint rows C x(t+Δt) = g.

    ``multipliers`` is the column block G pairing the constraint multipliers with the
    dynamics (defaults to Cᵀ). ``key`` tags the frozen modulation so cached pencils
    are reused only for identical operators.
    """
    mass: sp.csr_matrix
    operator: sp.csr_matrix
    state: np.ndarray
    dt: float
    source: np.ndarray = None
    constraints: sp.csr_matrix = None
    constraint_rhs: np.ndarray = None
    multipliers: sp.csr_matrix = None
    error_mass: sp.csr_matrix = None
    key: object = None

    def __post_init__(self):
        self.mass = as_csr(self.mass)
        self.operator = as_csr(self.operator)
        self.state = np.asarray(self.state, dtype=np.float64).ravel()
        n = self.state.size
        if self.mass.shape != (n, n) or self.operator.shape != (n, n):
            raise DimensionError(f'pencil {self.mass.shape}/{self.operator.shape} for state of length {n}')
        if self.constraints is not None:
            self.constraints = as_csr(self.constraints)
            m = self.constraints.shape[0]
            self.multipliers = as_csr(self.multipliers if self.multipliers is not None else self.constraints.T)
            if self.multipliers.shape != (n, m):
                raise DimensionError(f'multiplier block {self.multipliers.shape}, expected {(n, m)}')
            if self.constraint_rhs is None:
                self.constraint_rhs = np.zeros(m)

    @property
    def n_constraints(self):
        return 0 if self.constraints is None else self.constraints.shape[0]

    def with_state(self, state, dt=None):
        return replace(self, state=state, dt=self.dt if dt is None else dt)


def _pencil(p):
    left = p.mass - (0.5 * p.dt) * p.operator
    if not p.n_constraints:
        return as_csr(left)
    return as_csr(sp.bmat([[left, p.multipliers], [p.constraints, None]]))


def _factorization(p, cache):
    if cache is None:
        return factorize(_pencil(p))
    key = (p.dt, p.key)
    handle = cache.pop(key, None)
    if handle is None:
        if len(cache) >= CACHE_SIZE:
            cache.pop(next(iter(cache)))
        handle = factorize(_pencil(p))
        logger.debug('factorized pencil for dt=%.6e (%d cached)', p.dt, len(cache) + 1)
    cache[key] = handle
    return handle


def implicit_midpoint(p, cache=None):
    """Solve (𝔐 − Δt/2 𝔄) x⁺ + G λ = (𝔐 + Δt/2 𝔄) x + Δt f, C x⁺ = g."""
    rhs = p.mass @ p.state + (0.5 * p.dt) * (p.operator @ p.state)
    if p.source is not None:
        rhs = rhs + p.dt * np.asarray(p.source, dtype=np.float64)
    if p.n_constraints:
        rhs = np.concatenate([rhs, np.asarray(p.constraint_rhs, dtype=np.float64)])
    solution = _factorization(p, cache).solve(rhs)
    n = p.state.size
    return StepResult(ensure_finite(solution[:n], 'state'), solution[n:])


def _seminorm(weight, x):
    return math.sqrt(abs(float(x @ (weight @ x))))


def crank_nicolson_adaptive(p, tol, t_final, dt_max=math.inf, cache=None):
    """One accepted Crank-Nicolson step with step doubling error control.

    The full step is compared with two half steps in the 𝔐-seminorm; the two half steps
    are returned when the relative difference is within ``tol``. A rejected step is
    retried with Δt scaled by clip(0.9 (tol/err)^(1/3), 0.5, 2), and by at most 0.9,
    so a rejection always shrinks the step.
    """
    weight = p.error_mass if p.error_mass is not None else p.mass
    dt = min(p.dt, dt_max)
    while True:
        if dt < UNDERFLOW * t_final:
            raise StepSizeUnderflowError(f'time step {dt:.3e} below {UNDERFLOW:g}*t_final')
        trial = p.with_state(p.state, dt)
        full = implicit_midpoint(trial, cache)
        if not math.isfinite(tol):
            return AdaptiveStep(full.x, dt, 0.0, min(dt * MAX_FACTOR, dt_max), full.multipliers)
        half = trial.with_state(p.state, 0.5 * dt)
        first = implicit_midpoint(half, cache)
        second = implicit_midpoint(half.with_state(first.x), cache)
        scale = max(_seminorm(weight, second.x), np.finfo(float).tiny)
        error = _seminorm(weight, full.x - second.x) / scale
        factor = MAX_FACTOR if error == 0.0 else min(max(SAFETY * (tol / error) ** (1.0 / 3.0), MIN_FACTOR), MAX_FACTOR)
        if error <= tol:
            return AdaptiveStep(second.x, dt, error, min(dt * factor, dt_max), second.multipliers)
        logger.warning('step rejected: dt=%.3e error=%.3e tol=%.1e', dt, error, tol)
        dt *= min(factor, SAFETY)


def staggered_drive(state, n_steps, omega_substep, psi_substep, ledger=None, progress=None):
    """Alternate vorticity and stream-function substeps ``n_steps`` times.

    ``omega_substep`` advances ω̄ from t_k to t_{k+1} with the stream function held at
    t_{k+1/2}; ``psi_substep`` then advances ψ̄ from t_{k+1/2} to t_{k+3/2}. ``ledger``
    is called with the states before and after each pair.
    """
    records = []
    steps = range(n_steps) if progress is None else progress(range(n_steps))
    for _ in steps:
        middle = omega_substep(state)
        new_state = psi_substep(middle)
        if ledger is not None:
            records.append(ledger(state, new_state))
        state = new_state
    return state, records
