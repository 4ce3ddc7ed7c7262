"""Simply supported Euler-Bernoulli beams with and without rotary inertia."""
import logging
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from app.errors import ConfigError
from app.models.configs import BeamConfig
from app.models.states import BeamState, TimeSeries
from app.models.system import PHSystemBundle
from app.numerics import fem1d
from app.numerics.sparse_core import factorize, generalized_eigs_smallest
from app.numerics.timeint import StepProblem, crank_nicolson_adaptive

logger = logging.getLogger(__name__)

CSV_COLUMNS = ('t', 'H_d1', 'H_d2', 'balance_residual_d1', 'balance_residual_d2', 'dt')
PHASE_COLUMNS = ('k', 'c_num', 'c_ana', 'rel_err')

# Cross-section radii of the two reference steel beams
PRESETS = {'r5cm': 0.05, 'r2.5cm': 0.025}


def forms_for(cfg):
    return fem1d.assemble_forms(cfg.mesh, 1.0)


def build_system(cfg, forms=None):
    """Full PFEM bundle in the unknowns (σ̄, v̄, y_L, y¹_D, y²_D).

    Inputs enter through ``B_D`` in the order (du_L/dt, u¹_D, u²_D).
    """
    forms = forms or forms_for(cfg)
    N = forms.n
    M, K, B = forms.M, forms.K, forms.B
    c = cfg.rotary_inertia
    z22 = sp.csr_matrix((2, 2))
    zN2 = sp.csr_matrix((N, 2))
    P = sp.bmat([[M / cfg.D, None, zN2, zN2, zN2],
                 [None, cfg.rho_h * M + c * K, -c * B, zN2, zN2],
                 [zN2.T, -c * B.T, z22, None, None],
                 [zN2.T, None, None, z22, None],
                 [zN2.T, None, None, None, z22]], format='csr')
    J = sp.bmat([[sp.csr_matrix((N, N)), -K, zN2, zN2, B],
                 [K, None, zN2, -B, zN2],
                 [zN2.T, zN2.T, z22, None, None],
                 [zN2.T, B.T, None, z22, None],
                 [-B.T, zN2.T, None, None, z22]], format='csr')
    M_bd = forms.M_bd
    inputs = sp.bmat([[sp.csr_matrix((2 * N, 6))],
                      [sp.block_diag([-M_bd, M_bd, M_bd])]], format='csr')
    n = 2 * N + 6
    kind = 'implicit' if cfg.implicit else 'explicit'
    return PHSystemBundle(P=P, S=sp.identity(n), J=J, n=n, M_weight=sp.identity(n), B_D=inputs,
                          name=f'beam-{kind}(r={cfg.r:g})')


class _Reduced:
    """Interior (simply supported) blocks and derivative solvers"""

    def __init__(self, cfg, forms):
        N = forms.n
        self.N = N
        self.interior = np.arange(1, N - 1)
        self.ends = np.array([0, N - 1])
        I, G = self.interior, self.ends
        self.M_II = forms.M[I][:, I]
        self.K_II = forms.K[I][:, I]
        self.inertia = (cfg.rho_h * forms.M + cfg.rotary_inertia * forms.K).tocsr()
        self.inertia_II = self.inertia[I][:, I]
        self.M_GI = forms.M[G][:, I]
        self.K_GI = forms.K[G][:, I]
        self.inertia_GI = self.inertia[G][:, I]
        self._M_solver = factorize(self.M_II, symmetric=True)
        self._inertia_solver = factorize(self.inertia_II, symmetric=True)

    def rates(self, cfg, sigma_I, v_I):
        sigma_dot = -cfg.D * self._M_solver.solve(self.K_II @ v_I)
        v_dot = self._inertia_solver.solve(self.K_II @ sigma_I)
        return sigma_dot, v_dot

    def pencil(self, cfg):
        """Mass and operator of the interior system extended by ẇ = v"""
        n = self.interior.size
        identity = sp.identity(n, format='csr')
        mass = sp.block_diag([self.M_II / cfg.D, self.inertia_II, identity], format='csr')
        operator = sp.bmat([[None, -self.K_II, None],
                            [self.K_II, None, None],
                            [None, identity, sp.csr_matrix((n, n))]], format='csr')
        error_mass = sp.block_diag([self.M_II / cfg.D, self.inertia_II, sp.csr_matrix((n, n))], format='csr')
        return mass, operator, error_mass


def initial_state(cfg, forms=None):
    """Gaussian bump at rest; σ̄ solves M σ̄ = −D K w̄ on the interior

    The straight line through the end values is subtracted so that w̄ vanishes at the
    supports without a kink in the last element.
    """
    forms = forms or forms_for(cfg)
    reduced = _Reduced(cfg, forms)
    w = fem1d.interpolate_p1(cfg.mesh, cfg.initial_position)
    x = cfg.mesh.nodes
    w -= w[0] + (w[-1] - w[0]) * (x - x[0]) / (x[-1] - x[0])
    w[reduced.ends] = 0.0
    sigma = np.zeros(forms.n)
    sigma[reduced.interior] = reduced._M_solver.solve(-cfg.D * (forms.K @ w)[reduced.interior])
    return BeamState(sigma, np.zeros(forms.n), w, 0.0)


def observe_ports(cfg, state, reduced):
    """Recover y_L, y¹_D, y²_D from the boundary rows of the PFEM equations"""
    I = reduced.interior
    sigma_I, v_I = state.sigma_bar[I], state.v_bar[I]
    sigma_dot, v_dot = reduced.rates(cfg, sigma_I, v_I)
    # outward derivative at both ends, so the left end reports −∂ₓv(a)
    state.y_L = reduced.K_GI @ v_I
    state.y2_D = (reduced.M_GI @ sigma_dot) / cfg.D + reduced.K_GI @ v_I
    state.y1_D = (reduced.K_GI @ sigma_I - reduced.inertia_GI @ v_dot
                  + cfg.rotary_inertia * (reduced.K_GI @ v_dot))
    state.u_L = cfg.rotary_inertia * state.v_bar[reduced.ends]
    state.u1_D = np.zeros(2)
    state.u2_D = np.zeros(2)
    return state


def hamiltonian_d2(cfg, state, forms=None):
    forms = forms or forms_for(cfg)
    s, v = state.sigma_bar, state.v_bar
    return (0.5 / cfg.D) * float(s @ (forms.M @ s)) + 0.5 * cfg.rho_h * float(v @ (forms.M @ v)) \
        + 0.5 * cfg.rotary_inertia * float(v @ (forms.K @ v))


def hamiltonian_d1(cfg, state, forms=None):
    forms = forms or forms_for(cfg)
    port = cfg.rotary_inertia * float(state.y_L @ (forms.B.T @ state.v_bar))
    return hamiltonian_d2(cfg, state, forms) - port


def supplied_power(previous, current, dt, M_bd):
    """−y¹ᵀM∂u¹ + y²ᵀM∂u² + (Δy_L/Δt)ᵀM∂u_L at the midpoint"""
    def mid(name):
        return 0.5 * (getattr(previous, name) + getattr(current, name))
    y_L_rate = (current.y_L - previous.y_L) / dt
    return (-float(mid('y1_D') @ (M_bd @ mid('u1_D'))) + float(mid('y2_D') @ (M_bd @ mid('u2_D')))
            + float(y_L_rate @ (M_bd @ mid('u_L'))))


def _split(x, reduced, t):
    n = reduced.interior.size
    sigma, v, w = (np.zeros(reduced.N) for _ in range(3))
    sigma[reduced.interior] = x[:n]
    v[reduced.interior] = x[n:2 * n]
    w[reduced.interior] = x[2 * n:]
    return BeamState(sigma, v, w, t)


def run(cfg, output_times=(), forms=None, progress=None):
    """Adaptive Crank-Nicolson run of the simply supported beam.

    Returns ``(final state, TimeSeries, snapshots)`` where ``snapshots`` maps each
    requested output time to the position vector w̄.
    """
    forms = forms or forms_for(cfg)
    reduced = _Reduced(cfg, forms)
    mass, operator, error_mass = reduced.pencil(cfg)
    I = reduced.interior
    state = observe_ports(cfg, initial_state(cfg, forms), reduced)
    x = np.concatenate([state.sigma_bar[I], state.v_bar[I], state.w_bar[I]])
    problem = StepProblem(mass=mass, operator=operator, state=x, dt=cfg.dt0, error_mass=error_mass)
    cache = {}
    series = TimeSeries(CSV_COLUMNS)
    series.append(0.0, hamiltonian_d1(cfg, state, forms), hamiltonian_d2(cfg, state, forms), 0.0, 0.0, 0.0)
    pending = sorted(t for t in output_times if 0.0 < t <= cfg.t_final)
    snapshots = {t: state.w_bar.copy() for t in output_times if t == 0.0}
    t, dt = 0.0, cfg.dt0
    horizon = cfg.t_final * (1.0 - 1e-12)
    bar = progress(total=cfg.t_final, desc='beam') if progress is not None else None
    while t < horizon:
        stop = pending[0] if pending else cfg.t_final
        trial = min(dt, stop - t)
        step = crank_nicolson_adaptive(problem.with_state(x, trial), cfg.tol, cfg.t_final, cfg.dt_max, cache)
        x, t = step.x, t + step.dt
        dt = step.dt_next if step.dt < trial or trial == dt else max(dt, step.dt_next)
        current = observe_ports(cfg, _split(x, reduced, t), reduced)
        h1, h2 = hamiltonian_d1(cfg, current, forms), hamiltonian_d2(cfg, current, forms)
        supplied = supplied_power(state, current, step.dt, forms.M_bd)
        h1_prev, h2_prev = series.rows[-1][1], series.rows[-1][2]
        series.append(t, h1, h2, abs((h1 - h1_prev) / step.dt - supplied),
                      abs((h2 - h2_prev) / step.dt - supplied), step.dt)
        if pending and abs(t - pending[0]) <= 1e-12 * max(cfg.t_final, 1.0):
            snapshots[pending.pop(0)] = current.w_bar.copy()
        if bar is not None:
            bar.update(step.dt)
        state = current
    if bar is not None:
        bar.close()
    logger.info('beam %s: %d accepted steps, H_d2 %.12e -> %.12e',
                'implicit' if cfg.implicit else 'explicit', len(series) - 1, series.rows[0][2], series.rows[-1][2])
    return state, series, snapshots


def modal_frequencies(cfg, count, forms=None):
    """Lowest ``count`` angular eigenfrequencies of the simply supported beam"""
    forms = forms or forms_for(cfg)
    reduced = _Reduced(cfg, forms)
    n = reduced.interior.size
    if count >= n - 1:
        raise ConfigError(f'cannot compute {count} modes on {n} interior nodes')
    K_solver = factorize(reduced.K_II, symmetric=True)
    M_II, K_II, M_solver = reduced.M_II, reduced.K_II, reduced._M_solver
    stiffness = spla.LinearOperator((n, n), dtype=np.float64,
                                    matvec=lambda x: cfg.D * (K_II @ M_solver.solve(K_II @ x)))
    inverse = spla.LinearOperator((n, n), dtype=np.float64,
                                  matvec=lambda x: K_solver.solve(M_II @ K_solver.solve(x)) / cfg.D)
    pairs = generalized_eigs_smallest(stiffness, reduced.inertia_II, count, inverse=inverse)
    eigenvalues = np.array([lam for lam, _ in pairs])
    if np.any(eigenvalues < -1e-10 * np.abs(eigenvalues).max()):
        raise ConfigError('negative squared frequency')
    return np.sqrt(np.maximum(eigenvalues, 0.0))


def analytic_phase_velocity(cfg, k):
    k = np.asarray(k, dtype=np.float64)
    inertia = 1.0 + (cfg.h ** 2 / 12.0) * k ** 2 if cfg.implicit else 1.0
    return k * math.sqrt(cfg.D) / np.sqrt(cfg.rho_h * inertia)


def phase_velocity_table(cfg, k_count=10, forms=None):
    """Rows (k, c_num, c_ana, rel_err) for the lowest ``k_count`` modes"""
    omegas = modal_frequencies(cfg, k_count, forms)
    rows = []
    for n, omega in enumerate(omegas, start=1):
        k = n * math.pi / cfg.mesh.length
        c_num = omega / k
        c_ana = float(analytic_phase_velocity(cfg, k))
        rows.append((k, c_num, c_ana, abs(c_num - c_ana) / c_ana))
    return rows


def compare_models(cfg_a, cfg_b, output_times):
    """‖w_a − w_b‖_{L²} at common output times"""
    if not cfg_a.mesh.same_as(cfg_b.mesh):
        raise ConfigError('compared beams must share the mesh')
    forms = forms_for(cfg_a)
    _, _, snaps_a = run(cfg_a, output_times, forms)
    _, _, snaps_b = run(cfg_b, output_times, forms)
    return [(t, fem1d.l2_norm(cfg_a.mesh, forms, snaps_a[t] - snaps_b[t])) for t in sorted(snaps_a)]


def preset(name, **overrides):
    """Reference steel beam by cross-section name (``r5cm`` or ``r2.5cm``)"""
    try:
        radius = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown beam preset '{name}'; expected one of {', '.join(PRESETS)}") from None
    return BeamConfig(r=radius, **overrides)
