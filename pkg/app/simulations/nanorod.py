"""Nonlocal nanorod in stress / velocity variables with Robin closure."""
import logging

import numpy as np
import scipy.sparse as sp

from app.errors import ConfigError
from app.models.states import NanorodState, TimeSeries
from app.models.system import PHSystemBundle
from app.numerics import fem1d
from app.numerics.ph_structures import power_balance_residual
from app.numerics.sparse_core import factorize
from app.numerics.timeint import StepProblem, implicit_midpoint

logger = logging.getLogger(__name__)

CSV_COLUMNS = ('t', 'H_rob', 'H_bulk', 'E_port_v', 'E_port_sigma', 'balance_residual')
KERNEL_SUBSAMPLING = 8


def forms_for(cfg):
    return fem1d.assemble_forms(cfg.mesh, cfg.rho)


def _boundary_density(cfg):
    return sp.diags(cfg.rho_at([cfg.mesh.a, cfg.mesh.b]))


def robin_blocks(cfg, forms=None):
    """The two diagonal blocks of the Robin Lagrange matrix"""
    forms = forms or forms_for(cfg)
    ell, B = cfg.ell, forms.B
    stress = (forms.M + ell ** 2 * forms.K + ell * (B @ B.T)) / cfg.E
    velocity = forms.M_rho + ell * (B @ _boundary_density(cfg) @ B.T)
    return stress.tocsr(), velocity.tocsr()


def build_system(cfg, forms=None):
    """Robin-closed bundle with P = blockdiag(stress, velocity) and J = [[0, D], [-Dᵀ, 0]]"""
    forms = forms or forms_for(cfg)
    stress, velocity = robin_blocks(cfg, forms)
    weight = sp.block_diag([forms.M, forms.M], format='csr')
    J = sp.bmat([[None, forms.D], [-forms.D.T, None]], format='csr')
    return PHSystemBundle(P=sp.block_diag([stress, velocity], format='csr'), S=weight, J=J,
                          n=2 * forms.n, M_weight=weight, name=f'nanorod-robin(ell={cfg.ell:g})')


def build_system_free(cfg, forms=None):
    """Open bundle with the energy port (σ̄, v̄, u_L) and the boundary power port"""
    forms = forms or forms_for(cfg)
    ell, E, B, N = cfg.ell, cfg.E, forms.B, forms.n
    coupling = (-(ell ** 2) / E) * B
    P = sp.bmat([[(forms.M + ell ** 2 * forms.K) / E, None, coupling],
                 [None, forms.M_rho, None],
                 [coupling.T, None, sp.csr_matrix((2, 2))]], format='csr')
    weight = sp.block_diag([forms.M, forms.M, sp.identity(2)], format='csr')
    J = sp.bmat([[sp.csr_matrix((N, N)), forms.D, None],
                 [-forms.D.T, None, B],
                 [None, -B.T, sp.csr_matrix((2, 2))]], format='csr')
    return PHSystemBundle(P=P, S=weight, J=J, n=2 * N, n_L=2, n_D=2, M_weight=weight,
                          B_D=sp.vstack([sp.csr_matrix((N, 2)), B]),
                          name=f'nanorod-free(ell={cfg.ell:g})')


def initial_state(cfg):
    mesh = cfg.mesh
    return NanorodState(fem1d.interpolate_p1(mesh, cfg.sigma0), fem1d.interpolate_p1(mesh, cfg.v0), 0.0)


def robin_controls(cfg, state, state_prev=None, dt=None, forms=None):
    """Port values implied by the discrete Robin relations.

    Returns ``(u_L, u_D)`` with u_L = −Bᵀσ̄/ℓ and u_D = −ℓ M∂ρ Bᵀ v̇ (finite difference
    of the boundary velocity when a previous state is given, zero otherwise).
    """
    forms = forms or forms_for(cfg)
    sigma_bd = forms.B.T @ state.sigma_bar
    u_L = -sigma_bd / cfg.ell if cfg.ell > 0 else np.zeros(2)
    if state_prev is None or not dt:
        return u_L, np.zeros(2)
    dv = (forms.B.T @ (state.v_bar - state_prev.v_bar)) / dt
    return u_L, -cfg.ell * (_boundary_density(cfg) @ dv)


def hamiltonian_d(cfg, state, u_L=None, forms=None):
    """Hamiltonian of the open system with the energy-port variable u_L"""
    forms = forms or forms_for(cfg)
    if u_L is None:
        u_L, _ = robin_controls(cfg, state, forms=forms)
    z = np.concatenate([state.sigma_bar, state.v_bar, np.asarray(u_L, dtype=np.float64)])
    bundle = build_system_free(cfg, forms)
    return 0.5 * float(z @ (bundle.P @ z))


def hamiltonian_d_rob(cfg, state, forms=None):
    stress, velocity = robin_blocks(cfg, forms)
    s, v = state.sigma_bar, state.v_bar
    return 0.5 * float(s @ (stress @ s)) + 0.5 * float(v @ (velocity @ v))


def energy_partition(cfg, state, forms=None):
    """Bulk energy and the energies stored at the boundary by the velocity and stress ports.

    The three parts add up to the Robin Hamiltonian.
    """
    forms = forms or forms_for(cfg)
    s, v, B = state.sigma_bar, state.v_bar, forms.B
    bulk = 0.5 * float(s @ ((forms.M + cfg.ell ** 2 * forms.K) @ s)) / cfg.E + 0.5 * float(v @ (forms.M_rho @ v))
    v_bd = B.T @ v
    s_bd = B.T @ s
    port_v = 0.5 * cfg.ell * float(np.sum(cfg.rho_at([cfg.mesh.a, cfg.mesh.b]) * v_bd ** 2))
    port_sigma = 0.5 * cfg.ell * float(s_bd @ s_bd) / cfg.E
    return {'H_bulk': bulk, 'E_port_v': port_v, 'E_port_sigma': port_sigma,
            'H_rob': bulk + port_v + port_sigma}


def explicit_kernel_apply(cfg, eps):
    """σ(x_i) = ∫ E/(2ℓ) exp(−|x_i − x′|/ℓ) ε(x′) dx′ by subsampled trapezoid quadrature"""
    if cfg.ell <= 0:
        raise ConfigError('the explicit kernel needs ell > 0')
    nodes = cfg.mesh.nodes
    eps = np.asarray(eps, dtype=np.float64)
    fine = np.concatenate([np.linspace(x0, x1, KERNEL_SUBSAMPLING, endpoint=False)
                           for x0, x1 in zip(nodes[:-1], nodes[1:])] + [nodes[-1:]])
    eps_fine = np.interp(fine, nodes, eps)
    weights = np.zeros_like(fine)
    steps = np.diff(fine)
    weights[:-1] += 0.5 * steps
    weights[1:] += 0.5 * steps
    kernel = np.exp(-np.abs(nodes[:, None] - fine[None, :]) / cfg.ell) / (2.0 * cfg.ell)
    return cfg.E * (kernel @ (weights * eps_fine))


def implicit_kernel_solve(cfg, eps, forms=None):
    """Stress from strain through (M + ℓ²K + ℓBBᵀ) σ̄ = E M ε̄"""
    forms = forms or forms_for(cfg)
    ell, B = cfg.ell, forms.B
    A = forms.M + ell ** 2 * forms.K + ell * (B @ B.T)
    return factorize(A, symmetric=True).solve(cfg.E * (forms.M @ np.asarray(eps, dtype=np.float64)))


def _integrate(cfg, mass, bundle, state, series, record):
    J = bundle.J
    problem = StepProblem(mass=mass, operator=J, state=state.z, dt=cfg.dt)
    cache = {}
    previous = state
    record(series, previous, None)
    for k in range(cfg.n_steps):
        step = implicit_midpoint(problem, cache)
        current = NanorodState.from_vector(step.x, t=(k + 1) * cfg.dt)
        record(series, current, previous)
        problem = problem.with_state(step.x)
        previous = current
    return previous


def run(cfg, forms=None, snapshot_times=()):
    """Integrate the Robin system with the implicit midpoint rule.

    Returns ``(final state, TimeSeries, snapshots)``; the series has the columns of
    ``CSV_COLUMNS`` and ``snapshots`` maps each requested time to the state reached there.
    """
    forms = forms or forms_for(cfg)
    bundle = build_system(cfg, forms)
    series = TimeSeries(CSV_COLUMNS)
    pending = sorted(float(t) for t in snapshot_times)
    snapshots = {}

    def record(series, current, previous):
        for t in [t for t in pending if abs(current.t - t) <= 0.5 * cfg.dt]:
            snapshots[t] = current
            pending.remove(t)
        parts = energy_partition(cfg, current, forms)
        residual = 0.0 if previous is None else power_balance_residual(bundle, previous.z, current.z, dt=cfg.dt)
        series.append(current.t, parts['H_rob'], parts['H_bulk'], parts['E_port_v'],
                      parts['E_port_sigma'], residual)

    state = _integrate(cfg, bundle.P, bundle, initial_state(cfg), series, record)
    logger.info('nanorod ell=%g: %d steps, H %.12e -> %.12e', cfg.ell, cfg.n_steps,
                series.rows[0][1], series.rows[-1][1])
    return state, series, snapshots


def classical_wave_run(cfg, forms=None):
    """Local wave equation E⁻¹M σ̇ = D v̄, Mρ v̇ = −Dᵀσ̄ integrated with the same scheme"""
    forms = forms or forms_for(cfg)
    mass = sp.block_diag([forms.M / cfg.E, forms.M_rho], format='csr')
    J = sp.bmat([[None, forms.D], [-forms.D.T, None]], format='csr')
    bundle = PHSystemBundle(P=mass, S=sp.identity(mass.shape[0]), J=J, n=mass.shape[0], name='wave')
    series = TimeSeries(('t', 'H'))

    def record(series, current, previous):
        z = current.z
        series.append(current.t, 0.5 * float(z @ (mass @ z)))

    state = _integrate(cfg, mass, bundle, initial_state(cfg), series, record)
    return state, series


def robin_balance_residual(cfg, state_prev, state_next, dt, forms=None):
    """|ΔH_bulk/Δt + boundary energy rates| of one step, rates taken at the midpoint"""
    forms = forms or forms_for(cfg)
    before = energy_partition(cfg, state_prev, forms)
    after = energy_partition(cfg, state_next, forms)
    B = forms.B
    rho_bd = cfg.rho_at([cfg.mesh.a, cfg.mesh.b])
    v_mid = B.T @ (0.5 * (state_prev.v_bar + state_next.v_bar))
    s_mid = B.T @ (0.5 * (state_prev.sigma_bar + state_next.sigma_bar))
    v_rate = B.T @ (state_next.v_bar - state_prev.v_bar) / dt
    s_rate = B.T @ (state_next.sigma_bar - state_prev.sigma_bar) / dt
    boundary_rate = cfg.ell * (float(np.sum(rho_bd * v_mid * v_rate)) + float(s_mid @ s_rate) / cfg.E)
    return abs((after['H_bulk'] - before['H_bulk']) / dt + boundary_rate)
