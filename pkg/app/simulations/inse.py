"""2D incompressible Navier-Stokes in stream function / vorticity form.

The state carries ψ̄ at half steps and ω̄ at whole steps. Each staggered step
advances ω̄ with the transport matrix frozen at the current ψ̄, then ψ̄ with the
modulation frozen at the new ω̄. No-slip walls enter through boundary multipliers:

* ``u1_D`` boundary vorticity generated by the no-slip constraint (ψ substep),
* ``u5_D`` vorticity flux n·∇ω closing the vorticity trace (ω substep),
* ``u_tilde`` multiplier of the impermeability constraint ψ = 0 (ψ substep).
"""
import logging
import math
from collections import namedtuple

import numpy as np
import scipy.sparse as sp

from app.errors import ConstraintViolationError
from app.models.states import EnstrophyLedger, InseState
from app.models.system import PHSystemBundle
from app.numerics import fem2d
from app.numerics.timeint import StepProblem, implicit_midpoint, staggered_drive

logger = logging.getLogger(__name__)

# Kinetic energy and enstrophy of the dipole-wall collision reference solution
REFERENCE_TABLE = {
    0.25: (1.50552, 472.1750),
    0.5: (1.01554, 379.7911),
    0.75: (0.76913, 250.8609),
}
TARGET_KINETIC_ENERGY = 2.0
CONSTRAINT_TOLERANCE = 1e-9

BenchmarkResult = namedtuple('BenchmarkResult', ['state', 'ledgers', 'snapshots', 'profiles', 'omega_e'])
Snapshot = namedtuple('Snapshot', ['t', 'psi_bar', 'omega_bar'])


def make_mesh(cfg):
    L = cfg.half_width
    return fem2d.build_mesh(((-L, -L), (L, L)), cfg.nx, cfg.ny, cfg.grading, cfg.max_ratio)


def monopole(x, y, center, r0):
    """(1 − (r/r₀)²) exp(−(r/r₀)²)"""
    r2 = ((x - center[0]) ** 2 + (y - center[1]) ** 2) / r0 ** 2
    return (1.0 - r2) * np.exp(-r2)


def dipole_vorticity(cfg, omega_e=None):
    omega_e = cfg.omega_e if omega_e is None else omega_e

    def omega0(x, y):
        return omega_e * (monopole(x, y, cfg.c1, cfg.r0) - monopole(x, y, cfg.c2, cfg.r0))
    return omega0


def calibrate_vorticity_extremum(cfg, forms):
    """ω_e giving the initial kinetic energy TARGET_KINETIC_ENERGY on this mesh.

    K^d is quadratic in ω_e, so one Poisson solve at the configured value suffices.
    """
    omega_bar = forms.omega_space.interpolate(dipole_vorticity(cfg))
    psi_bar = fem2d.solve_poisson_dirichlet(forms, omega_bar)
    kinetic = fem2d.kinetic_energy(forms, psi_bar, cfg.rho0)
    if kinetic <= 0.0:
        return cfg.omega_e
    omega_e = cfg.omega_e * math.sqrt(TARGET_KINETIC_ENERGY / kinetic)
    logger.info('calibrated omega_e %.6g -> %.6g (K0 was %.6g)', cfg.omega_e, omega_e, kinetic)
    return omega_e


def initial_conditions(cfg, forms, omega_e=None):
    """ω̄₀ interpolates the dipole; ψ̄₀ solves the Dirichlet Poisson problem"""
    if omega_e is None:
        omega_e = calibrate_vorticity_extremum(cfg, forms) if cfg.calibrate else cfg.omega_e
    omega_bar = forms.omega_space.interpolate(dipole_vorticity(cfg, omega_e))
    psi_bar = fem2d.solve_poisson_dirichlet(forms, omega_bar)
    m = forms.trace_space.n_dofs
    logger.info('initial state: K=%.8g E=%.8g', fem2d.kinetic_energy(forms, psi_bar, cfg.rho0),
                fem2d.enstrophy(forms, omega_bar, cfg.rho0))
    return InseState(psi_bar, omega_bar, np.zeros(m), np.zeros(m), np.zeros(m))


def _port_columns(cfg, forms):
    """Ports (u¹_D, u⁵_D, ũ_D) acting on the ψ and ω rows"""
    n_omega, m = forms.omega_space.n_dofs, forms.trace_space.n_dofs
    zero = sp.csr_matrix((n_omega, m))
    return sp.bmat([[-cfg.mu * forms.B3, cfg.mu * forms.B1, forms.B1],
                    [zero, cfg.mu * forms.B5, zero]], format='csr')


def _bundle(cfg, forms, modulation, ports, name):
    n_psi, n_omega = forms.psi_space.n_dofs, forms.omega_space.n_dofs
    n = n_psi + n_omega
    P = cfg.rho0 * sp.block_diag([forms.K, forms.M], format='csr')
    R = cfg.mu * sp.block_diag([forms.R1, forms.R2], format='csr')
    identity = sp.identity(n, format='csr')
    n_D = ports.shape[1]
    J = sp.bmat([[modulation, -identity, ports],
                 [identity, sp.csr_matrix((n, n)), None],
                 [-ports.T, None, sp.csr_matrix((n_D, n_D))]], format='csr')
    return PHSystemBundle(P=P, S=identity, J=J, n=n, r=n, n_D=n_D, R=R, M_weight=identity,
                          B_D=ports, name=name)


def _modulation(cfg, forms, state):
    D1 = fem2d.assemble_D1(forms.psi_space, forms.omega_space, state.omega_bar)
    D2 = fem2d.assemble_D2(forms.psi_space, forms.omega_space, state.psi_bar)
    return cfg.rho0 * sp.block_diag([D1, D2], format='csr')


def assemble_frozen_system(cfg, forms, state):
    """Bundle with the modulation frozen at ``state`` and the no-slip ports"""
    return _bundle(cfg, forms, _modulation(cfg, forms, state), _port_columns(cfg, forms),
                   f'inse-frozen({forms.mesh.describe()})')


def assemble_free_system(cfg, forms, state):
    """Open bundle whose ports also include the tangential-derivative control u⁴_D"""
    m = forms.trace_space.n_dofs
    B2, B4 = fem2d.assemble_B2_B4(forms, state.omega_bar, state.psi_bar)
    tangential = cfg.rho0 * sp.vstack([-B2, B4], format='csr')
    ports = sp.hstack([_port_columns(cfg, forms)[:, :2 * m], tangential], format='csr')
    return _bundle(cfg, forms, _modulation(cfg, forms, state), ports,
                   f'inse-free({forms.mesh.describe()})')


def psi_substep(cfg, forms, state, dt):
    """Advance ψ̄ by ``dt`` with D¹ frozen at the current ω̄ and u⁵_D held fixed.

    The constraints B¹ᵀψ̄ = 0 and B³ᵀψ̄ = 0 hold at the end of the step; their
    multipliers are solved in the scaled form (Δtμ u¹_D, Δt ũ_D).
    """
    D1 = fem2d.assemble_D1(forms.psi_space, forms.omega_space, state.omega_bar)
    operator = cfg.rho0 * D1 - cfg.mu * forms.R1
    source = cfg.mu * (forms.B1 @ state.u5_D)
    m = forms.trace_space.n_dofs
    if cfg.mu > 0:
        constraints = sp.vstack([forms.B1.T, forms.B3.T], format='csr')
        multipliers = sp.hstack([forms.B3, -forms.B1], format='csr')
    else:
        constraints, multipliers = forms.B1.T.tocsr(), -forms.B1
    problem = StepProblem(mass=cfg.rho0 * forms.K, operator=operator, state=state.psi_bar, dt=dt,
                          source=source, constraints=constraints, multipliers=multipliers)
    step = implicit_midpoint(problem)
    if cfg.mu > 0:
        u1 = step.multipliers[:m] / (dt * cfg.mu)
        u_tilde = step.multipliers[m:] / dt
    else:
        u1, u_tilde = np.zeros(m), step.multipliers / dt
    new = state.evolve(psi_bar=step.x, u1_D=u1, u_tilde=u_tilde, t_psi=state.t_psi + dt)
    check_constraints(cfg, forms, new)
    return new


def omega_substep(cfg, forms, state, dt):
    """Advance ω̄ by ``dt`` with D² frozen at the current ψ̄.

    The vorticity trace is tied to the boundary vorticity u¹_D of the last ψ substep
    (M∂u¹_D = B⁵ᵀω̄) at the end of the step; the multiplier is Δtμ u⁵_D.
    """
    D2 = fem2d.assemble_D2(forms.psi_space, forms.omega_space, state.psi_bar)
    operator = cfg.rho0 * D2 - cfg.mu * forms.R2
    mass = cfg.rho0 * forms.M
    if cfg.mu > 0:
        problem = StepProblem(mass=mass, operator=operator, state=state.omega_bar, dt=dt,
                              constraints=forms.B5.T.tocsr(), constraint_rhs=forms.M_bd @ state.u1_D,
                              multipliers=-forms.B5)
        step = implicit_midpoint(problem)
        u5 = step.multipliers / (dt * cfg.mu)
    else:
        step = implicit_midpoint(StepProblem(mass=mass, operator=operator, state=state.omega_bar, dt=dt))
        u5 = np.zeros(forms.trace_space.n_dofs)
    return state.evolve(omega_bar=step.x, u5_D=u5, t_omega=state.t_omega + dt)


def initialize_half_step(cfg, forms, state0):
    """Move ψ̄ to t₀ + Δt/2 with the modulation frozen at t₀"""
    return psi_substep(cfg, forms, state0, 0.5 * cfg.dt)


def step_staggered(cfg, forms, state):
    """ω̄: t_k → t_{k+1}, then ψ̄: t_{k+1/2} → t_{k+3/2}"""
    return psi_substep(cfg, forms, omega_substep(cfg, forms, state, cfg.dt), cfg.dt)


def constraint_norms(forms, state):
    return (float(np.abs(forms.B1.T @ state.psi_bar).max(initial=0.0)),
            float(np.abs(forms.B3.T @ state.psi_bar).max(initial=0.0)))


def check_constraints(cfg, forms, state):
    b1, b3 = constraint_norms(forms, state)
    bound = CONSTRAINT_TOLERANCE * float(np.abs(state.psi_bar).max(initial=0.0))
    if b1 > bound or (cfg.mu > 0 and b3 > bound):
        raise ConstraintViolationError(
            f'no-slip constraints violated at t={state.t_psi:.6g}: |B1^T psi|={b1:.3e} |B3^T psi|={b3:.3e}')


def ledgers(cfg, forms, prev, new):
    """Kinetic-energy and enstrophy balances of one staggered step.

    ΔK^d = −Δtμ ψₘᵀR¹ψₘ + Δt (μ u⁵ᵀB¹ᵀψₘ − μ u¹ᵀB³ᵀψₘ + ũᵀB¹ᵀψₘ)
    ΔE^d = −Δtμ ωₘᵀR²ωₘ + Δtμ u⁵ᵀB⁵ᵀωₘ
    """
    dt, mu = cfg.dt, cfg.mu
    psi_m = 0.5 * (prev.psi_bar + new.psi_bar)
    omega_m = 0.5 * (prev.omega_bar + new.omega_bar)
    K_prev = fem2d.kinetic_energy(forms, prev.psi_bar, cfg.rho0)
    K_new = fem2d.kinetic_energy(forms, new.psi_bar, cfg.rho0)
    E_prev = fem2d.enstrophy(forms, prev.omega_bar, cfg.rho0)
    E_new = fem2d.enstrophy(forms, new.omega_bar, cfg.rho0)
    diss_K = dt * mu * float(psi_m @ (forms.R1 @ psi_m))
    diss_E = dt * mu * float(omega_m @ (forms.R2 @ omega_m))
    trace_psi = forms.B1.T @ psi_m
    port_K = dt * (mu * float(new.u5_D @ trace_psi) - mu * float(new.u1_D @ (forms.B3.T @ psi_m))
                   + float(new.u_tilde @ trace_psi))
    gen_E = dt * mu * float(new.u5_D @ (forms.B5.T @ omega_m))
    b1, b3 = constraint_norms(forms, new)
    return EnstrophyLedger(
        t=new.t_omega, kinetic=K_new, enstrophy=E_new, kinetic_at_t=0.5 * (K_prev + K_new),
        diss_K=diss_K, diss_E=diss_E, gen_E_boundary=gen_E, port_K=port_K,
        res_power=abs(K_new - K_prev + diss_K - port_K) / max(1.0, abs(K_new)),
        res_enstrophy=abs(E_new - E_prev + diss_E - gen_E) / max(1.0, abs(E_new)),
        b1_norm=b1, b3_norm=b3)


def kinetic_decay_defect(cfg, entries):
    """Relative defect of ΔK/Δt = −2μE/ρ₀ between consecutive ledger entries"""
    defects = []
    for before, after in zip(entries[:-1], entries[1:]):
        rate = (after.kinetic - before.kinetic) / cfg.dt
        expected = -cfg.mu * (before.enstrophy + after.enstrophy) / cfg.rho0
        defects.append(abs(rate - expected) / max(abs(expected), 1e-300))
    return np.array(defects)


def boundary_vorticity_profile(cfg, forms, state, y_range=None):
    """ω along the right wall at the Q3 lattice points with y in ``y_range``.

    Returns ``(s, omega)`` with ``s`` the arc length from the lower-left corner.
    """
    (x0, y0), (x1, _) = forms.mesh.corners
    y_lo, y_hi = cfg.profile_y if y_range is None else y_range
    _, ys = forms.omega_space.lattice()
    ys = ys[(ys >= y_lo - 1e-12) & (ys <= y_hi + 1e-12)]
    omega = forms.omega_space.evaluate(state.omega_bar, np.full(ys.shape, x1), ys)
    return (x1 - x0) + (ys - y0), omega


def _due(t, times, dt):
    return [s for s in times if abs(t - s) <= 0.25 * dt]


def run_benchmark(cfg, forms=None, snapshot_times=(), progress=None):
    """Staggered run to ``cfg.t_final`` with per-step ledgers.

    Snapshots hold ψ̄ averaged to the vorticity time stamp; boundary profiles are taken
    at the same times.
    """
    forms = forms or fem2d.assemble_static(make_mesh(cfg))
    omega_e = calibrate_vorticity_extremum(cfg, forms) if cfg.calibrate else cfg.omega_e
    state0 = initial_conditions(cfg, forms, omega_e)
    snapshots, profiles = {}, {}
    pending = sorted(float(t) for t in snapshot_times)

    def record(t, psi_bar, omega_bar, state):
        for s in _due(t, pending, cfg.dt):
            snapshots[s] = Snapshot(t, psi_bar.copy(), omega_bar.copy())
            profiles[s] = boundary_vorticity_profile(cfg, forms, state)
            pending.remove(s)

    record(0.0, state0.psi_bar, state0.omega_bar, state0)
    b1, b3 = constraint_norms(forms, state0)
    K0 = fem2d.kinetic_energy(forms, state0.psi_bar, cfg.rho0)
    entries = [EnstrophyLedger(t=0.0, kinetic=K0, kinetic_at_t=K0,
                               enstrophy=fem2d.enstrophy(forms, state0.omega_bar, cfg.rho0),
                               b1_norm=b1, b3_norm=b3)]
    state = initialize_half_step(cfg, forms, state0)

    def observe(prev, new):
        entry = ledgers(cfg, forms, prev, new)
        logger.debug('t=%.5f K=%.10g E=%.10g res_E=%.2e', entry.t, entry.kinetic, entry.enstrophy,
                     entry.res_enstrophy)
        record(new.t_omega, 0.5 * (prev.psi_bar + new.psi_bar), new.omega_bar, new)
        return entry

    state, records = staggered_drive(
        state, cfg.n_steps,
        lambda s: omega_substep(cfg, forms, s, cfg.dt),
        lambda s: psi_substep(cfg, forms, s, cfg.dt),
        ledger=observe, progress=progress)
    entries.extend(records)
    logger.info('inse %s: %d steps to t=%.4g, K=%.8g E=%.8g', forms.mesh.describe(), cfg.n_steps,
                state.t_omega, entries[-1].kinetic, entries[-1].enstrophy)
    return BenchmarkResult(state, entries, snapshots, profiles, omega_e)


def reference_comparison(entries):
    """Relative deviations from REFERENCE_TABLE at the times the run reached

    K is the mean of the kinetic energies of the two stream functions around t.
    """
    rows = []
    for t, (K_ref, E_ref) in sorted(REFERENCE_TABLE.items()):
        hits = [e for e in entries if abs(e.t - t) <= 1e-9 + 1e-6 * t]
        if hits:
            e = hits[0]
            K = e.kinetic if e.kinetic_at_t is None else e.kinetic_at_t
            rows.append({'t': t, 'K': K, 'K_ref': K_ref, 'K_rel_err': abs(K - K_ref) / K_ref,
                         'E': e.enstrophy, 'E_ref': E_ref, 'E_rel_err': abs(e.enstrophy - E_ref) / E_ref})
    return rows
