import numpy as np
import pytest

from app.errors import ConfigError
from app.models.configs import InseConfig
from app.models.states import EnstrophyLedger
from app.numerics import fem2d
from app.numerics.ph_structures import verify_structure
from app.simulations import inse


def small_config(**overrides):
    """Coarse dipole that the 4x4 mesh can still see"""
    values = dict(nx=4, ny=4, grading=1.0, r0=0.4, c1=(0.0, 0.4), c2=(0.0, -0.4), omega_e=10.0,
                  dt=0.01, t_final=0.03)
    values.update(overrides)
    return InseConfig(**values)


@pytest.fixture(scope='module')
def inse_forms():
    return fem2d.assemble_static(inse.make_mesh(small_config()))


def test_dipole_is_antisymmetric():
    omega0 = inse.dipole_vorticity(InseConfig())
    x = np.array([0.05, 0.2, -0.3])
    y = np.array([0.1, 0.02, 0.15])
    np.testing.assert_allclose(omega0(x, -y), -omega0(x, y), atol=1e-12)
    np.testing.assert_allclose(omega0(-x, y), omega0(x, y), atol=1e-12)
    # the second monopole sits two radii away and adds 3 e^{-4}
    assert omega0(0.0, 0.1) == pytest.approx(300.0 * (1.0 + 3.0 * np.exp(-4.0)), rel=1e-12)


def test_monopole_profile():
    assert inse.monopole(0.0, 0.0, (0.0, 0.0), 0.1) == 1.0
    assert inse.monopole(0.1, 0.0, (0.0, 0.0), 0.1) == pytest.approx(0.0, abs=1e-15)


def test_initial_stream_function_vanishes_on_walls(inse_forms):
    state = inse.initial_conditions(small_config(), inse_forms)
    b1, _ = inse.constraint_norms(inse_forms, state)
    assert b1 <= 1e-14 * np.abs(state.psi_bar).max()
    assert fem2d.kinetic_energy(inse_forms, state.psi_bar) > 0.0


def test_calibration_hits_target_energy(inse_forms):
    cfg = small_config(calibrate=True)
    omega_e = inse.calibrate_vorticity_extremum(cfg, inse_forms)
    state = inse.initial_conditions(cfg, inse_forms, omega_e)
    kinetic = fem2d.kinetic_energy(inse_forms, state.psi_bar, cfg.rho0)
    assert kinetic == pytest.approx(inse.TARGET_KINETIC_ENERGY, rel=1e-10)


def test_half_step_enforces_no_slip(inse_forms):
    cfg = small_config()
    state = inse.initialize_half_step(cfg, inse_forms, inse.initial_conditions(cfg, inse_forms))
    b1, b3 = inse.constraint_norms(inse_forms, state)
    scale = np.abs(state.psi_bar).max()
    assert b1 <= 1e-10 * scale and b3 <= 1e-10 * scale
    assert state.t_psi == pytest.approx(0.5 * cfg.dt)
    assert state.t_omega == 0.0


def test_initial_stream_function_mirrors_the_vorticity(inse_forms):
    cfg = small_config()
    shape = (cfg.ny + 1, cfg.nx + 1)
    state = inse.initial_conditions(cfg, inse_forms)
    psi = inse_forms.psi_space.node_values(state.psi_bar).reshape(shape)
    atol = 1e-10 * np.abs(psi).max()
    # dipole: even in x, odd in y
    np.testing.assert_allclose(psi, psi[:, ::-1], rtol=0, atol=atol)
    np.testing.assert_allclose(psi, -psi[::-1, :], rtol=0, atol=atol)

    omega = inse_forms.omega_space.interpolate(lambda X, Y: inse.monopole(X, Y, (0.0, 0.0), 0.4))
    psi = inse_forms.psi_space.node_values(fem2d.solve_poisson_dirichlet(inse_forms, omega)).reshape(shape)
    atol = 1e-10 * np.abs(psi).max()
    np.testing.assert_allclose(psi, psi[:, ::-1], rtol=0, atol=atol)
    np.testing.assert_allclose(psi, psi[::-1, :], rtol=0, atol=atol)
    np.testing.assert_allclose(psi, psi.T, rtol=0, atol=atol)


def test_staggered_step_advances_both_clocks(inse_forms):
    cfg = small_config()
    state = inse.initialize_half_step(cfg, inse_forms, inse.initial_conditions(cfg, inse_forms))
    new = inse.step_staggered(cfg, inse_forms, state)
    assert new.t_omega == pytest.approx(cfg.dt)
    assert new.t_psi == pytest.approx(1.5 * cfg.dt)


def test_balances_close_to_roundoff(inse_forms):
    cfg = small_config()
    result = inse.run_benchmark(cfg, inse_forms, snapshot_times=(0.02,))
    steps = result.ledgers[1:]
    assert len(steps) == cfg.n_steps == 3
    assert max(e.res_power for e in steps) <= 1e-9
    assert max(e.res_enstrophy for e in steps) <= 1e-10
    assert all(e.diss_K >= 0.0 and e.diss_E >= 0.0 for e in steps)
    assert steps[-1].t == pytest.approx(0.03)
    assert steps[1].kinetic_at_t == pytest.approx(0.5 * (steps[0].kinetic + steps[1].kinetic), rel=1e-12)
    assert result.ledgers[0].kinetic_at_t == result.ledgers[0].kinetic
    assert max(e.b1_norm for e in steps) <= 1e-9 * np.abs(result.state.psi_bar).max()
    assert list(result.snapshots) == [0.02]
    assert result.snapshots[0.02].t == pytest.approx(0.02)
    s, omega = result.profiles[0.02]
    assert s.shape == omega.shape and s.size > 0
    assert np.all(np.diff(s) > 0) and s[0] >= 2.0


def test_inviscid_flow_conserves_energy_and_enstrophy(inse_forms):
    cfg = small_config(mu=0.0, t_final=1.0)
    result = inse.run_benchmark(cfg, inse_forms)
    assert len(result.ledgers) == cfg.n_steps + 1 == 101
    K = np.array([e.kinetic for e in result.ledgers])
    E = np.array([e.enstrophy for e in result.ledgers])
    assert np.abs(E - E[0]).max() <= 1e-10 * E[0]
    assert np.abs(K[1:] - K[1]).max() <= 1e-10 * K[1]
    assert not np.any(result.state.u1_D)
    assert not np.any(result.state.u5_D)


def test_zero_state_stays_zero(inse_forms):
    cfg = small_config(omega_e=0.0)
    result = inse.run_benchmark(cfg, inse_forms)
    assert not np.any(result.state.psi_bar) and not np.any(result.state.omega_bar)
    assert all(e.kinetic == 0.0 and e.enstrophy == 0.0 for e in result.ledgers)
    np.testing.assert_array_equal(inse.kinetic_decay_defect(cfg, result.ledgers), 0.0)


def test_frozen_and_free_systems_pass_structure_checks(inse_forms, rng):
    cfg = small_config()
    m = inse_forms.trace_space.n_dofs
    state = inse.initial_conditions(cfg, inse_forms).evolve(
        psi_bar=rng.standard_normal(inse_forms.psi_space.n_dofs),
        omega_bar=rng.standard_normal(inse_forms.omega_space.n_dofs))
    frozen = inse.assemble_frozen_system(cfg, inse_forms, state)
    assert frozen.n_D == 3 * m
    report = verify_structure(frozen)
    assert report.passed, report.as_dict()
    free = inse.assemble_free_system(cfg, inse_forms, state)
    assert free.n_D == 3 * m
    assert verify_structure(free).passed


def test_reference_comparison_matches_times():
    entries = [EnstrophyLedger(t=0.25, kinetic=1.50552, enstrophy=472.1750),
               EnstrophyLedger(t=0.3, kinetic=1.4, enstrophy=450.0)]
    rows = inse.reference_comparison(entries)
    assert len(rows) == 1
    assert rows[0]['t'] == 0.25 and rows[0]['K_rel_err'] == 0.0


def test_reference_comparison_uses_kinetic_energy_at_the_vorticity_time():
    entries = [EnstrophyLedger(t=0.25, kinetic=1.49, kinetic_at_t=1.50552, enstrophy=472.1750)]
    row, = inse.reference_comparison(entries)
    assert row['K'] == 1.50552 and row['K_rel_err'] == 0.0


def test_invalid_configuration():
    with pytest.raises(ConfigError):
        InseConfig(nx=1)
    with pytest.raises(ConfigError):
        InseConfig(mu=-1.0)


@pytest.mark.slow
def test_dipole_collision_reference_values():
    cfg = InseConfig(nx=48, ny=48, dt=1.0 / 300.0, t_final=0.25, calibrate=True)
    result = inse.run_benchmark(cfg)
    rows = inse.reference_comparison(result.ledgers)
    assert rows and rows[0]['t'] == 0.25
    assert rows[0]['K_rel_err'] < 0.05
    assert rows[0]['E_rel_err'] < 0.15


@pytest.mark.slow
def test_dipole_collision_balances_on_reference_mesh():
    cfg = InseConfig(nx=48, ny=48, dt=1.0 / 300.0, t_final=0.5, calibrate=True)
    result = inse.run_benchmark(cfg)
    steps = result.ledgers[1:]
    assert len(steps) == cfg.n_steps
    assert max(e.res_enstrophy for e in steps) <= 1e-10
    assert max(e.res_power for e in steps) <= 1e-8
    scale = np.abs(result.state.psi_bar).max()
    assert max(e.b1_norm for e in steps) <= 1e-9 * scale
    assert max(e.b3_norm for e in steps) <= 1e-9 * scale
