import numpy as np
import pytest

from app.errors import ConfigError
from app.models.configs import BeamConfig
from app.numerics.diagnostics import balance_summary
from app.numerics.ph_structures import verify_structure
from app.simulations import beam


def small_beam(**overrides):
    values = dict(dx=0.05, dt0=1e-5, t_final=2e-3, tol=1e-6)
    values.update(overrides)
    return BeamConfig(**values)


def test_derived_section_properties():
    cfg = BeamConfig()
    assert cfg.h == pytest.approx(7.85e-3, rel=1e-3)
    assert cfg.D == pytest.approx(8.95e3, rel=5e-3)
    assert cfg.rotary_inertia == pytest.approx(cfg.rho * cfg.h ** 3 / 12.0)
    assert BeamConfig(implicit=False).rotary_inertia == 0.0


def test_presets():
    assert beam.preset('r2.5cm').h == pytest.approx(1.9625e-3, rel=1e-3)
    assert beam.preset('r5cm', implicit=False).r == 0.05
    with pytest.raises(ConfigError):
        beam.preset('r1cm')


def test_invalid_poisson_ratio():
    with pytest.raises(ConfigError):
        BeamConfig(nu=0.5)


@pytest.mark.parametrize('implicit', [True, False])
def test_full_bundle_is_port_hamiltonian(implicit):
    cfg = small_beam(implicit=implicit)
    bundle = beam.build_system(cfg)
    N = cfg.mesh.n_nodes
    assert bundle.n == 2 * N + 6
    assert bundle.B_D.shape == (2 * N + 6, 6)
    report = verify_structure(bundle)
    assert report.passed, report.as_dict()


def test_initial_stress_matches_curvature():
    cfg = small_beam()
    forms = beam.forms_for(cfg)
    state = beam.initial_state(cfg, forms)
    interior = np.arange(1, forms.n - 1)
    lhs = (forms.M @ state.sigma_bar)[interior]
    rhs = -cfg.D * (forms.K @ state.w_bar)[interior]
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-12 * np.abs(rhs).max())
    assert state.w_bar[0] == 0.0 and state.w_bar[-1] == 0.0
    assert not np.any(state.v_bar)


@pytest.mark.parametrize('implicit', [True, False])
def test_adaptive_run_conserves_energy(implicit):
    cfg = small_beam(implicit=implicit)
    state, series, _ = beam.run(cfg)
    assert state.t == pytest.approx(cfg.t_final)
    report = balance_summary(series, 'H_d2', 'balance_residual_d2')
    assert report.max_drift <= 1e-10
    # the ends are at rest, so both Hamiltonians agree
    np.testing.assert_allclose(series.column('H_d1'), series.column('H_d2'), rtol=1e-12)
    assert np.all(series.column('dt')[1:] <= cfg.dt_max * (1 + 1e-12))


def test_output_times_are_hit_exactly():
    cfg = small_beam()
    _, series, snapshots = beam.run(cfg, output_times=(0.0, 5e-4, 1e-3))
    assert sorted(snapshots) == [0.0, 5e-4, 1e-3]
    t = series.column('t')
    assert np.min(np.abs(t - 5e-4)) <= 1e-15
    np.testing.assert_allclose(snapshots[0.0], cfg.initial_position(cfg.mesh.nodes) * (cfg.mesh.nodes > 0)
                               * (cfg.mesh.nodes < cfg.length), rtol=1e-7, atol=1e-11)


def test_initial_state_is_smooth_at_the_supports():
    cfg = small_beam(dx=1e-3)
    forms = beam.forms_for(cfg)
    state = beam.initial_state(cfg, forms)
    sigma = np.abs(state.sigma_bar[1:-1])
    # curvature near the supports follows the bump tail, without a spike at the end nodes
    assert sigma[0] <= 1e-6 * sigma.max() and sigma[-1] <= 1e-6 * sigma.max()
    ends = cfg.initial_position(np.array([0.0, cfg.length]))
    np.testing.assert_allclose(state.w_bar, cfg.initial_position(cfg.mesh.nodes), rtol=0,
                               atol=2 * np.abs(ends).max())


def test_zero_data_stay_at_rest():
    cfg = small_beam(bump_amplitude=0.0)
    state, series, _ = beam.run(cfg)
    assert not np.any(state.w_bar)
    assert np.all(series.column('H_d2') == 0.0)


def test_compare_identical_models_is_zero():
    cfg = small_beam(t_final=1e-3)
    distances = beam.compare_models(cfg, small_beam(t_final=1e-3), (5e-4, 1e-3))
    assert [t for t, _ in distances] == [5e-4, 1e-3]
    assert all(d == 0.0 for _, d in distances)


def test_rotary_inertia_changes_the_motion():
    distances = beam.compare_models(small_beam(t_final=1e-3), small_beam(t_final=1e-3, implicit=False), (1e-3,))
    assert distances[0][1] > 0.0


def test_compare_requires_same_mesh():
    with pytest.raises(ConfigError):
        beam.compare_models(small_beam(), small_beam(dx=0.1), (1e-3,))


def test_analytic_phase_velocity_limits():
    implicit, explicit = BeamConfig(), BeamConfig(implicit=False)
    k = np.array([1.0, 10.0, 100.0])
    ratio = beam.analytic_phase_velocity(implicit, k) / beam.analytic_phase_velocity(explicit, k)
    np.testing.assert_allclose(ratio, 1.0 / np.sqrt(1.0 + implicit.h ** 2 * k ** 2 / 12.0))


@pytest.mark.parametrize('implicit', [True, False])
def test_phase_velocity_on_coarse_mesh(implicit):
    cfg = BeamConfig(dx=0.01, implicit=implicit)
    rows = beam.phase_velocity_table(cfg, k_count=4)
    assert len(rows) == 4
    for k, c_num, c_ana, rel_err in rows:
        assert rel_err < 1e-2
        assert c_num > 0.0
    assert np.all(np.diff([row[3] for row in rows]) > 0.0)


@pytest.mark.slow
@pytest.mark.parametrize('name', ['r5cm', 'r2.5cm'])
def test_phase_velocity_on_reference_mesh(name):
    rows = beam.phase_velocity_table(beam.preset(name), k_count=10)
    errors = [row[3] for row in rows]
    assert max(errors) < 1e-3
    assert errors[0] <= 2e-3
    assert np.all(np.diff(errors) > 0.0)


def test_modal_frequencies_need_enough_nodes():
    with pytest.raises(ConfigError):
        beam.modal_frequencies(BeamConfig(dx=0.25), 5)


@pytest.mark.slow
def test_rotary_inertia_effect_grows_in_time():
    implicit = BeamConfig(dx=0.01, tol=1e-6, t_final=1e-2)
    explicit = BeamConfig(dx=0.01, tol=1e-6, t_final=1e-2, implicit=False)
    (_, early), (_, late) = beam.compare_models(implicit, explicit, (1e-3, 1e-2))
    assert late > early > 0.0


@pytest.mark.slow
def test_reference_mesh_run_conserves_energy():
    cfg = BeamConfig(tol=1e-6)
    state, series, _ = beam.run(cfg)
    assert state.t == pytest.approx(cfg.t_final)
    assert balance_summary(series, 'H_d2', 'balance_residual_d2').max_drift <= 1e-10
