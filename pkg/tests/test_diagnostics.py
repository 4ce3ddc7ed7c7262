import numpy as np
import pytest

from app.errors import DimensionError
from app.models.states import EnstrophyLedger, TimeSeries
from app.numerics import diagnostics
from app.numerics.fem1d import assemble_forms, uniform_mesh


def test_convergence_order_recovers_power_law():
    hs = np.array([0.1, 0.05, 0.025, 0.0125])
    assert diagnostics.convergence_order(3.0 * hs ** 2, hs) == pytest.approx(2.0, abs=1e-12)


def test_convergence_order_needs_three_points():
    with pytest.raises(DimensionError):
        diagnostics.convergence_order([1.0, 0.5], [0.1, 0.05])
    with pytest.raises(ValueError):
        diagnostics.convergence_order([1.0, 0.0, 0.1], [0.1, 0.05, 0.025])


def test_balance_summary_of_linear_drift():
    series = TimeSeries(('t', 'H', 'balance_residual'))
    for k in range(5):
        series.append(0.1 * k, 10.0 + 0.5 * k, 1e-3 * k)
    report = diagnostics.balance_summary(series)
    assert report.n_steps == 4
    assert report.reference == 10.0
    assert report.max_drift == pytest.approx(0.2)
    assert report.final_drift == pytest.approx(0.2)
    assert report.drift_slope == pytest.approx(0.5)
    assert report.max_residual == pytest.approx(4e-4)
    assert report.as_dict()['n_steps'] == 4


def test_balance_summary_rejects_missing_energy():
    with pytest.raises(DimensionError):
        diagnostics.balance_summary(TimeSeries(('t', 'H')))


def test_condition_number_of_mass_is_bounded():
    rows = diagnostics.condition_sweep([0.0], [50, 100])
    kappas = [row['kappa'] for row in rows]
    assert all(1.0 < kappa < 6.0 for kappa in kappas)
    assert kappas[1] == pytest.approx(kappas[0], rel=0.1)


def test_condition_number_grows_with_length_scale():
    small, large = diagnostics.condition_sweep([1e-2, 5e-2], [100])
    assert large['kappa'] / small['kappa'] >= 2.0
    assert small['N'] == 100 and large['ell'] == 5e-2


@pytest.mark.parametrize('n', [500, 1000])
def test_condition_sweep_matches_dense_spectrum(n):
    ells = [0.0, 1e-2, 5e-2]
    rows = diagnostics.condition_sweep(ells, [n])
    forms = assemble_forms(uniform_mesh(0.0, 1.0, n))
    for row, ell in zip(rows, ells):
        eigenvalues = np.linalg.eigvalsh(diagnostics.robin_matrix(forms, ell).toarray())
        assert row['kappa'] == pytest.approx(eigenvalues[-1] / eigenvalues[0], rel=1e-2)
    kappas = [row['kappa'] for row in rows]
    assert kappas[0] < kappas[1] < kappas[2]


def test_robin_matrix_adds_boundary_term():
    forms = assemble_forms(uniform_mesh(0.0, 1.0, 5))
    A = diagnostics.robin_matrix(forms, 0.5).toarray()
    expected = forms.M.toarray() + 0.25 * forms.K.toarray()
    expected[0, 0] += 0.5
    expected[-1, -1] += 0.5
    np.testing.assert_allclose(A, expected)


def test_ledger_summary_and_series():
    entries = [EnstrophyLedger(t=0.0, kinetic=2.0, enstrophy=10.0),
               EnstrophyLedger(t=0.1, kinetic=1.9, enstrophy=9.0, res_power=1e-12, b1_norm=1e-14)]
    summary = diagnostics.ledger_summary(entries)
    assert summary['n_steps'] == 2
    assert summary['max_res_power'] == 1e-12
    assert summary['K_final'] == 1.9
    series = diagnostics.ledger_series(entries)
    np.testing.assert_allclose(series.column('E'), [10.0, 9.0])
    assert diagnostics.ledger_summary([])['n_steps'] == 0


def test_table_rows_selects_columns():
    records = [{'a': 1, 'b': 2, 'c': 3}]
    assert diagnostics.table_rows(records, ('c', 'a')) == [(3, 1)]
    with pytest.raises(DimensionError):
        diagnostics.table_rows(records, ('d',))
