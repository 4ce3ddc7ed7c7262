"""Summaries of Hamiltonian traces, conditioning sweeps and convergence rates."""
import logging

import numpy as np

from app.errors import DimensionError
from app.models.states import BalanceReport, EnstrophyLedger, TimeSeries
from app.numerics.fem1d import assemble_forms, uniform_mesh
from app.numerics.sparse_core import spectral_bounds

logger = logging.getLogger(__name__)


def balance_summary(series, energy='H', residual='balance_residual'):
    """Drift and residual statistics of one run, relative to max(1, H(0))."""
    if len(series) == 0 or energy not in series.columns:
        raise DimensionError(f'series has no {energy!r} samples')
    t = series.column('t')
    H = series.column(energy)
    if not np.all(np.isfinite(H)):
        raise DimensionError('energy column has non-finite samples')
    reference = float(H[0])
    scale = max(1.0, abs(reference))
    drift = (H - reference) / scale
    slope = float(np.polyfit(t, drift, 1)[0]) if len(t) > 1 and np.ptp(t) > 0 else 0.0
    residuals = series.column(residual)[1:] / scale if residual in series.columns else np.zeros(0)
    return BalanceReport(
        n_steps=len(series) - 1,
        reference=reference,
        max_drift=float(np.abs(drift).max()),
        final_drift=float(abs(drift[-1])),
        drift_slope=slope,
        max_residual=float(np.abs(residuals).max()) if residuals.size else 0.0,
        mean_residual=float(np.abs(residuals).mean()) if residuals.size else 0.0,
    )


def robin_matrix(forms, ell):
    """M + ℓ²K + ℓBBᵀ"""
    return forms.M + ell ** 2 * forms.K + ell * (forms.B @ forms.B.T)


def condition_sweep(ells, sizes, a=0.0, b=1.0, seed=0):
    """κ(M + ℓ²K + ℓBBᵀ) on uniform meshes of ``sizes`` nodes for every ℓ in ``ells``."""
    rows = []
    for n in sizes:
        forms = assemble_forms(uniform_mesh(a, b, n))
        for ell in ells:
            lam_min, lam_max = spectral_bounds(robin_matrix(forms, ell), seed=seed)
            rows.append({'ell': float(ell), 'N': int(n), 'kappa': lam_max / lam_min,
                         'lambda_min': lam_min, 'lambda_max': lam_max})
            logger.info('N=%d ell=%g kappa=%.6e', n, ell, lam_max / lam_min)
    return rows


def convergence_order(errors, hs):
    """Least-squares slope of log(error) against log(h)"""
    errors = np.asarray(errors, dtype=np.float64)
    hs = np.asarray(hs, dtype=np.float64)
    if errors.size != hs.size or errors.size < 3:
        raise DimensionError('convergence order needs at least three (h, error) pairs')
    if np.any(errors <= 0) or np.any(hs <= 0):
        raise ValueError('errors and mesh sizes must be positive')
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


def ledger_summary(ledgers):
    """Worst residuals and constraint norms of a staggered run"""
    if not ledgers:
        return {'n_steps': 0, 'max_res_power': 0.0, 'max_res_enstrophy': 0.0,
                'max_B1T_psi': 0.0, 'max_B3T_psi': 0.0, 'K_final': 0.0, 'E_final': 0.0}
    last = ledgers[-1]
    return {
        'n_steps': len(ledgers),
        'max_res_power': max(entry.res_power for entry in ledgers),
        'max_res_enstrophy': max(entry.res_enstrophy for entry in ledgers),
        'max_B1T_psi': max(entry.b1_norm for entry in ledgers),
        'max_B3T_psi': max(entry.b3_norm for entry in ledgers),
        'K_final': last.kinetic,
        'E_final': last.enstrophy,
    }


def ledger_series(ledgers):
    series = TimeSeries(EnstrophyLedger.CSV_COLUMNS)
    for entry in ledgers:
        series.append(*entry.as_row())
    return series


def table_rows(records, columns):
    """Rows of dict records restricted to ``columns``, in order"""
    missing = [c for c in columns if records and c not in records[0]]
    if missing:
        raise DimensionError(f'records lack columns {missing}')
    return [tuple(record[c] for c in columns) for record in records]
