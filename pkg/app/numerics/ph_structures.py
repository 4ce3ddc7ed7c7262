"""Verification of Dirac, Lagrange and resistive structures; latent-state recovery;
Hamiltonian and power-balance evaluation for assembled bundles."""
import logging

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from app.errors import DimensionError, InconsistentLagrangeError, SingularMatrixError
from app.models.system import LatentPair, PortSnapshot, StructureReport
from app.numerics.sparse_core import as_csr, factorize, max_abs

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2000
RANDOM_SAMPLES = 3


def _check_dimensions(b):
    size = b.latent_size
    if b.P.shape != (size, size) or b.S.shape != (size, size):
        raise DimensionError(f'P {b.P.shape} and S {b.S.shape} must be {size}x{size}')
    if b.M_weight.shape != (size, size):
        raise DimensionError(f'weight {b.M_weight.shape} must be {size}x{size}')
    k = b.interconnection_size
    if b.J.shape != (k, k):
        raise DimensionError(f'J {b.J.shape} must be {k}x{k}')
    if b.R.shape != (b.r, b.r):
        raise DimensionError(f'R {b.R.shape} must be {b.r}x{b.r}')


class _WeightSolver:
    """Applies M_weight⁻¹, skipping the factorization when the weight is the identity"""

    def __init__(self, weight):
        n = weight.shape[0]
        self.identity = (weight != sp.identity(n, format='csr')).nnz == 0
        self._F = None if self.identity else factorize(weight, symmetric=True)

    def __call__(self, x):
        return x if self.identity else self._F.solve(x)


def _lagrange_defect(b):
    """Return (‖PᵀM⁻¹S − SᵀM⁻¹P‖_max, ‖PᵀM⁻¹S‖_max, method)"""
    if b.weight_is_s:
        return max_abs(b.P - b.P.T), max_abs(b.P), 'exact'
    inv = _WeightSolver(b.M_weight)
    size = b.latent_size
    if size <= DENSE_LIMIT:
        G = b.P.T @ inv(b.S.toarray())
        G = np.asarray(G)
        return float(np.abs(G - G.T).max()), float(np.abs(G).max()), 'dense'
    rng = np.random.default_rng(7)
    defect = scale = 0.0
    for _ in range(RANDOM_SAMPLES):
        x = rng.standard_normal(size)
        gx = b.P.T @ inv(b.S @ x)
        gtx = b.S.T @ inv(b.P @ x)
        defect = max(defect, float(np.abs(gx - gtx).max()))
        scale = max(scale, float(np.abs(gx).max()))
    return defect, scale, 'sampled'


def _rank_check(b):
    size = b.latent_size
    stacked = sp.vstack([b.P, b.S], format='csr')
    if size <= DENSE_LIMIT:
        rank = np.linalg.matrix_rank(stacked.toarray())
        return bool(rank == size), 'dense'
    try:
        factorize(stacked.T @ stacked, symmetric=True)
    except SingularMatrixError:
        return False, 'normal-equations'
    return True, 'normal-equations'


def _resistive_minimum(R):
    if R.shape[0] == 0:
        return 0.0, 0.0
    scale = max_abs(R)
    if R.shape[0] <= DENSE_LIMIT:
        Rd = R.toarray()
        return float(np.linalg.eigvalsh(0.5 * (Rd + Rd.T)).min()), scale
    rng = np.random.default_rng(11)
    worst = np.inf
    for _ in range(RANDOM_SAMPLES):
        x = rng.standard_normal(R.shape[0])
        worst = min(worst, float(x @ (R @ x)) / float(x @ x))
    return worst, scale


def verify_structure(b):
    """Check skewness of J, weighted symmetry of (P, S), positivity of R and the rank condition."""
    _check_dimensions(b)
    skew = max_abs(b.J + b.J.T)
    lagrange, scale, method = _lagrange_defect(b)
    r_min, r_scale = _resistive_minimum(b.R)
    rank_ok, rank_method = _rank_check(b)
    asym_R = max_abs(b.R - b.R.T)
    report = StructureReport(
        skew_defect=skew, lagrange_defect=lagrange, lagrange_scale=scale,
        r_min_rayleigh=r_min if asym_R <= 1e-12 * max(r_scale, 1e-300) else -np.inf,
        r_scale=r_scale, rank_ok=rank_ok, rank_method=rank_method,
        details={'j_scale': max_abs(b.J), 'lagrange_method': method, 'r_asymmetry': asym_R},
    )
    logger.debug('structure of %s: %s', b.name or 'bundle', report.as_dict())
    return report


def recover_latent(b, alpha, u_L, e, y_L):
    """Solve the stacked system [P;S](λ;ũ_L) = (α;u_L;e;y_L) in the least-squares sense."""
    lhs = np.concatenate([np.ravel(alpha), np.ravel(u_L)]).astype(np.float64)
    rhs = np.concatenate([np.ravel(e), np.ravel(y_L)]).astype(np.float64)
    size = b.latent_size
    if lhs.size != size or rhs.size != size:
        raise DimensionError(f'port data of length {lhs.size}/{rhs.size}, expected {size}')
    inv = _WeightSolver(b.M_weight)
    relation = b.P.T @ inv(rhs) - b.S.T @ inv(lhs)
    bound = 1e-10 * max(max_abs(b.P) * np.abs(rhs).max(initial=0.0) + max_abs(b.S) * np.abs(lhs).max(initial=0.0), 1e-300)
    if np.abs(relation).max(initial=0.0) > bound:
        raise InconsistentLagrangeError(
            f'Lagrange relation violated by {np.abs(relation).max():.3e} (bound {bound:.3e})')
    stacked = sp.vstack([b.P, b.S], format='csr').toarray()
    data = np.concatenate([lhs, rhs])
    z, *_ = scipy.linalg.lstsq(stacked, data, lapack_driver='gelsy')
    residual = np.linalg.norm(stacked @ z - data)
    if residual > 1e-10 * max(np.linalg.norm(data), 1e-300):
        raise InconsistentLagrangeError(f'reconstruction residual {residual:.3e} above bound')
    return LatentPair.split(z, b.n)


def _latent_vector(b, state):
    z = state.z if isinstance(state, LatentPair) else np.asarray(state, dtype=np.float64).ravel()
    if z.size != b.latent_size:
        raise DimensionError(f'latent vector of length {z.size}, expected {b.latent_size}')
    return z


def hamiltonian(b, lp):
    """½ zᵀ PᵀM⁻¹S z evaluated through its symmetric part"""
    z = _latent_vector(b, lp)
    Pz, Sz = b.P @ z, b.S @ z
    if b.weight_is_s:
        return 0.5 * float(Pz @ z)
    inv = _WeightSolver(b.M_weight)
    forward = float(Pz @ inv(Sz))
    backward = float(Sz @ inv(Pz))
    return 0.25 * (forward + backward)


def supplied_power(b, ports_k, ports_k1, dt):
    """−f_RᵀRf_R + y_Dᵀu_D + y_Lᵀu̇_L with midpoint port values"""
    for ports in (ports_k, ports_k1):
        ok, message = ports.check_lengths(b)
        if not ok:
            raise DimensionError(message)

    def mid(name):
        a, c = getattr(ports_k, name), getattr(ports_k1, name)
        if a.size == 0 and c.size == 0:
            return a
        a = a if a.size else np.zeros_like(c)
        c = c if c.size else np.zeros_like(a)
        return 0.5 * (a + c)

    f_R = mid('f_R')
    power = -float(f_R @ (b.R @ f_R)) if f_R.size else 0.0
    u_D, y_D = mid('u_D'), mid('y_D')
    if u_D.size and y_D.size:
        power += float(y_D @ u_D)
    y_L = mid('y_L')
    if y_L.size:
        u0 = ports_k.u_L if ports_k.u_L.size else np.zeros_like(y_L)
        u1 = ports_k1.u_L if ports_k1.u_L.size else np.zeros_like(y_L)
        power += float(y_L @ ((u1 - u0) / dt))
    return power


def power_balance_residual(b, z_k, z_k1, ports_k=None, ports_k1=None, dt=1.0):
    """|ΔH/Δt − supplied power| between two consecutive states"""
    ports_k = ports_k or PortSnapshot()
    ports_k1 = ports_k1 or PortSnapshot()
    dH = hamiltonian(b, z_k1) - hamiltonian(b, z_k)
    return abs(dH / dt - supplied_power(b, ports_k, ports_k1, dt))


def skew_product(J, z):
    """zᵀJz, zero for a skew J up to roundoff"""
    z = np.asarray(z, dtype=np.float64)
    return float(z @ (as_csr(J) @ z))
