"""Sparse matrices, direct solvers and spectral helpers shared by every model.

Matrices are ``scipy.sparse.csr_matrix`` in canonical form (sorted indices, duplicates
summed); vectors are 1-D ``numpy`` float arrays.
"""
import logging

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from app.errors import (AsymmetricMatrixError, ConvergenceError, DimensionError,
                        IndefiniteMatrixError, InvalidFactorizationError, NonFiniteError,
                        SingularMatrixError)

logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-13
RESIDUAL_TOLERANCE = 1e-10
DENSE_EIG_LIMIT = 400


def as_csr(A):
    """Canonical CSR copy of ``A``: float64, duplicates summed, indices sorted."""
    A = sp.csr_matrix(A, dtype=np.float64, copy=True)
    A.sum_duplicates()
    A.sort_indices()
    return A


def assemble(rows, cols, vals, shape):
    """Build a CSR matrix from triplets; duplicates are summed in input order."""
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    vals = np.asarray(vals, dtype=np.float64).ravel()
    if not (rows.size == cols.size == vals.size):
        raise DimensionError('triplet arrays differ in length')
    return as_csr(sp.coo_matrix((vals, (rows, cols)), shape=shape))


def max_abs(A):
    if sp.issparse(A):
        return float(abs(A).max()) if A.nnz else 0.0
    A = np.asarray(A)
    return float(np.abs(A).max()) if A.size else 0.0


def ensure_finite(x, name='vector'):
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NonFiniteError(f'{name} has non-finite entries')
    return x


def spmv(A, x):
    x = np.asarray(x, dtype=np.float64)
    if A.shape[1] != x.shape[0]:
        raise DimensionError(f'cannot multiply {A.shape[0]}x{A.shape[1]} matrix by vector of length {x.shape[0]}')
    return ensure_finite(A @ x, 'product')


def symmetry_defect(A):
    """Return ``‖A−Aᵀ‖_max`` and ``‖A‖_max``."""
    A = as_csr(A)
    return max_abs(A - A.T), max_abs(A)


class Factorization:
    """Sparse LU handle (SuperLU) reused for repeated solves.

    The symmetric flag selects a symmetric-pattern column ordering; partial pivoting is
    kept in both cases so saddle-point systems with zero diagonal blocks factor too.
    """

    def __init__(self, A, symmetric=False, pivot_tol=PIVOT_TOLERANCE):
        self.A = as_csr(A)
        self.symmetric = symmetric
        self.pivot_tol = pivot_tol
        self.valid = False
        self._lu = None
        self._norm_inf = float(abs(self.A).sum(axis=1).max()) if self.A.nnz else 0.0

    @property
    def shape(self):
        return self.A.shape

    def _factor(self):
        n = self.A.shape[0]
        if n == 0:
            raise SingularMatrixError('empty matrix')
        scale = max_abs(self.A)
        if scale == 0.0:
            raise SingularMatrixError('zero matrix', pivot=0)
        permc = 'MMD_AT_PLUS_A' if self.symmetric else 'COLAMD'
        try:
            lu = spla.splu(self.A.tocsc(), permc_spec=permc)
        except RuntimeError as exc:
            raise SingularMatrixError(f'factorization failed: {exc}') from exc
        pivots = np.abs(lu.U.diagonal())
        small = np.flatnonzero(pivots <= self.pivot_tol * scale)
        if small.size:
            step = int(small[0])
            raise SingularMatrixError('numerically singular matrix', pivot=int(lu.perm_c[step]))
        self._lu = lu
        self.valid = True

    def solve(self, b):
        if not self.valid:
            raise InvalidFactorizationError('factorization is not valid')
        b = np.asarray(b, dtype=np.float64)
        if b.shape[0] != self.A.shape[0]:
            raise DimensionError(f'right-hand side of length {b.shape[0]} for system of size {self.A.shape[0]}')
        x = self._lu.solve(b)
        r = b - self.A @ x
        bound = self._bound(x, b)
        if _norm_inf(r) > bound:
            # one step of iterative refinement
            x = x + self._lu.solve(r)
            r = b - self.A @ x
            if _norm_inf(r) > self._bound(x, b):
                raise SingularMatrixError(f'residual {_norm_inf(r):.3e} above bound after refinement')
            logger.debug('refinement step accepted, residual %.3e', _norm_inf(r))
        return ensure_finite(x, 'solution')

    def _bound(self, x, b):
        return RESIDUAL_TOLERANCE * (self._norm_inf * _norm_inf(x) + _norm_inf(b))


def _norm_inf(v):
    return float(np.abs(v).max()) if v.size else 0.0


def factorize(A, symmetric=False, pivot_tol=PIVOT_TOLERANCE):
    A = as_csr(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f'cannot factorize non-square {A.shape[0]}x{A.shape[1]} matrix')
    if symmetric:
        defect, scale = symmetry_defect(A)
        if defect > 1e-12 * scale:
            raise AsymmetricMatrixError(f'symmetry defect {defect:.3e} exceeds 1e-12*{scale:.3e}')
    handle = Factorization(A, symmetric=symmetric, pivot_tol=pivot_tol)
    handle._factor()
    return handle


def solve(F, b):
    if not isinstance(F, Factorization):
        raise InvalidFactorizationError('not a factorization handle')
    return F.solve(b)


def _power_iteration(apply, x0, tol, max_iter):
    x = x0 / np.linalg.norm(x0)
    previous = None
    for _ in range(max_iter):
        y = apply(x)
        rq = float(x @ y)
        if rq <= 0.0:
            raise IndefiniteMatrixError(f'non-positive Rayleigh quotient {rq:.3e}')
        if previous is not None and abs(rq - previous) <= tol * abs(rq):
            return rq
        previous = rq
        x = y / np.linalg.norm(y)
    raise ConvergenceError(f'power iteration did not converge in {max_iter} iterations')


def spectral_bounds(A, tol=1e-6, max_iter=10000, seed=0):
    """Return ``(λ_min, λ_max)`` of an SPD matrix by power iteration on ``A`` and ``A⁻¹``."""
    A = as_csr(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionError('spectral bounds need a square matrix')
    x0 = np.random.default_rng(seed).standard_normal(A.shape[0])
    lam_max = _power_iteration(lambda v: A @ v, x0, tol, max_iter)
    F = factorize(A, symmetric=True)
    inv_lam_min = _power_iteration(F.solve, x0, tol, max_iter)
    logger.debug('lambda_max=%.6e lambda_min=%.6e', lam_max, 1.0 / inv_lam_min)
    return 1.0 / inv_lam_min, lam_max


def condition_number_estimate(A, tol=1e-6, max_iter=10000, seed=0):
    """Estimate ``λ_max/λ_min`` of an SPD matrix."""
    lam_min, lam_max = spectral_bounds(A, tol=tol, max_iter=max_iter, seed=seed)
    return lam_max / lam_min


def generalized_eigs_smallest(A, Mmass, k, inverse=None):
    """Smallest-magnitude eigenpairs of ``A x = λ Mmass x``.

    ``A`` may be a sparse matrix or a ``LinearOperator``; in the latter case ``inverse``
    must apply ``A⁻¹``. Small problems go through a dense symmetric-definite solver,
    larger ones through shift-and-invert Lanczos at zero shift.

    Returns:
        list of ``(eigenvalue, eigenvector)`` sorted by increasing magnitude.
    """
    n = A.shape[0]
    if k < 1 or k > n:
        raise DimensionError(f'requested {k} eigenpairs of a problem of dimension {n}')
    Mmass = as_csr(Mmass)
    operator = isinstance(A, spla.LinearOperator)
    if not operator and (n <= DENSE_EIG_LIMIT or k >= n - 1):
        Ad = as_csr(A).toarray()
        Ad = 0.5 * (Ad + Ad.T)
        Md = Mmass.toarray()
        try:
            w, V = scipy.linalg.eigh(Ad, 0.5 * (Md + Md.T))
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f'dense eigensolver failed: {exc}') from exc
        order = np.argsort(np.abs(w), kind='stable')[:k]
        w, V = w[order], V[:, order]
    else:
        if inverse is None:
            if operator:
                raise DimensionError('an inverse operator is required for LinearOperator input')
            F = factorize(A, symmetric=True)
            inverse = spla.LinearOperator((n, n), matvec=F.solve, dtype=np.float64)
        try:
            w, V = spla.eigsh(A, k=k, M=Mmass, sigma=0.0, which='LM', OPinv=inverse)
        except spla.ArpackError as exc:
            raise ConvergenceError(f'shift-invert Lanczos failed: {exc}') from exc
        order = np.argsort(np.abs(w), kind='stable')
        w, V = w[order], V[:, order]
    pairs = []
    if inverse is None:
        # backward error of the pencil, scaled by ‖A‖₁ + |λ| ‖M‖₁
        norm_A, norm_M = np.abs(Ad).sum(axis=0).max(), np.abs(Md).sum(axis=0).max()
    for lam, x in zip(w, V.T):
        x_norm = np.linalg.norm(x)
        if inverse is None:
            residual = np.linalg.norm(Ad @ x - lam * (Md @ x))
            bound = 1e-8 * (norm_A + abs(lam) * norm_M) * x_norm
        elif lam == 0.0:
            residual, bound = np.linalg.norm(A @ x), 0.0
        else:
            # shift-invert residual: A⁻¹ M x = x / λ
            residual = np.linalg.norm(inverse @ (Mmass @ x) - x / lam)
            bound = 1e-8 * x_norm / abs(lam)
        if residual > max(bound, np.finfo(float).tiny):
            raise ConvergenceError(f'eigenpair residual {residual:.3e} too large for eigenvalue {lam:.6e}')
        pairs.append((float(lam), np.asarray(x)))
    return pairs


def write_matrix_market(path, A, symmetric=False):
    scipy.io.mmwrite(str(path), as_csr(A).tocoo(), field='real',
                     symmetry='symmetric' if symmetric else 'general', precision=17)


def read_matrix_market(path):
    return as_csr(scipy.io.mmread(str(path)))
