import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from app.errors import (AsymmetricMatrixError, DimensionError, InvalidFactorizationError,
                        NonFiniteError, SingularMatrixError)
from app.numerics import sparse_core
from app.numerics.sparse_core import (Factorization, assemble, condition_number_estimate, factorize,
                                      generalized_eigs_smallest, read_matrix_market, solve,
                                      spectral_bounds, spmv, symmetry_defect, write_matrix_market)


def laplacian(n):
    return sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format='csr')


def test_assemble_sums_duplicates():
    A = assemble([0, 0, 1], [0, 0, 1], [1.0, 2.0, 5.0], (2, 2))
    np.testing.assert_array_equal(A.toarray(), [[3.0, 0.0], [0.0, 5.0]])
    assert A.has_sorted_indices


def test_assemble_rejects_ragged_triplets():
    with pytest.raises(DimensionError):
        assemble([0, 1], [0], [1.0, 2.0], (2, 2))


def test_spmv_checks_shapes_and_finiteness():
    A = laplacian(3)
    with pytest.raises(DimensionError):
        spmv(A, np.ones(4))
    with pytest.raises(NonFiniteError):
        spmv(A, np.array([1.0, np.nan, 0.0]))


def test_spmv_matches_dense_product(rng):
    A = sp.random(60, 40, density=0.2, random_state=7, format='csr')
    x = rng.standard_normal(40)
    np.testing.assert_allclose(spmv(A, x), A.toarray() @ x, rtol=0, atol=1e-14)


def test_symmetric_solve_matches_dense(rng):
    A = laplacian(50) + sp.identity(50)
    b = rng.standard_normal(50)
    x = solve(factorize(A, symmetric=True), b)
    np.testing.assert_allclose(x, np.linalg.solve(A.toarray(), b), rtol=1e-12)


def test_saddle_point_system_factorizes():
    A = sp.bmat([[sp.identity(2), sp.csr_matrix([[1.0], [1.0]])],
                 [sp.csr_matrix([[1.0, 1.0]]), None]], format='csr')
    x = factorize(A).solve(np.array([1.0, 3.0, 0.0]))
    np.testing.assert_allclose(x, [-1.0, 1.0, 2.0], atol=1e-14)


def test_asymmetric_matrix_rejected_when_declared_symmetric():
    with pytest.raises(AsymmetricMatrixError):
        factorize(sp.csr_matrix([[1.0, 2.0], [0.0, 1.0]]), symmetric=True)


def test_singular_matrix_reports_pivot():
    with pytest.raises(SingularMatrixError) as info:
        factorize(sp.csr_matrix([[1.0, 1.0], [1.0, 1.0]]))
    assert info.value.pivot is not None or 'factorization failed' in str(info.value)


def test_zero_matrix_is_singular():
    with pytest.raises(SingularMatrixError):
        factorize(sp.csr_matrix((3, 3)))


def test_solve_before_factorization_is_invalid():
    handle = Factorization(laplacian(3))
    with pytest.raises(InvalidFactorizationError):
        handle.solve(np.ones(3))
    with pytest.raises(InvalidFactorizationError):
        solve('not a handle', np.ones(3))


def test_symmetry_defect():
    defect, scale = symmetry_defect(sp.csr_matrix([[1.0, 2.0], [1.5, 4.0]]))
    assert defect == pytest.approx(0.5)
    assert scale == 4.0


def test_spectral_bounds_of_laplacian():
    n = 40
    lam_min, lam_max = spectral_bounds(laplacian(n), tol=1e-9)
    k = np.arange(1, n + 1)
    exact = 2 - 2 * np.cos(k * np.pi / (n + 1))
    assert lam_min == pytest.approx(exact.min(), rel=1e-6)
    assert lam_max == pytest.approx(exact.max(), rel=1e-3)


def test_condition_number_of_p1_mass_is_small():
    n = 100
    h = 1.0 / (n - 1)
    main = np.full(n, 4 * h / 6)
    main[[0, -1]] = 2 * h / 6
    M = sp.diags([np.full(n - 1, h / 6), main, np.full(n - 1, h / 6)], [-1, 0, 1], format='csr')
    kappa = condition_number_estimate(M)
    dense = np.linalg.cond(M.toarray())
    assert kappa == pytest.approx(dense, rel=1e-2)
    assert 1.0 < kappa < 6.0


@pytest.mark.parametrize('n', [10, 100, 1000])
def test_condition_number_of_diagonal(n):
    A = sp.diags(np.arange(1.0, n + 1), format='csr')
    assert condition_number_estimate(A) == pytest.approx(float(n), rel=1e-2)


def test_generalized_eigs_dense_path():
    n = 30
    A = laplacian(n)
    M = sp.identity(n, format='csr') * 2.0
    pairs = generalized_eigs_smallest(A, M, 3)
    k = np.arange(1, 4)
    np.testing.assert_allclose([lam for lam, _ in pairs], (2 - 2 * np.cos(k * np.pi / (n + 1))) / 2, rtol=1e-10)


def test_generalized_eigs_shift_invert_path():
    n = sparse_core.DENSE_EIG_LIMIT + 100
    A = laplacian(n) * float(n + 1) ** 2
    pairs = generalized_eigs_smallest(A, sp.identity(n, format='csr'), 4)
    k = np.arange(1, 5)
    exact = (n + 1) ** 2 * (2 - 2 * np.cos(k * np.pi / (n + 1)))
    np.testing.assert_allclose([lam for lam, _ in pairs], exact, rtol=1e-8)


def test_generalized_eigs_accepts_ill_conditioned_operator():
    n = 50
    d = np.concatenate([[1.0, 2.0, 3.0], np.logspace(1, 16, n - 3)])
    A = spla.LinearOperator((n, n), matvec=lambda x: d * x, dtype=np.float64)
    inverse = spla.LinearOperator((n, n), matvec=lambda x: x / d, dtype=np.float64)
    pairs = generalized_eigs_smallest(A, sp.identity(n, format='csr'), 3, inverse=inverse)
    np.testing.assert_allclose([lam for lam, _ in pairs], [1.0, 2.0, 3.0], rtol=1e-10)


def test_generalized_eigs_rejects_bad_counts():
    with pytest.raises(DimensionError):
        generalized_eigs_smallest(laplacian(4), sp.identity(4), 0)


def test_matrix_market_round_trip(tmp_path):
    A = laplacian(6) * 1.0 / 3.0
    path = tmp_path / 'A.mtx'
    write_matrix_market(path, A)
    B = read_matrix_market(path)
    assert abs(A - B).max() == 0.0
