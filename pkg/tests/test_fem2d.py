from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
import scipy.sparse as sp

from app.errors import ConfigError, MeshError
from app.numerics import fem2d

CUBIC_MASS = np.array([[128.0, 99.0, -36.0, 19.0],
                       [99.0, 648.0, -81.0, -36.0],
                       [-36.0, -81.0, 648.0, 99.0],
                       [19.0, -36.0, 99.0, 128.0]]) / 1680.0


def cubic_lagrange_mass_1d(lines):
    n = 3 * (lines.size - 1) + 1
    M = np.zeros((n, n))
    for k, h in enumerate(np.diff(lines)):
        M[3 * k:3 * k + 4, 3 * k:3 * k + 4] += h * CUBIC_MASS
    return M


def zero(X, Y):
    return 0.0 * X


def test_mass_integrates_constants(small_forms_2d, graded_forms_2d):
    for forms in (small_forms_2d, graded_forms_2d):
        ones = np.ones(forms.omega_space.n_dofs)
        assert ones @ (forms.M @ ones) == pytest.approx(forms.mesh.area, rel=1e-13)


def test_omega_mass_is_tensor_product(small_forms_2d):
    mesh = small_forms_2d.mesh
    expected = np.kron(cubic_lagrange_mass_1d(mesh.ys), cubic_lagrange_mass_1d(mesh.xs))
    np.testing.assert_allclose(small_forms_2d.M.toarray(), expected, atol=1e-15)


def test_stiffness_annihilates_constants(graded_forms_2d):
    space = graded_forms_2d.psi_space
    ones = space.interpolate(lambda X, Y: 1.0 + 0.0 * X, zero, zero, zero)
    np.testing.assert_allclose(graded_forms_2d.K @ ones, 0.0, atol=1e-12)
    R2_ones = graded_forms_2d.R2 @ np.ones(graded_forms_2d.omega_space.n_dofs)
    np.testing.assert_allclose(R2_ones, 0.0, atol=1e-11)


def test_static_matrices_are_symmetric(graded_forms_2d):
    for name in ('M', 'K', 'R1', 'R2', 'M_bd'):
        A = getattr(graded_forms_2d, name)
        assert abs(A - A.T).max() <= 1e-12 * abs(A).max(), name


def test_trace_mass_measures_perimeter(graded_forms_2d):
    trace = graded_forms_2d.trace_space
    ones = np.ones(trace.n_dofs)
    assert trace.n_dofs == 2 * (graded_forms_2d.mesh.nx + graded_forms_2d.mesh.ny)
    assert ones @ (graded_forms_2d.M_bd @ ones) == pytest.approx(graded_forms_2d.mesh.perimeter, rel=1e-13)


def test_boundary_traces_of_constants(small_forms_2d):
    forms = small_forms_2d
    trace_ones = forms.M_bd @ np.ones(forms.trace_space.n_dofs)
    psi_one = forms.psi_space.interpolate(lambda X, Y: 1.0 + 0.0 * X, zero, zero, zero)
    np.testing.assert_allclose(forms.B1.T @ psi_one, trace_ones, atol=1e-14)
    np.testing.assert_allclose(forms.B5.T @ np.ones(forms.omega_space.n_dofs), trace_ones, atol=1e-14)
    np.testing.assert_allclose(forms.B3.T @ psi_one, 0.0, atol=1e-13)


def test_normal_derivative_trace_of_linear_field(small_forms_2d):
    # ψ = x has ∂nψ = 1 on the right wall, -1 on the left and 0 elsewhere
    forms = small_forms_2d
    psi = forms.psi_space.interpolate(lambda X, Y: X, lambda X, Y: 1.0 + 0.0 * X, zero, zero)
    flux = forms.B3.T @ psi
    X, _ = forms.trace_space.coordinates()
    assert flux.sum() == pytest.approx(0.0, abs=1e-13)
    assert flux[X == 1.0].sum() == pytest.approx(1.0, rel=1e-13)


def test_modulated_boundary_matrices_reduce_to_plain_ones(graded_forms_2d):
    forms = graded_forms_2d
    omega_one = np.ones(forms.omega_space.n_dofs)
    psi_one = forms.psi_space.interpolate(lambda X, Y: 1.0 + 0.0 * X, zero, zero, zero)
    B2, B4 = fem2d.assemble_B2_B4(forms, omega_one, psi_one)
    assert abs(B2 - forms.B1).max() < 1e-14
    assert abs(B4 - forms.B5).max() < 1e-14


def test_convection_matrices_are_skew_before_symmetrization(graded_forms_2d, rng):
    forms = graded_forms_2d
    omega = rng.standard_normal(forms.omega_space.n_dofs)
    psi = rng.standard_normal(forms.psi_space.n_dofs)
    D1 = fem2d.assemble_D1_raw(forms.psi_space, forms.omega_space, omega)
    D2 = fem2d.assemble_D2_raw(forms.psi_space, forms.omega_space, psi)
    assert abs(D1 + D1.T).max() <= 1e-13 * abs(D1).max()
    assert abs(D2 + D2.T).max() <= 1e-13 * abs(D2).max()
    skew = fem2d.assemble_D2(forms.psi_space, forms.omega_space, psi)
    assert abs(skew + skew.T).max() == 0.0


def test_convection_assembly_is_independent_across_meshes_and_threads(small_forms_2d, graded_forms_2d, rng):
    cases = []
    for forms in (small_forms_2d, graded_forms_2d):
        cases.append((forms, rng.standard_normal(forms.omega_space.n_dofs)))
    serial = [fem2d.assemble_D1(f.psi_space, f.omega_space, omega) for f, omega in cases]
    with ThreadPoolExecutor(max_workers=4) as pool:
        futures = [pool.submit(fem2d.assemble_D1, f.psi_space, f.omega_space, omega)
                   for _ in range(8) for f, omega in cases]
        interleaved = [future.result() for future in futures]
    for k, D1 in enumerate(interleaved):
        assert abs(D1 - serial[k % 2]).max() == 0.0


def test_convection_vanishes_for_zero_vorticity(small_forms_2d):
    forms = small_forms_2d
    D1 = fem2d.assemble_D1(forms.psi_space, forms.omega_space, np.zeros(forms.omega_space.n_dofs))
    assert abs(D1).max() == 0.0


def test_hermite_space_reproduces_bicubics(small_forms_2d, rng):
    space = small_forms_2d.psi_space
    coefficients = space.interpolate(lambda X, Y: X ** 3 * Y ** 2 - X * Y + 2.0,
                                     lambda X, Y: 3 * X ** 2 * Y ** 2 - Y,
                                     lambda X, Y: 2 * X ** 3 * Y - X,
                                     lambda X, Y: 6 * X ** 2 * Y - 1.0)
    x, y = rng.uniform(0.0, 1.0, 20), rng.uniform(0.0, 1.0, 20)
    np.testing.assert_allclose(space.evaluate(coefficients, x, y), x ** 3 * y ** 2 - x * y + 2.0, atol=1e-12)
    np.testing.assert_allclose(space.evaluate(coefficients, x, y, order_x=1), 3 * x ** 2 * y ** 2 - y, atol=1e-11)


def test_lagrange_space_reproduces_bicubics(graded_forms_2d, rng):
    space = graded_forms_2d.omega_space
    f = lambda X, Y: X ** 3 - 2 * X * Y ** 3 + Y
    coefficients = space.interpolate(f)
    x, y = rng.uniform(-1.0, 1.0, 20), rng.uniform(-1.0, 1.0, 20)
    np.testing.assert_allclose(space.evaluate(coefficients, x, y), f(x, y), atol=1e-12)
    assert space.vertex_values(coefficients).shape == (7, 7)


def test_poisson_solution_converges():
    exact = lambda X, Y: np.sin(np.pi * X) * np.sin(np.pi * Y)
    errors = []
    for n in (4, 8):
        forms = fem2d.assemble_static(fem2d.build_mesh(((0.0, 0.0), (1.0, 1.0)), n, n))
        omega = forms.omega_space.interpolate(lambda X, Y: 2 * np.pi ** 2 * exact(X, Y))
        psi = fem2d.solve_poisson_dirichlet(forms, omega)
        errors.append(fem2d.psi_l2_error(forms.psi_space, psi, exact))
    assert errors[0] < 1e-2
    assert errors[1] < errors[0] / 8.0


def test_poisson_with_zero_source_is_zero(small_forms_2d):
    psi = fem2d.solve_poisson_dirichlet(small_forms_2d, np.zeros(small_forms_2d.omega_space.n_dofs))
    assert not np.any(psi)


def test_energy_and_enstrophy_of_constants(small_forms_2d):
    omega = np.full(small_forms_2d.omega_space.n_dofs, 2.0)
    assert fem2d.enstrophy(small_forms_2d, omega, rho0=3.0) == pytest.approx(0.5 * 3.0 * 4.0)
    psi = small_forms_2d.psi_space.interpolate(lambda X, Y: 5.0 + 0.0 * X, zero, zero, zero)
    assert fem2d.kinetic_energy(small_forms_2d, psi) == pytest.approx(0.0, abs=1e-12)


def test_mesh_validation():
    with pytest.raises(ConfigError):
        fem2d.build_mesh(((0.0, 0.0), (1.0, 1.0)), 1, 4)
    with pytest.raises(ConfigError):
        fem2d.build_mesh(((0.0, 0.0), (1.0, 1.0)), 4, 4, grading=0.5)
    with pytest.raises(MeshError):
        fem2d.build_mesh(((0.0, 0.0), (100.0, 1.0)), 2, 2)


def test_graded_mesh_refines_walls(graded_forms_2d):
    hx = graded_forms_2d.mesh.hx
    assert hx[0] < hx[hx.size // 2]
    np.testing.assert_allclose(hx, hx[::-1], rtol=1e-12)


def test_trace_loop_runs_counterclockwise(small_forms_2d):
    X, Y = small_forms_2d.trace_space.coordinates()
    assert (X[0], Y[0]) == (0.0, 0.0)
    assert (X[4], Y[4]) == (1.0, 0.0)
    assert (X[8], Y[8]) == (1.0, 1.0)
    s = small_forms_2d.trace_space.arc_length()
    assert s[-1] == pytest.approx(3.75)
    assert sp.issparse(small_forms_2d.B1)
