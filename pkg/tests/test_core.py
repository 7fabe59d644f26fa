"""Kernel extraction, nondegeneracy certification, slices, bordered solves."""

import numpy as np
import pytest

from equicont import (GramPair, GroupModel, ProblemInstance, build_slice,
                      derivative_matrices, kernel_basis, make_grid,
                      nondegeneracy_check, solve_bordered, trivial_group)
from equicont.errors import (DegenerateOrbitError, NewtonConvergenceError,
                             SingularBorderedError)
from equicont.linearize import assemble_linearization, principal_angle

from oracles import curvature_operator_kernel


def _grid_ops(n=64):
    g = make_grid(n)
    return g, derivative_matrices(g)


def test_kernel_basis_second_derivative():
    g, ops = _grid_ops(64)
    gram = GramPair.from_weights(g.weights)
    info = kernel_basis(-ops.D2, gram)
    assert info.basis.shape[1] == 1
    # constants, M-orthonormal
    col = info.basis[:, 0]
    assert np.max(np.abs(col - col[0])) < 1e-10
    assert abs(gram.inner(col, col) - 1.0) < 1e-12


def test_kernel_basis_shifted_operator():
    g, ops = _grid_ops(64)
    gram = GramPair.from_weights(g.weights)
    info = kernel_basis(-ops.D2 - np.eye(64), gram)
    assert info.basis.shape[1] == 2
    dim, oracle = curvature_operator_kernel(64, 1.0)
    assert dim == 2
    assert principal_angle(info.basis, oracle, gram) < 1e-8


def test_kernel_basis_invertible():
    g, ops = _grid_ops(32)
    gram = GramPair.from_weights(g.weights)
    info = kernel_basis(-ops.D2 + 0.5 * np.eye(32), gram)
    assert info.basis.shape[1] == 0
    assert not info.ambiguous


def test_kernel_basis_flags_ambiguous_spectrum():
    gram = GramPair(np.eye(3))
    L = np.diag([1.0, 5e-8, 1e-9])
    info = kernel_basis(L, gram, svd_tol=1e-8)
    assert info.basis.shape[1] == 1
    assert info.ambiguous
    assert info.gap < 100


def test_nondegeneracy_trivial_group():
    gram = GramPair(np.eye(5))
    report = nondegeneracy_check(np.zeros((5, 0)), np.zeros((5, 0)), gram)
    assert report.verdict == "nondegenerate"
    assert report.kernel_dim == 0 and report.orbit_rank == 0


def test_nondegeneracy_dimension_mismatch():
    gram = GramPair(np.eye(4))
    kernel = np.eye(4)[:, :2]
    orbit = np.eye(4)[:, :1]
    report = nondegeneracy_check(kernel, orbit, gram)
    assert report.verdict == "degenerate"


def test_nondegeneracy_rank_deficient_orbit():
    gram = GramPair(np.eye(4))
    kernel = np.eye(4)[:, :1]
    orbit = np.column_stack([np.eye(4)[:, 0], np.zeros(4)])
    report = nondegeneracy_check(kernel, orbit, gram)
    assert report.verdict == "nondegenerate"
    assert report.rank_deficient
    assert report.orbit_rank == 1 and report.group_dim == 2


def _linear_problem(A, gram=None, group=None):
    n = A.shape[0]
    gram = gram or GramPair(np.eye(n))
    group = group or trivial_group(n)
    return ProblemInstance(
        n=n, f=lambda x, lam: 0.5 * x @ A @ x,
        delta_f=lambda x, lam: A @ x, gram=gram, group=group)


def test_assemble_linearization_linear_map_exact():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((6, 6))
    A = A + A.T + 6 * np.eye(6)
    prob = _linear_problem(A)
    L = assemble_linearization(prob, np.zeros(6), 0.0)
    assert np.max(np.abs(L - A)) < 1e-8


def test_assemble_linearization_warns_off_critical():
    A = np.eye(4)
    prob = _linear_problem(A)
    with pytest.warns(UserWarning, match="non-critical"):
        assemble_linearization(prob, np.ones(4), 0.0)


def test_build_slice_trivial_group():
    A = np.diag([1.0, 2.0, 3.0])
    prob = _linear_problem(A)
    sl = build_slice(prob, np.zeros(3), 0.0)
    assert sl.S_basis.shape == (3, 3)
    assert sl.Y_basis.shape == (3, 0)
    assert sl.condition < 1e8


def _translation_problem(n=2):
    """Toy problem on R^2 with the full translation group: everything is
    critical along orbits of the (degenerate-by-design) zero functional in
    the orbit directions; used to exercise d=2 machinery."""
    A = np.eye(2)
    gram = GramPair(np.eye(2))
    group = GroupModel(
        d=2, orbit_tangent=lambda x: np.eye(2),
        local_action=lambda g, x: x + g, domain_radius=np.inf, abelian=True)
    return ProblemInstance(n=2, f=lambda x, lam: 0.0,
                           delta_f=lambda x, lam: np.zeros(2),
                           linearization=lambda x, lam: np.zeros((2, 2)),
                           gram=gram, group=group)


def test_build_slice_full_orbit():
    prob = _translation_problem()
    sl = build_slice(prob, np.zeros(2), 0.0)
    assert sl.S_basis.shape == (2, 0)
    assert sl.Y_basis.shape == (2, 2)


def test_build_slice_degenerate_raises():
    # kernel dim 2 vs orbit rank 1
    gram = GramPair(np.eye(3))
    group = GroupModel(d=1, orbit_tangent=lambda x: np.eye(3)[:, :1],
                       local_action=lambda g, x: x, domain_radius=np.inf)
    prob = ProblemInstance(n=3, f=lambda x, lam: 0.0,
                           delta_f=lambda x, lam: np.array([0.0, 0.0, x[2]]),
                           gram=gram, group=group)
    with pytest.raises(DegenerateOrbitError) as exc:
        build_slice(prob, np.zeros(3), 0.0)
    assert exc.value.report.kernel_dim == 2


def test_solve_bordered_linear():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((5, 5))
    A = A @ A.T + np.eye(5)
    b = rng.standard_normal(5)
    prob = ProblemInstance(n=5, f=lambda x, lam: 0.5 * x @ A @ x - lam * b @ x,
                           delta_f=lambda x, lam: A @ x - lam * b,
                           gram=GramPair(np.eye(5)), group=trivial_group(5))
    sl = build_slice(prob, np.zeros(5), 0.0)
    sol = solve_bordered(prob, sl, 1.0)
    assert np.max(np.abs(A @ sol.x - b)) < 1e-10
    assert sol.multipliers.size == 0


def test_solve_bordered_projects_off_slice_guess():
    prob = _linear_problem(np.eye(3) * 2.0)
    gram = prob.gram
    group = GroupModel(d=1, orbit_tangent=lambda x: np.array([[1.0], [0.0], [0.0]]),
                       local_action=lambda g, x: x + np.array([g[0], 0, 0]),
                       domain_radius=np.inf, abelian=True)
    prob2 = ProblemInstance(n=3, f=lambda x, lam: x[1]**2 + x[2]**2,
                            delta_f=lambda x, lam: 2 * np.array([0, x[1], x[2]]),
                            gram=gram, group=group)
    sl = build_slice(prob2, np.zeros(3), 0.0)
    with pytest.warns(UserWarning, match="projected"):
        sol = solve_bordered(prob2, sl, 0.0, x_guess=np.array([0.5, 0.1, 0.0]))
    assert sol.residual <= 1e-10


def test_solve_bordered_no_convergence():
    # critical and invertible at lam=-1 (x0=1); no root at all for lam=+1
    prob = ProblemInstance(n=1, f=lambda x, lam: x[0]**3 / 3 + lam * x[0],
                           delta_f=lambda x, lam: x * x + lam,
                           gram=GramPair(np.eye(1)), group=trivial_group(1))
    sl = build_slice(prob, np.ones(1), -1.0)
    with pytest.raises(NewtonConvergenceError):
        solve_bordered(prob, sl, 1.0, max_iter=12)


def test_solve_bordered_singular_matrix():
    prob = ProblemInstance(n=2, f=lambda x, lam: 0.0,
                           delta_f=lambda x, lam: np.array([1.0, 0.0]),
                           linearization=lambda x, lam: np.zeros((2, 2)),
                           gram=GramPair(np.eye(2)), group=trivial_group(2))
    sl = build_slice.__wrapped__ if hasattr(build_slice, "__wrapped__") else None
    # hand-build the slice to bypass the (rightly) failing certification
    from equicont.slices import SliceBasis
    sl = SliceBasis(x0=np.zeros(2), lam0=0.0, S_basis=np.eye(2),
                    orbit_basis=np.zeros((2, 0)), Y_basis=np.zeros((2, 0)),
                    condition=1.0, report=None, kernel=np.zeros((2, 0)))
    sl.gram_M = np.eye(2)
    with pytest.raises(SingularBorderedError):
        solve_bordered(prob, sl, 0.0)
