import numpy as np
import pytest

from equicont import (GramPair, GroupModel, ProblemInstance, build_slice,
                      slice_project, winding_degree)
from equicont.cmc import cmc_graph_problem
from equicont.errors import (ContourResidualError, OutOfActionDomainError,
                             UnsupportedDimensionError)
from equicont.geodesics import (closed_geodesic_problem,
                                straight_loop_graph_problem)
from equicont.projection import equivariance_residual


def test_project_identity_on_slice():
    prob = closed_geodesic_problem("channel_torus", n=32)
    x0 = prob.metadata["x0"]
    sl = build_slice(prob, x0, 0.5)
    g, xs = slice_project(prob, x0, sl)
    assert abs(g[0]) < 1e-10
    assert np.max(np.abs(xs - x0)) < 1e-10


def test_project_inverts_rotation_shift():
    prob = closed_geodesic_problem("channel_torus", n=64)
    x0 = prob.metadata["x0"]
    sl = build_slice(prob, x0, 0.5)
    moved = prob.group.act(np.array([0.3]), x0)
    g, xs = slice_project(prob, moved, sl)
    assert abs(g[0] + 0.3) < 1e-8
    assert np.max(np.abs(xs - x0)) < 1e-8


def test_project_inverts_plane_translation():
    prob = cmc_graph_problem("plane", n=64)
    x0 = prob.metadata["x0"]
    sl = build_slice(prob, x0, 1.0)
    t = np.array([0.15, -0.2, 0.0])
    moved = prob.group.act(t, x0)
    g, xs = slice_project(prob, moved, sl)
    assert np.max(np.abs(g[:2] + t[:2])) < 1e-6
    assert abs(g[2]) < 1e-6
    resid = sl.orbit_basis.T @ (prob.gram.M_X @ (xs - x0))
    assert np.max(np.abs(resid)) < 1e-8


def test_project_general_plane_isometry_residual():
    prob = cmc_graph_problem("plane", n=64)
    x0 = prob.metadata["x0"]
    sl = build_slice(prob, x0, 1.0)
    moved = prob.group.act(np.array([0.1, 0.12, 0.25]), x0)
    g, xs = slice_project(prob, moved, sl)
    resid = sl.orbit_basis.T @ (prob.gram.M_X @ (xs - x0))
    assert np.max(np.abs(resid)) < 1e-8


def test_action_domain_enforced():
    prob = cmc_graph_problem("plane", n=32)
    with pytest.raises(OutOfActionDomainError):
        prob.group.act(np.array([1.0, 1.0, 1.0]), prob.metadata["x0"])


def test_winding_degree_one_dimensional():
    prob = closed_geodesic_problem("channel_torus", n=32)
    x0 = prob.metadata["x0"]
    sl = build_slice(prob, x0, 0.5)
    assert abs(winding_degree(prob, x0, sl, radius=0.5)) == 1
    # shifted state still has a zero inside a wide enough contour
    moved = prob.group.act(np.array([0.2]), x0)
    assert abs(winding_degree(prob, moved, sl, radius=0.5)) == 1


def test_winding_degree_no_zero():
    prob = straight_loop_graph_problem("lorentz_flat", n=32)
    x0 = prob.metadata["x0"]
    sl = build_slice(prob, x0, 0.0)
    far = x0 + 0.9  # transverse offset outside the contour
    assert winding_degree(prob, far, sl, radius=0.5) == 0


def test_winding_degree_vanishing_contour_flags():
    prob = straight_loop_graph_problem("lorentz_flat", n=32)
    x0 = prob.metadata["x0"]
    sl = build_slice(prob, x0, 0.0)
    with pytest.raises(ContourResidualError):
        winding_degree(prob, x0 + 0.5, sl, radius=0.5)


def _planar_translation_problem():
    group = GroupModel(d=2, orbit_tangent=lambda x: np.eye(2),
                       local_action=lambda g, x: x + g,
                       domain_radius=np.inf, abelian=True)
    return ProblemInstance(n=2, f=lambda x, lam: 0.0,
                           delta_f=lambda x, lam: np.zeros(2),
                           linearization=lambda x, lam: np.zeros((2, 2)),
                           gram=GramPair(np.eye(2)), group=group)


def test_winding_degree_two_dimensional():
    prob = _planar_translation_problem()
    sl = build_slice(prob, np.zeros(2), 0.0)
    x = np.array([0.05, -0.08])
    assert abs(winding_degree(prob, x, sl, radius=0.4)) == 1
    far = np.array([2.0, 0.0])
    assert winding_degree(prob, far, sl, radius=0.4) == 0


def test_winding_degree_rejects_large_groups():
    prob = cmc_graph_problem("plane", n=32)
    sl = build_slice(prob, prob.metadata["x0"], 1.0)
    with pytest.raises(UnsupportedDimensionError):
        winding_degree(prob, prob.metadata["x0"], sl, radius=0.2)


def test_equivariance_residual_scheme_order_decay():
    # fourth-order scheme: halving h cuts the residual by ~16 at a fixed
    # smooth non-critical graph (the action is not grid-aligned)
    vals = []
    for n in (32, 64):
        prob = cmc_graph_problem("plane", n=n, scheme="fd4")
        th = prob.metadata["grid"].nodes
        state = 0.1 * np.sin(th) + 0.07 * np.cos(2 * th) + 0.05 * np.sin(3 * th)
        vals.append(equivariance_residual(prob, state, 1.3))
    assert vals[0] / vals[1] > 8


def test_equivariance_residual_small_at_critical():
    prob = closed_geodesic_problem("channel_torus", n=32)
    x0 = prob.metadata["x0"]
    assert equivariance_residual(prob, x0, 0.5) < 1e-12
