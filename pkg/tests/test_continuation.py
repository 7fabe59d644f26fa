import numpy as np
import pytest

from equicont import (GramPair, ProblemInstance, StepPolicy, continue_branch,
                      trivial_group)
from equicont.cmc import cmc_graph_problem, graph_to_curve, mean_curvature
from equicont.errors import (DegenerateOrbitError, InitialPointError,
                             StepUnderflowError)
from equicont.harmonic import harmonic_sphere_problem


def test_single_sample_when_target_equals_start():
    prob = cmc_graph_problem("plane", n=32)
    x0 = prob.metadata["x0"]
    br = continue_branch(prob, x0, 1.0, 1.0)
    assert br.status == "completed"
    assert len(br) == 1
    assert br.samples[0].lam == 1.0
    assert np.max(np.abs(br.samples[0].state - x0)) < 1e-10


def test_circle_branch_hits_radius_law():
    prob = cmc_graph_problem("plane", n=64)
    x0 = prob.metadata["x0"]
    br = continue_branch(prob, x0, 1.0, 1.25, StepPolicy(num_steps=5))
    assert br.status == "completed"
    amb = prob.metadata["ambient"]
    graph = prob.metadata["as_graph"](br.samples[-1].state)
    y = graph_to_curve(amb, graph)
    assert np.max(np.abs(np.linalg.norm(y, axis=1) - 0.8)) < 1e-8
    assert all(s.max_multiplier <= 1e-8 for s in br.samples)
    # lambdas strictly monotone
    lams = br.lambdas
    assert np.all(np.diff(lams) > 0)


def test_branch_samples_satisfy_bordered_residual():
    prob = cmc_graph_problem("plane", n=64)
    x0 = prob.metadata["x0"]
    br = continue_branch(prob, x0, 1.0, 1.5, StepPolicy(num_steps=5))
    Y = br.slice_basis.Y_basis
    for s in br.samples:
        res = prob.delta_f(s.state, s.lam) + Y @ s.multipliers
        assert np.max(np.abs(res)) <= 1e-10


def test_obstructed_branch_flat_torus():
    prob = cmc_graph_problem("flat_torus", n=64)
    x0 = prob.metadata["x0"]
    br = continue_branch(prob, x0, 0.0, 0.5, StepPolicy(num_steps=10))
    assert br.status == "obstructed"
    # stopped at the first accepted step with multiplier = lambda
    assert len(br) == 2
    assert br.samples[-1].max_multiplier == pytest.approx(br.samples[-1].lam, abs=1e-12)
    assert "volume" in br.message


def test_initial_point_not_critical():
    prob = cmc_graph_problem("plane", n=32)
    x0 = prob.metadata["x0"] + 0.05
    with pytest.raises(InitialPointError):
        continue_branch(prob, x0, 1.0, 2.0)


def test_degenerate_center_refuses():
    prob = harmonic_sphere_problem(n=12)
    x0 = prob.metadata["x0"]
    with pytest.raises(DegenerateOrbitError):
        continue_branch(prob, x0, 0.0, 1.0)


def test_step_underflow_at_fold():
    # delta_f = x^2 + lam: critical nondegenerate at (1, -1), no roots past 0
    prob = ProblemInstance(n=1, f=lambda x, lam: x[0]**3 / 3 + lam * x[0],
                           delta_f=lambda x, lam: x * x + lam,
                           gram=GramPair(np.eye(1)), group=trivial_group(1))
    with pytest.raises(StepUnderflowError):
        continue_branch(prob, np.ones(1), -1.0, 1.0,
                        StepPolicy(num_steps=4, min_step=1e-4))


def test_decreasing_parameter_direction():
    prob = cmc_graph_problem("plane", n=64)
    x0 = prob.metadata["x0"]
    br = continue_branch(prob, x0, 1.0, 0.8, StepPolicy(num_steps=4))
    assert br.status == "completed"
    assert np.all(np.diff(br.lambdas) < 0)
    amb = prob.metadata["ambient"]
    graph = prob.metadata["as_graph"](br.samples[-1].state)
    assert np.max(np.abs(mean_curvature(amb, graph) - 0.8)) < 1e-8
