"""Predictor-corrector continuation of critical branches in an external parameter.

The predictor is the tangent of the bordered system; the corrector is the
damped bordered Newton solve on the slice through the starting center.  Each
accepted sample records the multipliers, the kernel dimension, and the
parameter sensitivity; the branch stops with status ``obstructed`` when the
multipliers persistently exceed their tolerance (no invariant volume
functional) and ``degenerate_encounter`` when the kernel grows away from the
orbit rank mid-branch.
"""

from dataclasses import dataclass, field

import numpy as np

from .bordered import DEFAULT_NEWTON_TOL, solve_bordered
from .errors import (InitialPointError, NewtonConvergenceError,
                     SingularBorderedError, StepUnderflowError)
from .linearize import (DEFAULT_ANGLE_TOL, DEFAULT_SVD_TOL,
                        jacobian_of_delta_f, kernel_basis,
                        nondegeneracy_check)
from .slices import build_slice

STATUS_COMPLETED = "completed"
STATUS_OBSTRUCTED = "obstructed"
STATUS_DEGENERATE = "degenerate_encounter"


@dataclass
class StepPolicy:
    """Continuation step-size and diagnostic policy."""

    num_steps: int = 20
    min_step: float = 1e-6
    shrink: float = 0.5
    multiplier_tol: float = 1e-8
    obstruction_patience: int = 1
    newton_tol: float = DEFAULT_NEWTON_TOL
    max_iter: int = 50
    svd_tol: float = DEFAULT_SVD_TOL
    angle_tol: float = DEFAULT_ANGLE_TOL
    initial_residual_tol: float = 1e-8
    check_kernel: bool = True


@dataclass
class BranchSample:
    lam: float
    state: np.ndarray
    multipliers: np.ndarray
    residual: float
    kernel_dim: int
    sensitivity: float

    @property
    def max_multiplier(self):
        return float(np.max(np.abs(self.multipliers))) if self.multipliers.size else 0.0


@dataclass
class Branch:
    """Discrete branch lam -> state with per-sample diagnostics."""

    samples: list = field(default_factory=list)
    status: str = STATUS_COMPLETED
    message: str = ""
    slice_basis: object = None

    @property
    def lambdas(self):
        return np.array([s.lam for s in self.samples])

    @property
    def states(self):
        return np.array([s.state for s in self.samples])

    def __len__(self):
        return len(self.samples)


def _d_lambda_delta_f(problem, x, lam):
    eps = 1e-6 * (1.0 + abs(lam))
    return (problem.delta_f(x, lam + eps) - problem.delta_f(x, lam - eps)) / (2 * eps)


def _tangent(problem, slice_basis, x, lam):
    """Solve the bordered tangent system for (ds/dlam, da/dlam)."""
    S, Y = slice_basis.S_basis, slice_basis.Y_basis
    J = jacobian_of_delta_f(problem, x, lam)
    bordered = np.hstack([J @ S, Y]) if Y.shape[1] else J @ S
    rhs = -_d_lambda_delta_f(problem, x, lam)
    try:
        sol = np.linalg.solve(bordered, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(bordered, rhs, rcond=None)[0]
    ds = sol[: S.shape[1]]
    return ds, J


def _kernel_dim_at(problem, x, lam, policy, J=None):
    if J is None:
        J = jacobian_of_delta_f(problem, x, lam)
    info = kernel_basis(J, problem.gram, svd_tol=policy.svd_tol)
    report = nondegeneracy_check(info.basis, problem.group.orbit_tangent(x),
                                 problem.gram, angle_tol=policy.angle_tol,
                                 singular_values=info.singular_values,
                                 ambiguous=info.ambiguous, gap=info.gap)
    return info.basis.shape[1], report


def continue_branch(problem, x0, lam0, lam_target, step_policy=None,
                    slice_basis=None):
    """March the critical branch from ``lam0`` to ``lam_target``.

    Returns a :class:`Branch`.  Raises :class:`InitialPointError` when
    ``(x0, lam0)`` is not critical, propagates the degenerate-orbit error
    from slice construction when the center fails certification, and raises
    :class:`StepUnderflowError` when corrector failures push the step below
    ``min_step``.
    """
    policy = step_policy or StepPolicy()
    x0 = np.asarray(x0, dtype=float)
    res0 = problem.residual_norm(x0, lam0)
    if res0 > policy.initial_residual_tol:
        raise InitialPointError(
            f"initial state is not critical: |delta_f|_inf = {res0:.3g} "
            f"> {policy.initial_residual_tol:.3g}")
    if slice_basis is None:
        slice_basis = build_slice(problem, x0, lam0, svd_tol=policy.svd_tol,
                                  angle_tol=policy.angle_tol)
    branch = Branch(slice_basis=slice_basis)

    sol = solve_bordered(problem, slice_basis, lam0, x_guess=x0,
                         newton_tol=policy.newton_tol, max_iter=policy.max_iter)
    ds, J = _tangent(problem, slice_basis, sol.x, lam0)
    kdim, _ = _kernel_dim_at(problem, sol.x, lam0, policy, J=J)
    branch.samples.append(BranchSample(
        lam=float(lam0), state=sol.x, multipliers=sol.multipliers,
        residual=sol.residual, kernel_dim=kdim,
        sensitivity=float(np.linalg.norm(ds))))

    span = lam_target - lam0
    if span == 0.0:
        return branch

    direction = np.sign(span)
    step = abs(span) / policy.num_steps
    lam = float(lam0)
    x = sol.x
    violations = 0

    while direction * (lam_target - lam) > 1e-14 * max(1.0, abs(lam_target)):
        dlam = direction * min(step, abs(lam_target - lam))
        ds, _ = _tangent(problem, slice_basis, x, lam)
        accepted = None
        while accepted is None:
            x_pred = x + slice_basis.S_basis @ (ds * dlam)
            try:
                accepted = solve_bordered(problem, slice_basis, lam + dlam,
                                          x_guess=x_pred,
                                          newton_tol=policy.newton_tol,
                                          max_iter=policy.max_iter)
            except (NewtonConvergenceError, SingularBorderedError):
                dlam *= policy.shrink
                if abs(dlam) < policy.min_step:
                    raise StepUnderflowError(
                        f"corrector kept failing; step fell below "
                        f"{policy.min_step:.3g} near lam={lam:.6g}")
        lam = lam + dlam
        x = accepted.x
        ds_next, J = _tangent(problem, slice_basis, x, lam)
        kdim, report = _kernel_dim_at(problem, x, lam, policy, J=J)
        sample = BranchSample(lam=float(lam), state=x,
                              multipliers=accepted.multipliers,
                              residual=accepted.residual, kernel_dim=kdim,
                              sensitivity=float(np.linalg.norm(ds_next)))
        branch.samples.append(sample)
        if policy.check_kernel and not report.nondegenerate:
            branch.status = STATUS_DEGENERATE
            branch.message = (
                f"kernel/orbit mismatch at lam={lam:.6g}: kernel dim "
                f"{report.kernel_dim}, orbit rank {report.orbit_rank}")
            return branch
        if sample.max_multiplier > policy.multiplier_tol:
            violations += 1
            if violations >= policy.obstruction_patience:
                branch.status = STATUS_OBSTRUCTED
                branch.message = (
                    f"multipliers stay above {policy.multiplier_tol:.3g} "
                    f"(max |a| = {sample.max_multiplier:.3g} at lam={lam:.6g}); "
                    f"no invariant volume functional drives them to zero")
                return branch
        else:
            violations = 0

    branch.status = STATUS_COMPLETED
    return branch
