"""Damped Newton solve of the multiplier-bordered critical-point system.

Unknowns are slice coordinates s and multipliers a; the square system is

    delta_f(x0 + S s, lam) + Y a = 0.

At a nondegenerate center the bordered Jacobian [J_f S | Y] is invertible, and
the multipliers report the component of the gradient field along the
symmetry directions: they vanish exactly when the problem carries an
invariant volume-type functional, and lock onto the constraint value when it
does not (the obstruction diagnostic).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NewtonConvergenceError, SingularBorderedError
from .linearize import jacobian_of_delta_f

DEFAULT_NEWTON_TOL = 1e-10
DEFAULT_MAX_ITER = 50


@dataclass
class BorderedSolution:
    x: np.ndarray
    multipliers: np.ndarray
    residual: float
    iterations: int
    slice_coords: np.ndarray


def solve_bordered(problem, slice_basis, lam, x_guess=None,
                   newton_tol=DEFAULT_NEWTON_TOL, max_iter=DEFAULT_MAX_ITER):
    """Solve the bordered system on the slice at parameter ``lam``.

    ``x_guess`` defaults to the slice center; a guess off the slice is
    M_X-projected onto it (with a warning).  Residuals are measured in the
    sup norm.  Raises :class:`NewtonConvergenceError` after ``max_iter``
    damped iterations and :class:`SingularBorderedError` when the bordered
    Jacobian cannot be solved.
    """
    S, Y, x0 = slice_basis.S_basis, slice_basis.Y_basis, slice_basis.x0
    m, r = S.shape[1], Y.shape[1]
    M = slice_basis.gram_M
    if x_guess is None:
        s = np.zeros(m)
    else:
        delta = np.asarray(x_guess, dtype=float) - x0
        s = S.T @ (M @ delta)
        off_slice = np.max(np.abs(delta - S @ s))
        if off_slice > 1e-10 * (1.0 + np.linalg.norm(x0)):
            warnings.warn(
                f"initial guess projected onto the slice "
                f"(off-slice component {off_slice:.3g})", stacklevel=2)
    a = np.zeros(r)

    def residual(s, a):
        x = x0 + S @ s
        F = problem.delta_f(x, lam)
        if r:
            F = F + Y @ a
        return x, F

    x, F = residual(s, a)
    fnorm = np.max(np.abs(F))
    for it in range(max_iter):
        if fnorm <= newton_tol:
            return BorderedSolution(x=x, multipliers=a, residual=float(fnorm),
                                    iterations=it, slice_coords=s)
        J = jacobian_of_delta_f(problem, x, lam)
        bordered = np.hstack([J @ S, Y]) if r else J @ S
        try:
            step = np.linalg.solve(bordered, -F)
        except np.linalg.LinAlgError as exc:
            raise SingularBorderedError(
                f"bordered Newton matrix singular at lam={lam:.6g}") from exc
        if not np.all(np.isfinite(step)):
            raise SingularBorderedError(
                f"bordered Newton step not finite at lam={lam:.6g}")
        # Armijo backtracking on the residual norm.
        t = 1.0
        while t >= 2**-20:
            s_new = s + t * step[:m]
            a_new = a + t * step[m:]
            x_new, F_new = residual(s_new, a_new)
            if np.max(np.abs(F_new)) <= (1.0 - 1e-4 * t) * fnorm:
                break
            t *= 0.5
        else:
            raise NewtonConvergenceError(
                f"line search stalled at lam={lam:.6g}", residual=float(fnorm),
                iterations=it)
        s, a, x, F = s_new, a_new, x_new, F_new
        fnorm = np.max(np.abs(F))
    if fnorm <= newton_tol:
        return BorderedSolution(x=x, multipliers=a, residual=float(fnorm),
                                iterations=max_iter, slice_coords=s)
    raise NewtonConvergenceError(
        f"no convergence after {max_iter} iterations at lam={lam:.6g} "
        f"(residual {fnorm:.3g})", residual=float(fnorm), iterations=max_iter)
