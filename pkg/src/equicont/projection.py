"""Orbit-to-slice projection, contour degree, and equivariance residuals.

Projecting a nearby state onto the slice means finding a group element g with
``rho(g, x)`` M_X-orthogonal to the orbit directions at the center.  Because
the action is in general only continuous, the Newton iteration uses finite
differences in g; the topological-degree check on a small contour certifies
that the projection problem has a zero for states near the orbit.
"""

import numpy as np

from .errors import (ContourResidualError, NewtonConvergenceError,
                     UnsupportedDimensionError)


def _slice_residual(problem, slice_basis, x):
    M = slice_basis.gram_M
    B = slice_basis.orbit_basis

    def res(g):
        moved = problem.group.act(g, x)
        return B.T @ (M @ (moved - slice_basis.x0))

    return res


def slice_project(problem, x, slice_basis, g0=None, tol=1e-8, max_iter=50,
                  fd_step=1e-7):
    """Find g with ``rho(g, x)`` on the slice; returns ``(g, x_on_slice)``.

    The d-dimensional residual ``B(x0)^T M_X (rho(g,x) - x0)`` is driven to
    zero by damped Newton with a finite-difference Jacobian in g; least
    squares steps handle rank-deficient generators (isotropy).  Raises
    :class:`NewtonConvergenceError` (carrying the last residual) on failure
    and :class:`OutOfActionDomainError` when the iteration leaves the action
    domain.
    """
    d = problem.group.d
    res = _slice_residual(problem, slice_basis, np.asarray(x, dtype=float))
    g = np.zeros(d) if g0 is None else np.asarray(g0, dtype=float).copy()
    if d == 0:
        return g, np.asarray(x, dtype=float)
    r = res(g)
    rnorm = np.max(np.abs(r))
    scale = max(1.0, float(np.linalg.norm(slice_basis.x0)))
    for it in range(max_iter):
        if rnorm <= tol * scale:
            return g, problem.group.act(g, x)
        J = np.empty((d, d))
        for j in range(d):
            e = np.zeros(d)
            e[j] = fd_step
            J[:, j] = (res(g + e) - res(g - e)) / (2 * fd_step)
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        t = 1.0
        while t >= 2**-16:
            g_new = g + t * step
            r_new = res(g_new)
            if np.max(np.abs(r_new)) <= (1.0 - 1e-4 * t) * rnorm:
                break
            t *= 0.5
        else:
            raise NewtonConvergenceError(
                "slice projection line search stalled",
                residual=float(rnorm), iterations=it)
        g, r = g_new, r_new
        rnorm = np.max(np.abs(r))
    if rnorm <= tol * scale:
        return g, problem.group.act(g, x)
    raise NewtonConvergenceError(
        f"slice projection did not converge (residual {rnorm:.3g})",
        residual=float(rnorm), iterations=max_iter)


def winding_degree(problem, x, slice_basis, radius, samples=64):
    """Topological degree of the projection residual on a contour around 0.

    For orbit dimension 1 the residual is evaluated at the two interval
    endpoints ``+-radius`` and the sign-change degree is returned; for
    dimension 2 the winding number of the residual map around the circle
    ``|g| = radius`` is computed from accumulated angle increments.  A
    (near-)vanishing residual on the contour raises
    :class:`ContourResidualError`.
    """
    d = problem.group.d
    if d not in (1, 2):
        raise UnsupportedDimensionError(
            f"winding degree implemented for orbit dimensions 1 and 2, got {d}")
    res = _slice_residual(problem, slice_basis, np.asarray(x, dtype=float))
    scale = max(1.0, float(np.linalg.norm(slice_basis.x0)))
    tiny = 1e-12 * scale
    if d == 1:
        r_minus = res(np.array([-radius]))[0]
        r_plus = res(np.array([radius]))[0]
        if min(abs(r_minus), abs(r_plus)) < tiny:
            raise ContourResidualError(
                "projection residual vanishes at a contour endpoint")
        if r_minus < 0 < r_plus:
            return 1
        if r_minus > 0 > r_plus:
            return -1
        return 0
    angles = 2 * np.pi * np.arange(samples + 1) / samples
    total = 0.0
    prev = None
    for ang in angles:
        g = radius * np.array([np.cos(ang), np.sin(ang)])
        r = res(g)
        mag = np.linalg.norm(r)
        if mag < tiny:
            raise ContourResidualError(
                "projection residual vanishes on the contour")
        cur = np.arctan2(r[1], r[0])
        if prev is not None:
            dphi = cur - prev
            while dphi > np.pi:
                dphi -= 2 * np.pi
            while dphi < -np.pi:
                dphi += 2 * np.pi
            total += dphi
        prev = cur
    return int(np.rint(total / (2 * np.pi)))


def equivariance_residual(problem, x, lam):
    """Sup-norm of ``B(x)^T M_pair delta_f(x, lam)``.

    Invariance of the functional makes this small at every state, critical
    or not; it is the discrete form of the statement that the gradient field
    annihilates the orbit directions.
    """
    x = np.asarray(x, dtype=float)
    B = problem.group.orbit_tangent(x)
    if B.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(B.T @ problem.gram.pair(problem.delta_f(x, lam)))))
