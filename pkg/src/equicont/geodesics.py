"""Closed (semi-)Riemannian geodesics on chart-covered 2-tori.

Curves are stored as an integer winding pair plus a periodic remainder so
that spectral derivative matrices always act on genuinely periodic data.  The
energy functional is (1/2) * integral of g(gamma', gamma') d theta; its
gradient-like field is -T_g applied to the covariant acceleration, where T_g
is the (1,1)-tensor relating g to the auxiliary Riemannian chart metric
(identity here), so semi-Riemannian signatures enter only through g itself.

Two problem formulations are provided:

* :func:`closed_geodesic_problem` keeps the full 2-component curve with the
  parameter-rotation circle action (the generic formulation; straight loops
  on exactly flat tori are equivariantly degenerate here because transverse
  translations add a second kernel direction).
* :func:`straight_loop_graph_problem` represents curves near a straight
  winding loop as transverse graphs, removing the reparameterization freedom;
  the symmetry is the transverse translation.  This is the formulation in
  which flat Riemannian and Lorentzian loops carry the same one-dimensional
  kernel.
"""

import warnings

import numpy as np

from .errors import ChartExitError
from .gram import GramPair
from .grids import circular_shift, derivative_matrices, make_grid, trig_interpolate
from .groups import GroupModel
from .problems import ProblemInstance, smooth_field_sampler

TWO_PI = 2.0 * np.pi


class MetricField:
    """Periodic 2D chart metric with analytic derivatives.

    Parameters
    ----------
    g : callable
        ``g(q) -> (..., 2, 2)`` for chart points ``q`` of shape (..., 2).
    dg : callable
        ``dg(q) -> (..., 2, 2, 2)`` with ``dg[..., a, i, j] = d_a g_ij``.
    d2g : callable, optional
        ``d2g(q) -> (..., 2, 2, 2, 2)`` with indices (a, b, i, j); required
        for the analytic Jacobi assembly.
    signature : tuple
        (+1, +1) Riemannian or (+1, -1) Lorentzian.
    """

    def __init__(self, g, dg, d2g=None, signature=(1, 1), name="",
                 chart_domain=None):
        self._g = g
        self._dg = dg
        self._d2g = d2g
        self.signature = tuple(signature)
        self.name = name
        self.chart_domain = chart_domain
        self.g_R = np.eye(2)

    def g(self, q):
        return np.asarray(self._g(np.asarray(q, dtype=float)), dtype=float)

    def dg(self, q):
        return np.asarray(self._dg(np.asarray(q, dtype=float)), dtype=float)

    def d2g(self, q):
        if self._d2g is None:
            raise ValueError(f"metric {self.name!r} has no second derivatives")
        return np.asarray(self._d2g(np.asarray(q, dtype=float)), dtype=float)

    @property
    def has_d2g(self):
        return self._d2g is not None

    def T(self, q):
        """The symmetric (1,1)-tensor with g = g_R(T ., .); identity chart
        metric makes it the matrix of g itself."""
        return self.g(q)

    def ginv(self, q):
        return np.linalg.inv(self.g(q))

    def check_chart(self, q):
        if self.chart_domain is not None and not self.chart_domain(q):
            raise ChartExitError(f"curve left the chart of metric {self.name!r}")
        det = np.linalg.det(self.g(q))
        if np.any(np.abs(det) < 1e-8):
            raise ChartExitError(
                f"metric {self.name!r} nearly degenerate along the curve")

    def christoffel(self, q):
        """Gamma[..., i, j, k] = Gamma^i_jk from analytic dg."""
        ginv = self.ginv(q)
        dg = self.dg(q)
        # dg[a, l, k] indexed as (..., a, l, k)
        bracket = (np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1)
                   - dg)
        # bracket[l, j, k] = d_j g_lk + d_k g_lj - d_l g_jk:
        #   swap(-3,-2): dg[j, l, k] -> index order (l, j, k)? verify below.
        return 0.5 * np.einsum("...il,...ljk->...ijk", ginv, bracket)

    def dchristoffel(self, q):
        """dGamma[..., a, i, j, k] = d_a Gamma^i_jk (needs d2g)."""
        ginv = self.ginv(q)
        dg = self.dg(q)
        d2g = self.d2g(q)
        bracket = (np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1) - dg)
        dbracket = (np.swapaxes(d2g, -3, -2) + np.moveaxis(d2g, -3, -1) - d2g)
        dginv = -np.einsum("...im,...amn,...nl->...ail", ginv, dg, ginv)
        return (0.5 * np.einsum("...ail,...ljk->...aijk", dginv, bracket)
                + 0.5 * np.einsum("...il,...aljk->...aijk", ginv, dbracket))


def _const_metric(mat, signature, name):
    mat = np.asarray(mat, dtype=float)

    def g(q):
        return np.broadcast_to(mat, q.shape[:-1] + (2, 2)).copy()

    def dg(q):
        return np.zeros(q.shape[:-1] + (2, 2, 2))

    def d2g(q):
        return np.zeros(q.shape[:-1] + (2, 2, 2, 2))

    return MetricField(g, dg, d2g, signature=signature, name=name)


def metric_family(name, t, eps=0.1):
    """Built-in one-parameter metric deformations on the chart torus.

    ``flat_torus``: identity metric.  ``conformal_torus``: (1 + t*eps*cos x)
    times identity.  ``lorentz_flat``: diag(1, -1).  ``channel_torus``:
    diag(1, 1 + t*eps*cos x), which keeps the vertical loops at x = 0 and
    x = pi as closed geodesics for every t.
    """
    if name == "flat_torus":
        return _const_metric(np.eye(2), (1, 1), name)
    if name == "lorentz_flat":
        return _const_metric(np.diag([1.0, -1.0]), (1, -1), name)
    if name == "conformal_torus":
        a = t * eps

        def g(q):
            rho = 1.0 + a * np.cos(q[..., 0])
            out = np.zeros(q.shape[:-1] + (2, 2))
            out[..., 0, 0] = rho
            out[..., 1, 1] = rho
            return out

        def dg(q):
            out = np.zeros(q.shape[:-1] + (2, 2, 2))
            drho = -a * np.sin(q[..., 0])
            out[..., 0, 0, 0] = drho
            out[..., 0, 1, 1] = drho
            return out

        def d2g(q):
            out = np.zeros(q.shape[:-1] + (2, 2, 2, 2))
            ddrho = -a * np.cos(q[..., 0])
            out[..., 0, 0, 0, 0] = ddrho
            out[..., 0, 0, 1, 1] = ddrho
            return out

        return MetricField(g, dg, d2g, signature=(1, 1), name=name)
    if name == "channel_torus":
        a = t * eps

        def g(q):
            out = np.zeros(q.shape[:-1] + (2, 2))
            out[..., 0, 0] = 1.0
            out[..., 1, 1] = 1.0 + a * np.cos(q[..., 0])
            return out

        def dg(q):
            out = np.zeros(q.shape[:-1] + (2, 2, 2))
            out[..., 0, 1, 1] = -a * np.sin(q[..., 0])
            return out

        def d2g(q):
            out = np.zeros(q.shape[:-1] + (2, 2, 2, 2))
            out[..., 0, 0, 1, 1] = -a * np.cos(q[..., 0])
            return out

        return MetricField(g, dg, d2g, signature=(1, 1), name=name)
    raise ValueError(f"unknown metric family {name!r}")


class ClosedCurve:
    """Closed curve on the chart torus: winding lift plus periodic remainder."""

    def __init__(self, grid, ops, periodic, winding=(0, 1)):
        self.grid = grid
        self.ops = ops
        self.periodic = np.asarray(periodic, dtype=float).reshape(grid.n, 2)
        self.winding = (int(winding[0]), int(winding[1]))

    @classmethod
    def from_state(cls, state, grid, ops, winding):
        p = np.asarray(state, dtype=float).reshape(2, grid.n).T
        return cls(grid, ops, p, winding)

    def state(self):
        return self.periodic.T.reshape(-1)

    def points(self):
        lift = np.outer(self.grid.nodes, np.asarray(self.winding, dtype=float))
        return lift + self.periodic

    def velocity(self):
        return np.asarray(self.winding, dtype=float) + self.ops.D1 @ self.periodic

    def second_derivative(self):
        return self.ops.D2 @ self.periodic

    def shift(self, s):
        """Rotation action on the parameter: gamma(. + s)."""
        shifted = circular_shift(self.periodic, s, self.grid)
        shifted = shifted + s * np.asarray(self.winding, dtype=float)
        return ClosedCurve(self.grid, self.ops, shifted, self.winding)


def energy(curve, metric):
    """(1/2) quadrature of g(gamma', gamma')."""
    pts = curve.points()
    metric.check_chart(pts)
    v = curve.velocity()
    dens = 0.5 * np.einsum("kij,ki,kj->k", metric.g(pts), v, v)
    return float(curve.grid.integrate(dens))


def geodesic_residual(curve, metric):
    """Gradient-like field -T_g(covariant acceleration); zero at geodesics."""
    pts = curve.points()
    metric.check_chart(pts)
    v = curve.velocity()
    gamma = metric.christoffel(pts)
    cov = curve.second_derivative() + np.einsum("kipq,kp,kq->ki", gamma, v, v)
    return -np.einsum("kil,kl->ki", metric.T(pts), cov)


def geodesic_jacobi(curve, metric, warn_tol=1e-8):
    """Analytic linearization of the geodesic residual (2n x 2n).

    At a geodesic this is the composition of -T_g with the classical Jacobi
    operator along the curve; away from one a warning is attached and the
    extra metric-derivative term is kept.
    """
    res = geodesic_residual(curve, metric)
    if np.max(np.abs(res)) > warn_tol:
        warnings.warn(
            f"Jacobi operator assembled at a non-geodesic curve "
            f"(residual {np.max(np.abs(res)):.3g})", stacklevel=2)
    n = curve.grid.n
    pts = curve.points()
    v = curve.velocity()
    g = metric.g(pts)
    dg = metric.dg(pts)
    gamma = metric.christoffel(pts)
    dgamma = metric.dchristoffel(pts)
    cov = curve.second_derivative() + np.einsum("kipq,kp,kq->ki", gamma, v, v)
    D1, D2 = curve.ops.D1, curve.ops.D2
    # Pointwise (delta) part: metric variation against the acceleration plus
    # the Christoffel variation term.
    A1 = (-np.einsum("kjil,kl->kij", dg, cov)
          - np.einsum("kil,kjlpq,kp,kq->kij", g, dgamma, v, v))
    # Coefficient of D1 (variation of gamma' in the quadratic term).
    A2 = -2.0 * np.einsum("kil,kljq,kq->kij", g, gamma, v)
    J = np.zeros((2 * n, 2 * n))
    for i in range(2):
        for j in range(2):
            block = np.diag(A1[:, i, j]) + A2[:, i, j, None] * D1 \
                - g[:, i, j, None] * D2
            J[i * n:(i + 1) * n, j * n:(j + 1) * n] = block
    return J


def rotation_action(curve, theta_shift):
    """Circle action gamma -> gamma(. + shift); grid-aligned shifts are exact
    cyclic permutations, fractional ones use trigonometric interpolation."""
    return curve.shift(theta_shift)


def closed_geodesic_problem(family="channel_torus", winding=(0, 1), n=64,
                            eps=0.1, scheme="spectral", parameter_range=(0.0, 1.0),
                            base_point=(0.0, 0.0)):
    """Full-curve geodesic problem with the parameter-rotation circle action.

    The continuation parameter selects the metric ``metric_family(family, t)``.
    The initial state is the straight winding loop through ``base_point``.
    """
    grid = make_grid(n, TWO_PI, 1)
    ops = derivative_matrices(grid, scheme)
    winding = (int(winding[0]), int(winding[1]))

    def metric_at(t):
        return metric_family(family, t, eps=eps)

    def as_curve(state):
        return ClosedCurve.from_state(state, grid, ops, winding)

    def f(state, t):
        return energy(as_curve(state), metric_at(t))

    def delta_f(state, t):
        return geodesic_residual(as_curve(state), metric_at(t)).T.reshape(-1)

    def linearization(state, t):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return geodesic_jacobi(as_curve(state), metric_at(t))

    def orbit_tangent(state):
        return as_curve(state).velocity().T.reshape(-1, 1)

    def local_action(g, state):
        return as_curve(state).shift(g[0]).state()

    group = GroupModel(d=1, orbit_tangent=orbit_tangent,
                       local_action=local_action, domain_radius=np.inf,
                       abelian=True, name="parameter rotation")
    gram = GramPair.from_weights(grid.weights, components=2)
    x0 = np.concatenate([np.full(n, base_point[0]), np.full(n, base_point[1])])
    return ProblemInstance(
        n=2 * n, f=f, delta_f=delta_f, gram=gram, group=group,
        linearization=linearization, parameter_range=parameter_range,
        name=f"geodesic[{family}, winding={winding}]",
        sample_state=smooth_field_sampler(grid, amplitude=0.08, components=2),
        metadata={"grid": grid, "ops": ops, "winding": winding, "family": family,
                  "eps": eps, "as_curve": as_curve, "x0": x0,
                  "kind": "geodesic_full"})


def _metric_is_transverse_invariant(metric, orientation, probes=8):
    axis = 0 if orientation == "vertical" else 1
    q = np.column_stack([np.linspace(0, TWO_PI, probes, endpoint=False)] * 2)
    return np.max(np.abs(metric.dg(q)[:, axis])) < 1e-14


def straight_loop_graph_problem(family="flat_torus", orientation="vertical",
                                n=64, eps=0.1, scheme="spectral",
                                parameter_range=(0.0, 1.0)):
    """Transverse-graph geodesic problem near a straight winding loop.

    ``vertical`` graphs are curves (u(theta), theta) winding once in y;
    ``horizontal`` graphs are (theta, u(theta)).  For metrics independent of
    the transverse coordinate (flat Riemannian and Lorentzian) the symmetry
    is the transverse translation u -> u + c, and the straight loop has a
    one-dimensional kernel of constants regardless of the signature: on flat
    metrics the timelike and spacelike loops analyze identically.
    """
    if orientation not in ("vertical", "horizontal"):
        raise ValueError(f"orientation must be vertical or horizontal, got {orientation!r}")
    grid = make_grid(n, TWO_PI, 1)
    ops = derivative_matrices(grid, scheme)
    theta = grid.nodes
    uaxis = 0 if orientation == "vertical" else 1

    def metric_at(t):
        return metric_family(family, t, eps=eps)

    def chart_points(u):
        if orientation == "vertical":
            return np.column_stack([u, theta])
        return np.column_stack([theta, u])

    def chart_velocity(du):
        if orientation == "vertical":
            return np.column_stack([du, np.ones(grid.n)])
        return np.column_stack([np.ones(grid.n), du])

    def f(u, t):
        metric = metric_at(t)
        q = chart_points(u)
        v = chart_velocity(ops.D1 @ u)
        dens = 0.5 * np.einsum("kij,ki,kj->k", metric.g(q), v, v)
        return float(grid.integrate(dens))

    def delta_f(u, t):
        metric = metric_at(t)
        q = chart_points(u)
        du = ops.D1 @ u
        v = chart_velocity(du)
        g = metric.g(q)
        dg = metric.dg(q)
        # d/dtheta of p = g(v, e_u) expanded with the chain rule; the second
        # derivative of u enters through the true spectral D2.
        p_coeff = g[:, uaxis, uaxis]
        dq = chart_velocity(du)  # = dq/dtheta
        dg_along = np.einsum("kaij,ka->kij", dg, dq)
        dp = (p_coeff * (ops.D2 @ u)
              + dg_along[:, uaxis, uaxis] * du
              + dg_along[:, uaxis, 1 - uaxis])
        du_G = 0.5 * np.einsum("kij,ki,kj->k", dg[:, uaxis], v, v)
        return du_G - dp

    linearization = None
    if family in ("flat_torus", "lorentz_flat"):
        g_const = metric_at(0.0).g(np.zeros((1, 2)))[0]

        def linearization(u, t, _c=g_const[uaxis, uaxis]):
            return -_c * ops.D2

    if _metric_is_transverse_invariant(metric_at(1.0), orientation):
        group = GroupModel(
            d=1,
            orbit_tangent=lambda u: np.ones((grid.n, 1)),
            local_action=lambda g, u: u + g[0],
            domain_radius=np.inf, abelian=True,
            name="transverse translation")
    else:
        from .groups import trivial_group
        group = trivial_group(grid.n)

    gram = GramPair.from_weights(grid.weights)
    return ProblemInstance(
        n=grid.n, f=f, delta_f=delta_f, gram=gram, group=group,
        linearization=linearization, parameter_range=parameter_range,
        name=f"geodesic-graph[{family}, {orientation}]",
        sample_state=smooth_field_sampler(grid, amplitude=0.1),
        metadata={"grid": grid, "ops": ops, "orientation": orientation,
                  "family": family, "eps": eps, "x0": np.zeros(grid.n),
                  "kind": "geodesic_graph"})


def _graph_ode_rhs(metric, orientation):
    """Second-order ODE x'' = F(x, x', y) for geodesics as transverse graphs."""
    if orientation != "vertical":
        raise ValueError("shooting oracle implemented for vertical graphs")

    def rhs(y, x, v):
        q = np.array([x, y])
        g = metric.g(q)
        dg = metric.dg(q)
        vv = np.array([v, 1.0])
        Q = vv @ g @ vv
        p = g[0, 0] * v + g[0, 1]
        dxQ = vv @ dg[0] @ vv
        dyQ = vv @ dg[1] @ vv
        pdot_known = (dg[0, 0, 0] * v + dg[1, 0, 0]) * v + dg[0, 0, 1] * v + dg[1, 0, 1]
        denom = g[0, 0] - p * p / Q
        return (0.5 * dxQ - pdot_known + p * (dxQ * v + dyQ) / (2.0 * Q)) / denom

    return rhs


def shoot_closed_geodesic(metric, n_out, orientation="vertical", x0=0.0,
                          v0=0.0, rk_steps=4096, tol=1e-12, max_iter=25):
    """Independent shooting oracle for closed geodesics in winding class (0,1).

    Integrates the transverse-graph geodesic ODE with a classical fourth-order
    Runge-Kutta scheme over one period and solves the two-point periodicity
    condition in the initial data by a damped Newton iteration.  Returns the
    graph values x(theta_k) on the ``n_out``-point grid.
    """
    rhs = _graph_ode_rhs(metric, orientation)
    steps = int(np.ceil(rk_steps / n_out)) * n_out
    hstep = TWO_PI / steps
    record_every = steps // n_out

    def integrate(xi, vi):
        x, v = float(xi), float(vi)
        y = 0.0
        samples = np.empty(n_out)
        samples[0] = x
        for k in range(steps):
            k1x, k1v = v, rhs(y, x, v)
            k2x, k2v = v + 0.5 * hstep * k1v, rhs(y + 0.5 * hstep, x + 0.5 * hstep * k1x, v + 0.5 * hstep * k1v)
            k3x, k3v = v + 0.5 * hstep * k2v, rhs(y + 0.5 * hstep, x + 0.5 * hstep * k2x, v + 0.5 * hstep * k2v)
            k4x, k4v = v + hstep * k3v, rhs(y + hstep, x + hstep * k3x, v + hstep * k3v)
            x += hstep * (k1x + 2 * k2x + 2 * k3x + k4x) / 6.0
            v += hstep * (k1v + 2 * k2v + 2 * k3v + k4v) / 6.0
            y += hstep
            if (k + 1) % record_every == 0 and (k + 1) < steps:
                samples[(k + 1) // record_every] = x
        return x, v, samples

    z = np.array([float(x0), float(v0)])
    for _ in range(max_iter):
        xf, vf, samples = integrate(z[0], z[1])
        F = np.array([xf - z[0], vf - z[1]])
        if np.max(np.abs(F)) <= tol:
            return samples
        J = np.empty((2, 2))
        delta = 1e-7
        for j in range(2):
            zp = z.copy()
            zp[j] += delta
            xfp, vfp, _ = integrate(zp[0], zp[1])
            zm = z.copy()
            zm[j] -= delta
            xfm, vfm, _ = integrate(zm[0], zm[1])
            J[:, j] = ([(xfp - xfm), (vfp - vfm)])
            J[:, j] /= (2 * delta)
        J -= np.eye(2)
        z = z + np.linalg.solve(J, -F)
    raise RuntimeError("shooting oracle did not converge")


def vertical_graph_values(curve, y_values, newton_iter=30):
    """Re-express a winding-(0,1) curve as the graph x(y) at given y values.

    Solves y(theta) = theta + p2(theta) = y_k for theta by Newton on the
    trigonometric interpolant, then evaluates x(theta) = p1(theta).
    """
    if curve.winding != (0, 1):
        raise ValueError("vertical graphs require winding (0, 1)")
    grid = curve.grid
    p = curve.periodic
    dp = curve.ops.D1 @ p
    theta = np.asarray(y_values, dtype=float).copy()
    for _ in range(newton_iter):
        yv = theta + trig_interpolate(p[:, 1], theta, grid)
        err = yv - y_values
        if np.max(np.abs(err)) < 1e-13:
            break
        slope = 1.0 + trig_interpolate(dp[:, 1], theta, grid)
        theta = theta - err / slope
    return trig_interpolate(p[:, 0], theta, grid)
