"""Harmonic maps from the flat-chart 2-torus into the circle and the 2-sphere.

Circle-target maps are an integer degree pair plus a periodic angle
remainder; the problem is linear (a weighted Laplace equation in divergence
form) and the symmetry is the target rotation, acting by adding a constant.
Sphere-target maps store unit 3-vectors per node; states near a base map are
chart coordinates in a per-node tangent frame (Gram-Schmidt against the map
value), and the symmetry is the rotation group acting by left composition.

The gradient-like field is -zeta * tension, with zeta the density of the
metric volume against the flat reference; second derivatives are assembled
with the true spectral operators so the Nyquist modes stay out of the
kernel.
"""

import numpy as np

from .errors import OutOfActionDomainError
from .geodesics import metric_family
from .gram import GramPair
from .grids import derivative_matrices, make_grid
from .groups import GroupModel
from .problems import ProblemInstance, smooth_field_sampler

TWO_PI = 2.0 * np.pi


def _metric_weights(metric, pts):
    """(w, dwdiv, zeta): w = sqrt(det g) g^{-1}, dwdiv_j = sum_i d_i w_ij."""
    g = metric.g(pts)
    dg = metric.dg(pts)
    ginv = np.linalg.inv(g)
    det = np.linalg.det(g)
    zeta = np.sqrt(det)
    w = zeta[:, None, None] * ginv
    # d_a w = (tr(g^-1 d_a g)/2) w - zeta g^-1 (d_a g) g^-1
    tr = np.einsum("kij,kaji->ka", ginv, dg)
    dw = (0.5 * tr[:, :, None, None] * w[:, None]
          - zeta[:, None, None, None]
          * np.einsum("kim,kamn,knj->kaij", ginv, dg, ginv))
    dwdiv = np.einsum("kaaj->kj", dw)
    return w, dwdiv, zeta


class CircleTorusMap:
    """Circle-valued torus map: angle field = p x + q y + periodic remainder."""

    target = "circle"

    def __init__(self, grid, ops, degree, psi):
        self.grid = grid
        self.ops = ops
        self.degree = (int(degree[0]), int(degree[1]))
        self.psi = np.asarray(psi, dtype=float).reshape(grid.size)

    def gradient(self):
        p, q = self.degree
        return np.column_stack([p + self.ops.Dx @ self.psi,
                                q + self.ops.Dy @ self.psi])


class SphereTorusMap:
    """Sphere-valued torus map: unit 3-vectors per node."""

    target = "sphere"

    def __init__(self, grid, ops, values):
        self.grid = grid
        self.ops = ops
        values = np.asarray(values, dtype=float).reshape(grid.size, 3)
        norms = np.linalg.norm(values, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            values = values / norms[:, None]
        self.values = values

    def gradient(self):
        return np.stack([self.ops.Dx @ self.values, self.ops.Dy @ self.values])


def equator_map(grid, ops):
    x = grid.nodes[:, 0]
    return SphereTorusMap(grid, ops, np.column_stack(
        [np.cos(x), np.sin(x), np.zeros(grid.size)]))


def dirichlet_energy(tmap, metric=None):
    """(1/2) integral of the Hilbert-Schmidt energy density w.r.t. vol_g."""
    if metric is None:
        metric = metric_family("flat_torus", 0.0)
    w, _, _ = _metric_weights(metric, tmap.grid.nodes)
    if tmap.target == "circle":
        du = tmap.gradient()
        dens = 0.5 * np.einsum("kij,ki,kj->k", w, du, du)
    else:
        dphi = tmap.gradient()
        dens = 0.5 * np.einsum("kij,ikd,jkd->k", w, dphi, dphi)
    return float(tmap.grid.integrate(dens))


def _second_derivative_combo(tmap, w, dwdiv, values):
    """w_ij d_i d_j + dwdiv_j d_j applied to nodal data (true D2 operators)."""
    ops = tmap.ops
    out = (w[:, 0, 0, None] * (ops.D2x @ values).reshape(len(w), -1)
           + w[:, 1, 1, None] * (ops.D2y @ values).reshape(len(w), -1)
           + 2.0 * w[:, 0, 1, None] * (ops.Dx @ (ops.Dy @ values)).reshape(len(w), -1)
           + dwdiv[:, 0, None] * (ops.Dx @ values).reshape(len(w), -1)
           + dwdiv[:, 1, None] * (ops.Dy @ values).reshape(len(w), -1))
    return out.reshape(values.shape)


def tension_field(tmap, metric=None):
    """Trace of the second fundamental form of the map; zero iff harmonic.

    Circle target: the Laplace-Beltrami operator of the angle field.  Sphere
    target: componentwise weighted Laplacian plus the |d phi|^2 normal
    correction (the projection onto the tangent spaces of the target).
    """
    if metric is None:
        metric = metric_family("flat_torus", 0.0)
    w, dwdiv, zeta = _metric_weights(metric, tmap.grid.nodes)
    if tmap.target == "circle":
        p, q = tmap.degree
        div = (_second_derivative_combo(tmap, w, dwdiv, tmap.psi)
               + dwdiv[:, 0] * p + dwdiv[:, 1] * q)
        return div / zeta
    div = _second_derivative_combo(tmap, w, dwdiv, tmap.values)
    dphi = tmap.gradient()
    ginv = np.linalg.inv(metric.g(tmap.grid.nodes))
    dens = np.einsum("kij,ikd,jkd->k", ginv, dphi, dphi)
    return div / zeta[:, None] + dens[:, None] * tmap.values


def circle_operator(grid, ops, metric):
    """Matrix of -d_i(w_ij d_j .) on periodic remainders, plus the affine
    degree term as a callable rhs(degree)."""
    w, dwdiv, _ = _metric_weights(metric, grid.nodes)
    A = -(w[:, 0, 0, None] * ops.D2x + w[:, 1, 1, None] * ops.D2y
          + 2.0 * w[:, 0, 1, None] * (ops.Dx @ ops.Dy)
          + dwdiv[:, 0, None] * ops.Dx + dwdiv[:, 1, None] * ops.Dy)

    def degree_term(degree):
        p, q = degree
        return -(dwdiv[:, 0] * p + dwdiv[:, 1] * q)

    return A, degree_term


def tangent_frame(base_map):
    """Per-node orthonormal tangent frame on the sphere target.

    Gram-Schmidt of the x-derivative (or a fixed axis at critical nodes)
    against the map value; the second leg completes the oriented frame.
    """
    phi = base_map.values
    raw = base_map.ops.Dx @ phi
    norms = np.linalg.norm(raw, axis=1)
    fallback = np.cross(phi, np.array([0.0, 0.0, 1.0]))
    fb_norms = np.linalg.norm(fallback, axis=1)
    bad_fb = fb_norms < 1e-8
    fallback[bad_fb] = np.cross(phi[bad_fb], np.array([1.0, 0.0, 0.0]))
    use_fb = norms < 1e-8
    raw = np.where(use_fb[:, None], fallback, raw)
    raw = raw - np.sum(raw * phi, axis=1)[:, None] * phi
    e1 = raw / np.linalg.norm(raw, axis=1)[:, None]
    e2 = np.cross(phi, e1)
    return e1, e2


def harmonic_jacobi(tmap, metric=None):
    """Second-variation operator at a harmonic map.

    Circle target: the weighted Laplacian matrix (kernel = constants).
    Sphere target (flat source): the frame representation of
    -bundle-Laplacian + curvature term; Killing variations lie in its kernel.
    """
    if tmap.target == "circle":
        if metric is None:
            metric = metric_family("flat_torus", 0.0)
        A, _ = circle_operator(tmap.grid, tmap.ops, metric)
        return A
    if metric is not None and metric.name != "flat_torus":
        raise ValueError("sphere-target Jacobi assembled for the flat source metric")
    grid, ops = tmap.grid, tmap.ops
    N = grid.size
    e1, e2 = tangent_frame(tmap)
    frame = np.stack([e1, e2])
    dphi = tmap.gradient()  # (2, N, 3), index (source axis, node, ambient)
    lap = ops.D2x + ops.D2y
    J = np.zeros((2 * N, 2 * N))
    # bundle Laplacian with the frame connection omega_i = <d_i e1, e2>
    omega = np.stack([np.sum((ops.Dx @ e1) * e2, axis=1),
                      np.sum((ops.Dy @ e1) * e2, axis=1)])
    domega = ops.Dx @ omega[0] + ops.Dy @ omega[1]
    D = [ops.Dx, ops.Dy]
    lap_blocks = [[lap - np.diag(omega[0] ** 2 + omega[1] ** 2),
                   np.diag(domega) + 2 * (omega[0][:, None] * D[0] + omega[1][:, None] * D[1])],
                  [-np.diag(domega) - 2 * (omega[0][:, None] * D[0] + omega[1][:, None] * D[1]),
                   lap - np.diag(omega[0] ** 2 + omega[1] ** 2)]]
    # curvature part: + sum_i <V, d_i phi> d_i phi - |d phi|^2 V
    proj = np.einsum("akd,ikd->aik", frame, dphi)  # <e_a, d_i phi>
    Mgram = np.einsum("aik,bik->abk", proj, proj)
    dens = np.einsum("ikd,ikd->k", dphi, dphi)
    for a in range(2):
        for b in range(2):
            block = -lap_blocks[a][b]
            block += np.diag(Mgram[a, b] - (dens if a == b else 0.0))
            J[a * N:(a + 1) * N, b * N:(b + 1) * N] = block
    return J


def target_killing_fields(tmap):
    """Orbit-tangent columns of the target isometry action.

    Circle: a single all-ones column.  Sphere: the three rotation fields
    e_j x phi projected into the tangent frame, stacked component-major.
    """
    N = tmap.grid.size
    if tmap.target == "circle":
        return np.ones((N, 1))
    e1, e2 = tangent_frame(tmap)
    cols = []
    basis = np.eye(3)
    for j in range(3):
        K = np.cross(basis[j], tmap.values)
        cols.append(np.concatenate([np.sum(K * e1, axis=1),
                                    np.sum(K * e2, axis=1)]))
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# sphere chart helpers


def _sphere_exp(base, V):
    r = np.linalg.norm(V, axis=1)
    small = r < 1e-12
    rsafe = np.where(small, 1.0, r)
    unit = V / rsafe[:, None]
    out = np.cos(r)[:, None] * base + np.sin(r)[:, None] * unit
    out[small] = base[small] + V[small]
    return out / np.linalg.norm(out, axis=1)[:, None]


def _sphere_dexp(base, V, W):
    """Differential of the pointwise exponential applied to tangent field W."""
    r = np.linalg.norm(V, axis=1)
    small = r < 1e-8
    rsafe = np.where(small, 1.0, r)
    unit = V / rsafe[:, None]
    radial = np.sum(unit * W, axis=1)
    perp = W - radial[:, None] * unit
    out = (radial[:, None] * (-np.sin(r)[:, None] * base + np.cos(r)[:, None] * unit)
           + (np.sin(r) / rsafe)[:, None] * perp)
    out[small] = W[small]
    return out


def _sphere_log(base, values, max_angle=2.5):
    c = np.clip(np.sum(base * values, axis=1), -1.0, 1.0)
    r = np.arccos(c)
    if np.max(r) > max_angle:
        raise OutOfActionDomainError(
            "rotated map left the normal chart of the base map")
    small = r < 1e-12
    rsafe = np.where(small, 1.0, r)
    scale = rsafe / np.sin(rsafe)
    V = scale[:, None] * (values - c[:, None] * base)
    V[small] = values[small] - c[small, None] * base[small]
    return V


def _sphere_dlog(base, values, dvalues):
    """Differential of the pointwise logarithm along a perturbation of values."""
    c = np.clip(np.sum(base * values, axis=1), -1.0, 1.0)
    r = np.arccos(c)
    small = r < 1e-6
    rsafe = np.where(small, 1.0, r)
    sinr = np.sin(rsafe)
    dc = np.sum(base * dvalues, axis=1)
    dr = -dc / sinr
    scale = rsafe / sinr
    dscale = (sinr - rsafe * np.cos(rsafe)) / sinr**2 * dr
    out = (dscale[:, None] * (values - c[:, None] * base)
           + scale[:, None] * (dvalues - dc[:, None] * base))
    # r -> 0 limit: the tangent projection of the perturbation.
    proj = dvalues - np.sum(base * dvalues, axis=1)[:, None] * base
    out[small] = proj[small]
    return out


# ---------------------------------------------------------------------------
# problem builders


def harmonic_circle_problem(n=16, family="channel_torus", degree=(1, 0),
                            eps=0.1, scheme="spectral", parameter_range=(0.0, 1.0)):
    """Circle-target harmonic problem over a one-parameter source metric.

    The critical equation is the weighted Laplace equation for the periodic
    remainder; continuation in the family parameter reproduces the direct
    linear solve.  Symmetry: target rotations, psi -> psi + c.
    """
    grid = make_grid(n, TWO_PI, 2)
    ops = derivative_matrices(grid, scheme)
    degree = (int(degree[0]), int(degree[1]))

    def metric_at(t):
        return metric_family(family, t, eps=eps)

    cache = {}

    def operator_at(t):
        if t not in cache:
            A, degree_term = circle_operator(grid, ops, metric_at(t))
            cache[t] = (A, degree_term(degree))
        return cache[t]

    def as_map(state):
        return CircleTorusMap(grid, ops, degree, state)

    def f(state, t):
        return dirichlet_energy(as_map(state), metric_at(t))

    def delta_f(state, t):
        A, c = operator_at(t)
        return A @ np.asarray(state, dtype=float) + c

    def linearization(state, t):
        return operator_at(t)[0]

    group = GroupModel(
        d=1, orbit_tangent=lambda s: np.ones((grid.size, 1)),
        local_action=lambda g, s: s + g[0], domain_radius=np.inf,
        abelian=True, name="target rotation")
    gram = GramPair.from_weights(grid.weights)
    return ProblemInstance(
        n=grid.size, f=f, delta_f=delta_f, gram=gram, group=group,
        linearization=linearization, parameter_range=parameter_range,
        name=f"harmonic-circle[degree={degree}, {family}]",
        sample_state=smooth_field_sampler(grid, amplitude=0.1, max_mode=3),
        metadata={"grid": grid, "ops": ops, "degree": degree, "family": family,
                  "eps": eps, "x0": np.zeros(grid.size), "kind": "harmonic_circle",
                  "operator_at": operator_at})


def direct_circle_solve(n=16, family="channel_torus", t=1.0, degree=(1, 0),
                        eps=0.1, scheme="spectral"):
    """Independent direct solve of the weighted Laplace equation.

    Assembles the divergence-form operator and solves for the minimal-norm
    periodic remainder by dense least squares (the nullspace is the constant
    mode), bypassing the continuation machinery entirely.
    """
    grid = make_grid(n, TWO_PI, 2)
    ops = derivative_matrices(grid, scheme)
    A, degree_term = circle_operator(grid, ops, metric_family(family, t, eps=eps))
    psi, *_ = np.linalg.lstsq(A, -degree_term(degree), rcond=None)
    return psi


def harmonic_sphere_problem(n=16, base="equator", family="flat_torus", eps=0.1,
                            scheme="spectral", parameter_range=(0.0, 1.0),
                            domain_radius=1.0):
    """Sphere-target harmonic problem in chart coordinates around a base map.

    States are tangent-frame coefficients v = (v1, v2) of the pointwise
    exponential chart; the symmetry is the target rotation group acting by
    left composition (rotate, then take the chart logarithm).
    """
    grid = make_grid(n, TWO_PI, 2)
    ops = derivative_matrices(grid, scheme)
    if base == "equator":
        base_map = equator_map(grid, ops)
    elif base == "north_pole":
        vals = np.tile(np.array([0.0, 0.0, 1.0]), (grid.size, 1))
        base_map = SphereTorusMap(grid, ops, vals)
    else:
        raise ValueError(f"unknown base map {base!r}")
    e1, e2 = tangent_frame(base_map)
    N = grid.size

    def metric_at(t):
        return metric_family(family, t, eps=eps)

    def tangent_field(state):
        v = np.asarray(state, dtype=float)
        return v[:N, None] * e1 + v[N:, None] * e2

    def values_at(state):
        return _sphere_exp(base_map.values, tangent_field(state))

    def as_map(state):
        return SphereTorusMap(grid, ops, values_at(state))

    def f(state, t):
        return dirichlet_energy(as_map(state), metric_at(t))

    def delta_f(state, t):
        tmap = as_map(state)
        metric = metric_at(t)
        w, dwdiv, _ = _metric_weights(metric, grid.nodes)
        div = -_second_derivative_combo(tmap, w, dwdiv, tmap.values)
        V = tangent_field(state)
        d1 = _sphere_dexp(base_map.values, V, e1)
        d2 = _sphere_dexp(base_map.values, V, e2)
        return np.concatenate([np.sum(div * d1, axis=1),
                               np.sum(div * d2, axis=1)])

    def orbit_tangent(state):
        vals = values_at(state)
        cols = []
        basis = np.eye(3)
        for j in range(3):
            dvals = np.cross(basis[j], vals)
            dV = _sphere_dlog(base_map.values, vals, dvals)
            cols.append(np.concatenate([np.sum(dV * e1, axis=1),
                                        np.sum(dV * e2, axis=1)]))
        return np.column_stack(cols)

    def local_action(g, state):
        ambient_rot = _rotation_matrix(g)
        vals = values_at(state) @ ambient_rot.T
        V = _sphere_log(base_map.values, vals)
        return np.concatenate([np.sum(V * e1, axis=1), np.sum(V * e2, axis=1)])

    group = GroupModel(d=3, orbit_tangent=orbit_tangent,
                       local_action=local_action, domain_radius=domain_radius,
                       abelian=False, name="target rotations")
    gram = GramPair.from_weights(grid.weights, components=2)
    return ProblemInstance(
        n=2 * N, f=f, delta_f=delta_f, gram=gram, group=group,
        linearization=None, parameter_range=parameter_range,
        name=f"harmonic-sphere[{base}]",
        sample_state=smooth_field_sampler(grid, amplitude=0.08, max_mode=2,
                                          components=2),
        metadata={"grid": grid, "ops": ops, "base_map": base_map,
                  "frame": (e1, e2), "x0": np.zeros(2 * N),
                  "as_map": as_map, "kind": "harmonic_sphere"})


def _rotation_matrix(g):
    g = np.asarray(g, dtype=float)
    angle = np.linalg.norm(g)
    if angle < 1e-300:
        return np.eye(3)
    axis = g / angle
    K = np.array([[0, -axis[2], axis[1]],
                  [axis[2], 0, -axis[0]],
                  [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * (K @ K)
