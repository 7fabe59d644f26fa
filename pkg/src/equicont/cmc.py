"""Constant-curvature curves as normal graphs in 2D ambients.

Curves are graphs ``y(theta) = exp_{x(theta)}(phi(theta) n(theta))`` over a
fixed embedded reference with a chosen unit normal.  The functional is
``Area - lambda * Volume`` where the volume is the pullback integral of a
primitive of the ambient area form; the gradient-like field is
``(H(phi) - lambda) * j(phi)`` with H the signed geodesic curvature of the
graph curve and j the Jacobian density of the normal exponential (so the
field is the L2 gradient of the functional).  On the flat torus no invariant
primitive exists near a winding loop: the problem keeps the same gradient
field but no matching functional, which is what forces the bordered
multiplier to absorb the curvature target.

Sign conventions (fixed by the built-in references): the unit circle with
outward normal has curvature +1, and positive graph values move along the
stored normal, so ``phi = -0.2`` on the unit circle gives the radius-0.8
circle.
"""

from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from .errors import (ChartExitError, NoVolumePrimitiveError,
                     OutOfActionDomainError, SelfIntersectionError)
from .gram import GramPair
from .grids import derivative_matrices, make_grid, trig_interpolate
from .groups import GroupModel
from .problems import ProblemInstance, smooth_field_sampler

TWO_PI = 2.0 * np.pi


def _rot90(v):
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


def _wrap(delta):
    return (delta + np.pi) % TWO_PI - np.pi


# ---------------------------------------------------------------------------
# volume primitives


class PlanarOneForm:
    """One-form a(p) dx + b(p) dy on a flat 2D chart."""

    def __init__(self, a, b, description=""):
        self.a = a
        self.b = b
        self.description = description

    def coefficients(self, points):
        points = np.asarray(points, dtype=float)
        return np.column_stack([self.a(points), self.b(points)])

    def pullback_integral(self, y, yp, grid):
        c = self.coefficients(y)
        return float(grid.integrate(c[:, 0] * yp[:, 0] + c[:, 1] * yp[:, 1]))


def standard_area_primitive():
    """eta = (x dy - y dx) / 2, the rotation-invariant primitive of dx^dy."""
    return PlanarOneForm(lambda p: -0.5 * p[:, 1], lambda p: 0.5 * p[:, 0],
                         description="(x dy - y dx)/2")


def torus_strip_primitive():
    """eta = x dy, a primitive of the area form on a chart strip of the torus.

    Valid near loops winding once in y with |x| < pi; it is invariant under
    y-translations but shifts by 2*pi*t under x-translations, exhibiting the
    locally-constant defect that blocks an invariant volume functional.
    """
    return PlanarOneForm(lambda p: np.zeros(len(p)), lambda p: p[:, 0],
                         description="x dy (strip)")


class SpherePrimitive:
    """eta = (z - 1) d(azimuth) on the unit sphere minus the south pole.

    Oriented so that the gradient of the volume along the graph normal is the
    positive exponential Jacobian.  The excluded point is the antipode of the
    pole on the reference normal side.
    """

    def __init__(self, excluded_pole):
        self.excluded_pole = np.asarray(excluded_pole, dtype=float)

    def pullback_integral(self, y, yp, grid):
        gap = np.linalg.norm(y - self.excluded_pole, axis=1)
        if gap.min() < 0.2:
            raise ChartExitError(
                "curve too close to the excluded point of the volume primitive")
        pole = -self.excluded_pole
        # Rotate so the retained pole is +z, then integrate (z-1) dpsi.
        R = _rotation_to_z(pole)
        w = y @ R.T
        wp = yp @ R.T
        rho2 = w[:, 0] ** 2 + w[:, 1] ** 2
        dpsi = (w[:, 0] * wp[:, 1] - w[:, 1] * wp[:, 0]) / rho2
        return float(grid.integrate((w[:, 2] - 1.0) * dpsi))


def _rotation_to_z(v):
    v = v / np.linalg.norm(v)
    z = np.array([0.0, 0.0, 1.0])
    c = float(v @ z)
    if c > 1 - 1e-12:
        return np.eye(3)
    if c < -1 + 1e-12:
        return np.diag([1.0, -1.0, -1.0])
    axis = np.cross(v, z)
    s = np.linalg.norm(axis)
    axis = axis / s
    K = np.array([[0, -axis[2], axis[1]],
                  [axis[2], 0, -axis[0]],
                  [-axis[1], axis[0], 0]])
    return np.eye(3) + s * K + (1 - c) * (K @ K)


# ---------------------------------------------------------------------------
# ambients


class PlaneAmbient:
    kind = "plane"
    dim = 2
    gauss_curvature = 0.0
    killing_dim = 3
    has_volume_primitive = True
    periodic_chart = False

    def killing_fields(self, points):
        n = len(points)
        K = np.zeros((n, 3, 2))
        K[:, 0, 0] = 1.0
        K[:, 1, 1] = 1.0
        K[:, 2, 0] = -points[:, 1]
        K[:, 2, 1] = points[:, 0]
        return K

    def isometry(self, g, points):
        tx, ty, alpha = g
        c, s = np.cos(alpha), np.sin(alpha)
        R = np.array([[c, -s], [s, c]])
        return points @ R.T + np.array([tx, ty])

    def inverse_element(self, g):
        tx, ty, alpha = g
        c, s = np.cos(-alpha), np.sin(-alpha)
        R = np.array([[c, -s], [s, c]])
        t = -(R @ np.array([tx, ty]))
        return np.array([t[0], t[1], -alpha])

    def exp(self, base, normal, phi):
        return base + phi[:, None] * normal

    def transported_normal(self, base, normal, phi):
        return normal

    def volume_primitive_for(self, reference):
        return standard_area_primitive()


class FlatTorusAmbient:
    kind = "flat_torus"
    dim = 2
    gauss_curvature = 0.0
    killing_dim = 2
    has_volume_primitive = False
    periodic_chart = True

    def killing_fields(self, points):
        n = len(points)
        K = np.zeros((n, 2, 2))
        K[:, 0, 0] = 1.0
        K[:, 1, 1] = 1.0
        return K

    def isometry(self, g, points):
        return points + np.asarray(g)

    def inverse_element(self, g):
        return -np.asarray(g)

    def exp(self, base, normal, phi):
        return base + phi[:, None] * normal

    def transported_normal(self, base, normal, phi):
        return normal

    def volume_primitive_for(self, reference):
        return None


class SphereAmbient:
    kind = "sphere"
    dim = 3
    gauss_curvature = 1.0
    killing_dim = 3
    has_volume_primitive = True
    periodic_chart = False

    def killing_fields(self, points):
        n = len(points)
        K = np.zeros((n, 3, 3))
        basis = np.eye(3)
        for j in range(3):
            K[:, j, :] = np.cross(basis[j], points)
        return K

    def isometry(self, g, points):
        g = np.asarray(g, dtype=float)
        angle = np.linalg.norm(g)
        if angle < 1e-300:
            return points.copy()
        axis = g / angle
        Kx = np.array([[0, -axis[2], axis[1]],
                       [axis[2], 0, -axis[0]],
                       [-axis[1], axis[0], 0]])
        R = np.eye(3) + np.sin(angle) * Kx + (1 - np.cos(angle)) * (Kx @ Kx)
        return points @ R.T

    def inverse_element(self, g):
        return -np.asarray(g)

    def exp(self, base, normal, phi):
        return np.cos(phi)[:, None] * base + np.sin(phi)[:, None] * normal

    def transported_normal(self, base, normal, phi):
        return -np.sin(phi)[:, None] * base + np.cos(phi)[:, None] * normal

    def volume_primitive_for(self, reference):
        side = reference.normals.mean(axis=0)
        pole = side / np.linalg.norm(side)
        return SpherePrimitive(excluded_pole=-pole)


def make_ambient(kind):
    table = {"plane": PlaneAmbient, "sphere": SphereAmbient,
             "flat_torus": FlatTorusAmbient}
    if kind not in table:
        raise ValueError(f"unknown ambient {kind!r}")
    return table[kind]()


# ---------------------------------------------------------------------------
# references and graphs


@dataclass
class ReferenceCurve:
    """Embedded reference with its Frenet data.

    ``speed`` = |x'(theta)|, ``curv`` = the signed curvature with respect to
    the stored normal (circle with outward normal: +1/r).  The frames of the
    built-in references satisfy J T = -N, J N = T with J the +90-degree chart
    rotation; the graph geometry below relies on that orientation.
    """

    grid: object
    ops: object
    points: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    speed: np.ndarray = None
    curv: np.ndarray = None
    winding: tuple = (0, 0)


def plane_circle_reference(n=128, scheme="spectral", radius=1.0):
    grid = make_grid(n)
    ops = derivative_matrices(grid, scheme)
    th = grid.nodes
    pts = radius * np.column_stack([np.cos(th), np.sin(th)])
    T = np.column_stack([-np.sin(th), np.cos(th)])
    N = np.column_stack([np.cos(th), np.sin(th)])
    return ReferenceCurve(grid, ops, pts, T, N,
                          speed=np.full(n, radius), curv=np.full(n, 1.0 / radius))


def sphere_equator_reference(n=128, scheme="spectral"):
    grid = make_grid(n)
    ops = derivative_matrices(grid, scheme)
    th = grid.nodes
    pts = np.column_stack([np.cos(th), np.sin(th), np.zeros(n)])
    T = np.column_stack([-np.sin(th), np.cos(th), np.zeros(n)])
    N = np.tile(np.array([0.0, 0.0, 1.0]), (n, 1))
    return ReferenceCurve(grid, ops, pts, T, N,
                          speed=np.ones(n), curv=np.zeros(n))


def torus_loop_reference(n=128, scheme="spectral", x0=0.0):
    """Vertical winding-(0,1) loop on the chart torus, normal in +x."""
    grid = make_grid(n)
    ops = derivative_matrices(grid, scheme)
    th = grid.nodes
    pts = np.column_stack([np.full(n, x0), th])
    T = np.tile(np.array([0.0, 1.0]), (n, 1))
    N = np.tile(np.array([1.0, 0.0]), (n, 1))
    return ReferenceCurve(grid, ops, pts, T, N,
                          speed=np.ones(n), curv=np.zeros(n), winding=(0, 1))


@dataclass
class NormalGraph:
    ambient: object
    reference: ReferenceCurve
    phi: np.ndarray

    def with_phi(self, phi):
        return NormalGraph(self.ambient, self.reference, np.asarray(phi, dtype=float))


def _check_embedded(ambient, points):
    n = len(points)
    diffs = points[:, None, :] - points[None, :, :]
    if ambient.periodic_chart:
        diffs = _wrap(diffs)
    dist = np.linalg.norm(diffs, axis=2)
    idx = np.arange(n)
    chord = np.mean(dist[idx, (idx + 1) % n])
    sep = np.abs(idx[:, None] - idx[None, :])
    sep = np.minimum(sep, n - sep)
    far = sep >= 3
    # self-intersection: nodes far apart along the curve but closer than
    # half the mean node spacing of the curve itself (scale-aware h/2 rule,
    # so uniformly shrinking loops stay admissible)
    if far.any() and dist[far].min() < 0.5 * chord:
        raise SelfIntersectionError(
            f"graph curve self-intersects (min far-node distance "
            f"{dist[far].min():.3g} < half node spacing {0.5 * chord:.3g})")


def graph_to_curve(ambient, graph):
    """Nodal curve of the graph; raises on self-intersection."""
    ref = graph.reference
    y = ambient.exp(ref.points, ref.normals, graph.phi)
    _check_embedded(ambient, y)
    return y


def _winding_lift(reference):
    return np.outer(reference.grid.nodes, np.asarray(reference.winding, dtype=float))


def _graph_geometry(ambient, graph):
    """Curve geometry of a normal graph in intrinsic frame coordinates.

    The graph velocity is decomposed against the reference frame,
    y' = a T + b n-direction, with a and b scalar fields built from phi and
    the analytic reference speed/curvature.  Working intrinsically keeps the
    linearizations at the reference free of spectral aliasing and handles
    the winding lift of torus loops automatically.  The curvature sign
    convention makes the unit circle with outward normal have H = +1, and
    ``jac`` (the swept-volume density of the normal exponential) positive.
    """
    ref = graph.reference
    grid, ops = ref.grid, ref.ops
    phi = graph.phi
    y = graph_to_curve(ambient, graph)
    dphi = ops.D1 @ phi
    ddphi = ops.D2 @ phi
    tilde_n = ambient.transported_normal(ref.points, ref.normals, phi)
    if ambient.dim == 2:
        kr = ref.curv * ref.speed
        a = ref.speed + kr * phi
        ap = kr * dphi  # built-in references have constant speed and curv
        b, bp = dphi, ddphi
        ell = np.hypot(a, b)
        psi_p = (bp * a - ap * b) / ell**2
        H = (kr - psi_p) / ell
        jac = a
        yp = a[:, None] * ref.tangents + b[:, None] * ref.normals
        n_y = (a[:, None] * ref.normals - b[:, None] * ref.tangents) / ell[:, None]
    else:
        # unit-sphere graphs over the equator: frame (T, tilde_n) rotates
        # covariantly at rate sin(phi) along the azimuth
        a = np.cos(phi)
        ap = -np.sin(phi) * dphi
        b, bp = dphi, ddphi
        ell = np.hypot(a, b)
        psi_p = (bp * a - ap * b) / ell**2
        H = -(psi_p + np.sin(phi)) / ell
        jac = a
        yp = a[:, None] * ref.tangents + b[:, None] * tilde_n
        n_y = (a[:, None] * tilde_n - b[:, None] * ref.tangents) / ell[:, None]
    T = yp / ell[:, None]
    ellp = (a * ap + b * bp) / ell
    return SimpleNamespace(y=y, yp=yp, ell=ell, ellp=ellp, T=T, n_y=n_y,
                           tilde_n=tilde_n, H=H, jac=jac, grid=grid, ops=ops)


def mean_curvature(ambient, graph):
    """Signed geodesic curvature of the graph curve (the curvature of the
    unit circle with respect to its outward orientation is +1)."""
    return _graph_geometry(ambient, graph).H


def arclength_laplacian(geo):
    return (geo.ops.D2 / (geo.ell**2)[:, None]
            - (geo.ellp / geo.ell**3)[:, None] * geo.ops.D1)


def cmc_jacobi(ambient, graph, warn_tol=1e-6):
    """Second-variation operator -Lap_s - (K_bar + H^2) at a CMC graph.

    Attaches a warning when the curvature is not constant to ``warn_tol``;
    the coefficient then uses the nodal curvature values.
    """
    geo = _graph_geometry(ambient, graph)
    spread = geo.H.max() - geo.H.min()
    if spread > warn_tol:
        import warnings
        warnings.warn(
            f"Jacobi operator at a non-CMC graph (curvature spread {spread:.3g})",
            stacklevel=2)
    pot = ambient.gauss_curvature + geo.H**2
    return -arclength_laplacian(geo) - np.diag(pot)


def killing_normal_components(ambient, graph):
    """Columns g_bar(K_j, n_y) along the graph curve (n x d matrix)."""
    geo = _graph_geometry(ambient, graph)
    K = ambient.killing_fields(geo.y)
    return np.einsum("kjd,kd->kj", K, geo.n_y)


@dataclass
class StokesReport:
    r1: float
    r2: float  # None when the curve does not bound
    fluxes: np.ndarray
    bounding: bool


def stokes_identity_check(ambient, graph):
    """Quadrature residuals of the Killing-field identities.

    ``r1`` is the worst |integral of g_bar(K, curvature vector) ds| over the
    ambient Killing fields; it vanishes for every closed curve.  ``r2`` is
    the worst normal-flux integral |integral of g_bar(K, n) ds|, which
    vanishes exactly when the curve bounds; for non-contractible torus loops
    it is reported as not applicable (None) and the raw fluxes are returned
    (the transverse flux equals the curve length).
    """
    geo = _graph_geometry(ambient, graph)
    comp = killing_normal_components(ambient, graph)
    grid = geo.grid
    # curvature vector = -H n_y
    r1 = float(np.max(np.abs([grid.integrate(-geo.H * comp[:, j] * geo.ell)
                              for j in range(comp.shape[1])])))
    fluxes = np.array([grid.integrate(comp[:, j] * geo.ell)
                       for j in range(comp.shape[1])])
    bounding = not (ambient.periodic_chart and graph.reference.winding != (0, 0))
    r2 = float(np.max(np.abs(fluxes))) if bounding else None
    return StokesReport(r1=r1, r2=r2, fluxes=fluxes, bounding=bounding)


def area_functional(ambient, graph):
    geo = _graph_geometry(ambient, graph)
    return float(geo.grid.integrate(geo.ell))


def volume_functional(ambient, graph, primitive=None):
    """Pullback integral of a primitive of the ambient area form.

    Raises :class:`NoVolumePrimitiveError` on ambients without one (the flat
    torus) unless an explicit local primitive is passed.
    """
    if primitive is None:
        primitive = ambient.volume_primitive_for(graph.reference)
    if primitive is None:
        raise NoVolumePrimitiveError(
            f"ambient {ambient.kind!r} carries no volume primitive near a "
            f"winding loop")
    geo = _graph_geometry(ambient, graph)
    return primitive.pullback_integral(geo.y, geo.yp, geo.grid)


def average_primitive(ambient, group_samples, base=None):
    """Haar-average a planar primitive over the rotation subgroup.

    With N uniformly spaced rotation samples the average of any polynomial
    primitive of trigonometric degree < N is exact; for the default x dy the
    result is (x dy - y dx)/2.
    """
    if ambient.kind != "plane":
        raise ValueError("primitive averaging implemented for the plane ambient")
    if group_samples < 4:
        raise ValueError("need at least 4 rotation samples")
    if base is None:
        base = PlanarOneForm(lambda p: np.zeros(len(p)), lambda p: p[:, 0],
                             description="x dy")
    angles = TWO_PI * np.arange(group_samples) / group_samples

    def averaged_coeffs(points):
        acc = np.zeros((len(points), 2))
        for alpha in angles:
            c, s = np.cos(alpha), np.sin(alpha)
            R = np.array([[c, -s], [s, c]])
            q = points @ R.T
            a, b = base.a(q), base.b(q)
            acc[:, 0] += c * a + s * b
            acc[:, 1] += -s * a + c * b
        return acc / group_samples

    return PlanarOneForm(lambda p: averaged_coeffs(p)[:, 0],
                         lambda p: averaged_coeffs(p)[:, 1],
                         description=f"rotation average ({group_samples} samples)")


def primitive_invariance_defect(form, points, angles):
    """Worst coefficient mismatch between the form and its rotation pullbacks."""
    worst = 0.0
    base_c = form.coefficients(points)
    for alpha in angles:
        c, s = np.cos(alpha), np.sin(alpha)
        R = np.array([[c, -s], [s, c]])
        q = points @ R.T
        cc = form.coefficients(q)
        pulled = np.column_stack([c * cc[:, 0] + s * cc[:, 1],
                                  -s * cc[:, 0] + c * cc[:, 1]])
        worst = max(worst, float(np.max(np.abs(pulled - base_c))))
    return worst


# ---------------------------------------------------------------------------
# isometry action on graphs


def isometry_regraph(ambient, graph, g, max_iter=20, tol=1e-11):
    """Move the graph curve by an isometry and re-graph over the reference.

    The moved curve is represented by its trigonometric interpolant and a new
    graph function is recovered by a per-node Newton solve along the
    reference normal lines (step clamped to h/2).  Divergence signals a group
    element outside the local action domain.
    """
    ref = graph.reference
    grid = ref.grid
    y = graph_to_curve(ambient, graph)
    z = ambient.isometry(g, y)
    s = grid.nodes.copy()

    if ambient.periodic_chart:
        lift = _winding_lift(ref)
        wind = np.asarray(ref.winding, dtype=float)
        z_per = z - lift
        dz_per = ref.ops.D1 @ z_per

        def z_at(si):
            return trig_interpolate(z_per, si, grid) + np.multiply.outer(si, wind)

        def dz_at(si):
            return trig_interpolate(dz_per, si, grid) + wind
    else:
        def z_at(si):
            return trig_interpolate(z, si, grid)

        def dz_at(si):
            return trig_interpolate(ref.ops.D1 @ z, si, grid)

    if ambient.dim == 2:
        for _ in range(max_iter):
            zp = z_at(s)
            delta = zp - ref.points
            if ambient.periodic_chart:
                delta = _wrap(delta)
            res = np.sum(delta * ref.tangents, axis=1)
            if np.max(np.abs(res)) < tol:
                break
            slope = np.sum(dz_at(s) * ref.tangents, axis=1)
            step = -res / slope
            step = np.clip(step, -0.5 * grid.h, 0.5 * grid.h)
            s = s + step
        else:
            raise OutOfActionDomainError(
                f"regraph Newton did not converge for g = {np.asarray(g)}")
        delta = z_at(s) - ref.points
        if ambient.periodic_chart:
            delta = _wrap(delta)
        phi = np.sum(delta * ref.normals, axis=1)
    else:
        m = np.cross(ref.points, ref.normals)
        for _ in range(max_iter):
            zp = z_at(s)
            res = np.sum(zp * m, axis=1)
            if np.max(np.abs(res)) < tol:
                break
            slope = np.sum(dz_at(s) * m, axis=1)
            step = -res / slope
            step = np.clip(step, -0.5 * grid.h, 0.5 * grid.h)
            s = s + step
        else:
            raise OutOfActionDomainError(
                f"regraph Newton did not converge for g = {np.asarray(g)}")
        zp = z_at(s)
        zp = zp / np.linalg.norm(zp, axis=1)[:, None]
        cosphi = np.sum(zp * ref.points, axis=1)
        if np.any(cosphi <= 0.1):
            raise OutOfActionDomainError(
                "moved curve left the normal-graph chart of the reference")
        phi = np.arctan2(np.sum(zp * ref.normals, axis=1), cosphi)
    return graph.with_phi(phi)


# ---------------------------------------------------------------------------
# problem builders


def _reference_for(kind, n, scheme, radius=1.0, x0=0.0):
    if kind == "plane":
        return plane_circle_reference(n, scheme, radius=radius)
    if kind == "sphere":
        return sphere_equator_reference(n, scheme)
    return torus_loop_reference(n, scheme, x0=x0)


def cmc_graph_problem(kind="plane", n=128, scheme="spectral", radius=1.0,
                      parameter_range=None, domain_radius=None):
    """Constant-curvature problem over the built-in reference of an ambient.

    States are nodal graph values; the parameter is the target curvature.
    The symmetry group is the ambient isometry group acting by
    move-and-regraph; its orbit-tangent columns are the Killing normal
    components scaled by the graph geometry.
    """
    ambient = make_ambient(kind)
    ref = _reference_for(kind, n, scheme, radius=radius)
    grid = ref.grid
    if parameter_range is None:
        parameter_range = {"plane": (0.3, 2.5), "sphere": (-0.8, 0.8),
                           "flat_torus": (-0.5, 0.5)}[kind]
    if domain_radius is None:
        domain_radius = {"plane": 0.7, "sphere": 0.7, "flat_torus": np.inf}[kind]
    primitive = ambient.volume_primitive_for(ref)

    def as_graph(state):
        return NormalGraph(ambient, ref, np.asarray(state, dtype=float))

    def f(state, lam):
        geo = _graph_geometry(ambient, as_graph(state))
        area = float(grid.integrate(geo.ell))
        if primitive is None:
            return area
        return area - lam * primitive.pullback_integral(geo.y, geo.yp, grid)

    def delta_f(state, lam):
        geo = _graph_geometry(ambient, as_graph(state))
        return (geo.H - lam) * geo.jac

    def orbit_tangent(state):
        geo = _graph_geometry(ambient, as_graph(state))
        K = ambient.killing_fields(geo.y)
        comp = np.einsum("kjd,kd->kj", K, geo.n_y)
        return comp * (geo.ell / geo.jac)[:, None]

    def local_action(g, state):
        return isometry_regraph(ambient, as_graph(state), g).phi

    group = GroupModel(d=ambient.killing_dim, orbit_tangent=orbit_tangent,
                       local_action=local_action, domain_radius=domain_radius,
                       abelian=(kind != "plane" and kind != "sphere"),
                       name=f"isometries of {kind}")
    gram = GramPair.from_weights(grid.weights)
    sampler = smooth_field_sampler(grid, amplitude=0.08)
    sample_lambda = None
    if kind == "flat_torus":
        # Only the zero-curvature target pairs delta_f with the (area)
        # functional; elsewhere no invariant volume term exists to complete f.
        sample_lambda = lambda rng: 0.0
    return ProblemInstance(
        n=grid.n, f=f, delta_f=delta_f, gram=gram, group=group,
        linearization=None, parameter_range=parameter_range,
        name=f"cmc[{kind}]",
        sample_state=sampler, sample_lambda=sample_lambda,
        metadata={"ambient": ambient, "reference": ref, "as_graph": as_graph,
                  "grid": grid, "x0": np.zeros(grid.n), "kind": "cmc",
                  "primitive": primitive})
