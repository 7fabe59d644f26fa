"""Discretized invariant variational problems.

A problem instance bundles the scalar functional f(x, lambda), its
gradient-like field delta_f (the nodal field whose M-pairing with a variation
reproduces the directional derivative of f), the quadrature pairings, and the
symmetry-group model.  Critical states are the zeros of delta_f.
"""

import numpy as np


class ProblemInstance:
    """A discretized invariant variational problem.

    Parameters
    ----------
    n : int
        State dimension.
    f : callable
        ``f(x, lam) -> float``.
    delta_f : callable
        ``delta_f(x, lam) -> (n,)`` gradient-like field; its M_pair-pairing
        with a variation matches the directional derivative of f.
    gram : GramPair
    group : GroupModel
    linearization : callable, optional
        ``linearization(x, lam) -> (n, n)`` analytic Jacobian of delta_f.
        When absent the solvers fall back to central finite differences.
    parameter_range : tuple
        Admissible interval for the external parameter.
    sample_state : callable, optional
        ``sample_state(rng) -> (n,)`` smooth random state for verification
        suites (gradient and equivariance checks).
    sample_lambda : callable, optional
        ``sample_lambda(rng) -> float``; defaults to uniform sampling of
        ``parameter_range``.  Problems whose functional is only consistent
        with delta_f at specific parameter values (the flat-torus
        obstruction) pin this down.
    """

    def __init__(self, n, f, delta_f, gram, group, linearization=None,
                 parameter_range=(0.0, 1.0), name="", sample_state=None,
                 sample_lambda=None, metadata=None):
        self.n = int(n)
        self.f = f
        self.delta_f = delta_f
        self.gram = gram
        self.group = group
        self.linearization = linearization
        self.parameter_range = (float(parameter_range[0]), float(parameter_range[1]))
        self.name = name
        self._sample_state = sample_state
        self._sample_lambda = sample_lambda
        self.metadata = dict(metadata or {})

    def sample_state(self, rng):
        if self._sample_state is None:
            return 0.05 * rng.standard_normal(self.n)
        return np.asarray(self._sample_state(rng), dtype=float)

    def sample_lambda(self, rng):
        if self._sample_lambda is not None:
            return float(self._sample_lambda(rng))
        lo, hi = self.parameter_range
        return float(rng.uniform(lo, hi))

    def residual_norm(self, x, lam):
        return float(np.max(np.abs(self.delta_f(x, lam))))


def gradient_consistency(problem, x, v, lam, step=None):
    """Relative mismatch between the paired gradient field and a central
    finite difference of the functional along direction ``v``.

    Returns ``|v^T M_pair delta_f - FD| / (1 + |FD|)``.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if step is None:
        step = 1e-6 * (1.0 + np.linalg.norm(x)) / max(np.linalg.norm(v), 1e-30)
    fp = problem.f(x + step * v, lam)
    fm = problem.f(x - step * v, lam)
    fd = (fp - fm) / (2.0 * step)
    paired = float(v @ problem.gram.pair(problem.delta_f(x, lam)))
    return abs(paired - fd) / (1.0 + abs(fd))


def smooth_field_sampler(grid, amplitude=0.1, max_mode=4, components=1):
    """Random band-limited nodal fields (decaying trig coefficients).

    Verification suites draw states from here: rough white-noise states are
    outside the resolution of any fixed discretization, while band-limited
    states keep quadrature consistency errors near machine precision.
    """
    theta = grid.nodes if grid.dim == 1 else None

    def sample(rng):
        cols = []
        for _ in range(components):
            if grid.dim == 1:
                field = np.zeros(grid.n)
                for k in range(1, max_mode + 1):
                    a, b = rng.standard_normal(2) / (1 + k**2)
                    field += a * np.cos(k * theta * (2 * np.pi / grid.period))
                    field += b * np.sin(k * theta * (2 * np.pi / grid.period))
                field += rng.standard_normal() / 4.0
            else:
                tx = grid.nodes[:, 0] * (2 * np.pi / grid.period)
                ty = grid.nodes[:, 1] * (2 * np.pi / grid.period)
                field = np.zeros(grid.size)
                for kx in range(0, max_mode + 1):
                    for ky in range(0, max_mode + 1):
                        if kx == 0 and ky == 0:
                            continue
                        a, b = rng.standard_normal(2) / (1 + kx**2 + ky**2)
                        field += a * np.cos(kx * tx + ky * ty)
                        field += b * np.sin(kx * tx - ky * ty)
            cols.append(amplitude * field)
        return np.concatenate(cols)

    return sample
