"""Local symmetry-group actions on discretized states.

A group model carries the orbit-tangent generators B(x) (one column per Lie
algebra direction) and a local action defined for group elements in a stated
neighborhood of the identity.  The action is only required to satisfy the
identity and composition laws where defined; it need not be differentiable
everywhere, so the core solvers consume B(x) and finite differences of the
action rather than an analytic differential.
"""

import numpy as np

from .errors import OutOfActionDomainError


class GroupModel:
    """Finite-dimensional symmetry group acting locally on states.

    Parameters
    ----------
    d : int
        Group dimension (number of Lie algebra directions).
    orbit_tangent : callable
        ``orbit_tangent(x) -> (n, d)`` matrix of orbit-tangent generators.
    local_action : callable
        ``local_action(g, x) -> x'`` with ``g`` a length-d parameter vector;
        defined at least for ``|g| <= domain_radius``.
    domain_radius : float
        Euclidean bound on ``|g|`` for which the action is defined
        (``inf`` for global actions).
    abelian : bool
        Whether group parameters compose additively (used only by tests and
        round-trip diagnostics).
    """

    def __init__(self, d, orbit_tangent, local_action, domain_radius=np.inf,
                 abelian=False, name=""):
        self.d = int(d)
        self._orbit_tangent = orbit_tangent
        self._local_action = local_action
        self.domain_radius = float(domain_radius)
        self.abelian = bool(abelian)
        self.name = name

    def orbit_tangent(self, x):
        B = np.asarray(self._orbit_tangent(np.asarray(x, dtype=float)), dtype=float)
        B = B.reshape(len(x), -1)
        if B.shape[1] != self.d:
            raise ValueError(f"orbit_tangent returned {B.shape[1]} columns, expected {self.d}")
        return B

    def act(self, g, x):
        g = np.atleast_1d(np.asarray(g, dtype=float))
        if g.shape != (self.d,):
            raise ValueError(f"group element must have shape ({self.d},), got {g.shape}")
        if np.linalg.norm(g) > self.domain_radius:
            raise OutOfActionDomainError(
                f"|g| = {np.linalg.norm(g):.3g} exceeds action domain radius "
                f"{self.domain_radius:.3g}")
        return np.asarray(self._local_action(g, np.asarray(x, dtype=float)), dtype=float)

    def identity(self):
        return np.zeros(self.d)


def trivial_group(n):
    """Zero-dimensional group (no symmetry): empty generators, identity action."""
    return GroupModel(
        d=0,
        orbit_tangent=lambda x: np.zeros((len(x), 0)),
        local_action=lambda g, x: x,
        domain_radius=np.inf,
        abelian=True,
        name="trivial",
    )
