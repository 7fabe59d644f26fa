"""Slice construction transverse to symmetry orbits.

The slice S through a certified critical state is the M_X-orthogonal
complement of the orbit-tangent space; the multiplier directions Y are the
effective orbit generators themselves (at a nondegenerate state they span the
kernel, and keeping their native scaling makes the multipliers directly
comparable to the external parameter in the obstructed cases).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateOrbitError, IllPosedComplementError
from .linearize import (DEFAULT_ANGLE_TOL, DEFAULT_RANK_TOL, DEFAULT_SVD_TOL,
                        assemble_linearization, kernel_basis,
                        nondegeneracy_check)

DEFAULT_COND_MAX = 1e10


@dataclass
class SliceBasis:
    """Slice data at a continuation center.

    Attributes
    ----------
    x0 : ndarray
        Center state.
    lam0 : float
        Parameter at which the slice was built.
    S_basis : ndarray
        (n, n-r) M_X-orthonormal columns spanning the slice.
    orbit_basis : ndarray
        Full (n, d) generator matrix B(x0).
    Y_basis : ndarray
        (n, r) effective generator columns used as multiplier directions.
    condition : float
        Condition number of the bordered matrix [L*S | Y].
    report : NondegeneracyReport
    """

    x0: np.ndarray
    lam0: float
    S_basis: np.ndarray
    orbit_basis: np.ndarray
    Y_basis: np.ndarray
    condition: float
    report: object
    kernel: np.ndarray

    @property
    def rank(self):
        return self.Y_basis.shape[1]

    def project_to_slice(self, delta):
        """M_X-orthogonal projection of a state offset onto span(S_basis)."""
        coeff = self.S_basis.T @ (self.gram_M @ delta)
        return self.S_basis @ coeff, coeff

    # set by build_slice
    gram_M: np.ndarray = None


def _effective_columns(B, gram, rank):
    """Pick ``rank`` generator columns (pivoted QR), keeping their native scale."""
    if rank == 0:
        return B[:, :0]
    _, _, piv = scipy.linalg.qr(gram.weighted(B), pivoting=True, mode="economic")
    return B[:, np.sort(piv[:rank])]


def build_slice(problem, x0, lam0, svd_tol=DEFAULT_SVD_TOL,
                angle_tol=DEFAULT_ANGLE_TOL, rank_tol=DEFAULT_RANK_TOL,
                cond_max=DEFAULT_COND_MAX, L=None):
    """Construct the slice through a certified nondegenerate critical state.

    Raises
    ------
    DegenerateOrbitError
        When the kernel does not match the orbit-tangent space.
    IllPosedComplementError
        When the bordered matrix [L*S | Y] has condition number above
        ``cond_max`` (the multiplier directions fail to complement Im L).
    """
    x0 = np.asarray(x0, dtype=float)
    gram = problem.gram
    if L is None:
        L = assemble_linearization(problem, x0, lam0)
    info = kernel_basis(L, gram, svd_tol=svd_tol)
    B = problem.group.orbit_tangent(x0)
    report = nondegeneracy_check(
        info.basis, B, gram, angle_tol=angle_tol, rank_tol=rank_tol,
        singular_values=info.singular_values, ambiguous=info.ambiguous,
        gap=info.gap)
    if not report.nondegenerate:
        raise DegenerateOrbitError(
            f"degenerate orbit at lam={lam0:.6g}: kernel dim {report.kernel_dim} "
            f"vs orbit rank {report.orbit_rank}, principal angle "
            f"{report.principal_angle:.3g}", report=report)
    r = report.orbit_rank
    Y = _effective_columns(B, gram, r)
    S = gram.complement(B)
    bordered = np.hstack([L @ S, Y]) if r else L @ S
    cond = float(np.linalg.cond(bordered))
    if not np.isfinite(cond) or cond > cond_max:
        raise IllPosedComplementError(
            f"bordered matrix condition number {cond:.3g} exceeds {cond_max:.3g}")
    sl = SliceBasis(x0=x0, lam0=float(lam0), S_basis=S, orbit_basis=B,
                    Y_basis=Y, condition=cond, report=report,
                    kernel=info.basis)
    sl.gram_M = gram.M_X
    return sl
