"""Quadrature mass matrices realizing the inner products and pairings.

In the finite-dimensional setting the inclusion of states into the gradient
space and the compatibility map are identities, so a single symmetric
positive-definite matrix ``M_X`` plays every pairing role; ``M_pair`` is kept
as a separate handle (equal to ``M_X`` by default) for problems that want a
different duality weighting.
"""

import numpy as np
import scipy.linalg


class GramPair:
    """Mass matrix ``M_X`` plus the pairing matrix ``M_pair``.

    ``M_X`` must be symmetric positive definite.  ``inner``/``norm`` use
    ``M_X``; ``pair`` applies ``M_pair`` (gradient duality).
    """

    def __init__(self, M_X, M_pair=None):
        M_X = np.asarray(M_X, dtype=float)
        if M_X.ndim != 2 or M_X.shape[0] != M_X.shape[1]:
            raise ValueError("M_X must be square")
        if not np.allclose(M_X, M_X.T, atol=1e-12 * max(1.0, np.abs(M_X).max())):
            raise ValueError("M_X must be symmetric")
        self.M_X = M_X
        self.M_pair = M_X if M_pair is None else np.asarray(M_pair, dtype=float)
        self.n = M_X.shape[0]
        self._diagonal = np.allclose(M_X, np.diag(np.diagonal(M_X)))
        if self._diagonal:
            d = np.diagonal(M_X)
            if np.any(d <= 0):
                raise ValueError("M_X must be positive definite")
            self._sqrt = np.sqrt(d)
        else:
            # Cholesky doubles as the positive-definiteness check.
            self._chol = scipy.linalg.cholesky(M_X, lower=True)

    @classmethod
    def from_weights(cls, weights, components=1):
        """Diagonal mass matrix from quadrature weights, tiled per component."""
        w = np.tile(np.asarray(weights, dtype=float), components)
        return cls(np.diag(w))

    def inner(self, u, v):
        return float(np.asarray(u) @ self.M_X @ np.asarray(v))

    def norm(self, u):
        return float(np.sqrt(max(self.inner(u, u), 0.0)))

    def pair(self, u):
        """Apply the pairing matrix (state field -> covector coefficients)."""
        return self.M_pair @ np.asarray(u)

    def weighted(self, basis):
        """Map columns into the half-weighted geometry (M^(1/2) * basis)."""
        basis = np.atleast_2d(np.asarray(basis, dtype=float))
        if self._diagonal:
            return self._sqrt[:, None] * basis
        return self._chol.T @ basis

    def unweight(self, basis):
        """Inverse of :meth:`weighted`."""
        basis = np.asarray(basis, dtype=float)
        if self._diagonal:
            return basis / self._sqrt[:, None]
        return scipy.linalg.solve_triangular(self._chol.T, basis, lower=False)

    def orthonormalize(self, basis, rank_tol=1e-12):
        """M_X-orthonormal basis of the effective column span (SVD-truncated,
        so zero or dependent columns do not manufacture directions)."""
        basis = np.asarray(basis, dtype=float)
        if basis.size == 0:
            return basis.reshape(self.n, 0)
        u, s, _ = np.linalg.svd(self.weighted(basis), full_matrices=False)
        keep = s > rank_tol * (s[0] if s.size and s[0] > 0 else 1.0)
        return self.unweight(u[:, keep])

    def complement(self, basis):
        """M_X-orthonormal basis of the orthogonal complement of ``basis``."""
        basis = np.asarray(basis, dtype=float).reshape(self.n, -1)
        if basis.shape[1] == 0:
            return self.unweight(np.eye(self.n))
        w = self.weighted(basis)
        q, _ = np.linalg.qr(w, mode="complete")
        rank = np.linalg.matrix_rank(w, tol=1e-12 * max(1.0, np.abs(w).max()))
        return self.unweight(q[:, rank:])
