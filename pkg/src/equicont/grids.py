"""Uniform periodic grids, derivative matrices, quadrature, band-limited shifts.

Everything downstream (curve problems, torus maps) is discretized on these
grids.  Nodes are exactly ``k * period / n`` and the trapezoid rule on a
periodic grid reduces to equal weights ``h = period / n``, which integrates
trigonometric polynomials of degree < n exactly (superconvergence).
"""

import numpy as np

from .errors import GridSizeError

TWO_PI = 2.0 * np.pi


class Grid:
    """Uniform periodic grid on S^1 (dim=1) or the square 2-torus (dim=2).

    Parameters
    ----------
    n : int
        Nodes per axis.  Must be even (spectral differentiation parity)
        and at least 8.
    period : float
        Length of the periodic interval along each axis.
    dim : int
        1 for a circle, 2 for a tensor-product torus grid.

    Attributes
    ----------
    nodes : ndarray
        Shape (n,) for dim=1; shape (n*n, 2) for dim=2 with row-major
        ordering ``nodes[i*n + j] = (theta_i, theta_j)``.
    h : float
        Node spacing ``period / n``.
    weights : ndarray
        Quadrature weights, all equal to h (dim=1) or h^2 (dim=2).
    """

    def __init__(self, n, period=TWO_PI, dim=1):
        if n % 2 != 0 or n < 8:
            raise GridSizeError(f"node count must be even and >= 8, got {n}")
        if period <= 0:
            raise GridSizeError(f"period must be positive, got {period}")
        if dim not in (1, 2):
            raise GridSizeError(f"dim must be 1 or 2, got {dim}")
        self.n = int(n)
        self.period = float(period)
        self.dim = int(dim)
        self.h = self.period / self.n
        axis = self.h * np.arange(self.n)
        if dim == 1:
            self.nodes = axis
            self.weights = np.full(self.n, self.h)
        else:
            tx, ty = np.meshgrid(axis, axis, indexing="ij")
            self.nodes = np.column_stack([tx.ravel(), ty.ravel()])
            self.weights = np.full(self.n * self.n, self.h**2)
        self.size = self.nodes.shape[0]
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def integrate(self, values):
        """Quadrature of nodal values (trapezoid rule, equal weights)."""
        values = np.asarray(values)
        return (self.weights * values.reshape(self.size, -1).T).sum(axis=-1).squeeze()

    def __repr__(self):
        return f"Grid(n={self.n}, period={self.period:.6g}, dim={self.dim})"


def make_grid(n, period=TWO_PI, dim=1):
    """Build a uniform periodic grid; rejects odd n with a sizing error."""
    return Grid(n, period=period, dim=dim)


def _fourier_diff_matrix(n, period, order):
    # Wave numbers in FFT layout; odd derivatives zero the Nyquist mode
    # (real, even grids cannot represent its sine partner), even derivatives
    # keep it: the sawtooth differentiates twice to -(n/2)^2 * sawtooth.
    k = np.fft.fftfreq(n, d=1.0 / n)
    mult = (1j * k * (TWO_PI / period)) ** order
    if order % 2 == 1:
        mult[n // 2] = 0.0
    return np.real(np.fft.ifft(mult[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0))


def _fd4_diff_matrix(n, period, order):
    h = period / n
    D = np.zeros((n, n))
    idx = np.arange(n)
    if order == 1:
        stencil = {-2: 1.0 / 12, -1: -8.0 / 12, 1: 8.0 / 12, 2: -1.0 / 12}
        scale = 1.0 / h
    else:
        stencil = {-2: -1.0 / 12, -1: 16.0 / 12, 0: -30.0 / 12, 1: 16.0 / 12, 2: -1.0 / 12}
        scale = 1.0 / h**2
    for off, c in stencil.items():
        D[idx, (idx + off) % n] += c * scale
    return D


class DiffOperators:
    """Dense periodic derivative matrices for a grid.

    For dim=1 the attributes are ``D1`` and ``D2``.  For dim=2 the partial
    derivative operators ``Dx, Dy, D2x, D2y`` and the Laplacian ``lap`` act
    on row-major flattened nodal arrays.
    """

    def __init__(self, grid, scheme="spectral"):
        if scheme not in ("spectral", "fd4"):
            raise ValueError(f"scheme must be 'spectral' or 'fd4', got {scheme!r}")
        self.grid = grid
        self.scheme = scheme
        build = _fourier_diff_matrix if scheme == "spectral" else _fd4_diff_matrix
        d1 = build(grid.n, grid.period, 1)
        d2 = build(grid.n, grid.period, 2)
        if grid.dim == 1:
            self.D1, self.D2 = d1, d2
        else:
            eye = np.eye(grid.n)
            self.Dx = np.kron(d1, eye)
            self.Dy = np.kron(eye, d1)
            self.D2x = np.kron(d2, eye)
            self.D2y = np.kron(eye, d2)
            self.lap = self.D2x + self.D2y


def derivative_matrices(grid, scheme="spectral"):
    """Derivative operators for ``grid``; see :class:`DiffOperators`."""
    return DiffOperators(grid, scheme=scheme)


def circular_shift(values, shift, grid):
    """Band-limited evaluation of ``f(theta + shift)`` from nodal samples.

    Shifts by an exact multiple of the node spacing are cyclic permutations.
    Fractional shifts use trigonometric interpolation; the Nyquist mode is
    shifted with the cosine rule (the real-symmetric interpolant), which is
    consistent with grid-aligned rolls.  ``values`` may be (n,) or (n, m);
    the shift acts along axis 0.
    """
    if grid.dim != 1:
        raise ValueError("circular_shift is defined for 1-d grids")
    values = np.asarray(values, dtype=float)
    n = grid.n
    if values.shape[0] != n:
        raise ValueError(f"expected leading axis {n}, got {values.shape}")
    ratio = shift / grid.h
    nearest = np.rint(ratio)
    if abs(ratio - nearest) < 1e-12:
        return np.roll(values, -int(nearest) % n, axis=0)
    k = np.fft.fftfreq(n, d=1.0 / n)
    phase = np.exp(1j * k * (TWO_PI / grid.period) * shift)
    phase[n // 2] = np.cos(k[n // 2] * (TWO_PI / grid.period) * shift)
    spec = np.fft.fft(values, axis=0)
    shape = (n,) + (1,) * (values.ndim - 1)
    return np.real(np.fft.ifft(spec * phase.reshape(shape), axis=0))


def trig_interpolate(values, points, grid):
    """Evaluate the trigonometric interpolant of nodal data at arbitrary points.

    ``values`` is (n,) or (n, m); ``points`` is any array of parameter values.
    Returns samples with shape ``points.shape + values.shape[1:]``.
    """
    values = np.asarray(values, dtype=float)
    points = np.asarray(points, dtype=float)
    n = grid.n
    spec = np.fft.fft(values, axis=0) / n
    k = np.fft.fftfreq(n, d=1.0 / n) * (TWO_PI / grid.period)
    ang = np.multiply.outer(points.ravel(), k)
    basis = np.exp(1j * ang)
    basis[:, n // 2] = np.cos(ang[:, n // 2])
    out = np.real(basis @ spec.reshape(n, -1))
    return out.reshape(points.shape + values.shape[1:])
