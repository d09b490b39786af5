"""Exponential data-fitting models and their reduced objectives.

Two concrete models are provided: plane-wave arrival fitting with complex
exponentials over a receiver array (amplitudes real, data stacked as
[real; imag] rows), and Gaussian-blob image fitting for blind sparse
deconvolution. Both expose the reduced objective

    f(theta) = min_a |Phi(theta) a - y|^2 + ridge |a|^2 + lambda |a|_1

whose gradient at the inner minimizer ``a_bar`` is, per parameter p,
``2 <dPhi/dp a_bar, Phi a_bar - y>``. A pseudo-spectrum subspace method
over the same steering vectors serves as the classical baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .lasso import LassoProblem, LassoSolution, solve_lasso

Array = np.ndarray


@dataclass
class StackedDesignMatrix:
    """Real 2m x n stack [Re; Im] of a complex m x n model matrix.

    For real-valued models the imaginary block is identically zero. The
    stacked inner product of two columns equals the real part of their
    complex inner product, so least squares in the stack matches complex
    least squares with real amplitudes.
    """

    real: Array
    imag: Array
    kind: str = ""
    params: Array = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        self.real = np.asarray(self.real, dtype=float)
        self.imag = np.asarray(self.imag, dtype=float)
        if self.real.shape != self.imag.shape:
            raise ValueError("real and imaginary blocks must have equal shapes")

    @property
    def stacked(self) -> Array:
        return np.vstack([self.real, self.imag])

    @property
    def shape(self) -> tuple:
        return self.real.shape


def stack_complex_vector(y: Array) -> Array:
    """Stack a complex vector into [Re(y); Im(y)]."""
    y = np.asarray(y)
    return np.concatenate([np.real(y).astype(float), np.imag(y).astype(float)])


@dataclass
class DoaModel:
    """Plane-wave arrival model: receivers in the plane, one angle per column.

    Column j of the model matrix has entries exp(-i theta_j . x_i) with
    theta_j = (cos phi_j, sin phi_j) on the unit circle and x_i the
    receiver locations. Snapshots, when present, are complex m x N.
    """

    receivers: Array
    angles: Array
    snapshots: Optional[Array] = None

    def __post_init__(self) -> None:
        self.receivers = np.atleast_2d(np.asarray(self.receivers, dtype=float))
        if self.receivers.shape[1] != 2:
            raise ValueError("receivers must be points in the plane")
        self.angles = np.mod(np.asarray(self.angles, dtype=float), 2.0 * np.pi)
        if self.receivers.shape[0] < 1 or self.angles.size < 1:
            raise ValueError("need at least one receiver and one angle")


def build_doa_matrix(model: DoaModel) -> tuple:
    """Stacked model matrix plus per-column angle derivatives.

    Returns ``(design, dcols)`` where ``dcols[:, j]`` is the derivative of
    stacked column j with respect to its angle phi_j.
    """
    x = model.receivers
    phi = model.angles
    dirs = np.column_stack([np.cos(phi), np.sin(phi)])  # (n, 2)
    ddirs = np.column_stack([-np.sin(phi), np.cos(phi)])
    phase = x @ dirs.T  # (m, n): theta_j . x_i
    u = x @ ddirs.T  # d(phase)/d(phi_j)
    cos_p, sin_p = np.cos(phase), np.sin(phase)
    design = StackedDesignMatrix(real=cos_p, imag=-sin_p, kind="doa", params=phi.copy())
    dcols = np.vstack([-sin_p * u, -cos_p * u])
    return design, dcols


@dataclass
class BlobModel:
    """Gaussian-blob image model: Phi_ij = exp(-s_j^2 |x_i - r_j|^2)."""

    grid_points: Array
    centers: Array
    scales: Array

    def __post_init__(self) -> None:
        self.grid_points = np.atleast_2d(np.asarray(self.grid_points, dtype=float))
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        self.scales = np.asarray(self.scales, dtype=float)
        if self.grid_points.shape[1] != 2 or self.centers.shape[1] != 2:
            raise ValueError("grid points and centers must lie in the plane")
        if self.grid_points.shape[0] < 1:
            raise ValueError("grid must be nonempty")
        if np.any(self.scales <= 0):
            raise ValueError("scales must be positive")
        if self.scales.size != self.centers.shape[0]:
            raise ValueError("one scale per center required")


def build_blob_matrix(model: BlobModel) -> tuple:
    """Stacked (zero-imaginary) blob matrix with partials in r and s.

    Returns ``(design, d_rx, d_ry, d_s)``; each derivative array is stacked
    like the design so column j holds the partial of column j.
    """
    x = model.grid_points  # (m, 2)
    r = model.centers  # (n, 2)
    s = model.scales  # (n,)
    diff_x = x[:, 0][:, None] - r[:, 0][None, :]
    diff_y = x[:, 1][:, None] - r[:, 1][None, :]
    sq = diff_x**2 + diff_y**2
    phi = np.exp(-(s**2)[None, :] * sq)
    zeros = np.zeros_like(phi)
    design = StackedDesignMatrix(real=phi, imag=zeros, kind="blob", params=s.copy())
    d_rx = np.vstack([2.0 * (s**2)[None, :] * diff_x * phi, zeros])
    d_ry = np.vstack([2.0 * (s**2)[None, :] * diff_y * phi, zeros])
    d_s = np.vstack([-2.0 * s[None, :] * sq * phi, zeros])
    return design, d_rx, d_ry, d_s


class DoaReducedObjective:
    """Reduced objective over the angle vector with an inner LASSO solve.

    Evaluation returns ``(value, gradient, a_hat)``. The inner solve is
    warm-started from the previous amplitudes when ``warm_start`` is set;
    a repeated evaluation at the same point returns the cached solution
    untouched because the warm start already satisfies the residual test.
    """

    def __init__(self, receivers, data, lam, ridge=0.0, inner_tol=1e-10,
                 inner_max_iters=200000, warm_start=True):
        self.receivers = np.atleast_2d(np.asarray(receivers, dtype=float))
        self.data = np.asarray(data, dtype=float)
        self.lam = float(lam)
        self.ridge = float(ridge)
        self.inner_tol = float(inner_tol)
        self.inner_max_iters = int(inner_max_iters)
        self.warm_start = warm_start
        self._warm: Optional[Array] = None

    def inner_solve(self, phi_angles) -> LassoSolution:
        design, _ = build_doa_matrix(DoaModel(self.receivers, phi_angles))
        problem = LassoProblem(design.stacked, self.data, lam=self.lam, ridge=self.ridge)
        a0 = self._warm if self.warm_start else None
        sol = solve_lasso(problem, tol=self.inner_tol, max_iters=self.inner_max_iters, a0=a0)
        if self.warm_start:
            self._warm = sol.a_hat.copy()
        return sol

    def __call__(self, phi_angles):
        design, dcols = build_doa_matrix(DoaModel(self.receivers, phi_angles))
        problem = LassoProblem(design.stacked, self.data, lam=self.lam, ridge=self.ridge)
        a0 = self._warm if self.warm_start else None
        sol = solve_lasso(problem, tol=self.inner_tol, max_iters=self.inner_max_iters, a0=a0)
        if self.warm_start:
            self._warm = sol.a_hat.copy()
        a = sol.a_hat
        resid = design.stacked @ a - self.data
        grad = 2.0 * a * (dcols.T @ resid)
        return sol.objective, grad, a


class BlobReducedObjective:
    """Reduced objective for blob fitting over packed parameters.

    The parameter vector is ``[r_x (n), r_y (n), s (n)]``; amplitudes are
    constrained nonnegative in the inner solve.
    """

    def __init__(self, grid_points, data, lam, ridge=0.0, inner_tol=1e-10,
                 inner_max_iters=200000, warm_start=True):
        self.grid_points = np.atleast_2d(np.asarray(grid_points, dtype=float))
        self.data = np.asarray(data, dtype=float)
        self.lam = float(lam)
        self.ridge = float(ridge)
        self.inner_tol = float(inner_tol)
        self.inner_max_iters = int(inner_max_iters)
        self.warm_start = warm_start
        self._warm: Optional[Array] = None

    @staticmethod
    def pack(centers, scales) -> Array:
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        return np.concatenate([centers[:, 0], centers[:, 1], np.asarray(scales, dtype=float)])

    @staticmethod
    def unpack(params) -> tuple:
        n = params.size // 3
        centers = np.column_stack([params[:n], params[n:2 * n]])
        return centers, params[2 * n:]

    def _build(self, params):
        centers, scales = self.unpack(np.asarray(params, dtype=float))
        # the matrix depends on s only through s^2, so evaluation is safe
        # even if the outer solver wanders to nonpositive scales
        model = BlobModel(self.grid_points, centers, np.where(scales == 0.0, 1e-12, np.abs(scales)))
        design, d_rx, d_ry, d_s = build_blob_matrix(model)
        sign = np.where(scales < 0, -1.0, 1.0)
        return design, d_rx, d_ry, d_s * sign[None, :]

    def __call__(self, params):
        design, d_rx, d_ry, d_s = self._build(params)
        problem = LassoProblem(design.stacked, self.data, lam=self.lam,
                               nonneg=True, ridge=self.ridge)
        a0 = self._warm if self.warm_start else None
        sol = solve_lasso(problem, tol=self.inner_tol, max_iters=self.inner_max_iters, a0=a0)
        if self.warm_start:
            self._warm = sol.a_hat.copy()
        a = sol.a_hat
        resid = design.stacked @ a - self.data
        grad = 2.0 * a * np.stack([d_rx.T @ resid, d_ry.T @ resid, d_s.T @ resid])
        return sol.objective, grad.ravel(), a


class DoaJointObjective:
    """Smooth part of the joint angle-amplitude objective.

    Operates on the packed vector ``[phi (n), a (n)]``; the l1 term on the
    amplitudes is left to the proximal operator (:meth:`prox`), as is the
    bookkeeping for the trace objective (:meth:`nonsmooth_value`).
    """

    def __init__(self, receivers, data, lam, ridge=0.0):
        self.receivers = np.atleast_2d(np.asarray(receivers, dtype=float))
        self.data = np.asarray(data, dtype=float)
        self.lam = float(lam)
        self.ridge = float(ridge)

    def split(self, z):
        n = z.size // 2
        return z[:n], z[n:]

    def __call__(self, z):
        phi, a = self.split(np.asarray(z, dtype=float))
        design, dcols = build_doa_matrix(DoaModel(self.receivers, phi))
        resid = design.stacked @ a - self.data
        value = float(resid @ resid) + self.ridge * float(a @ a)
        grad_phi = 2.0 * a * (dcols.T @ resid)
        grad_a = 2.0 * (design.stacked.T @ resid) + 2.0 * self.ridge * a
        return value, np.concatenate([grad_phi, grad_a])

    def prox(self, z, step):
        phi, a = self.split(z)
        a = np.sign(a) * np.maximum(np.abs(a) - step * self.lam, 0.0)
        return np.concatenate([phi, a])

    def nonsmooth_value(self, z):
        _, a = self.split(z)
        return self.lam * float(np.abs(a).sum())


class BlobJointObjective:
    """Smooth part of the joint blob objective over ``[r_x, r_y, s, a]``."""

    def __init__(self, grid_points, data, lam, ridge=0.0):
        self.grid_points = np.atleast_2d(np.asarray(grid_points, dtype=float))
        self.data = np.asarray(data, dtype=float)
        self.lam = float(lam)
        self.ridge = float(ridge)
        self._reduced = BlobReducedObjective(grid_points, data, lam, ridge, warm_start=False)

    def split(self, z):
        n = z.size // 4
        return z[:3 * n], z[3 * n:]

    def __call__(self, z):
        params, a = self.split(np.asarray(z, dtype=float))
        design, d_rx, d_ry, d_s = self._reduced._build(params)
        resid = design.stacked @ a - self.data
        value = float(resid @ resid) + self.ridge * float(a @ a)
        grad_p = 2.0 * a * np.stack([d_rx.T @ resid, d_ry.T @ resid, d_s.T @ resid])
        grad_a = 2.0 * (design.stacked.T @ resid) + 2.0 * self.ridge * a
        return value, np.concatenate([grad_p.ravel(), grad_a])

    def prox(self, z, step):
        params, a = self.split(z)
        a = np.maximum(a - step * self.lam, 0.0)
        return np.concatenate([params, a])

    def nonsmooth_value(self, z):
        _, a = self.split(z)
        return self.lam * float(np.abs(a).sum())


@dataclass
class MusicResult:
    spectrum: Array
    noise_basis: Array
    peak_angles: Array
    grid: Array


def music_spectrum(model: DoaModel, noise_sigma: float, grid: Optional[Array] = None) -> MusicResult:
    """Subspace pseudo-spectrum from the sample snapshot covariance.

    The covariance is (1/N) sum_t y_t y_t^*; the noise basis collects its
    singular vectors with singular values below ``noise_sigma**2``, and the
    spectrum is 1/|P^* s(phi)| over the grid. The steering vector uses the
    model's sign convention s_i = exp(-i theta(phi) . x_i), so it lies in
    the signal subspace at a source angle. Peaks are grid local maxima,
    strongest first.
    """
    if model.snapshots is None:
        raise ValueError("model carries no snapshots")
    grid = model.angles if grid is None else np.asarray(grid, dtype=float)
    y = np.asarray(model.snapshots)
    if y.ndim != 2:
        raise ValueError("snapshots must be an m x N matrix")
    m, num = y.shape
    cov = (y @ y.conj().T) / num
    vals, vecs = np.linalg.eigh(cov)
    mask = vals < noise_sigma**2
    if not mask.any():
        raise ValueError(
            "no singular values below the noise threshold; raise the noise estimate sigma"
        )
    basis = vecs[:, mask]
    dirs = np.column_stack([np.cos(grid), np.sin(grid)])
    steering = np.exp(-1j * (model.receivers @ dirs.T))  # (m, G)
    denom = np.linalg.norm(basis.conj().T @ steering, axis=0)
    spectrum = 1.0 / np.maximum(denom, 1e-300)

    interior = (spectrum[1:-1] >= spectrum[:-2]) & (spectrum[1:-1] > spectrum[2:])
    peak_idx = np.nonzero(np.concatenate([[spectrum[0] > spectrum[1]], interior,
                                          [spectrum[-1] > spectrum[-2]]]))[0]
    order = np.argsort(-spectrum[peak_idx], kind="stable")
    return MusicResult(spectrum=spectrum, noise_basis=basis,
                       peak_angles=grid[peak_idx[order]], grid=grid)
