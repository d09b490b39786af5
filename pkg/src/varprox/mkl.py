"""Multiple kernel learning with the kernel weights projected out.

The support-vector dual ``min 0.5 a^T K a - 1^T a`` over the box [0, C]^m
with the balance constraint ``y^T a = 0`` is solved by accelerated
projected gradient; the same quadratic-program machinery powers each
subproblem of the smoothed multiple-kernel solver, which replaces the
single kernel by

    f_beta(a) = min_{w in unit simplex} sum_i w_i h_i(a) + (beta/2)|w|^2,
    h_i(a) = 0.5 a^T K_i a,

and descends with an approximate-Hessian step H = sum_i w_i K_i.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .projections import CappedSimplex, smoothed_weighted_min
from .solvers import RunTrace, TerminationStatus

Array = np.ndarray


def kernel_poly(x1: Array, x2: Array, degree: int) -> Array:
    """Polynomial Gram block (1 + x^T x')^degree."""
    if degree < 1 or int(degree) != degree:
        raise ValueError("degree must be a positive integer")
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    x2 = np.atleast_2d(np.asarray(x2, dtype=float))
    return (1.0 + x1 @ x2.T) ** int(degree)


def kernel_gauss(x1: Array, x2: Array, width: float) -> Array:
    """Gaussian Gram block exp(-|x - x'|^2 / width^2)."""
    if width <= 0:
        raise ValueError("width must be positive")
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    x2 = np.atleast_2d(np.asarray(x2, dtype=float))
    sq = ((x1[:, None, :] - x2[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-sq / width**2)


@dataclass(frozen=True)
class KernelDescriptor:
    kind: str  # "polynomial" or "gaussian"
    param: float

    def gram(self, x1: Array, x2: Array) -> Array:
        if self.kind == "polynomial":
            return kernel_poly(x1, x2, int(self.param))
        if self.kind == "gaussian":
            return kernel_gauss(x1, x2, self.param)
        raise ValueError(f"unknown kernel kind {self.kind!r}")


def default_kernel_bank_descriptors() -> list:
    """Five polynomial kernels (degrees 1..5) and seven Gaussians (widths 1..4)."""
    descs = [KernelDescriptor("polynomial", float(p)) for p in range(1, 6)]
    descs += [KernelDescriptor("gaussian", a) for a in np.arange(1.0, 4.01, 0.5)]
    return descs


@dataclass
class KernelBank:
    """Raw Gram matrices with their label-weighted versions K_i = (y y^T) o G_i."""

    grams: Array  # (M, m, m)
    labeled: Array  # (M, m, m)
    labels: Array
    descriptors: Sequence[KernelDescriptor] = field(default_factory=list)

    @classmethod
    def build(cls, x: Array, y: Array, descriptors: Sequence[KernelDescriptor],
              psd_tol: float = 1e-8) -> "KernelBank":
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.asarray(y, dtype=float)
        grams = np.stack([d.gram(x, x) for d in descriptors])
        for idx, g in enumerate(grams):
            if not np.allclose(g, g.T, atol=1e-10 * max(1.0, np.abs(g).max())):
                raise ValueError(f"gram matrix {idx} is not symmetric")
            eigs = np.linalg.eigvalsh(g)
            # tolerance relative to the spectral norm; large polynomial grams
            # carry roundoff far above any absolute floor
            if eigs[0] < -psd_tol * max(1.0, eigs[-1]):
                raise ValueError(f"gram matrix {idx} is not positive semidefinite")
        outer = np.outer(y, y)
        return cls(grams=grams, labeled=grams * outer[None], labels=y,
                   descriptors=list(descriptors))

    @property
    def size(self) -> int:
        return self.grams.shape[0]


@dataclass
class SvmDualState:
    """Dual variables with their box bound and balance constraint data."""

    alpha: Array
    C: float
    labels: Array
    objective: float = 0.0
    kkt_residual: float = np.inf
    iterations: int = 0
    converged: bool = True

    @property
    def equality_residual(self) -> float:
        return float(abs(self.labels @ self.alpha))


def project_box_hyperplane(v: Array, y: Array, C: float) -> Array:
    """Project v onto {a : 0 <= a_i <= C, y^T a = 0} for labels y in {-1,+1}.

    The projection is ``clip(v - tau * y, 0, C)`` with tau found by exact
    breakpoint search on the monotone constraint function.
    """
    v = np.asarray(v, dtype=float)
    y = np.asarray(y, dtype=float)
    bps = np.unique(np.concatenate([
        np.where(y > 0, v - C, -v), np.where(y > 0, v, C - v),
    ]))

    def psi(taus: Array) -> Array:
        a = np.clip(v[None, :] - taus[:, None] * y[None, :], 0.0, C)
        return a @ y

    vals = psi(bps)
    idx = int(np.searchsorted(-vals, 0.0, side="left"))  # first psi(bp) <= 0
    if idx == 0:
        tau = bps[0]
    elif vals[idx] == 0.0:
        tau = bps[idx]
    else:
        t0, t1 = bps[idx - 1], bps[idx]
        p0, p1 = vals[idx - 1], vals[idx]
        tau = t0 + p0 * (t1 - t0) / (p0 - p1)
    return np.clip(v - tau * y, 0.0, C)


def _qp_box_hyperplane(K: Array, b: Array, y: Array, C: float, z0: Array,
                       tol: float, max_iters: int = 50000) -> tuple:
    """Spectral projected gradient for min 0.5 z^T K z + b^T z on the set.

    Steps along the projection arc with Barzilai-Borwein step lengths and
    an exact line search (the objective is quadratic, so the minimizer
    along each feasible direction is closed-form). Returns
    ``(z, kkt_residual, iterations)`` where the residual is the max-norm
    of ``z - P(z - grad)``.
    """
    proj = lambda u: project_box_hyperplane(u, y, C)
    z = proj(np.asarray(z0, dtype=float))
    g = K @ z + b
    lip = max(float(np.linalg.eigvalsh(K)[-1]), 1e-12)
    step = 1.0 / lip
    resid = float(np.abs(z - proj(z - g)).max())
    it = 0
    while resid > tol and it < max_iters:
        it += 1
        d = proj(z - step * g) - z
        kd = K @ d
        curv = float(d @ kd)
        slope = float(g @ d)
        if curv <= 0.0:
            t = 1.0
        else:
            t = min(1.0, max(0.0, -slope / curv))
        if t == 0.0 or slope >= 0.0:
            break  # no feasible descent along the arc at this step length
        z_new = z + t * d
        g_new = g + t * kd
        s = z_new - z
        sy = float(s @ (g_new - g))
        step = min(max((s @ s) / sy, 1e-14), 1e14) if sy > 0 else 1.0 / lip
        z, g = z_new, g_new
        resid = float(np.abs(z - proj(z - g)).max())
    return z, resid, it


def svm_dual_objective(K: Array, alpha: Array) -> float:
    return 0.5 * float(alpha @ (K @ alpha)) - float(alpha.sum())


def solve_svm_dual(K: Array, y: Array, C: float, tol: float = 1e-6,
                   max_iters: int = 50000, alpha0: Optional[Array] = None) -> SvmDualState:
    """Solve the dual QP min 0.5 a^T K a - 1^T a over the box-and-balance set.

    ``K`` is the label-weighted kernel. With all labels of one sign the only
    balanced point is a = 0, which the projection returns naturally.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    y = np.asarray(y, dtype=float)
    m = y.size
    z0 = np.zeros(m) if alpha0 is None else alpha0
    alpha, resid, it = _qp_box_hyperplane(np.asarray(K, dtype=float), -np.ones(m),
                                          y, C, z0, tol, max_iters)
    return SvmDualState(alpha=alpha, C=float(C), labels=y,
                        objective=svm_dual_objective(K, alpha),
                        kkt_residual=resid, iterations=it, converged=resid <= tol)


def mkl_value_grad(alpha: Array, bank: KernelBank, beta: float) -> tuple:
    """Smoothed projected kernel value, its gradient, and the kernel weights.

    Returns ``(value, gradient, w_bar)`` with value
    ``min_w sum w_i (0.5 a^T K_i a) + (beta/2)|w|^2`` over the unit simplex
    and gradient ``sum_i w_i K_i a``.
    """
    alpha = np.asarray(alpha, dtype=float)
    ka = bank.labeled @ alpha  # (M, m)
    h = 0.5 * (ka @ alpha)  # (M,)
    res = smoothed_weighted_min(h, beta, CappedSimplex(bank.size, 1.0))
    grad = res.weights @ ka
    return res.value, grad, res.weights


@dataclass
class MklSolution:
    alpha: Array
    kernel_weights: Array
    intercept: float
    iterations: int
    trace: RunTrace
    status: TerminationStatus


def _mkl_objective(alpha: Array, bank: KernelBank, beta: float) -> float:
    value, _, _ = mkl_value_grad(alpha, bank, beta)
    return value - float(alpha.sum())


def sqp_solve_mkl(bank: KernelBank, y: Array, C: float, beta: float = 1.0,
                  tol: float = 1e-6, max_iters: int = 200) -> MklSolution:
    """Sequential quadratic descent on f_beta(a) - 1^T a over the dual set.

    Each iteration minimizes the quadratic model with Hessian
    ``H = sum_i w_i K_i`` over the feasible set, then backtracks on the true
    objective. Stops at projected-gradient residual <= tol.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    y = np.asarray(y, dtype=float)
    m = y.size
    alpha = np.zeros(m)
    trace = RunTrace()
    status = TerminationStatus.MAX_ITERS
    weights = np.full(bank.size, 1.0 / bank.size)
    iterations = 0

    for it in range(1, max_iters + 1):
        value, grad_f, weights = mkl_value_grad(alpha, bank, beta)
        objective = value - float(alpha.sum())
        grad = grad_f - 1.0
        resid = float(np.abs(alpha - project_box_hyperplane(alpha - grad, y, C)).max())
        trace.append(it - 1, objective, resid, 1.0)
        if resid <= tol:
            status = TerminationStatus.CONVERGED
            break
        iterations = it

        hess = np.tensordot(weights, bank.labeled, axes=1)
        sub_tol = max(min(0.1 * resid, tol), 1e-12)
        z, _, _ = _qp_box_hyperplane(hess, grad - hess @ alpha, y, C, alpha, sub_tol)
        d = z - alpha
        slope = float(grad @ d)
        step = 1.0
        accepted = False
        for _ in range(40):
            cand = alpha + step * d
            if _mkl_objective(cand, bank, beta) <= objective + 1e-4 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:  # stagnation
            break
        alpha = alpha + step * d

    intercept = _mkl_intercept(alpha, weights, bank, y, C)
    return MklSolution(alpha=alpha, kernel_weights=weights, intercept=intercept,
                       iterations=iterations, trace=trace, status=status)


def _mkl_intercept(alpha: Array, weights: Array, bank: KernelBank, y: Array, C: float) -> float:
    """Margin-based intercept: average over free support vectors, with a
    midpoint-of-active-bounds fallback when none are strictly inside the box."""
    gram_w = np.tensordot(weights, bank.grams, axes=1)
    scores = gram_w @ (alpha * y)
    eps = 1e-6 * C
    free = (alpha > eps) & (alpha < C - eps)
    if free.any():
        return float(np.mean(y[free] - scores[free]))
    lower = np.where((y > 0) & (alpha <= eps) | (y < 0) & (alpha >= C - eps))[0]
    upper = np.where((y > 0) & (alpha >= C - eps) | (y < 0) & (alpha <= eps))[0]
    lo = np.max(y[lower] - scores[lower]) if lower.size else -np.inf
    hi = np.min(y[upper] - scores[upper]) if upper.size else np.inf
    if not np.isfinite(lo) and not np.isfinite(hi):
        return 0.0
    if not np.isfinite(lo):
        return float(hi)
    if not np.isfinite(hi):
        return float(lo)
    return float(0.5 * (lo + hi))


def mkl_decision_function(solution: MklSolution, descriptors: Sequence[KernelDescriptor],
                          x_train: Array, y_train: Array, x_new: Array) -> Array:
    """Classifier scores sum_i alpha_i y_i k_w(x_i, x) + b for new points."""
    x_train = np.atleast_2d(np.asarray(x_train, dtype=float))
    x_new = np.atleast_2d(np.asarray(x_new, dtype=float))
    y_train = np.asarray(y_train, dtype=float)
    cross = np.zeros((x_train.shape[0], x_new.shape[0]))
    for w, desc in zip(solution.kernel_weights, descriptors):
        if w != 0.0:
            cross += w * desc.gram(x_train, x_new)
    return cross.T @ (solution.alpha * y_train) + solution.intercept
