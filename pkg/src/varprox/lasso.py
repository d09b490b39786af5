"""Inner solver for LASSO problems ``min_a |Phi a - y|^2 + lambda |a|_1``.

The misfit carries no 1/2 factor, so the smooth gradient is
``2 Phi^T (Phi a - y)`` and all thresholds are derived accordingly. An
optional ridge term ``ridge * |a|^2`` restores strong convexity when the
design lacks full column rank, and a nonnegativity flag switches the
shrinkage to the one-sided soft threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

Array = np.ndarray


def soft_threshold(z: Array, tau: float, nonneg: bool = False) -> Array:
    """Componentwise shrinkage: sign(z) * max(|z| - tau, 0), or max(z - tau, 0)."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    z = np.asarray(z, dtype=float)
    if nonneg:
        return np.maximum(z - tau, 0.0)
    return np.sign(z) * np.maximum(np.abs(z) - tau, 0.0)


@dataclass
class LassoProblem:
    design: Array
    observations: Array
    lam: float = 0.0
    nonneg: bool = False
    ridge: float = 0.0

    def __post_init__(self) -> None:
        self.design = np.asarray(self.design, dtype=float)
        self.observations = np.asarray(self.observations, dtype=float)
        if self.design.shape[0] != self.observations.size:
            raise ValueError("design row count does not match observations")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")

    def objective(self, a: Array) -> float:
        r = self.design @ a - self.observations
        return float(r @ r) + self.ridge * float(a @ a) + self.lam * float(np.abs(a).sum())

    def smooth_grad(self, a: Array) -> Array:
        return 2.0 * (self.design.T @ (self.design @ a - self.observations)) + 2.0 * self.ridge * a

    def kkt_residual(self, a: Array) -> float:
        """Max-norm distance of the negative smooth gradient to lambda * subdifferential."""
        return self._kkt_from_grad(a, self.smooth_grad(a))

    def _kkt_from_grad(self, a: Array, grad: Array) -> float:
        s = -grad
        lam = self.lam
        if self.nonneg:
            res_active = np.abs(s - lam)
            res_zero = np.maximum(s - lam, 0.0)
            active = a > 0
        else:
            res_active = np.abs(s - lam * np.sign(a))
            res_zero = np.maximum(np.abs(s) - lam, 0.0)
            active = a != 0
        return float(np.max(np.where(active, res_active, res_zero), initial=0.0))


@dataclass
class LassoSolution:
    a_hat: Array
    objective: float
    optimality: float
    iterations: int
    converged: bool = True


def solve_lasso(
    problem: LassoProblem,
    tol: float = 1e-10,
    max_iters: int = 100000,
    a0: Optional[Array] = None,
) -> LassoSolution:
    """Accelerated proximal gradient for the LASSO problem.

    Uses the exact Lipschitz constant of the smooth part; with a ridge term
    the momentum is the constant strong-convexity factor, otherwise the
    classic accelerated sequence with monotone best-iterate tracking.
    Terminates when the subgradient optimality residual drops below
    ``tol``; a warm start ``a0`` already satisfying the test is returned
    unchanged. On exhaustion the best iterate found is returned with
    ``converged=False``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    phi = problem.design
    rows, n = phi.shape
    yv = problem.observations
    lam, ridge, nonneg = problem.lam, problem.ridge, problem.nonneg

    # tall designs amortize through the
    # n x n gram; short-fat ones multiply directly
    use_gram = rows >= 2 * n
    if use_gram:
        gram = phi.T @ phi
        pty = phi.T @ yv
        ynorm2 = float(yv @ yv)
        sing_max_sq = float(np.linalg.eigvalsh(gram)[-1])

        def smooth_grad(a):
            return 2.0 * (gram @ a - pty) + 2.0 * ridge * a

        def misfit(a):
            return float(a @ (gram @ a)) - 2.0 * float(a @ pty) + ynorm2
    else:
        sing_max_sq = float(np.linalg.norm(phi, 2)) ** 2

        def smooth_grad(a):
            return 2.0 * (phi.T @ (phi @ a - yv)) + 2.0 * ridge * a

        def misfit(a):
            r = phi @ a - yv
            return float(r @ r)

    def objective(a):
        return misfit(a) + ridge * float(a @ a) + lam * float(np.abs(a).sum())

    x = np.zeros(n) if a0 is None else np.asarray(a0, dtype=float).copy()
    opt = problem._kkt_from_grad(x, smooth_grad(x))
    if opt <= tol:
        return LassoSolution(x, problem.objective(x), opt, 0)

    lip = max(2.0 * sing_max_sq + 2.0 * ridge, 1e-12)
    mu = 2.0 * ridge

    if mu > 0:
        # constant strong-convexity momentum on the prox sequence
        rho = np.sqrt(mu / lip)
        m = (1.0 - rho) / (1.0 + rho)
        best_x, best_f = x.copy(), objective(x)
        z_prev = x.copy()
        z = x.copy()
        for it in range(1, max_iters + 1):
            y = z + m * (z - z_prev)
            z_prev = z
            z = soft_threshold(y - smooth_grad(y) / lip, lam / lip, nonneg)
            fz = objective(z)
            if fz < best_f:
                best_f, best_x = fz, z.copy()
            opt = problem._kkt_from_grad(z, smooth_grad(z))
            if opt <= tol:
                return LassoSolution(z, fz, opt, it)
        opt = problem._kkt_from_grad(best_x, smooth_grad(best_x))
        return LassoSolution(best_x, best_f, opt, max_iters, converged=False)

    # monotone accelerated sequence: keep the best point, aim momentum at z
    fx = objective(x)
    y = x.copy()
    t = 1.0
    for it in range(1, max_iters + 1):
        z = soft_threshold(y - smooth_grad(y) / lip, lam / lip, nonneg)
        fz = objective(z)
        if fz <= fx:
            x_next, f_next = z, fz
        else:
            x_next, f_next = x, fx
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = x_next + (t / t_next) * (z - x_next) + ((t - 1.0) / t_next) * (x_next - x)
        x, fx, t = x_next, f_next, t_next
        opt = problem._kkt_from_grad(x, smooth_grad(x))
        if opt <= tol:
            return LassoSolution(x, fx, opt, it)
    return LassoSolution(x, fx, opt, max_iters, converged=False)
