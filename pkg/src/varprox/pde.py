"""Toy discretized linear-system inverse problem.

The forward model is ``H(x) u = q`` with ``H(x) = A + diag(B x)`` for a
fixed invertible tridiagonal A, and the misfit is ``|R u - d|^2``. Two
routes to the gradient of the reduced objective are implemented: the
adjoint route (two linear solves per gradient) and the quadratic-penalty
route (a single normal-equation solve per gradient). They cross-validate
each other and finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Array = np.ndarray

_COND_LIMIT = 1e14


@dataclass
class ToySystem:
    """Fixed matrices of the parametric system H(x) = base + diag(sens @ x)."""

    base: Array  # (n, n) invertible
    sens: Array  # (n, d)
    source: Array  # (n,)
    obs: Array  # (p, n) observation operator
    data: Array  # (p,)

    def __post_init__(self) -> None:
        self.base = np.asarray(self.base, dtype=float)
        self.sens = np.asarray(self.sens, dtype=float)
        self.source = np.asarray(self.source, dtype=float)
        self.obs = np.atleast_2d(np.asarray(self.obs, dtype=float))
        self.data = np.asarray(self.data, dtype=float)
        n = self.base.shape[0]
        if self.base.shape != (n, n):
            raise ValueError("base matrix must be square")
        if self.sens.shape[0] != n or self.source.size != n:
            raise ValueError("sensitivity and source dimensions must match the system")
        if self.obs.shape[1] != n or self.data.size != self.obs.shape[0]:
            raise ValueError("observation operator and data are inconsistent")

    @property
    def num_params(self) -> int:
        return self.sens.shape[1]

    def system_matrix(self, x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return self.base + np.diag(self.sens @ x)


def _checked_solve(matrix: Array, rhs: Array, what: str) -> Array:
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise ValueError(f"{what} is singular or ill-conditioned (cond={cond:.3e})")
    return np.linalg.solve(matrix, rhs)


def adjoint_value_grad(system: ToySystem, x: Array) -> tuple:
    """Reduced misfit and gradient via forward and adjoint solves.

    Solves ``H(x) u = q`` and ``H(x)^T v = -2 R^T (R u - d)``; the gradient
    component for parameter p is ``<v, dH/dx_p u>`` with
    ``dH/dx_p = diag(sens[:, p])``. Two linear solves per evaluation.
    """
    h = system.system_matrix(x)
    u = _checked_solve(h, system.source, "system matrix")
    resid = system.obs @ u - system.data
    value = float(resid @ resid)
    v = _checked_solve(h.T, -2.0 * (system.obs.T @ resid), "adjoint system matrix")
    grad = system.sens.T @ (v * u)
    return value, grad, u, v


def penalty_value_grad(system: ToySystem, x: Array, lam: float) -> tuple:
    """Penalty-form reduced value and gradient with a single linear solve.

    The inner minimizer of ``|R u - d|^2 + lam/2 |H(x) u - q|^2`` solves the
    normal equations; the gradient component for parameter p is
    ``lam <H u - q, dH/dx_p u>``.
    """
    if lam <= 0:
        raise ValueError("penalty parameter must be positive")
    h = system.system_matrix(x)
    normal = 2.0 * (system.obs.T @ system.obs) + lam * (h.T @ h)
    rhs = 2.0 * (system.obs.T @ system.data) + lam * (h.T @ system.source)
    u = _checked_solve(normal, rhs, "penalty normal system")
    obs_resid = system.obs @ u - system.data
    pde_resid = h @ u - system.source
    value = float(obs_resid @ obs_resid) + 0.5 * lam * float(pde_resid @ pde_resid)
    grad = lam * (system.sens.T @ (pde_resid * u))
    return value, grad, u
