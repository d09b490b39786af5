"""Outer solvers for reduced objectives.

Provides a limited-memory BFGS method with a weak Wolfe line search, a
proximal-gradient method with backtracking, and a central finite-difference
gradient checker. Objective callables return ``(value, gradient)`` or
``(value, gradient, inner_solution)``; the extra entry is ignored by the
solvers and carried by reduced objectives for warm starting.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

Array = np.ndarray

#: Evaluator returning (value, gradient[, inner_solution]).
ObjectiveFn = Callable[[Array], tuple]


class TerminationStatus(str, Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    LINE_SEARCH_FAILURE = "LineSearchFailure"


@dataclass
class ReducedObjective:
    """A projected-function evaluator ``x -> (value, gradient, inner_solution)``.

    ``inner_tol`` is the tolerance handed to whatever inner solver produces
    the minimizing inner solution; evaluations at the same point with the
    same tolerance are deterministic.
    """

    evaluate: ObjectiveFn
    inner_tol: float = 1e-10

    def __call__(self, x: Array) -> tuple:
        return self.evaluate(x)


@dataclass
class SolverOptions:
    """Outer-solver settings.

    ``grad_tol`` is a relative threshold: iterations stop when the
    optimality measure divided by max(1, initial measure) drops below it.
    ``c1``/``c2`` are the weak Wolfe sufficient-decrease and curvature
    parameters, ``history_size`` the quasi-Newton memory.
    """

    max_iters: int = 500
    grad_tol: float = 1e-6
    history_size: int = 10
    c1: float = 1e-4
    c2: float = 0.9

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if not 0.0 < self.c1 < self.c2 < 1.0:
            raise ValueError("line search requires 0 < c1 < c2 < 1")
        if self.history_size < 1:
            raise ValueError("history_size must be at least 1")


@dataclass
class RunTrace:
    """Per-iteration record of an outer solve: one row per accepted iterate."""

    iterations: list = field(default_factory=list)
    objectives: list = field(default_factory=list)
    optimality: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    status: TerminationStatus = TerminationStatus.MAX_ITERS

    def append(self, iteration: int, objective: float, opt: float, step: float) -> None:
        self.iterations.append(int(iteration))
        self.objectives.append(float(objective))
        self.optimality.append(float(opt))
        self.steps.append(float(step))

    def __len__(self) -> int:
        return len(self.iterations)

    @property
    def final_objective(self) -> float:
        return self.objectives[-1]

    @property
    def final_optimality(self) -> float:
        return self.optimality[-1]

    def to_csv(self, path) -> None:
        rows = np.column_stack([self.iterations, self.objectives, self.optimality, self.steps])
        np.savetxt(path, rows, fmt="%d,%.17g,%.17g,%.17g", header="iter,objective,optimality,step", comments="")


def _evaluate(obj: ObjectiveFn, x: Array) -> tuple:
    out = obj(x)
    return float(out[0]), np.asarray(out[1], dtype=float)


def _two_loop_direction(g: Array, mem_s, mem_y, mem_rho) -> Array:
    q = g.copy()
    alphas = []
    for s, y, rho in zip(reversed(mem_s), reversed(mem_y), reversed(mem_rho)):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if mem_s:
        gamma = (mem_s[-1] @ mem_y[-1]) / (mem_y[-1] @ mem_y[-1])
        q *= gamma
    for (s, y, rho), a in zip(zip(mem_s, mem_y, mem_rho), reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return q


def _weak_wolfe_search(obj, x, f0, g0, d, c1, c2, max_bisections=50):
    """Bisection search for a step satisfying the weak Wolfe conditions.

    Non-finite trial values are treated as sufficient-decrease failures
    (the step is shrunk), not as errors. Returns the last point that at
    least satisfied sufficient decrease when the curvature condition can
    not be met within the bisection budget.
    """
    slope0 = float(g0 @ d)
    lo, hi = 0.0, np.inf
    t = 1.0
    backup = None
    for _ in range(max_bisections):
        xt = x + t * d
        ft, gt = _evaluate(obj, xt)
        if not np.isfinite(ft) or not np.all(np.isfinite(gt)) or ft > f0 + c1 * t * slope0:
            hi = t
        elif gt @ d < c2 * slope0:
            lo = t
            backup = (t, xt, ft, gt)
        else:
            return t, xt, ft, gt, True
        t = 0.5 * (lo + hi) if np.isfinite(hi) else 2.0 * t
    if backup is not None:
        return backup + (False,)
    return t, None, None, None, False


def lbfgs_minimize(obj: ObjectiveFn, x0: Array, opts: Optional[SolverOptions] = None):
    """Minimize a smooth objective with limited-memory BFGS.

    Stops when the gradient norm relative to max(1, initial gradient norm)
    drops below ``opts.grad_tol``. Returns ``(x_hat, trace)``; failures of
    the line search terminate the run with status ``LineSearchFailure``
    rather than raising.
    """
    opts = opts if opts is not None else SolverOptions()
    x = np.asarray(x0, dtype=float).copy()
    f, g = _evaluate(obj, x)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise ValueError("objective or gradient is not finite at the starting point")
    denom = max(1.0, float(np.linalg.norm(g)))

    trace = RunTrace()
    rel = float(np.linalg.norm(g)) / denom
    trace.append(0, f, rel, 0.0)
    if rel <= opts.grad_tol:
        trace.status = TerminationStatus.CONVERGED
        return x, trace

    mem_s: deque = deque(maxlen=opts.history_size)
    mem_y: deque = deque(maxlen=opts.history_size)
    mem_rho: deque = deque(maxlen=opts.history_size)
    status = TerminationStatus.MAX_ITERS

    for k in range(1, opts.max_iters + 1):
        d = -_two_loop_direction(g, mem_s, mem_y, mem_rho)
        if g @ d >= 0.0:
            d = -g  # stale curvature pairs; fall back to steepest descent
        t, x_new, f_new, g_new, ok = _weak_wolfe_search(obj, x, f, g, d, opts.c1, opts.c2)
        if x_new is None:
            status = TerminationStatus.LINE_SEARCH_FAILURE
            break
        s = x_new - x
        yv = g_new - g
        sy = float(s @ yv)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(yv):
            mem_s.append(s)
            mem_y.append(yv)
            mem_rho.append(1.0 / sy)
        x, f, g = x_new, f_new, g_new
        rel = float(np.linalg.norm(g)) / denom
        trace.append(k, f, rel, t)
        if not ok:
            status = TerminationStatus.LINE_SEARCH_FAILURE
            break
        if rel <= opts.grad_tol:
            status = TerminationStatus.CONVERGED
            break

    trace.status = status
    return x, trace


def prox_gradient_minimize(
    smooth_part: ObjectiveFn,
    prox_op: Callable[[Array, float], Array],
    x0: Array,
    opts: Optional[SolverOptions] = None,
    nonsmooth_value: Optional[Callable[[Array], float]] = None,
    step0: float = 1.0,
):
    """Proximal-gradient descent with backtracking on the step size.

    Iterates ``x <- prox_op(x - step * grad, step)``; a step is accepted
    when the smooth part satisfies the quadratic upper-bound test. The
    optimality measure is the gradient-map norm ``|x_new - x| / step``,
    normalized by max(1, its initial value) so tolerances are comparable
    with :func:`lbfgs_minimize`. ``nonsmooth_value``, when given, is added
    to the objective column of the trace.
    """
    opts = opts if opts is not None else SolverOptions()
    ns = nonsmooth_value if nonsmooth_value is not None else (lambda z: 0.0)
    x = np.asarray(x0, dtype=float).copy()
    f, g = _evaluate(smooth_part, x)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise ValueError("objective or gradient is not finite at the starting point")

    step = float(step0)
    x_ref = prox_op(x - step * g, step)
    gm0 = float(np.linalg.norm(x - x_ref)) / step
    denom = max(1.0, gm0)

    trace = RunTrace()
    trace.append(0, f + ns(x), gm0 / denom, 0.0)
    if gm0 / denom <= opts.grad_tol:
        trace.status = TerminationStatus.CONVERGED
        return x, trace

    status = TerminationStatus.MAX_ITERS
    for k in range(1, opts.max_iters + 1):
        while True:
            x_new = prox_op(x - step * g, step)
            dx = x_new - x
            f_new, g_new = _evaluate(smooth_part, x_new)
            bound = f + g @ dx + (dx @ dx) / (2.0 * step)
            if np.isfinite(f_new) and f_new <= bound + 1e-12 * max(1.0, abs(f)):
                break
            step *= 0.5
            if step < 1e-18:
                trace.status = TerminationStatus.LINE_SEARCH_FAILURE
                return x, trace
        gm = float(np.linalg.norm(dx)) / step
        x, f, g = x_new, f_new, g_new
        rel = gm / denom
        trace.append(k, f + ns(x), rel, step)
        if rel <= opts.grad_tol:
            status = TerminationStatus.CONVERGED
            break
        step = min(step * 2.0, 1e12)

    trace.status = status
    return x, trace


def fd_gradient_check(obj: ObjectiveFn, x: Array, h: float = 1e-6) -> float:
    """Max relative error between central differences and the analytic gradient.

    Per coordinate the error is |central difference - g_i| / max(1, |g_i|);
    the maximum over coordinates is returned.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    _, g = _evaluate(obj, x)
    worst = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fp = _evaluate(obj, x + e)[0]
        fm = _evaluate(obj, x - e)[0]
        cd = (fp - fm) / (2.0 * h)
        worst = max(worst, abs(cd - g[i]) / max(1.0, abs(g[i])))
    return worst
