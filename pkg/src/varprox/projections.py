"""Euclidean projections onto scaled and capped simplices, and the smoothed
weighted-minimum built from them.

The capped simplex with dimension m and budget k is
``{w : 0 <= w_i <= 1, sum(w) = k}``; minimizing a linear function over it
selects the k smallest coefficients. Adding a quadratic (beta/2)|w|^2 to
that inner minimization makes the value differentiable in the coefficients
while keeping the weights feasible; the minimizer is the projection of
``-g/beta`` onto the set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Array = np.ndarray

_KKT_TOL = 1e-9


@dataclass(frozen=True)
class CappedSimplex:
    """The set {w : 0 <= w_i <= 1, sum(w) = k} in dimension m.

    Nonempty iff 0 <= k <= m; for k = m the set is the singleton of all
    ones. The budget may be fractional.
    """

    dimension: int
    budget: float

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if self.budget < 0 or self.budget > self.dimension:
            raise ValueError(
                f"infeasible capped simplex: budget {self.budget} outside [0, {self.dimension}]"
            )


@dataclass(frozen=True)
class SmoothedMinResult:
    """Value and projection weights of the smoothed weighted minimum."""

    value: float
    weights: Array

    @property
    def gradient_coefficients(self) -> Array:
        """Multipliers applied to per-component gradients (the weights themselves)."""
        return self.weights


def project_simplex(v: Array, k: float) -> Array:
    """Project v onto the scaled simplex {w >= 0, sum(w) = k}.

    Uses the exact sort-and-threshold rule: w = max(v - tau, 0) with tau
    determined from the sorted prefix sums.
    """
    if k <= 0:
        raise ValueError("simplex scale k must be positive")
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - k
    ind = np.arange(1, v.size + 1)
    cond = u - css / ind > 0
    rho = int(np.nonzero(cond)[0][-1])
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def _capped_threshold(v: Array, k: float) -> float:
    # phi(tau) = sum clip(v - tau, 0, 1) is continuous, piecewise linear and
    # nonincreasing with breakpoints at v_i - 1 and v_i; phi is interpolated
    # exactly on the bracketing segment.
    vs = np.sort(v)
    prefix = np.concatenate([[0.0], np.cumsum(vs)])
    m = v.size

    def phi(taus: Array) -> Array:
        hi = m - np.searchsorted(vs, taus + 1.0, side="left")
        a = np.searchsorted(vs, taus, side="right")
        b = np.searchsorted(vs, taus + 1.0, side="left")
        mid = prefix[b] - prefix[a] - taus * (b - a)
        return hi + mid

    bps = np.unique(np.concatenate([vs - 1.0, vs]))
    vals = phi(bps)
    idx = int(np.searchsorted(-vals, -k, side="left"))  # first phi(bp) <= k
    if idx == 0:
        return float(bps[0])
    if vals[idx] == k:
        return float(bps[idx])
    t0, t1 = bps[idx - 1], bps[idx]
    p0, p1 = vals[idx - 1], vals[idx]
    return float(t0 + (p0 - k) * (t1 - t0) / (p0 - p1))


def project_capped_simplex(v: Array, simplex: CappedSimplex) -> Array:
    """Project v onto the capped simplex.

    The projection is ``clip(v - tau, 0, 1)`` with the unique tau solving
    ``sum(clip(v - tau, 0, 1)) = k``, found by exact breakpoint search
    (no iterative root-finding).
    """
    v = np.asarray(v, dtype=float)
    if v.size != simplex.dimension:
        raise ValueError("vector dimension does not match the simplex")
    k = float(simplex.budget)
    if k == 0.0:
        return np.zeros_like(v)
    if k == float(simplex.dimension):
        return np.ones_like(v)
    tau = _capped_threshold(v, k)
    return np.clip(v - tau, 0.0, 1.0)


def _patterns(m: int, states: int) -> Array:
    # all coordinate state assignments as an (states^m, m) integer array
    counts = states**m
    idx = np.arange(counts)
    out = np.empty((counts, m), dtype=np.int8)
    for j in range(m):
        out[:, j] = (idx // states**j) % states
    return out


def _brute_force_capped(v: Array, k: float) -> Array:
    m = v.size
    pat = _patterns(m, 3)  # 0 lower-active, 1 free, 2 upper-active
    low = pat == 0
    free = pat == 1
    up = pat == 2
    nfree = free.sum(axis=1)
    nup = up.sum(axis=1)
    sum_free = free @ v

    # patterns with no free coordinate need sum(w) = nup = k and a multiplier
    # tau in [max(v_low), min(v_up) - 1]
    no_free = nfree == 0
    lo_bound = np.where(low, v, -np.inf).max(axis=1)
    hi_bound = np.where(up, v - 1.0, np.inf).min(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = (sum_free + nup - k) / nfree
        tau = np.where(no_free, np.clip(0.5 * (lo_bound + hi_bound), lo_bound, hi_bound), tau)

    shifted = v - tau[:, None]
    w = np.where(free, shifted, np.where(up, 1.0, 0.0))

    ok = np.ones(pat.shape[0], dtype=bool)
    ok &= np.where(free, (shifted >= -_KKT_TOL) & (shifted <= 1.0 + _KKT_TOL), True).all(axis=1)
    ok &= np.where(low, shifted <= _KKT_TOL, True).all(axis=1)
    ok &= np.where(up, shifted >= 1.0 - _KKT_TOL, True).all(axis=1)
    ok &= np.where(no_free, np.abs(nup - k) <= _KKT_TOL, True)
    ok &= np.where(no_free, lo_bound <= hi_bound + _KKT_TOL, True)
    ok &= np.isfinite(tau)

    if not ok.any():
        raise RuntimeError("no KKT-consistent active-set pattern found")
    cand = np.nonzero(ok)[0]
    dists = ((w[cand] - v) ** 2).sum(axis=1)
    best = cand[int(np.argmin(dists))]
    return np.clip(w[best], 0.0, 1.0)


def _brute_force_simplex(v: Array, k: float) -> Array:
    m = v.size
    pat = _patterns(m, 2)[1:]  # 0 lower-active, 1 free; skip the all-active row
    free = pat == 1
    low = ~free
    nfree = free.sum(axis=1)
    tau = (free @ v - k) / nfree
    shifted = v - tau[:, None]
    w = np.where(free, shifted, 0.0)

    ok = np.where(free, shifted >= -_KKT_TOL, True).all(axis=1)
    ok &= np.where(low, shifted <= _KKT_TOL, True).all(axis=1)
    cand = np.nonzero(ok)[0]
    dists = ((w[cand] - v) ** 2).sum(axis=1)
    best = cand[int(np.argmin(dists))]
    return np.maximum(w[best], 0.0)


def brute_force_projection(v: Array, target) -> Array:
    """Exact projection by enumerating active-set patterns (testing oracle).

    ``target`` is either a :class:`CappedSimplex` or a plain scale k for the
    uncapped simplex. Every coordinate is assigned lower-active, free, or
    upper-active; the equality-constrained solution of each pattern is
    screened against the KKT conditions. Refuses dimensions above 12.
    """
    v = np.asarray(v, dtype=float)
    if v.size > 12:
        raise ValueError("brute-force projection limited to dimension <= 12")
    if isinstance(target, CappedSimplex):
        if v.size != target.dimension:
            raise ValueError("vector dimension does not match the simplex")
        if target.budget == 0.0:
            return np.zeros_like(v)
        return _brute_force_capped(v, float(target.budget))
    k = float(target)
    if k <= 0:
        raise ValueError("simplex scale k must be positive")
    return _brute_force_simplex(v, k)


def smoothed_weighted_min(g: Array, beta: float, simplex: CappedSimplex) -> SmoothedMinResult:
    """Evaluate ``min_w <w, g> + (beta/2)|w|^2`` over the capped simplex.

    The minimizer is the projection of ``-g/beta`` onto the set, and the
    value can equivalently be written through the squared distance of
    ``-g/beta`` to the set; the direct substitution below is exact.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    g = np.asarray(g, dtype=float)
    w = project_capped_simplex(-g / beta, simplex)
    value = float(g @ w + 0.5 * beta * (w @ w))
    return SmoothedMinResult(value=value, weights=w)
