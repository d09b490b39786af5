"""Smoothed trimmed estimation over the capped simplex.

The trimmed value of a separable loss keeps only the k best-fitting
samples; smoothing the selection weights with (beta/2)|w|^2 makes the
value differentiable with gradient J_g(x)^T w_bar, where w_bar projects
``-g(x)/beta`` onto the capped simplex. The logistic-regression
instantiation and its full fit pipeline live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .projections import CappedSimplex, smoothed_weighted_min
from .solvers import RunTrace, SolverOptions, lbfgs_minimize

Array = np.ndarray


class SeparableLoss(Protocol):
    """Per-sample losses plus the weighted-gradient action v -> J(x)^T v."""

    def values_and_vjp(self, x: Array) -> tuple: ...


@dataclass
class TrimmedConfig:
    """Inlier budget k, smoothing beta, and quadratic regularizer weight."""

    k: int
    beta: float = 1.0
    ridge: float = 1e-3

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")


class LogisticLoss:
    """Overflow-safe per-sample logistic losses log(1 + exp(-y x^T theta))."""

    def __init__(self, features: Array, labels: Array):
        self.features = np.atleast_2d(np.asarray(features, dtype=float))
        self.labels = np.asarray(labels, dtype=float)
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must take values in {-1, +1}")
        if self.features.shape[0] != self.labels.size:
            raise ValueError("one label per sample required")

    @property
    def num_samples(self) -> int:
        return self.labels.size

    def values_and_vjp(self, theta: Array) -> tuple:
        t = self.labels * (self.features @ theta)
        # softplus(-t) without overflow; sigma(-t) via the |t| branch
        losses = np.maximum(-t, 0.0) + np.log1p(np.exp(-np.abs(t)))
        e = np.exp(-np.abs(t))
        sig = np.where(t >= 0, e / (1.0 + e), 1.0 / (1.0 + e))

        def vjp(v: Array) -> Array:
            return -self.features.T @ (self.labels * sig * v)

        return losses, vjp


def logistic_losses(theta: Array, features: Array, labels: Array) -> tuple:
    """Functional form of :class:`LogisticLoss`: returns (losses, vjp)."""
    return LogisticLoss(features, labels).values_and_vjp(np.asarray(theta, dtype=float))


def trimmed_value_grad(loss: SeparableLoss, x: Array, cfg: TrimmedConfig) -> tuple:
    """Smoothed trimmed value, gradient, and selection weights at x.

    Value includes the (beta/2)|w_bar|^2 smoothing term and the ridge
    regularizer; the gradient is J^T w_bar + 2 * ridge * x.
    """
    x = np.asarray(x, dtype=float)
    g, vjp = loss.values_and_vjp(x)
    res = smoothed_weighted_min(g, cfg.beta, CappedSimplex(g.size, cfg.k))
    value = res.value + cfg.ridge * float(x @ x)
    grad = vjp(res.weights) + 2.0 * cfg.ridge * x
    return value, grad, res.weights


def fit_trimmed_logistic(
    features: Array,
    labels: Array,
    cfg: TrimmedConfig,
    opts: SolverOptions | None = None,
    theta0: Array | None = None,
) -> tuple:
    """Fit the smoothed trimmed logistic model by quasi-Newton descent.

    Returns ``(theta_hat, weights, trace)``; the final weights are the soft
    inlier scores at the solution.
    """
    loss = LogisticLoss(features, labels)
    if cfg.k > loss.num_samples:
        raise ValueError("k cannot exceed the number of samples")
    theta0 = np.zeros(loss.features.shape[1]) if theta0 is None else np.asarray(theta0, dtype=float)

    def objective(theta):
        value, grad, w = trimmed_value_grad(loss, theta, cfg)
        return value, grad, w

    theta_hat, trace = lbfgs_minimize(objective, theta0, opts)
    _, _, weights = trimmed_value_grad(loss, theta_hat, cfg)
    return theta_hat, weights, trace


def classify(theta: Array, features: Array) -> Array:
    """Predicted labels sign(x^T theta); zero scores map to +1."""
    scores = np.atleast_2d(np.asarray(features, dtype=float)) @ np.asarray(theta, dtype=float)
    return np.where(scores >= 0, 1.0, -1.0)


def accuracy(predicted: Array, truth: Array) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.size != truth.size:
        raise ValueError("label vectors must have equal length")
    return float(np.mean(predicted == truth))
