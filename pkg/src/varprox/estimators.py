"""Scikit-learn compatible classifiers built on the solvers in this package.

:class:`TrimmedLogisticRegression` wraps the smoothed trimmed logistic fit,
exposing soft inlier weights; :class:`MultipleKernelClassifier` wraps the
smoothed multiple-kernel dual solver. Both follow the fit/predict protocol
with standard input validation so they compose with pipelines and model
selection utilities.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .mkl import KernelBank, default_kernel_bank_descriptors, mkl_decision_function, sqp_solve_mkl
from .solvers import SolverOptions
from .trimmed import TrimmedConfig, fit_trimmed_logistic


def _encode_labels(y):
    classes = np.unique(y)
    if classes.size != 2:
        raise ValueError("binary classification requires exactly two classes")
    signed = np.where(y == classes[1], 1.0, -1.0)
    return classes, signed


class TrimmedLogisticRegression(BaseEstimator, ClassifierMixin):
    """Robust logistic regression that softly keeps the best-fitting samples.

    Parameters
    ----------
    inlier_fraction : fraction of training samples treated as inliers; the
        trimming budget is ``max(1, round(fraction * n_samples))``. With 1.0
        the fit reduces to ordinary ridge-regularized logistic regression.
    beta : smoothing weight on the selection variables.
    ridge : quadratic regularizer weight on the coefficients.
    """

    def __init__(self, inlier_fraction: float = 0.5, beta: float = 1.0,
                 ridge: float = 1e-3, grad_tol: float = 1e-6, max_iters: int = 500):
        self.inlier_fraction = inlier_fraction
        self.beta = beta
        self.ridge = ridge
        self.grad_tol = grad_tol
        self.max_iters = max_iters

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if not 0.0 < self.inlier_fraction <= 1.0:
            raise ValueError("inlier_fraction must lie in (0, 1]")
        self.classes_, signed = _encode_labels(y)
        k = max(1, int(round(self.inlier_fraction * X.shape[0])))
        cfg = TrimmedConfig(k=k, beta=self.beta, ridge=self.ridge)
        opts = SolverOptions(max_iters=self.max_iters, grad_tol=self.grad_tol)
        theta, weights, trace = fit_trimmed_logistic(X, signed, cfg, opts)
        self.coef_ = theta
        self.inlier_weights_ = weights
        self.trace_ = trace
        self.n_iter_ = len(trace) - 1
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_

    def predict(self, X):
        scores = self.decision_function(X)
        return np.where(scores >= 0, self.classes_[1], self.classes_[0])


class MultipleKernelClassifier(BaseEstimator, ClassifierMixin):
    """Support-vector classifier that learns simplex weights over a kernel bank.

    ``kernels`` is a sequence of :class:`~varprox.mkl.KernelDescriptor`;
    when omitted, the default bank of five polynomial and seven Gaussian
    kernels is used. After fitting, ``kernel_weights_`` holds the learned
    combination.
    """

    def __init__(self, kernels=None, C: float = 10.0, beta: float = 1.0,
                 tol: float = 1e-6, max_iters: int = 200):
        self.kernels = kernels
        self.C = C
        self.beta = beta
        self.tol = tol
        self.max_iters = max_iters

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, signed = _encode_labels(y)
        descriptors = self.kernels if self.kernels is not None else default_kernel_bank_descriptors()
        bank = KernelBank.build(X, signed, descriptors)
        solution = sqp_solve_mkl(bank, signed, C=self.C, beta=self.beta,
                                 tol=self.tol, max_iters=self.max_iters)
        self.X_train_ = X
        self.y_train_ = signed
        self.descriptors_ = list(descriptors)
        self.solution_ = solution
        self.dual_coef_ = solution.alpha
        self.kernel_weights_ = solution.kernel_weights
        self.intercept_ = solution.intercept
        self.n_iter_ = solution.iterations
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "solution_")
        X = check_array(X)
        return mkl_decision_function(self.solution_, self.descriptors_,
                                     self.X_train_, self.y_train_, X)

    def predict(self, X):
        scores = self.decision_function(X)
        return np.where(scores >= 0, self.classes_[1], self.classes_[0])
