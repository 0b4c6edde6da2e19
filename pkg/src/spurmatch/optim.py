"""Deterministic L2-regularized logistic regression.

Shared by the document classifier and the word classifier. The objective is
mean logistic loss plus (l2/2)*||theta||^2 with the bias left unregularized;
it is minimized with L-BFGS-B using the analytic gradient, so runs on equal
inputs are bit-identical.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.optimize import minimize
from scipy.special import expit


class FitError(ValueError):
    """Degenerate training data or a diverging fit."""


def loss_and_grad(params: np.ndarray, X, y: np.ndarray, l2: float):
    """Objective and gradient at params = [theta_1..theta_d, bias].

    X is (n, d), dense or CSR; y holds labels in {-1, +1}.
    """
    theta = params[:-1]
    bias = params[-1]
    z = X @ theta + bias
    margins = y * z
    n = y.shape[0]
    loss = float(np.logaddexp(0.0, -margins).sum() / n + 0.5 * l2 * (theta @ theta))
    # d/dz of mean log-loss: -y * sigma(-y z) / n
    coef = -y * expit(-margins) / n
    grad_theta = X.T @ coef + l2 * theta
    grad = np.concatenate([np.asarray(grad_theta).ravel(), [coef.sum()]])
    return loss, grad


def fit_logistic(
    X,
    y: np.ndarray,
    l2: float,
    max_iter: int = 500,
    tol: float = 1e-8,
    seed: int = 0,
) -> tuple[np.ndarray, float, list[float]]:
    """Fit theta and bias; returns (theta, bias, per-iteration loss history).

    The seed is accepted for interface uniformity; the fit starts from zero
    parameters and is deterministic regardless.
    """
    y = np.asarray(y, dtype=np.float64)
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise FitError("training data must contain both classes (-1 and +1)")
    if l2 < 0:
        raise FitError(f"l2_strength must be >= 0, got {l2}")
    if sparse.issparse(X):
        X = sparse.csr_matrix(X, dtype=np.float64)
        d = X.shape[1]
    else:
        X = np.asarray(X, dtype=np.float64)
        d = X.shape[1]

    x0 = np.zeros(d + 1)
    history = [loss_and_grad(x0, X, y, l2)[0]]

    def record(params):
        history.append(loss_and_grad(params, X, y, l2)[0])

    result = minimize(
        loss_and_grad,
        x0,
        args=(X, y, l2),
        jac=True,
        method="L-BFGS-B",
        callback=record,
        options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-16},
    )
    params = result.x
    if not (np.all(np.isfinite(params)) and np.isfinite(result.fun)):
        raise FitError("fit diverged: non-finite loss or parameters")
    return params[:-1], float(params[-1]), history


def gradient_matches_finite_difference(
    X, y: np.ndarray, l2: float, params: np.ndarray, h: float = 1e-6
) -> float:
    """Relative error between the analytic gradient and central differences."""
    _, grad = loss_and_grad(params, X, y, l2)
    fd = np.empty_like(grad)
    for i in range(params.shape[0]):
        up = params.copy()
        dn = params.copy()
        up[i] += h
        dn[i] -= h
        fd[i] = (loss_and_grad(up, X, y, l2)[0] - loss_and_grad(dn, X, y, l2)[0]) / (2 * h)
    denom = max(float(np.linalg.norm(fd)), 1e-30)
    return float(np.linalg.norm(grad - fd)) / denom
