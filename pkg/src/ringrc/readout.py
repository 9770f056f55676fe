"""Linear readout: ridge regression on the state matrix and NMSE scoring."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg

from ringrc.errors import ConfigError, ConstantTarget, ShapeMismatch, SingularSystem

log = logging.getLogger(__name__)

DEFAULT_LAMBDA = 1e-6
LAMBDA_GRID = tuple(10.0**k for k in range(-9, 0))


@dataclass(frozen=True)
class ReadoutModel:
    weights: np.ndarray
    lam: float

    def to_json(self, path: str | Path | None = None, **extra) -> str:
        text = json.dumps({"lambda": self.lam, "weights": [float(w) for w in self.weights], **extra}, indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def add_bias(X: np.ndarray) -> np.ndarray:
    """Append the constant column the readout uses as intercept."""
    X = np.asarray(X, dtype=float)
    return np.hstack([X, np.ones((X.shape[0], 1))])


def ridge_train(X: np.ndarray, y: np.ndarray, lam: float) -> ReadoutModel:
    """
    Solve (XᵀX + λI)·w = Xᵀy.

    λ applies to every column, the bias column included.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ShapeMismatch(f"X {X.shape} and y {y.shape} are not conformant")
    if lam < 0:
        raise ConfigError(f"lambda must be >= 0, got {lam!r}")
    if X.shape[0] < X.shape[1]:
        log.warning("ridge_train: fewer rows (%d) than features (%d)", *X.shape)
    A = X.T @ X
    A[np.diag_indices_from(A)] += lam
    try:
        w = scipy.linalg.solve(A, X.T @ y, assume_a="pos")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularSystem(f"normal equations not positive definite at lambda={lam:g}: {exc}") from None
    if not np.all(np.isfinite(w)):
        raise SingularSystem(f"non-finite weights at lambda={lam:g}")
    return ReadoutModel(weights=w, lam=float(lam))


def predict(X: np.ndarray, model: ReadoutModel) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.weights.shape[0]:
        raise ShapeMismatch(f"X has {X.shape[-1]} columns, model expects {model.weights.shape[0]}")
    return X @ model.weights


def nmse(pred: Sequence[float], target: Sequence[float]) -> float:
    """Mean squared error over the population variance of the target."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape or pred.ndim != 1 or len(pred) < 2:
        raise ShapeMismatch(f"pred {pred.shape} and target {target.shape} must be equal-length 1-D, length >= 2")
    var = np.var(target)
    if var == 0.0:
        raise ConstantTarget("target has zero variance")
    return float(np.mean((pred - target) ** 2) / var)


def lambda_search(X_train, y_train, X_val, y_val, grid: Sequence[float] = LAMBDA_GRID):
    """
    Pick the λ with the lowest validation NMSE; ties go to the larger λ.

    Returns ``(best_lambda, model)`` with the model fitted on the training part.
    """
    lams = sorted(set(float(g) for g in grid), reverse=True)
    if not lams:
        raise ConfigError("lambda grid is empty")
    best = None
    for lam in lams:
        model = ridge_train(X_train, y_train, lam)
        score = nmse(predict(X_val, model), y_val)
        # descending order + strict comparison keeps the larger lambda on ties
        if best is None or score < best[0]:
            best = (score, lam, model)
    return best[1], best[2]
