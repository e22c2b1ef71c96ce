"""L2-regularized logistic regression trained by full-batch gradient descent."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..errors import DiscloseError
from ..features import SparseVector, as_matrix, vectors_to_matrix
from ._common import FORMAT_VERSION, as_binary_labels, check_two_classes


@dataclass(frozen=True)
class LogRegConfig:
    l2_lambda: float = 1e-4
    learning_rate: float = 0.5
    max_iters: int = 5000
    tol: float = 1e-6
    seed: int = 0  # unused by the zero-initialized solver; recorded for provenance


def loss_and_grad(w, b, X, y, l2_lambda):
    """Mean logistic loss plus ``l2_lambda/2 * |w|^2`` and its gradient.

    Returns ``(loss, grad_w, grad_b)``; the bias is not regularized.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        return _loss_and_grad(w, b, X, y, l2_lambda)


def _loss_and_grad(w, b, X, y, l2_lambda):
    z = X @ w + b
    n = len(y)
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2_lambda * (w @ w))
    r = (expit(z) - y) / n
    return loss, np.asarray(X.T @ r).ravel() + l2_lambda * w, float(r.sum())


@dataclass(frozen=True, eq=False)
class LogRegModel:
    weights: np.ndarray
    bias: float
    l2_lambda: float
    trace: dict
    config: LogRegConfig = LogRegConfig()
    background: np.ndarray = None
    metadata: dict = field(default_factory=dict)
    loss_history: tuple = field(default=(), repr=False, compare=False)

    kind = "LOGREG"

    @property
    def dim(self):
        return len(self.weights)

    def margin_matrix(self, X):
        return np.asarray(as_matrix(X) @ self.weights).ravel() + self.bias

    def predict_proba_matrix(self, X):
        return expit(self.margin_matrix(X))

    def margin(self, x):
        return float(sum(self.weights[i] * v for i, v in zip(x.indices, x.values)) + self.bias)

    def predict_proba(self, x):
        return float(expit(self.margin(x)))

    def to_dict(self):
        out = {
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            "parameters": {
                "weights": [float(v) for v in self.weights],
                "bias": float(self.bias),
                "l2_lambda": float(self.l2_lambda),
            },
            "config": vars(self.config).copy(),
            "training_trace": self.trace,
        }
        if self.background is not None:
            out["parameters"]["background"] = [float(v) for v in self.background]
        out.update(self.metadata)
        return out

    @classmethod
    def from_dict(cls, data):
        p = data["parameters"]
        bg = p.get("background")
        meta = {k: v for k, v in data.items()
                if k not in ("format_version", "kind", "parameters", "config", "training_trace")}
        return cls(
            np.asarray(p["weights"], dtype=np.float64), float(p["bias"]), float(p["l2_lambda"]),
            dict(data.get("training_trace", {})), LogRegConfig(**data.get("config", {})),
            None if bg is None else np.asarray(bg, dtype=np.float64), meta,
        )


def train_logreg(X, y, config=None, background=None, metadata=None):
    """Fit by gradient descent from ``w = 0, b = 0``.

    Stops once the gradient's infinity norm drops below ``config.tol`` or
    after ``config.max_iters`` steps.
    """
    config = config or LogRegConfig()
    if isinstance(X, (list, tuple)) and X and isinstance(X[0], SparseVector):
        X = vectors_to_matrix(list(X))
    X = as_matrix(X)
    y = as_binary_labels(y)
    check_two_classes(X, y)
    w = np.zeros(X.shape[1])
    b = 0.0
    history = []
    it = 0
    loss, gw, gb = loss_and_grad(w, b, X, y, config.l2_lambda)
    history.append(loss)
    gnorm = max(float(np.max(np.abs(gw), initial=0.0)), abs(gb))
    while gnorm >= config.tol and it < config.max_iters:
        w = w - config.learning_rate * gw
        b = b - config.learning_rate * gb
        it += 1
        loss, gw, gb = loss_and_grad(w, b, X, y, config.l2_lambda)
        if not math.isfinite(loss):
            raise DiscloseError("DIVERGED", f"non-finite loss at iteration {it}; lower the learning rate")
        history.append(loss)
        gnorm = max(float(np.max(np.abs(gw), initial=0.0)), abs(gb))
    trace = {
        "final_loss": loss,
        "iterations": it,
        "gradient_inf_norm": gnorm,
        "converged": gnorm < config.tol,
    }
    return LogRegModel(
        w, b, config.l2_lambda, trace, config,
        None if background is None else np.asarray(background, dtype=np.float64),
        dict(metadata or {}), tuple(history),
    )
