"""Multinomial naive Bayes that accepts fractional (TF-IDF) feature mass."""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ..errors import DiscloseError
from ..features import as_matrix
from ._common import FORMAT_VERSION, as_binary_labels, check_two_classes


@dataclass(frozen=True, eq=False)
class NaiveBayesModel:
    # Row 0 is NON_AI, row 1 is AI.
    log_prior: np.ndarray
    log_likelihood: np.ndarray
    alpha: float
    metadata: dict = field(default_factory=dict)

    kind = "NB"

    @property
    def dim(self):
        return self.log_likelihood.shape[1]

    def joint_log_likelihood(self, X):
        X = as_matrix(X)
        return np.asarray(X @ self.log_likelihood.T) + self.log_prior

    def posterior_matrix(self, X):
        jll = self.joint_log_likelihood(X)
        return np.exp(jll - logsumexp(jll, axis=1, keepdims=True))

    def predict_proba_matrix(self, X):
        return self.posterior_matrix(X)[:, 1]

    def predict_proba(self, x):
        return float(self.predict_proba_matrix([x])[0])

    def to_dict(self):
        out = {
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            "parameters": {
                "alpha": self.alpha,
                "log_prior": [float(v) for v in self.log_prior],
                "log_likelihood": [[float(v) for v in row] for row in self.log_likelihood],
            },
            "training_trace": {},
        }
        out.update(self.metadata)
        return out

    @classmethod
    def from_dict(cls, data):
        p = data["parameters"]
        meta = {k: v for k, v in data.items()
                if k not in ("format_version", "kind", "parameters", "training_trace")}
        return cls(np.asarray(p["log_prior"]), np.asarray(p["log_likelihood"]), float(p["alpha"]), meta)


def train_nb(X, y, alpha=1.0, metadata=None):
    if not alpha > 0:
        raise DiscloseError("BAD_ALPHA", f"alpha must be positive, got {alpha}")
    X = as_matrix(X)
    y = as_binary_labels(y)
    check_two_classes(X, y)
    if X.nnz and X.data.min() < 0:
        raise DiscloseError("NEGATIVE_FEATURE", "naive Bayes needs nonnegative feature values")
    n_features = X.shape[1]
    log_prior, log_lik = [], []
    for c in (0.0, 1.0):
        rows = X[np.flatnonzero(y == c)]
        mass = np.asarray(rows.sum(axis=0)).ravel()
        log_prior.append(np.log(rows.shape[0] / len(y)))
        log_lik.append(np.log(mass + alpha) - np.log(mass.sum() + alpha * n_features))
    return NaiveBayesModel(np.array(log_prior), np.vstack(log_lik), float(alpha), dict(metadata or {}))
