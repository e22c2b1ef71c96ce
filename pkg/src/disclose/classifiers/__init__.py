"""Classical baselines and the external-score adapter behind one predictor interface."""

import os

import numpy as np

from ..errors import DiscloseError, ValidationError
from ..features import SparseVector, TfidfModel, tokenize, transform_matrix, transform_tokens_matrix
from ..io import read_json, sha256_file, write_json
from ._common import FORMAT_VERSION, as_binary_labels
from .external import ExternalScores, load_external_scores
from .forest import ForestConfig, ForestModel, train_forest
from .logreg import LogRegConfig, LogRegModel, loss_and_grad, train_logreg
from .naive_bayes import NaiveBayesModel, train_nb

KINDS = {"logreg": "LOGREG", "nb": "NB", "forest": "FOREST"}
UNSUPPORTED_KINDS = {"xgboost": "gradient boosting is not implemented; use 'forest'"}
_MODEL_CLASSES = {"LOGREG": LogRegModel, "NB": NaiveBayesModel, "FOREST": ForestModel}


def predict_proba(model, x):
    """Probability of AI for a SparseVector, or for a sentence_id on EXTERNAL models."""
    if model.kind == "EXTERNAL":
        if not isinstance(x, str):
            raise DiscloseError("BAD_INPUT", "external scores are looked up by sentence_id")
        return model.predict_proba(x)
    if not isinstance(x, SparseVector):
        raise DiscloseError("BAD_INPUT", "expected a SparseVector")
    if x.dim != model.dim:
        raise DiscloseError("DIMENSION_MISMATCH", f"vector has dim {x.dim}, model expects {model.dim}")
    return model.predict_proba(x)


def score_sentences(model, sentences, features=None):
    """AI probability for each Sentence / LabeledSentence (or raw string)."""
    if model.kind == "EXTERNAL":
        return np.array([model.predict_proba(s if isinstance(s, str) else s.sentence_id)
                         for s in sentences], dtype=np.float64)
    if features is None:
        raise DiscloseError("MISSING_FEATURES", f"{model.kind} models need a fitted TfidfModel")
    _check_dims(model, features)
    if not sentences:
        return np.zeros(0)
    return np.clip(model.predict_proba_matrix(transform_matrix(features, sentences)), 0.0, 1.0)


def score_token_lists(model, token_lists, features):
    _check_dims(model, features)
    return np.clip(model.predict_proba_matrix(transform_tokens_matrix(features, token_lists)), 0.0, 1.0)


def _check_dims(model, features):
    if model.dim != features.dim:
        raise DiscloseError(
            "DIMENSION_MISMATCH",
            f"model has {model.dim} features but the feature model has {features.dim}",
        )


def train(kind, X, y, *, seed=0, params=None, background=None, metadata=None):
    """Dispatch on ``kind`` in {'logreg', 'nb', 'forest'} with optional hyperparameters."""
    params = dict(params or {})
    if kind in UNSUPPORTED_KINDS:
        raise ValidationError("UNSUPPORTED_MODEL", f"{kind}: {UNSUPPORTED_KINDS[kind]}")
    if kind == "logreg":
        return train_logreg(X, y, LogRegConfig(seed=seed, **params), background, metadata)
    if kind == "nb":
        return train_nb(X, y, params.get("alpha", 1.0), metadata)
    if kind == "forest":
        return train_forest(X, y, ForestConfig(seed=seed, **params), metadata)
    raise ValidationError("UNKNOWN_MODEL", f"unknown model kind {kind!r}")


def feature_ref(features_path, model_path):
    """Relative path plus digest so a model file names the exact feature model it needs."""
    rel = os.path.relpath(os.path.abspath(features_path), os.path.dirname(os.path.abspath(model_path)))
    return {"path": rel.replace(os.sep, "/"), "sha256": sha256_file(features_path)}


def save_model(model, path):
    write_json(path, model.to_dict())


def load_model(path):
    """Load a saved model JSON, or external scores when ``path`` is a CSV."""
    if str(path).lower().endswith(".csv"):
        return load_external_scores(path)
    data = read_json(path)
    if data.get("format_version") != FORMAT_VERSION:
        raise ValidationError("BAD_MODEL_FILE", f"{path}: unsupported format_version")
    cls = _MODEL_CLASSES.get(data.get("kind"))
    if cls is None:
        raise ValidationError("BAD_MODEL_FILE", f"{path}: unknown kind {data.get('kind')!r}")
    try:
        return cls.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("BAD_MODEL_FILE", f"{path}: {exc}") from None


def resolve_features(model, model_path, features_path=None):
    """Load the feature model named explicitly or via the model's ``feature_model_ref``."""
    from ..features import load_tfidf

    if features_path:
        return load_tfidf(features_path)
    ref = getattr(model, "metadata", {}).get("feature_model_ref")
    if not ref:
        raise ValidationError("MISSING_FEATURES", "no --features given and the model names none")
    path = os.path.join(os.path.dirname(os.path.abspath(model_path)), ref["path"])
    if ref.get("sha256") and os.path.exists(path) and sha256_file(path) != ref["sha256"]:
        raise ValidationError("FEATURE_DIGEST_MISMATCH", f"{path} differs from the one used in training")
    return load_tfidf(path)


__all__ = [
    "ExternalScores", "ForestConfig", "ForestModel", "LogRegConfig", "LogRegModel",
    "NaiveBayesModel", "TfidfModel", "as_binary_labels", "feature_ref", "load_external_scores",
    "load_model", "loss_and_grad", "predict_proba", "resolve_features", "save_model",
    "score_sentences", "score_token_lists", "tokenize", "train", "train_forest", "train_logreg",
    "train_nb",
]
