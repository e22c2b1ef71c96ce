"""TOML pipeline configuration.

Schema (all sections optional except ``[paths]`` manifest/lexicon)::

    [paths]
    manifest = "manifest.csv"        # required
    lexicon = "lexicon.csv"          # required
    overrides = "overrides.csv"
    abbreviations = "abbrev.txt"
    adversarial = "builtin"          # suite CSV path, "builtin" or ""
    external_scores = ""             # sentence_id,probability CSV to evaluate too
    output = "out"                   # used when --out is not given

    [filter]    min_tokens, max_tokens, max_digit_ratio, require_lowercase_word
    [dataset]   dedup, balance, test_fraction, seed
    [features]  sublinear_tf, normalize
    [models]    kinds = ["logreg", "nb", "forest"]
    [models.logreg] l2_lambda, learning_rate, max_iters, tol
    [models.nb]     alpha
    [models.forest] n_trees, max_depth (0 = unbounded), min_leaf
    [eval]        threshold, figures
    [diagnostics] length_bias, temporal, adversarial

Relative paths resolve against the config file's directory.
"""

import copy
import os
import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import InputFileError, ValidationError

DEFAULTS = {
    "paths": {
        "manifest": "", "lexicon": "", "overrides": "", "abbreviations": "",
        "adversarial": "builtin", "external_scores": "", "output": "",
    },
    "filter": {"min_tokens": 4, "max_tokens": 128, "max_digit_ratio": 0.5, "require_lowercase_word": True},
    "dataset": {"dedup": True, "balance": True, "test_fraction": 0.2, "seed": None},
    "features": {"sublinear_tf": False, "normalize": True},
    "models": {
        "kinds": ["logreg", "nb", "forest"],
        "logreg": {"l2_lambda": 1e-4, "learning_rate": 0.5, "max_iters": 5000, "tol": 1e-6},
        "nb": {"alpha": 1.0},
        "forest": {"n_trees": 100, "max_depth": None, "min_leaf": 1},
    },
    "eval": {"threshold": 0.5, "figures": True},
    "diagnostics": {"length_bias": True, "temporal": True, "adversarial": True},
}


@dataclass
class PipelineConfig:
    data: dict
    base_dir: str = "."

    def __getitem__(self, section):
        return self.data[section]

    def path(self, key):
        """Absolute path for ``paths.<key>``, or '' when unset."""
        value = self.data["paths"].get(key) or ""
        if not value or value == "builtin":
            return value
        return value if os.path.isabs(value) else os.path.normpath(os.path.join(self.base_dir, value))

    @property
    def seed(self):
        return self.data["dataset"]["seed"]

    def snapshot(self):
        return copy.deepcopy(self.data)


def _merge(base, extra, where=""):
    for key, value in extra.items():
        if key not in base:
            raise ValidationError("UNKNOWN_CONFIG_KEY", f"unknown config key {where}{key}")
        if isinstance(base[key], dict) and key != "kinds":
            if not isinstance(value, dict):
                raise ValidationError("BAD_CONFIG", f"{where}{key} must be a table")
            _merge(base[key], value, f"{where}{key}.")
        else:
            base[key] = value


def _parse_scalar(text):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_override(data, assignment):
    """Apply ``section.key=value`` (value parsed as TOML, else taken as a string)."""
    if "=" not in assignment:
        raise ValidationError("BAD_OVERRIDE", f"expected section.key=value, got {assignment!r}")
    dotted, raw = assignment.split("=", 1)
    keys = dotted.strip().split(".")
    node = {}
    cur = node
    for k in keys[:-1]:
        cur[k] = {}
        cur = cur[k]
    cur[keys[-1]] = _parse_scalar(raw.strip())
    _merge(data, node)


def load_config(path, overrides=(), require_inputs=True):
    """Read and validate a config file; ``overrides`` are ``section.key=value`` strings."""
    if not os.path.exists(path):
        raise InputFileError("MISSING_CONFIG", f"{path} does not exist")
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError("BAD_CONFIG", f"{path}: {exc}") from None
    data = copy.deepcopy(DEFAULTS)
    _merge(data, raw)
    for item in overrides:
        apply_override(data, item)
    cfg = PipelineConfig(data, os.path.dirname(os.path.abspath(path)))
    validate(cfg, require_inputs)
    return cfg


def validate(cfg, require_inputs=True):
    paths = cfg["paths"]
    for key in ("manifest", "lexicon"):
        if not paths.get(key):
            raise ValidationError("MISSING_PATH", f"paths.{key} is required")
    if require_inputs:
        for key in ("manifest", "lexicon", "overrides", "abbreviations", "adversarial", "external_scores"):
            p = cfg.path(key)
            if p and p != "builtin" and not os.path.exists(p):
                raise ValidationError("MISSING_PATH", f"paths.{key}: {p} does not exist")
    ds = cfg["dataset"]
    if ds["seed"] is None or not isinstance(ds["seed"], int) or ds["seed"] < 0:
        raise ValidationError("MISSING_SEED", "dataset.seed must be a nonnegative integer")
    if not 0 < float(ds["test_fraction"]) < 1:
        raise ValidationError("BAD_CONFIG", "dataset.test_fraction must lie in (0, 1)")
    kinds = cfg["models"]["kinds"]
    if not isinstance(kinds, list) or not kinds:
        raise ValidationError("BAD_CONFIG", "models.kinds must be a non-empty list")
    for kind in kinds:
        if kind == "xgboost":
            raise ValidationError("UNSUPPORTED_MODEL", "xgboost is not implemented; use 'forest'")
        if kind not in ("logreg", "nb", "forest"):
            raise ValidationError("BAD_CONFIG", f"unknown model kind {kind!r}")
    f = cfg["filter"]
    if not 1 <= f["min_tokens"] <= f["max_tokens"]:
        raise ValidationError("INVALID_POLICY", "need 1 <= filter.min_tokens <= filter.max_tokens")
    return cfg
