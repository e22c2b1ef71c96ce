"""Per-token Shapley attributions.

Players are token positions.  A coalition is scored by re-vectorizing the
sentence with only its tokens kept, so masking is token removal rather than
zeroing of feature columns.  Three estimators share that value function:
exact enumeration, the closed form for linear models, and Kernel SHAP.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _rng
from .errors import DiscloseError, ValidationError
from .features import token_ids, tokenize, transform_masks, transform_tokens_matrix
from .io import write_csv, write_json

EXACT_MAX_TOKENS = 12
KERNEL_DEFAULT_CAP = 2 ** 11
PROBABILITY = "PROBABILITY"
MARGIN = "MARGIN"


@dataclass
class AttributionReport:
    sentence_id: str
    tokens: list
    phi: list
    base_value: float
    prediction: float
    method: str
    scale: str = PROBABILITY
    background: str = "empty sentence"
    n_samples: int = None
    seed: int = None
    absent_phi: float = 0.0
    residual: float = 0.0
    positions: list = field(default_factory=list)

    def efficiency_gap(self):
        return self.base_value + sum(self.phi) + self.absent_phi - self.prediction

    def to_dict(self):
        return asdict(self)

    def rows(self):
        return [(tok, pos, phi) for tok, pos, phi in zip(self.tokens, range(len(self.tokens)), self.phi)]


def _tokens_of(sentence):
    text = sentence if isinstance(sentence, str) else sentence.text
    sid = "" if isinstance(sentence, str) else sentence.sentence_id
    return sid, tokenize(text)


def coalition_values(model, tokens, features, masks, scale=PROBABILITY):
    """Model output for each row of the boolean ``masks`` array over ``tokens``."""
    if model.kind == "EXTERNAL":
        raise DiscloseError(
            "UNSUPPORTED_MODEL", "external scores cannot be re-evaluated on masked sentences"
        )
    X = transform_masks(features, token_ids(features, tokens), masks)
    if scale == MARGIN:
        if not hasattr(model, "margin_matrix"):
            raise DiscloseError("UNSUPPORTED_MODEL", f"{model.kind} has no margin scale")
        return model.margin_matrix(X)
    return model.predict_proba_matrix(X)


def all_masks(n):
    codes = np.arange(2 ** n, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(bool)


def shapley_from_table(values, n):
    """Exact Shapley values from ``values[mask_code]`` over all ``2**n`` coalitions."""
    codes = np.arange(2 ** n, dtype=np.int64)
    sizes = np.array([bin(c).count("1") for c in codes])
    weight = np.array(
        [math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n) if s < n else 0.0
         for s in range(n + 1)]
    )
    phi = np.zeros(n)
    for i in range(n):
        without = codes[(codes >> i) & 1 == 0]
        phi[i] = np.sum(weight[sizes[without]] * (values[without | (1 << i)] - values[without]))
    return phi


def exact_shap(model, sentence, features, scale=PROBABILITY):
    sid, tokens = _tokens_of(sentence)
    n = len(tokens)
    if n > EXACT_MAX_TOKENS:
        raise ValidationError(
            "TOO_MANY_TOKENS", f"exact enumeration supports at most {EXACT_MAX_TOKENS} tokens, got {n}"
        )
    values = coalition_values(model, tokens, features, all_masks(n), scale)
    phi = shapley_from_table(values, n) if n else np.zeros(0)
    base, pred = float(values[0]), float(values[-1])
    return AttributionReport(
        sid, tokens, phi.tolist(), base, pred, "EXACT", scale,
        residual=float(base + phi.sum() - pred), positions=list(range(n)),
    )


def linear_shap(model, sentence, features, background=None):
    """Closed-form attributions for logistic regression on the margin scale.

    Feature contribution is ``w_f * (x_f - mu_f)``; a feature present in the
    sentence splits its contribution equally over the positions holding it.
    Contributions of vocabulary features absent from the sentence (nonzero
    only when ``mu`` is) are reported in aggregate as ``absent_phi``.
    """
    if model.kind != "LOGREG":
        raise DiscloseError("WRONG_MODEL_KIND", f"linear_shap needs a LOGREG model, got {model.kind}")
    sid, tokens = _tokens_of(sentence)
    if background is None:
        background = model.background
    label = "training mean" if background is not None else "zero vector"
    mu = np.zeros(model.dim) if background is None else np.asarray(background, dtype=np.float64)
    if mu.shape != (model.dim,):
        raise DiscloseError("DIMENSION_MISMATCH", "background length differs from model dimension")
    x = transform_tokens_matrix(features, [tokens]).toarray().ravel()
    w = model.weights
    contrib = w * (x - mu)
    ids = token_ids(features, tokens)
    present = np.unique(ids[ids >= 0])
    counts = {int(f): int(np.sum(ids == f)) for f in present}
    phi = [float(contrib[f] / counts[f]) if f >= 0 else 0.0 for f in ids.tolist()]
    absent = np.ones(model.dim, dtype=bool)
    absent[present] = False
    base = float(w @ mu + model.bias)
    pred = float(w @ x + model.bias)
    absent_phi = float(contrib[absent].sum())
    return AttributionReport(
        sid, tokens, phi, base, pred, "LINEAR", MARGIN, background=label,
        absent_phi=absent_phi, residual=float(base + sum(phi) + absent_phi - pred),
        positions=list(range(len(tokens))),
    )


def _kernel_weight(n, s):
    return (n - 1) / (math.comb(n, s) * s * (n - s))


def _solve_constrained(Z, y, weights, delta):
    """Weighted least squares for phi with ``sum(phi) == delta``."""
    n = Z.shape[1]
    if n == 1:
        return np.array([delta])
    A = Z[:, :-1] - Z[:, -1:]
    b = y - Z[:, -1] * delta
    sw = np.sqrt(weights)
    sol, _, rank, _ = np.linalg.lstsq(A * sw[:, None], b * sw, rcond=None)
    if rank < n - 1:
        raise DiscloseError("DEGENERATE_DESIGN", "sampled coalitions do not identify every token")
    return np.r_[sol, delta - sol.sum()]


def kernel_shap(model, sentence, features, n_samples=None, seed=0, scale=PROBABILITY):
    """Kernel SHAP by weighted regression over coalitions.

    With ``n_samples >= 2**n`` every coalition is used with its exact kernel
    weight, which reproduces the exact Shapley values.  Otherwise
    ``n_samples - 2`` coalitions are drawn (size from the kernel's size
    marginal, then members uniformly) and duplicates accumulate weight.  The
    empty and full coalitions are always evaluated and pin the efficiency
    constraint.
    """
    sid, tokens = _tokens_of(sentence)
    n = len(tokens)
    if n == 0:
        raise ValidationError("EMPTY_INPUT", "kernel_shap needs at least one token")
    full = 2 ** n
    if n_samples is None:
        n_samples = min(KERNEL_DEFAULT_CAP, full)
    if n_samples < min(2 * n + 2, full):
        raise ValidationError(
            "TOO_FEW_SAMPLES", f"need at least {min(2 * n + 2, full)} samples for {n} tokens"
        )
    ends = np.zeros((2, n), dtype=bool)
    ends[1] = True
    v0, v1 = coalition_values(model, tokens, features, ends, scale)
    delta = v1 - v0
    if n == 1:
        Z, weights = np.ones((1, 1), dtype=bool), np.ones(1)
    elif n_samples >= full:
        Z = all_masks(n)[1:-1]
        weights = np.array([_kernel_weight(n, int(s)) for s in Z.sum(axis=1)])
    else:
        rng = _rng.make_rng(seed, _rng.STREAM_KERNEL)
        sizes = np.arange(1, n)
        size_p = np.array([(n - 1) / (s * (n - s)) for s in sizes])
        size_p /= size_p.sum()
        drawn = {}
        for s in rng.choice(sizes, size=n_samples - 2, p=size_p):
            members = rng.choice(n, size=int(s), replace=False)
            code = int(np.sum(1 << members.astype(np.int64)))
            drawn[code] = drawn.get(code, 0) + 1
        if len(drawn) + 2 < n + 1:
            raise DiscloseError(
                "DEGENERATE_DESIGN", f"only {len(drawn) + 2} distinct coalitions for {n} tokens"
            )
        codes = np.array(sorted(drawn), dtype=np.int64)
        Z = ((codes[:, None] >> np.arange(n)) & 1).astype(bool)
        weights = np.array([drawn[c] for c in codes], dtype=np.float64)
    if n == 1:
        phi = np.array([delta])
    else:
        vals = coalition_values(model, tokens, features, Z, scale)
        phi = _solve_constrained(Z.astype(np.float64), vals - v0, weights, delta)
    return AttributionReport(
        sid, tokens, phi.tolist(), float(v0), float(v1), "KERNEL", scale,
        n_samples=int(min(n_samples, full)), seed=seed,
        residual=float(v0 + phi.sum() - v1), positions=list(range(n)),
    )


def explain(model, sentence, features, method="exact", n_samples=None, seed=0):
    method = method.lower()
    if method == "exact":
        return exact_shap(model, sentence, features)
    if method == "linear":
        return linear_shap(model, sentence, features)
    if method == "kernel":
        return kernel_shap(model, sentence, features, n_samples, seed)
    raise ValidationError("UNKNOWN_METHOD", f"unknown explanation method {method!r}")


def render_bars(report, width=30):
    """Plain-text horizontal bar chart, one line per token."""
    scale = max((abs(p) for p in report.phi), default=0.0) or 1.0
    tw = max((len(t) for t in report.tokens), default=5)
    lines = [
        f"method={report.method} scale={report.scale} base={report.base_value:.6f} "
        f"prediction={report.prediction:.6f}"
    ]
    for tok, phi in zip(report.tokens, report.phi):
        n = int(round(abs(phi) / scale * width))
        bar = ("+" if phi >= 0 else "-") * n
        lines.append(f"{tok:<{tw}} {phi:+.6f} {bar}")
    if report.absent_phi:
        lines.append(f"{'(absent)':<{tw}} {report.absent_phi:+.6f}")
    return "\n".join(lines)


def write_attribution(report, json_path=None, csv_path=None):
    if json_path:
        write_json(json_path, report.to_dict())
    if csv_path:
        write_csv(csv_path, ("token", "position", "phi"),
                  [(t, p, repr(float(v))) for t, p, v in report.rows()])
