"""Classification metrics with the AI class as positive."""

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import rankdata

from .classifiers import as_binary_labels, score_sentences
from .errors import DiscloseError
from .io import write_csv, write_json

UNDEFINED_AS_ZERO = "UNDEFINED_AS_ZERO"
BRIER_FORMULATION = "positive_class: mean((p - 1[label=AI])^2)"


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int
    threshold: float = 0.5

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass
class EvalReport:
    confusion: ConfusionMatrix
    accuracy: float
    precision_ai: float
    recall_ai: float
    f1_ai: float
    precision_non: float
    recall_non: float
    f1_non: float
    macro_f1: float
    roc_points: list
    auc: float
    brier: float
    flags: dict = field(default_factory=dict)
    n: int = 0
    model_kind: str = ""

    def to_dict(self):
        d = asdict(self)
        d["roc_points"] = [[float(a), float(b)] for a, b in self.roc_points]
        d["brier_formulation"] = BRIER_FORMULATION
        d["positive_class"] = "AI"
        return d


def _unzip(scores):
    if len(scores) == 0:
        raise DiscloseError("EMPTY_INPUT", "no scores to evaluate")
    p = np.asarray([s[0] for s in scores], dtype=np.float64)
    y = as_binary_labels([s[1] for s in scores])
    return p, y


def confusion(scores, threshold=0.5):
    """Tally predictions, calling a sentence AI when ``p >= threshold``."""
    p, y = _unzip(scores)
    pred = p >= threshold
    pos = y == 1.0
    return ConfusionMatrix(
        tp=int(np.sum(pred & pos)), fp=int(np.sum(pred & ~pos)),
        tn=int(np.sum(~pred & ~pos)), fn=int(np.sum(~pred & pos)),
        threshold=float(threshold),
    )


def _ratio(num, den, name, flags):
    if den == 0:
        flags[name] = UNDEFINED_AS_ZERO
        return 0.0
    return num / den


def _f1(p, r):
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def prf(matrix):
    """Accuracy, per-class precision/recall/F1, macro F1, and a dict of flags."""
    if matrix.total == 0:
        raise DiscloseError("EMPTY_INPUT", "confusion matrix is empty")
    flags = {}
    tp, fp, tn, fn = matrix.tp, matrix.fp, matrix.tn, matrix.fn
    p_ai = _ratio(tp, tp + fp, "precision_ai", flags)
    r_ai = _ratio(tp, tp + fn, "recall_ai", flags)
    p_non = _ratio(tn, tn + fn, "precision_non", flags)
    r_non = _ratio(tn, tn + fp, "recall_non", flags)
    f1_ai, f1_non = _f1(p_ai, r_ai), _f1(p_non, r_non)
    return {
        "accuracy": (tp + tn) / matrix.total,
        "precision_ai": p_ai, "recall_ai": r_ai, "f1_ai": f1_ai,
        "precision_non": p_non, "recall_non": r_non, "f1_non": f1_non,
        "macro_f1": (f1_ai + f1_non) / 2,
        "flags": flags,
    }


def roc_curve(scores):
    """ROC points from sweeping the threshold down through every distinct score."""
    p, y = _unzip(scores)
    n_pos, n_neg = y.sum(), len(y) - y.sum()
    if n_pos == 0 or n_neg == 0:
        raise DiscloseError("SINGLE_CLASS", "ROC needs both classes")
    order = np.argsort(-p, kind="stable")
    p, y = p[order], y[order]
    # Last index of each run of equal scores.
    ends = np.flatnonzero(np.r_[p[1:] != p[:-1], True])
    tps = np.cumsum(y)[ends]
    fps = (ends + 1) - tps
    points = [(0.0, 0.0)] + [(fp / n_neg, tp / n_pos) for fp, tp in zip(fps, tps)]
    return points


def trapezoid_area(points):
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points[:-1], points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def auc_mann_whitney(scores):
    """P(score of random AI > score of random NON_AI), ties counting one half."""
    p, y = _unzip(scores)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DiscloseError("SINGLE_CLASS", "AUC is undefined with a single class")
    ranks = rankdata(p, method="average")
    u = ranks[y == 1.0].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_auc(scores):
    return roc_curve(scores), auc_mann_whitney(scores)


def brier(scores):
    p, y = _unzip(scores)
    return float(np.mean((p - y) ** 2))


def report_from_scores(scores, threshold=0.5, model_kind=""):
    cm = confusion(scores, threshold)
    m = prf(cm)
    points, auc = roc_auc(scores)
    return EvalReport(
        confusion=cm,
        accuracy=m["accuracy"], precision_ai=m["precision_ai"], recall_ai=m["recall_ai"],
        f1_ai=m["f1_ai"], precision_non=m["precision_non"], recall_non=m["recall_non"],
        f1_non=m["f1_non"], macro_f1=m["macro_f1"], roc_points=points, auc=auc,
        brier=brier(scores), flags=m["flags"], n=cm.total, model_kind=model_kind,
    )


def evaluate(model, test, features=None, threshold=0.5):
    """Score every labeled test sentence and assemble the full report."""
    if not test:
        raise DiscloseError("EMPTY_INPUT", "empty test set")
    probs = score_sentences(model, test, features)
    return report_from_scores(list(zip(probs.tolist(), [ls.label for ls in test])), threshold, model.kind)


def write_report(report, path, roc_csv=None):
    write_json(path, report.to_dict())
    if roc_csv:
        write_csv(roc_csv, ("fpr", "tpr"), [(repr(float(a)), repr(float(b))) for a, b in report.roc_points])
