"""Sentence-length bias, adversarial/edge-case suites, and per-year evaluation."""

import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _rng
from .classifiers import score_sentences
from .errors import DiscloseError, InputFileError, ValidationError
from .evaluation import confusion, prf
from .io import read_csv, write_csv
from .weaklabel import AI, LABELS, NON_AI

SUITE_TAGS = ("ADVERSARIAL", "EDGE")


@dataclass
class LengthBiasReport:
    pearson_r: float
    n: int
    mean_length: float
    mean_probability: float
    scatter: list

    def to_dict(self):
        return asdict(self)


@dataclass
class TemporalReport:
    rows: list  # evaluated years: {year, n_ai, n_non, accuracy, f1_ai}
    skipped: list  # {year, reason}
    seed: int = 0

    @property
    def years(self):
        return sorted([r["year"] for r in self.rows] + [s["year"] for s in self.skipped])

    def to_dict(self):
        return {"rows": self.rows, "skipped": self.skipped, "seed": self.seed, "years": self.years}


@dataclass
class SuiteCase:
    text: str
    expected: str
    tag: str
    note: str = ""
    line: int = 0


@dataclass
class SuiteResult:
    cases: list
    results: list  # one dict per case: probability, predicted, status
    accuracy: float
    accuracy_by_tag: dict
    failures: list = field(default_factory=list)

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "accuracy_by_tag": self.accuracy_by_tag,
            "n_cases": len(self.cases),
            "results": self.results,
            "failures": self.failures,
        }


def pearson_r(x, y):
    """Product-moment correlation; raises ZERO_VARIANCE when either series is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or len(x) < 2:
        raise ValidationError("BAD_INPUT", "need two equal-length series of at least 2 values")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DiscloseError("ZERO_VARIANCE", "correlation undefined: a series is constant")
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def length_bias(model, sentences, features=None):
    if len(sentences) < 3:
        raise ValidationError("TOO_FEW_SENTENCES", "length bias needs at least 3 sentences")
    lengths = [s.token_count if hasattr(s, "token_count") else s.sentence.token_count for s in sentences]
    probs = score_sentences(model, [getattr(s, "sentence", s) for s in sentences], features)
    r = pearson_r(lengths, probs)
    return LengthBiasReport(
        pearson_r=r, n=len(lengths),
        mean_length=float(np.mean(lengths)), mean_probability=float(np.mean(probs)),
        scatter=[[int(a), float(b)] for a, b in zip(lengths, probs)],
    )


def temporal_eval(model, test, features=None, seed=0, threshold=0.5):
    """Per-year accuracy and F1(AI) after seeded downsampling of the majority class."""
    by_year = {}
    for ls in test:
        by_year.setdefault(ls.year, []).append(ls)
    rows, skipped = [], []
    for year in sorted(by_year):
        items = by_year[year]
        pos = [ls for ls in items if ls.label == AI]
        neg = [ls for ls in items if ls.label == NON_AI]
        if not pos or not neg:
            skipped.append({"year": year, "reason": "NO_AI" if not pos else "NO_NON_AI"})
            continue
        k = min(len(pos), len(neg))
        rng = _rng.make_rng(seed, _rng.STREAM_TEMPORAL, year)
        if len(pos) > k:
            pos = [pos[i] for i in sorted(rng.choice(len(pos), size=k, replace=False).tolist())]
        if len(neg) > k:
            neg = [neg[i] for i in sorted(rng.choice(len(neg), size=k, replace=False).tolist())]
        sample = pos + neg
        probs = score_sentences(model, sample, features)
        m = prf(confusion(list(zip(probs.tolist(), [ls.label for ls in sample])), threshold))
        rows.append({"year": year, "n_ai": k, "n_non": k,
                     "accuracy": m["accuracy"], "f1_ai": m["f1_ai"]})
    if not rows:
        raise DiscloseError("NO_EVALUABLE_YEAR", "no year has sentences of both classes")
    return TemporalReport(rows, skipped, seed)


def load_suite(path):
    """Read a ``text,expected,tag`` CSV; an optional ``note`` column documents each case."""
    if not os.path.exists(path):
        raise InputFileError("MISSING_FILE", f"{path} does not exist")
    fields, rows = read_csv(path, ("text", "expected", "tag"))
    cases = []
    for lineno, row in rows:
        where = f"{path}: line {lineno}"
        text = (row["text"] or "").strip()
        expected = (row["expected"] or "").strip()
        tag = (row["tag"] or "").strip().upper()
        if not text:
            raise ValidationError("MALFORMED_ROW", f"{where}: empty text")
        if expected not in LABELS:
            raise ValidationError("MALFORMED_ROW", f"{where}: expected label {expected!r} must be AI or NON_AI")
        if tag not in SUITE_TAGS:
            raise ValidationError("MALFORMED_ROW", f"{where}: tag {tag!r} must be ADVERSARIAL or EDGE")
        cases.append(SuiteCase(text, expected, tag, (row.get("note") or "").strip(), lineno))
    if not cases:
        raise ValidationError("EMPTY_SUITE", f"{path} has no cases")
    return cases


def adversarial_suite(model, suite, features=None, threshold=0.5):
    """Score every case; errors (e.g. no external score) are recorded per case."""
    cases = load_suite(suite) if isinstance(suite, (str, os.PathLike)) else list(suite)
    if not cases:
        raise ValidationError("EMPTY_SUITE", "suite has no cases")
    results = []
    for i, case in enumerate(cases):
        ref = f"suite:{i:04d}" if model.kind == "EXTERNAL" else case.text
        try:
            p = float(score_sentences(model, [ref], features)[0])
        except DiscloseError as exc:
            results.append({"index": i, "text": case.text, "expected": case.expected, "tag": case.tag,
                            "probability": None, "predicted": None, "status": "error", "error": exc.code})
            continue
        pred = AI if p >= threshold else NON_AI
        results.append({"index": i, "text": case.text, "expected": case.expected, "tag": case.tag,
                        "probability": p, "predicted": pred,
                        "status": "pass" if pred == case.expected else "fail"})

    def acc(rs):
        scored = [r for r in rs if r["status"] != "error"]
        return None if not scored else sum(r["status"] == "pass" for r in scored) / len(scored)

    by_tag = {tag: acc([r for r in results if r["tag"] == tag]) for tag in SUITE_TAGS
              if any(r["tag"] == tag for r in results)}
    failures = [r for r in results if r["status"] == "fail"]
    return SuiteResult(cases, results, acc(results), by_tag, failures)


def write_temporal_csv(path, report):
    write_csv(path, ("year", "n_ai", "n_non", "accuracy", "f1_ai"),
              [(r["year"], r["n_ai"], r["n_non"], repr(r["accuracy"]), repr(r["f1_ai"]))
               for r in report.rows])
