"""Deduplication, class balancing and stratified train/test splitting."""

import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from . import _rng
from .errors import DiscloseError, ValidationError
from .ingest import Sentence
from .io import read_csv, write_csv
from .weaklabel import AI, LEXICON, NON_AI, LabeledSentence

DATASET_COLUMNS = ("sentence_id", "year", "text", "label")

_SPACE = re.compile(r"\s+")
_TRAILING_PUNCT = re.compile(r"[\s.!?;:,…]+$")


@dataclass(frozen=True)
class DatasetSplit:
    train: list
    test: list
    seed: int
    test_fraction: float


def normalize_for_dedup(text):
    return _TRAILING_PUNCT.sub("", _SPACE.sub(" ", text.lower()).strip())


def deduplicate(labeled):
    """Drop sentences whose normalized text repeats an earlier one (any class)."""
    seen, out = set(), []
    for ls in labeled:
        key = normalize_for_dedup(ls.text)
        if key not in seen:
            seen.add(key)
            out.append(ls)
    return out


def _sample_sorted(rng, n, k):
    return sorted(int(i) for i in rng.choice(n, size=k, replace=False))


def balance(labeled, seed):
    """Keep every AI sentence and a seeded uniform sample of as many NON_AI ones."""
    pos = [ls for ls in labeled if ls.label == AI]
    neg = [ls for ls in labeled if ls.label == NON_AI]
    if not pos:
        raise DiscloseError("NO_POSITIVES", "balance needs at least one AI sentence")
    if len(neg) < len(pos):
        raise DiscloseError(
            "INSUFFICIENT_NEGATIVES", f"{len(neg)} NON_AI sentences for {len(pos)} AI sentences"
        )
    rng = _rng.make_rng(seed, _rng.STREAM_BALANCE)
    return pos + [neg[i] for i in _sample_sorted(rng, len(neg), len(pos))]


def round_half_up(x):
    return int(Decimal(str(x)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def n_test_for_class(n_class, test_fraction):
    return round_half_up(Decimal(n_class) * Decimal(str(test_fraction)))


def stratified_split(labeled, test_fraction, seed):
    """Per class, a seeded sample of ``round_half_up(n * test_fraction)`` goes to test.

    Both parts keep the input's relative order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError("BAD_FRACTION", f"test_fraction must lie in (0, 1), got {test_fraction}")
    rng = _rng.make_rng(seed, _rng.STREAM_SPLIT)
    test_pos = set()
    for label in (AI, NON_AI):
        members = [i for i, ls in enumerate(labeled) if ls.label == label]
        if len(members) < 2:
            raise DiscloseError(
                "CLASS_TOO_SMALL", f"class {label} has {len(members)} member(s); need at least 2"
            )
        k = n_test_for_class(len(members), test_fraction)
        test_pos.update(members[j] for j in _sample_sorted(rng, len(members), k))
    train = [ls for i, ls in enumerate(labeled) if i not in test_pos]
    test = [ls for i, ls in enumerate(labeled) if i in test_pos]
    return DatasetSplit(train, test, seed, test_fraction)


def class_counts(labeled):
    n_ai = sum(1 for ls in labeled if ls.label == AI)
    return {"AI": n_ai, "NON_AI": len(labeled) - n_ai}


def build_dataset(labeled, *, dedup=True, do_balance=True, test_fraction=0.2, seed=42):
    """Run dedup → balance → split and return ``(split, metadata)``."""
    meta = {"seed": seed, "test_fraction": test_fraction, "input": class_counts(labeled)}
    rows = labeled
    if dedup:
        rows = deduplicate(rows)
        meta["dedup"] = {
            "removed": len(labeled) - len(rows),
            "removed_by_class": {
                k: v - class_counts(rows)[k] for k, v in class_counts(labeled).items()
            },
        }
    else:
        meta["dedup"] = None
    if do_balance:
        rows = balance(rows, seed)
    meta["balanced"] = class_counts(rows) if do_balance else None
    split = stratified_split(rows, test_fraction, seed)
    meta["train"] = class_counts(split.train)
    meta["test"] = class_counts(split.test)
    meta["generator"] = _rng.generator_identity()
    return split, meta


def write_dataset(path, labeled):
    write_csv(path, DATASET_COLUMNS, [(ls.sentence_id, ls.year, ls.text, ls.label) for ls in labeled])


_LABEL_ALIASES = {
    "ai": AI, "1": AI, "ai-related": AI, "true": AI,
    "non_ai": NON_AI, "non-ai": NON_AI, "nonai": NON_AI, "0": NON_AI, "false": NON_AI,
}


def read_loose_dataset(path):
    """Read a third-party ``text,label`` style CSV (e.g. an annotated release).

    Accepts a ``text`` or ``sentence`` column and labels like ``1/0`` or
    ``AI/Non-AI``. Sentence ids and years are synthesized when absent.
    """
    fields, _ = read_csv(path, ())
    text_col = next((c for c in fields if c.lower() in ("text", "sentence", "sentences")), None)
    label_col = next((c for c in fields if c.lower() in ("label", "labels", "class")), None)
    if text_col is None or label_col is None:
        raise ValidationError("MISSING_COLUMN", f"{path}: need a text/sentence and a label column")
    _, rows = read_csv(path, (text_col, label_col))
    out = []
    for lineno, row in rows:
        key = (row[label_col] or "").strip().lower().replace(" ", "_")
        if key not in _LABEL_ALIASES:
            raise ValidationError("BAD_LABEL", f"{path}: line {lineno}: label {row[label_col]!r}")
        year = (row.get("year") or "0").strip()
        sid = (row.get("sentence_id") or "").strip() or f"row{lineno:06d}"
        sentence = Sentence.from_text(sid, row[text_col] or "", "", int(year) if year.isdigit() else 0)
        out.append(LabeledSentence(sentence, _LABEL_ALIASES[key], LEXICON, ()))
    return out
