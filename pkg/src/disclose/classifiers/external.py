"""Adapter for probabilities produced outside this package (e.g. a fine-tuned transformer)."""

import math
import os
from dataclasses import dataclass

from ..errors import DiscloseError, InputFileError, ValidationError
from ..io import read_csv


@dataclass(frozen=True, eq=False)
class ExternalScores:
    scores: dict
    source: str = ""

    kind = "EXTERNAL"

    def __len__(self):
        return len(self.scores)

    def __contains__(self, sentence_id):
        return sentence_id in self.scores

    def predict_proba(self, sentence_id):
        try:
            return self.scores[sentence_id]
        except KeyError:
            raise DiscloseError(
                "MISSING_SENTENCE_ID", f"no external score for sentence_id {sentence_id!r}"
            ) from None


def load_external_scores(path, source=None):
    """Read a ``sentence_id,probability`` CSV, rejecting bad rows by line number."""
    if not os.path.exists(path):
        raise InputFileError("MISSING_FILE", f"{path} does not exist")
    _, rows = read_csv(path, ("sentence_id", "probability"))
    scores = {}
    for lineno, row in rows:
        where = f"{path}: line {lineno}"
        sid = (row["sentence_id"] or "").strip()
        if not sid:
            raise ValidationError("MALFORMED_ROW", f"{where}: empty sentence_id")
        try:
            p = float(row["probability"])
        except (TypeError, ValueError):
            raise ValidationError("MALFORMED_ROW", f"{where}: probability {row['probability']!r}") from None
        if not (math.isfinite(p) and 0.0 <= p <= 1.0):
            raise ValidationError("PROBABILITY_OUT_OF_RANGE", f"{where}: probability {p} not in [0, 1]")
        if sid in scores:
            raise ValidationError("DUPLICATE_SENTENCE_ID", f"{where}: duplicate sentence_id {sid!r}")
        scores[sid] = p
    return ExternalScores(scores, source if source is not None else os.path.basename(path))
