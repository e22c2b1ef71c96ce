"""Lexicon-driven weak labels plus a file-based manual override channel."""

import logging
import os
from dataclasses import dataclass, replace

from .errors import InputFileError, ValidationError
from .features import tokenize
from .ingest import Sentence
from .io import read_csv, write_csv

log = logging.getLogger(__name__)

AI = "AI"
NON_AI = "NON_AI"
LABELS = (AI, NON_AI)
LEXICON = "LEXICON"
OVERRIDE = "OVERRIDE"


@dataclass(frozen=True)
class Lexicon:
    terms: tuple  # tuples of tokens, in load order
    version: str = ""

    def __post_init__(self):
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("duplicate lexicon term")
        if any(not t for t in self.terms):
            raise ValueError("empty lexicon term")
        first = {}
        for pos, term in enumerate(self.terms):
            first.setdefault(term[0], []).append((pos, term))
        object.__setattr__(self, "_by_first", first)

    @classmethod
    def from_strings(cls, strings, version=""):
        terms, seen = [], set()
        for s in strings:
            toks = tuple(tokenize(s))
            if toks and toks not in seen:
                seen.add(toks)
                terms.append(toks)
        return cls(tuple(terms), version)

    @property
    def term_strings(self):
        return [" ".join(t) for t in self.terms]

    def __len__(self):
        return len(self.terms)


@dataclass(frozen=True)
class LabeledSentence:
    sentence: Sentence
    label: str
    source: str = LEXICON
    matched_terms: tuple = ()

    @property
    def sentence_id(self):
        return self.sentence.sentence_id

    @property
    def text(self):
        return self.sentence.text

    @property
    def year(self):
        return self.sentence.year

    @property
    def is_ai(self):
        return self.label == AI


def load_lexicon(path, version=None):
    """Load a ``term`` CSV; terms are tokenized, lowercased and deduplicated."""
    if not os.path.exists(path):
        raise InputFileError("MISSING_LEXICON", f"{path} does not exist")
    _, rows = read_csv(path, ("term",))
    lex = Lexicon.from_strings(
        [row["term"] or "" for _, row in rows],
        version if version is not None else os.path.basename(path),
    )
    if not lex.terms:
        raise ValidationError("EMPTY_LEXICON", f"{path} contains no terms")
    return lex


def match_lexicon(sentence, lexicon):
    """All ``(term, (first_token, last_token))`` hits, leftmost first.

    Matching is on whole tokens, so a term never matches inside a longer word.
    Overlapping hits are all reported; hits starting at the same token follow
    lexicon order.
    """
    text = sentence if isinstance(sentence, str) else sentence.text
    toks = tokenize(text)
    hits = []
    for i, tok in enumerate(toks):
        for _, term in lexicon._by_first.get(tok, ()):
            n = len(term)
            if tuple(toks[i:i + n]) == term:
                hits.append((" ".join(term), (i, i + n - 1)))
    return hits


def matched_term_list(hits):
    seen, out = set(), []
    for term, _ in hits:
        if term not in seen:
            seen.add(term)
            out.append(term)
    return tuple(out)


def weak_label(sentences, lexicon):
    out = []
    for s in sentences:
        terms = matched_term_list(match_lexicon(s, lexicon))
        out.append(LabeledSentence(s, AI if terms else NON_AI, LEXICON, terms))
    return out


def parse_label(value, where):
    label = (value or "").strip()
    if label not in LABELS:
        raise ValidationError("BAD_LABEL", f"{where}: label {value!r} must be AI or NON_AI")
    return label


def load_overrides(path):
    """Map of sentence_id to label from a ``sentence_id,label`` CSV (last row wins)."""
    _, rows = read_csv(path, ("sentence_id", "label"))
    out = {}
    for lineno, row in rows:
        sid = (row["sentence_id"] or "").strip()
        if not sid:
            raise ValidationError("MALFORMED_ROW", f"{path}: line {lineno}: empty sentence_id")
        out[sid] = parse_label(row["label"], f"{path}: line {lineno}")
    return out


def apply_overrides(labeled, overrides):
    """Replace labels from ``overrides`` (a path or a sentence_id→label map)."""
    if not isinstance(overrides, dict):
        overrides = load_overrides(overrides)
    known = {ls.sentence_id for ls in labeled}
    for sid in overrides:
        if sid not in known:
            log.warning("override for unknown sentence_id %s ignored", sid)
    out = []
    for ls in labeled:
        label = overrides.get(ls.sentence_id)
        out.append(ls if label is None else replace(ls, label=label, source=OVERRIDE))
    return out


LABEL_COLUMNS = ("sentence_id", "year", "text", "label", "source", "matched_terms")


def write_labeled(path, labeled):
    write_csv(
        path,
        LABEL_COLUMNS,
        [
            (ls.sentence_id, ls.year, ls.text, ls.label, ls.source, "|".join(ls.matched_terms))
            for ls in labeled
        ],
    )


def read_labeled(path):
    """Read labeled sentences from any CSV with ``sentence_id,year,text,label``.

    ``doc_id`` falls back to the sentence_id prefix before the last ``:``.
    """
    fields, rows = read_csv(path, ("sentence_id", "year", "text", "label"))
    out, seen = [], set()
    for lineno, row in rows:
        where = f"{path}: line {lineno}"
        sid = (row["sentence_id"] or "").strip()
        if not sid:
            raise ValidationError("MALFORMED_ROW", f"{where}: empty sentence_id")
        if sid in seen:
            raise ValidationError("DUPLICATE_SENTENCE_ID", f"{where}: duplicate sentence_id {sid!r}")
        seen.add(sid)
        try:
            year = int((row["year"] or "").strip())
        except ValueError:
            raise ValidationError("MALFORMED_ROW", f"{where}: bad year {row['year']!r}") from None
        label = parse_label(row["label"], where)
        text = row["text"] or ""
        doc_id = (row.get("doc_id") or "").strip() or (sid.rsplit(":", 1)[0] if ":" in sid else "")
        source = (row.get("source") or LEXICON).strip() or LEXICON
        if source not in (LEXICON, OVERRIDE):
            raise ValidationError("MALFORMED_ROW", f"{where}: unknown source {source!r}")
        terms = tuple(t for t in (row.get("matched_terms") or "").split("|") if t)
        out.append(LabeledSentence(Sentence.from_text(sid, text, doc_id, year), label, source, terms))
    return out

