"""Corpus loading, text cleaning, sentence segmentation and filtering."""

import os
import re
import unicodedata
from dataclasses import asdict, dataclass

from .errors import InputFileError, ValidationError
from .features import raw_tokens, tokenize
from .io import read_csv, read_jsonl, read_text, write_jsonl

DEFAULT_ABBREVIATIONS = (
    "U.S.", "U.S.A.", "U.K.", "N.A.", "Inc.", "Corp.", "Co.", "Ltd.", "L.L.C.",
    "Mr.", "Ms.", "Mrs.", "Dr.", "Jr.", "Sr.", "St.", "No.", "Nos.", "Fig.",
    "Figs.", "Vol.", "vs.", "e.g.", "i.e.", "approx.", "et al.",
    "Jan.", "Feb.", "Mar.", "Apr.", "Jun.", "Jul.", "Aug.", "Sep.", "Sept.",
    "Oct.", "Nov.", "Dec.",
)


@dataclass(frozen=True)
class Document:
    doc_id: str
    bank_id: str
    year: int
    text: str


@dataclass(frozen=True)
class Sentence:
    sentence_id: str
    doc_id: str
    year: int
    text: str
    token_count: int

    @classmethod
    def from_text(cls, sentence_id, text, doc_id="", year=0):
        return cls(sentence_id, doc_id, year, text, len(tokenize(text)))

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class FilterPolicy:
    min_tokens: int = 4
    max_tokens: int = 128
    max_digit_ratio: float = 0.5
    require_lowercase_word: bool = True

    def __post_init__(self):
        if self.min_tokens < 1 or self.min_tokens > self.max_tokens:
            raise ValidationError(
                "INVALID_POLICY",
                f"need 1 <= min_tokens <= max_tokens, got {self.min_tokens}, {self.max_tokens}",
            )
        if not 0.0 <= self.max_digit_ratio <= 1.0:
            raise ValidationError("INVALID_POLICY", "max_digit_ratio must lie in [0, 1]")


def load_corpus(manifest_path):
    """Read a ``doc_id,bank_id,year,path`` manifest into Documents, in row order.

    Paths are resolved relative to the manifest's directory.
    """
    if not os.path.exists(manifest_path):
        raise InputFileError("MISSING_MANIFEST", f"{manifest_path} does not exist")
    _, rows = read_csv(manifest_path, ("doc_id", "bank_id", "year", "path"))
    base = os.path.dirname(os.path.abspath(manifest_path))
    docs, seen = [], set()
    for lineno, row in rows:
        where = f"{manifest_path}: row {lineno}"
        doc_id = (row["doc_id"] or "").strip()
        bank_id = (row["bank_id"] or "").strip()
        rel = (row["path"] or "").strip()
        if not doc_id or not bank_id or not rel:
            raise ValidationError("MALFORMED_ROW", f"{where}: empty doc_id, bank_id or path")
        try:
            year = int((row["year"] or "").strip())
        except ValueError:
            raise ValidationError("MALFORMED_ROW", f"{where}: year {row['year']!r} is not an integer") from None
        if not 1900 <= year <= 2100:
            raise ValidationError("MALFORMED_ROW", f"{where}: year {year} outside [1900, 2100]")
        if doc_id in seen:
            raise ValidationError("DUPLICATE_DOC_ID", f"{where}: duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        path = rel if os.path.isabs(rel) else os.path.join(base, rel)
        try:
            text = read_text(path)
        except InputFileError as exc:
            raise InputFileError(exc.code, f"{where}: {exc.message}") from None
        if not text.strip():
            raise ValidationError("EMPTY_DOCUMENT", f"{where}: {rel} has no text")
        docs.append(Document(doc_id, bank_id, year, text))
    return docs


_HYPHEN_BREAK = re.compile(r"-\n+")


def clean_text(raw):
    """Normalize raw report text.

    Drops control characters other than newline, collapses whitespace runs
    within each line to one space, trims lines, and rejoins words hyphenated
    across a line break.
    """
    text = raw.replace("\r\n", "\n").replace("\r", "\n")
    text = "".join(
        ch for ch in text
        if ch == "\n" or ch.isspace() or unicodedata.category(ch) != "Cc"
    )
    text = _HYPHEN_BREAK.sub("", _squeeze_lines(text))
    # Rejoining can leave a trailing blank (e.g. "x -" at a line end), so squeeze again.
    return _squeeze_lines(text)


def _squeeze_lines(text):
    return "\n".join(" ".join(line.split()) for line in text.split("\n"))


_TERMINATOR = re.compile(r"[.!?]+[\"'”’)\]]*(?=\s)")


def _is_abbreviation(text, start, end, abbreviations):
    # ``text[start:end]`` is the terminator run; check the span ending at the last terminator char.
    term_end = start
    while term_end < end and text[term_end] in ".!?":
        term_end += 1
    head = text[:term_end]
    for abbr in abbreviations:
        if head.endswith(abbr):
            k = len(head) - len(abbr)
            if k == 0 or not text[k - 1].isalnum():
                return True
    return False


def split_text(text, abbreviations=DEFAULT_ABBREVIATIONS):
    """Split cleaned text into sentence strings (newlines become spaces)."""
    flat = " ".join(text.split())
    if not flat:
        return []
    pieces, start = [], 0
    for m in _TERMINATOR.finditer(flat):
        nxt = m.end() + 1
        if nxt >= len(flat):
            continue
        ch = flat[nxt]
        if not (ch.isupper() or ch.isdigit()):
            continue
        if _is_abbreviation(flat, m.start(), m.end(), abbreviations):
            continue
        pieces.append(flat[start:m.end()])
        start = nxt
    pieces.append(flat[start:])
    return [p for p in pieces if p]


def segment_sentences(doc, abbreviations=DEFAULT_ABBREVIATIONS):
    return [
        Sentence.from_text(f"{doc.doc_id}:{i:04d}", piece, doc.doc_id, doc.year)
        for i, piece in enumerate(split_text(doc.text, abbreviations))
    ]


def digit_ratio(text):
    chars = [c for c in text if not c.isspace()]
    if not chars:
        return 0.0
    return sum(c.isdigit() for c in chars) / len(chars)


def drop_reason(sentence, policy):
    """Reason code for rejecting ``sentence`` under ``policy``, or None to keep it."""
    if sentence.token_count < policy.min_tokens:
        return "TOO_SHORT"
    if sentence.token_count > policy.max_tokens:
        return "TOO_LONG"
    if digit_ratio(sentence.text) > policy.max_digit_ratio:
        return "TABLE_LIKE"
    if policy.require_lowercase_word and not any(
        any(c.islower() for c in tok) for tok in raw_tokens(sentence.text)
    ):
        return "NO_PROSE"
    return None


def filter_sentences(sentences, policy=None):
    policy = policy or FilterPolicy()
    kept, dropped = [], []
    for s in sentences:
        reason = drop_reason(s, policy)
        if reason is None:
            kept.append(s)
        else:
            dropped.append((s, reason))
    return kept, dropped


def load_abbreviations(path):
    """One abbreviation per line; blank lines and ``#`` comments are skipped."""
    out = []
    for line in read_text(path).splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return tuple(out)


def ingest(manifest_path, policy=None, abbreviations=DEFAULT_ABBREVIATIONS):
    """Load, clean, segment and filter a whole corpus."""
    kept, dropped = [], []
    for doc in load_corpus(manifest_path):
        cleaned = Document(doc.doc_id, doc.bank_id, doc.year, clean_text(doc.text))
        k, d = filter_sentences(segment_sentences(cleaned, abbreviations), policy)
        kept.extend(k)
        dropped.extend(d)
    return kept, dropped


def write_sentences(path, sentences):
    write_jsonl(path, (s.to_dict() for s in sentences))


def write_dropped(path, dropped):
    write_jsonl(path, ({**s.to_dict(), "reason": reason} for s, reason in dropped))


def read_sentences(path):
    out = []
    for lineno, rec in read_jsonl(path):
        try:
            s = Sentence(
                str(rec["sentence_id"]), str(rec["doc_id"]), int(rec["year"]),
                str(rec["text"]), int(rec["token_count"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError("MALFORMED_ROW", f"{path}: line {lineno}: {exc}") from None
        if s.token_count != len(tokenize(s.text)):
            raise ValidationError(
                "TOKEN_COUNT_MISMATCH", f"{path}: line {lineno}: token_count disagrees with text"
            )
        out.append(s)
    return out
