"""Tokenization and TF-IDF vectorization shared by every classical model."""

import math
import re
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DiscloseError, ValidationError
from .io import read_json, write_json

FORMAT_VERSION = 1

# Letters/digits, with single internal hyphens or apostrophes kept inside a token.
_TOKEN_RE = re.compile(r"[^\W_]+(?:[-'’][^\W_]+)*")


def raw_tokens(text):
    """Case-preserving tokens; ``tokenize`` is this, lowercased."""
    return _TOKEN_RE.findall(text)


def tokenize(text):
    """Split ``text`` into lowercase word tokens.

    >>> tokenize("AI-powered chatbot!")
    ['ai-powered', 'chatbot']
    """
    return [tok.lower() for tok in _TOKEN_RE.findall(text)]


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple
    index: dict = field(repr=False, compare=False)

    @classmethod
    def from_tokens(cls, tokens):
        tokens = tuple(sorted(set(tokens)))
        return cls(tokens, {t: i for i, t in enumerate(tokens)})

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    def get(self, token):
        return self.index.get(token)


@dataclass(frozen=True)
class TfidfConfig:
    sublinear_tf: bool = False
    normalize: bool = True

    def to_dict(self):
        return {"sublinear_tf": self.sublinear_tf, "normalize": self.normalize}


@dataclass(frozen=True)
class SparseVector:
    """Sorted ``(index, value)`` pairs of a vector with ``dim`` components."""

    indices: tuple
    values: tuple
    dim: int

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values differ in length")
        prev = -1
        for i, v in zip(self.indices, self.values):
            if not prev < i < self.dim:
                raise ValueError("indices must be strictly increasing and < dim")
            if v == 0 or not math.isfinite(v):
                raise ValueError("values must be nonzero and finite")
            prev = i

    def __len__(self):
        return len(self.indices)

    def items(self):
        return list(zip(self.indices, self.values))

    def to_dense(self):
        out = np.zeros(self.dim)
        out[list(self.indices)] = self.values
        return out

    def norm(self):
        return math.sqrt(sum(v * v for v in self.values))


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: Vocabulary
    idf: np.ndarray
    config: TfidfConfig = TfidfConfig()
    n_documents: int = 0

    def __post_init__(self):
        idf = np.asarray(self.idf, dtype=np.float64).copy()
        idf.setflags(write=False)
        object.__setattr__(self, "idf", idf)
        if idf.shape != (len(self.vocabulary),):
            raise ValueError("idf length must equal vocabulary size")

    @property
    def dim(self):
        return len(self.vocabulary)

    def idf_of(self, token):
        return float(self.idf[self.vocabulary.index[token]])

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "config": self.config.to_dict(),
            "n_documents": self.n_documents,
            "vocabulary": list(self.vocabulary.tokens),
            "idf": [float(v) for v in self.idf],
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("format_version") != FORMAT_VERSION:
            raise ValidationError(
                "BAD_FEATURE_MODEL", f"unsupported format_version {data.get('format_version')!r}"
            )
        vocab = list(data["vocabulary"])
        if vocab != sorted(set(vocab)):
            raise ValidationError("BAD_FEATURE_MODEL", "vocabulary must be sorted and unique")
        return cls(
            Vocabulary.from_tokens(vocab),
            np.asarray(data["idf"], dtype=np.float64),
            TfidfConfig(**data["config"]),
            int(data.get("n_documents", 0)),
        )


def _texts(sentences):
    return [s if isinstance(s, str) else s.text for s in sentences]


def fit_tfidf(train_sentences, config=None):
    """Fit a smoothed-idf TF-IDF model on training sentences (or raw strings).

    ``idf(t) = ln((1 + N) / (1 + df(t))) + 1``, with ``df`` counted per sentence.
    """
    config = config or TfidfConfig()
    docs = [tokenize(t) for t in _texts(train_sentences)]
    if not any(docs):
        raise DiscloseError("EMPTY_CORPUS", "no training sentence contains a token")
    df = {}
    for toks in docs:
        for tok in set(toks):
            df[tok] = df.get(tok, 0) + 1
    vocab = Vocabulary.from_tokens(df)
    n = len(docs)
    idf = np.array([math.log((1 + n) / (1 + df[t])) + 1.0 for t in vocab.tokens])
    return TfidfModel(vocab, idf, config, n)


def _weight_counts(model, counts):
    """Apply tf scaling, idf and optional L2 normalization to a CSR count matrix."""
    counts = sp.csr_matrix(counts, dtype=np.float64)
    if model.config.sublinear_tf:
        counts.data = 1.0 + np.log(counts.data)
    weighted = counts.multiply(model.idf[np.newaxis, :]).tocsr()
    if model.config.normalize:
        norms = np.sqrt(np.asarray(weighted.multiply(weighted).sum(axis=1)).ravel())
        norms[norms == 0] = 1.0
        weighted = sp.diags(1.0 / norms) @ weighted
    weighted = sp.csr_matrix(weighted)
    weighted.eliminate_zeros()
    weighted.sort_indices()
    return weighted


def token_ids(model, tokens):
    """Vocabulary index per token, ``-1`` for out-of-vocabulary tokens."""
    return np.array([model.vocabulary.index.get(t, -1) for t in tokens], dtype=np.int64)


def transform_masks(model, ids, masks):
    """Vectorize many sub-selections of one token sequence at once.

    ``ids`` are token vocabulary ids (``-1`` = OOV) and ``masks`` is a boolean
    array of shape ``(k, len(ids))``; row ``r`` keeps the tokens where
    ``masks[r]`` is true.  Returns a ``(k, dim)`` CSR matrix.
    """
    masks = np.asarray(masks, dtype=bool)
    keep = ids >= 0
    rows, cols = np.nonzero(masks[:, keep])
    data = np.ones(len(rows))
    counts = sp.csr_matrix(
        (data, (rows, ids[keep][cols])), shape=(masks.shape[0], model.dim)
    )
    counts.sum_duplicates()
    return _weight_counts(model, counts)


def transform_tokens_matrix(model, token_lists):
    rows, cols = [], []
    for r, toks in enumerate(token_lists):
        for tok in toks:
            j = model.vocabulary.index.get(tok)
            if j is not None:
                rows.append(r)
                cols.append(j)
    counts = sp.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(len(token_lists), model.dim)
    )
    counts.sum_duplicates()
    return _weight_counts(model, counts)


def transform_matrix(model, sentences):
    """Vectorize sentences (or raw strings) into a CSR matrix, one row each."""
    return transform_tokens_matrix(model, [tokenize(t) for t in _texts(sentences)])


def row_to_vector(matrix, r):
    row = matrix.getrow(r)
    return SparseVector(
        tuple(int(i) for i in row.indices),
        tuple(float(v) for v in row.data),
        matrix.shape[1],
    )


def transform(model, sentence):
    """TF-IDF vector of a single sentence; OOV tokens are dropped."""
    return row_to_vector(transform_matrix(model, [sentence]), 0)


def vectors_to_matrix(vectors, dim=None):
    """Stack SparseVectors into a CSR matrix."""
    if dim is None:
        if not vectors:
            raise ValueError("cannot infer dimension of an empty vector list")
        dim = vectors[0].dim
    indptr, indices, data = [0], [], []
    for v in vectors:
        if v.dim != dim:
            raise ValueError("vector dimensions differ")
        indices.extend(v.indices)
        data.extend(v.values)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), indptr),
        shape=(len(vectors), dim),
    )


def as_matrix(X):
    """Accept a CSR/dense matrix or a list of SparseVectors."""
    if isinstance(X, (list, tuple)):
        return vectors_to_matrix(list(X))
    if sp.issparse(X):
        return sp.csr_matrix(X, dtype=np.float64)
    return sp.csr_matrix(np.atleast_2d(np.asarray(X, dtype=np.float64)))


def save_tfidf(model, path):
    write_json(path, model.to_dict())


def load_tfidf(path):
    return TfidfModel.from_dict(read_json(path))
