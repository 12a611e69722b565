"""Corpus ingestion: tokenization, n-gram vocabularies, sparse counts and TF-IDF.

Documents come in as JSONL (raw ``text`` or a pre-annotated ``tokens``
stream), get tokenized with a configurable pattern and stopword list, and
leave as a deterministic n-gram vocabulary plus sparse document-term
matrices. Vocabulary order is total: descending document frequency,
lexicographic tie-break, so the same corpus and config always reproduce the
same columns.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import EmptyVocabulary, FormatError

# Maximal runs of word characters (Unicode letters/digits/underscore), length >= 2.
DEFAULT_TOKEN_PATTERN = r"\w{2,}"

_PATTERN_CACHE: dict[str, re.Pattern] = {}


def _compiled(pattern: str) -> re.Pattern:
    pat = _PATTERN_CACHE.get(pattern)
    if pat is None:
        pat = _PATTERN_CACHE[pattern] = re.compile(pattern)
    return pat


@dataclass(frozen=True)
class TokenizerConfig:
    """How raw text becomes tokens: lowercasing, token pattern, stopwords.

    ``stopwords`` entries are matched against tokens after lowercasing (when
    ``lowercase`` is set), so supply them in lowercase for the default setup.
    """

    lowercase: bool = True
    stopwords: frozenset[str] = frozenset()
    token_pattern: str = DEFAULT_TOKEN_PATTERN


@dataclass(frozen=True)
class Document:
    """One unit of ingestion: a stable id plus raw text.

    ``tokens`` carries an optional pre-annotated stream (e.g. lemmatized
    upstream); when present it is used verbatim and ``text`` is ignored.
    """

    id: str
    text: str = ""
    tokens: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Corpus:
    """Ordered document sequence; the order defines row indices downstream."""

    docs: tuple[Document, ...]

    def __post_init__(self):
        ids = [d.id for d in self.docs]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise ValueError(f"duplicate document id: {dup!r}")

    def __len__(self) -> int:
        return len(self.docs)

    def __iter__(self):
        return iter(self.docs)

    @property
    def doc_ids(self) -> tuple[str, ...]:
        return tuple(d.id for d in self.docs)

    @classmethod
    def from_jsonl(cls, path) -> "Corpus":
        """Load a corpus from JSONL: one object per line with ``id`` and
        ``text``, or ``tokens`` (array of strings) for pre-annotated input."""
        docs = []
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as e:
                    raise FormatError(f"{path}:{lineno}: invalid JSON ({e})") from e
                if not isinstance(obj, dict) or "id" not in obj:
                    raise FormatError(f"{path}:{lineno}: expected an object with an 'id' field")
                doc_id = obj["id"]
                if not isinstance(doc_id, str):
                    raise FormatError(f"{path}:{lineno}: 'id' must be a string")
                tokens = obj.get("tokens")
                if tokens is not None:
                    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
                        raise FormatError(f"{path}:{lineno}: 'tokens' must be an array of strings")
                    docs.append(Document(id=doc_id, text=obj.get("text", ""), tokens=tuple(tokens)))
                    continue
                text = obj.get("text")
                if not isinstance(text, str):
                    raise FormatError(f"{path}:{lineno}: expected a string 'text' or a 'tokens' array")
                docs.append(Document(id=doc_id, text=text))
        return cls(docs=tuple(docs))


def load_stopwords(path) -> frozenset[str]:
    """Read a stopword list: UTF-8 text, one term per line, blanks ignored."""
    with open(path, "r", encoding="utf-8") as fh:
        return frozenset(w for w in (line.strip() for line in fh) if w)


def tokenize(text: str, config: TokenizerConfig) -> list[str]:
    """Split ``text`` into tokens: lowercase (if configured), match the token
    pattern, drop stopwords. Empty text yields an empty list."""
    if config.lowercase:
        text = text.lower()
    tokens = _compiled(config.token_pattern).findall(text)
    if config.stopwords:
        stop = config.stopwords
        tokens = [t for t in tokens if t not in stop]
    return tokens


def doc_tokens(doc: Document, config: TokenizerConfig) -> list[str]:
    """Token stream for one document: the pre-annotated stream when present,
    otherwise the built-in tokenizer output."""
    if doc.tokens is not None:
        return list(doc.tokens)
    return tokenize(doc.text, config)


def iter_ngrams(tokens: list[str], lo: int, hi: int):
    """Yield every contiguous n-gram of ``tokens`` for n in [lo, hi],
    components joined by underscores."""
    for n in range(lo, hi + 1):
        if n == 1:
            yield from tokens
        else:
            for i in range(len(tokens) - n + 1):
                yield "_".join(tokens[i : i + n])


@dataclass(frozen=True)
class Vocabulary:
    """Ordered n-gram term index with per-term document frequencies.

    Term order is descending document frequency with lexicographic
    tie-break; ``index`` maps each term to its column id.
    """

    terms: tuple[str, ...]
    ngram_range: tuple[int, int]
    doc_freq: dict[str, int]
    index: dict[str, int] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index


def _check_ngram_range(ngram_range: tuple[int, int]) -> tuple[int, int]:
    lo, hi = ngram_range
    if not (1 <= lo <= hi <= 3):
        raise ValueError(f"ngram_range must satisfy 1 <= min <= max <= 3, got {ngram_range}")
    return lo, hi


def build_vocabulary(
    corpus: Corpus,
    config: TokenizerConfig,
    ngram_range: tuple[int, int] = (1, 3),
    min_count: int = 2,
) -> Vocabulary:
    """Collect every n-gram with document frequency >= ``min_count``.

    ``min_count`` defaults to 2 to prune hapax n-grams. Raises
    :class:`EmptyVocabulary` when nothing survives.
    """
    lo, hi = _check_ngram_range(ngram_range)
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    df: Counter[str] = Counter()
    for doc in corpus:
        df.update(set(iter_ngrams(doc_tokens(doc, config), lo, hi)))
    retained = [(t, c) for t, c in df.items() if c >= min_count]
    if not retained:
        raise EmptyVocabulary(
            f"no n-gram reached min_count={min_count} over {len(corpus)} documents"
        )
    retained.sort(key=lambda tc: (-tc[1], tc[0]))
    return Vocabulary(
        terms=tuple(t for t, _ in retained),
        ngram_range=(lo, hi),
        doc_freq={t: c for t, c in retained},
    )


@dataclass(frozen=True)
class CountMatrix:
    """Sparse non-negative integer document-term counts (CSR), no stored zeros."""

    matrix: sparse.csr_matrix

    def __post_init__(self):
        m = self.matrix.tocsr().astype(np.int64)
        m.eliminate_zeros()
        m.sort_indices()
        if m.nnz and m.data.min() < 0:
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "matrix", m)

    @property
    def n_docs(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_terms(self) -> int:
        return self.matrix.shape[1]


def doc_term_counts(corpus: Corpus, vocab: Vocabulary, config: TokenizerConfig) -> CountMatrix:
    """Count n-gram occurrences per document; out-of-vocabulary n-grams are
    dropped. Rows with no in-vocabulary n-grams stay all-zero."""
    lo, hi = vocab.ngram_range
    index = vocab.index
    rows, cols, vals = [], [], []
    for i, doc in enumerate(corpus):
        counts: Counter[int] = Counter()
        for gram in iter_ngrams(doc_tokens(doc, config), lo, hi):
            j = index.get(gram)
            if j is not None:
                counts[j] += 1
        for j, c in sorted(counts.items()):
            rows.append(i)
            cols.append(j)
            vals.append(c)
    m = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(len(corpus), len(vocab)), dtype=np.int64
    )
    return CountMatrix(matrix=m)


def tfidf(counts: CountMatrix) -> sparse.csr_matrix:
    """Smoothed TF-IDF with L2 row normalization.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1 where df is the number of
    documents with a nonzero count; each row is scaled to unit L2 norm and
    all-zero rows stay all-zero.
    """
    m = counts.matrix
    n_docs = m.shape[0]
    if n_docs == 0:
        raise ValueError("counts must cover at least one document")
    df = np.bincount(m.indices, minlength=m.shape[1]) if m.nnz else np.zeros(m.shape[1], int)
    idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
    x = m.astype(np.float64).multiply(idf[np.newaxis, :]).tocsr()
    norms = np.sqrt(np.asarray(x.multiply(x).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    x = sparse.diags(scale).dot(x).tocsr()
    x.eliminate_zeros()
    return x
