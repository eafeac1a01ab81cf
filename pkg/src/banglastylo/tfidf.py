"""Train-fitted TF-IDF features over a compact CSR sparse matrix.

Weighting: sublinear tf (1 + ln tf) times smoothed idf ln((1+N)/(1+df)) + 1,
then L2 row normalization. The vocabulary comes from training documents only
and is ordered lexicographically for stable column indices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .errors import ConfigError, DataError, NumericError
from .textprep import AnalyzerConfig, analyze

VECTORIZER_FORMAT = "banglastylo.vectorizer"
VECTORIZER_VERSION = 1


@dataclass(eq=False)
class SparseMatrix:
    """CSR triple. Column indices are strictly increasing within each row and
    no explicit zeros are stored."""

    rows: int
    cols: int
    indptr: np.ndarray   # int64, length rows+1
    indices: np.ndarray  # int32
    data: np.ndarray     # float64

    @property
    def nnz(self) -> int:
        return int(self.data.shape[0])

    def row(self, i: int):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.data[lo:hi]

    def copy(self) -> "SparseMatrix":
        return SparseMatrix(self.rows, self.cols, self.indptr.copy(),
                            self.indices.copy(), self.data.copy())

    def toarray(self) -> np.ndarray:
        dense = np.zeros((self.rows, self.cols), dtype=np.float64)
        for i in range(self.rows):
            idx, vals = self.row(i)
            dense[i, idx] = vals
        return dense

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.data, other.data)
        )


@dataclass(frozen=True, eq=False)
class VectorizerModel:
    vocab: tuple[str, ...]
    idf: np.ndarray
    train_doc_count: int
    analyzer: AnalyzerConfig
    ngram_range: tuple[int, int] = (1, 1)
    _index: dict = field(init=False, repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.vocab)})

    def column_of(self, token: str):
        """Column index for a token, or None when out of vocabulary."""
        return self._index.get(token)


def _texts_of(source) -> list[str]:
    if isinstance(source, Corpus):
        return [d.text for d in source.documents]
    return list(source)


def _doc_tokens(text: str, config: AnalyzerConfig, ngram_range: tuple[int, int]) -> list[str]:
    base = analyze(text, config)
    lo, hi = ngram_range
    if lo == 1 and hi == 1:
        return base
    tokens = []
    for n in range(lo, hi + 1):
        if n == 1:
            tokens.extend(base)
        else:
            tokens.extend(" ".join(base[i:i + n]) for i in range(len(base) - n + 1))
    return tokens


def fit_vectorizer(train, config: AnalyzerConfig | None = None,
                   ngram_range: tuple[int, int] = (1, 1)) -> VectorizerModel:
    """Build vocabulary and idf from training documents only.

    train may be a Corpus or an iterable of prepared (normalized, stripped)
    text strings.
    """
    cfg = config or AnalyzerConfig()
    lo, hi = ngram_range
    if lo < 1 or hi < lo:
        raise ConfigError(f"invalid ngram_range {ngram_range}")
    texts = _texts_of(train)
    if not texts:
        raise DataError("cannot fit a vectorizer on an empty corpus")

    df: dict[str, int] = {}
    for text in texts:
        for token in set(_doc_tokens(text, cfg, (lo, hi))):
            df[token] = df.get(token, 0) + 1
    if not df:
        raise NumericError("empty effective vocabulary: no document yields any analyzer token")

    vocab = tuple(sorted(df))
    n = len(texts)
    df_arr = np.array([df[t] for t in vocab], dtype=np.float64)
    idf = np.log((1.0 + n) / (1.0 + df_arr)) + 1.0
    return VectorizerModel(vocab=vocab, idf=idf, train_doc_count=n,
                           analyzer=cfg, ngram_range=(lo, hi))


def transform(model: VectorizerModel, docs) -> SparseMatrix:
    """Sublinear-tf, idf-weighted, L2-normalized rows. Tokens outside the
    fitted vocabulary are ignored; a document with no known tokens stays an
    all-zero row."""
    texts = _texts_of(docs)
    index = model._index
    idf = model.idf
    indptr = np.zeros(len(texts) + 1, dtype=np.int64)
    all_indices = []
    all_data = []
    for r, text in enumerate(texts):
        counts: dict[int, int] = {}
        for token in _doc_tokens(text, model.analyzer, model.ngram_range):
            col = index.get(token)
            if col is not None:
                counts[col] = counts.get(col, 0) + 1
        if counts:
            cols = np.array(sorted(counts), dtype=np.int32)
            tf = np.array([counts[int(c)] for c in cols], dtype=np.float64)
            weights = (1.0 + np.log(tf)) * idf[cols]
            norm = math.sqrt(float(weights @ weights))
            if not math.isfinite(norm):
                raise NumericError(f"non-finite feature values in document row {r}")
            weights = weights / norm
            all_indices.append(cols)
            all_data.append(weights)
            indptr[r + 1] = indptr[r] + len(cols)
        else:
            indptr[r + 1] = indptr[r]
    indices = np.concatenate(all_indices) if all_indices else np.zeros(0, dtype=np.int32)
    data = np.concatenate(all_data) if all_data else np.zeros(0, dtype=np.float64)
    return SparseMatrix(rows=len(texts), cols=len(model.vocab),
                        indptr=indptr, indices=indices, data=data)


def zero_columns(matrix: SparseMatrix, tokens, model: VectorizerModel) -> SparseMatrix:
    """Drop the entries of the given tokens' columns; every other entry is
    bit-identical (no re-normalization, no idf change). Unknown tokens are
    ignored. The input matrix is left unmodified."""
    if matrix.cols != len(model.vocab):
        raise DataError(f"matrix has {matrix.cols} columns, vectorizer has {len(model.vocab)}")
    cols = {model.column_of(t) for t in tokens}
    cols.discard(None)
    if not cols:
        return matrix.copy()
    drop = np.isin(matrix.indices, np.fromiter(cols, dtype=np.int32, count=len(cols)))
    keep = ~drop
    row_ids = np.repeat(np.arange(matrix.rows), np.diff(matrix.indptr))
    kept_per_row = np.bincount(row_ids[keep], minlength=matrix.rows)
    indptr = np.zeros(matrix.rows + 1, dtype=np.int64)
    np.cumsum(kept_per_row, out=indptr[1:])
    return SparseMatrix(rows=matrix.rows, cols=matrix.cols, indptr=indptr,
                        indices=matrix.indices[keep], data=matrix.data[keep])


# -------------------------------------------------------------- serialization

def save_vectorizer(model: VectorizerModel, path: str | Path) -> None:
    payload = {
        "format": VECTORIZER_FORMAT,
        "format_version": VECTORIZER_VERSION,
        "analyzer": model.analyzer.to_dict(),
        "ngram_range": list(model.ngram_range),
        "train_doc_count": model.train_doc_count,
        "vocab": list(model.vocab),
        "idf": model.idf.tolist(),
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def load_vectorizer(path: str | Path) -> VectorizerModel:
    p = Path(path)
    try:
        payload = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read vectorizer file {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt vectorizer file {p}: {exc.msg}") from exc
    if not isinstance(payload, dict) or payload.get("format") != VECTORIZER_FORMAT:
        raise DataError(f"{p} is not a vectorizer file")
    if payload.get("format_version") != VECTORIZER_VERSION:
        raise DataError(
            f"unsupported vectorizer format_version {payload.get('format_version')} in {p}; "
            f"expected {VECTORIZER_VERSION}"
        )
    vocab = tuple(payload["vocab"])
    idf = np.array(payload["idf"], dtype=np.float64)
    if idf.shape[0] != len(vocab):
        raise DataError(f"{p}: idf length {idf.shape[0]} does not match vocab size {len(vocab)}")
    return VectorizerModel(
        vocab=vocab,
        idf=idf,
        train_doc_count=int(payload["train_doc_count"]),
        analyzer=AnalyzerConfig.from_dict(payload.get("analyzer", {})),
        ngram_range=tuple(payload.get("ngram_range", [1, 1])),
    )
