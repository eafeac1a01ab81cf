"""Frozen-model stop-word ablation.

For each candidate token the matching TF-IDF column of the test matrix is
treated as zero while the trained model, the idf vector, and every other
feature stay fixed; per-author recall is then recomputed and compared with
the baseline. Delta values live in recall units in [-1, 1]; reports convert
to percentage points.

The sweep never copies the test matrix per token. Zeroing one column can only
change rows that hold that column, so each worker recomputes margins for
exactly those rows with the same dot-product expression the full predictor
uses, which keeps the result bit-identical to the copy-and-zero route. Rows
are assembled by token rank, so worker count and scheduling cannot change the
output.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .svm import SvmModel, decision_values, labels_from_margins, predict
from .textprep import StopwordSet
from .tfidf import SparseMatrix, VectorizerModel, zero_columns

ZERO_EPS = 1e-12  # |delta| below this counts as zero in distribution reports


@dataclass(eq=False)
class RecallVector:
    """Per-author recall; defined is False where the test set lacks the class
    (value reported as 0.0 there)."""

    values: np.ndarray
    defined: np.ndarray
    support: np.ndarray


@dataclass(eq=False)
class DeltaRecallMatrix:
    """Rows are projected stop-word tokens in lexicographic order, columns
    authors. deltas = baseline - ablated, in recall units."""

    tokens: tuple[str, ...]
    authors: tuple[str, ...]
    deltas: np.ndarray
    baseline: np.ndarray
    ablated: np.ndarray
    author_defined: np.ndarray
    support: np.ndarray


@dataclass(frozen=True)
class ExtremeEntry:
    token: str
    delta_pp: float


@dataclass(frozen=True)
class AuthorExtremes:
    author: str
    harmful: tuple[ExtremeEntry, ...]  # largest +delta first, at most two
    helpful: tuple[ExtremeEntry, ...]  # most negative delta first, at most two


@dataclass(frozen=True)
class ExtremesReport:
    threshold_pp: float
    per_author: tuple[AuthorExtremes, ...]
    skipped_authors: tuple[str, ...]


@dataclass(frozen=True)
class DeltaDistribution:
    n_pairs: int
    positive: int
    negative: int
    zero: int
    positive_share: float
    negative_share: float
    zero_share: float
    median_pp: float | None
    q1_pp: float | None
    q3_pp: float | None
    outliers_pp: tuple[float, ...]


def _checked_labels(y, n_rows: int, k: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if y.ndim != 1 or y.shape[0] != n_rows:
        raise DataError(f"expected {n_rows} test labels, got shape {y.shape}")
    if y.size and (int(y.min()) < 0 or int(y.max()) >= k):
        raise DataError(f"test labels must lie in 0..{k - 1}")
    return y


def _recalls(pred: np.ndarray, y: np.ndarray, k: int) -> RecallVector:
    support = np.bincount(y, minlength=k)
    correct = np.bincount(y[pred == y], minlength=k)
    values = np.divide(correct, support, out=np.zeros(k, dtype=np.float64),
                       where=support > 0)
    return RecallVector(values=values, defined=support > 0, support=support)


def baseline_recall(model: SvmModel, X_test: SparseMatrix, y_test) -> RecallVector:
    y = _checked_labels(y_test, X_test.rows, len(model.classes))
    return _recalls(predict(model, X_test), y, len(model.classes))


def ablate_token(model: SvmModel, X_test: SparseMatrix, y_test, w: str,
                 vectorizer: VectorizerModel) -> RecallVector:
    """Recall vector after zeroing token w's test column; the model and the
    vectorizer stay untouched. Out-of-vocabulary w returns the baseline."""
    y = _checked_labels(y_test, X_test.rows, len(model.classes))
    if vectorizer.column_of(w) is None:
        return _recalls(predict(model, X_test), y, len(model.classes))
    masked = zero_columns(X_test, [w], vectorizer)
    return _recalls(predict(model, masked), y, len(model.classes))


def delta_recall_matrix(model: SvmModel, X_test: SparseMatrix, y_test,
                        stopwords: StopwordSet, vectorizer: VectorizerModel,
                        n_jobs: int = 1) -> DeltaRecallMatrix:
    """Sweep every projected stop-word. One row per distinct token, rows in
    lexicographic token order; bit-identical for any n_jobs."""
    if n_jobs < 1:
        raise ConfigError(f"n_jobs must be >= 1, got {n_jobs}")
    if X_test.cols != len(vectorizer.vocab):
        raise DataError(
            f"matrix has {X_test.cols} columns, vectorizer has {len(vectorizer.vocab)}")
    k = len(model.classes)
    y = _checked_labels(y_test, X_test.rows, k)
    tokens = tuple(sorted(stopwords.projected))

    base_labels = labels_from_margins(model, decision_values(model, X_test))
    base = _recalls(base_labels, y, k)
    wt, bias = model.stacked()

    # column occupancy index: entry positions grouped by column
    order = np.argsort(X_test.indices, kind="stable")
    sorted_cols = X_test.indices[order]
    entry_rows = np.repeat(np.arange(X_test.rows, dtype=np.int64),
                           np.diff(X_test.indptr))[order]

    ablated = np.empty((len(tokens), k), dtype=np.float64)

    def fill_row(m: int) -> None:
        col = vectorizer.column_of(tokens[m])
        if col is None:
            ablated[m] = base.values
            return
        lo = np.searchsorted(sorted_cols, col, side="left")
        hi = np.searchsorted(sorted_cols, col, side="right")
        if lo == hi:  # token never occurs in the test matrix
            ablated[m] = base.values
            return
        labels = base_labels.copy()
        for i in entry_rows[lo:hi]:
            idx, vals = X_test.row(i)
            keep = idx != col
            idx2 = idx[keep]
            vals2 = vals[keep]
            row_margins = vals2 @ wt[idx2] + bias if idx2.shape[0] else bias
            labels[i] = labels_from_margins(model, row_margins.reshape(1, -1))[0]
        ablated[m] = _recalls(labels, y, k).values

    if n_jobs == 1:
        for m in range(len(tokens)):
            fill_row(m)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(fill_row, range(len(tokens))))

    return DeltaRecallMatrix(
        tokens=tokens,
        authors=tuple(model.classes),
        deltas=base.values[None, :] - ablated,
        baseline=base.values,
        ablated=ablated,
        author_defined=base.defined,
        support=base.support,
    )


def extremes_report(matrix: DeltaRecallMatrix,
                    threshold_pp: float = 0.5) -> ExtremesReport:
    """Per author: up to two tokens with delta >= +threshold (harmful to
    remove) and two with delta <= -threshold (helpful to remove), threshold
    inclusive, equal deltas ranked lexicographically. Authors without test
    support are skipped."""
    n = len(matrix.tokens)
    per_author = []
    skipped = []
    for a, author in enumerate(matrix.authors):
        if not bool(matrix.author_defined[a]):
            skipped.append(author)
            continue
        pp = 100.0 * matrix.deltas[:, a]
        by_harm = sorted(range(n), key=lambda m: (-pp[m], matrix.tokens[m]))
        harmful = tuple(ExtremeEntry(matrix.tokens[m], float(pp[m]))
                        for m in by_harm if pp[m] >= threshold_pp)[:2]
        by_help = sorted(range(n), key=lambda m: (pp[m], matrix.tokens[m]))
        helpful = tuple(ExtremeEntry(matrix.tokens[m], float(pp[m]))
                        for m in by_help if pp[m] <= -threshold_pp)[:2]
        per_author.append(AuthorExtremes(author=author, harmful=harmful,
                                         helpful=helpful))
    return ExtremesReport(threshold_pp=float(threshold_pp),
                          per_author=tuple(per_author),
                          skipped_authors=tuple(skipped))


def distribution_report(matrix: DeltaRecallMatrix) -> DeltaDistribution:
    """Sign shares over all token-author pairs plus box statistics (median,
    quartiles, 1.5*IQR outliers) of the non-zero |delta| values in pp."""
    flat = matrix.deltas.ravel()
    n = int(flat.size)
    positive = int(np.count_nonzero(flat >= ZERO_EPS))
    negative = int(np.count_nonzero(flat <= -ZERO_EPS))
    zero = n - positive - negative
    if n:
        shares = (positive / n, negative / n, zero / n)
    else:
        shares = (0.0, 0.0, 1.0)
    nonzero_pp = np.sort(100.0 * np.abs(flat[np.abs(flat) >= ZERO_EPS]))
    if nonzero_pp.size:
        q1, med, q3 = (float(v) for v in np.quantile(nonzero_pp, [0.25, 0.5, 0.75]))
        iqr = q3 - q1
        low, high = q1 - 1.5 * iqr, q3 + 1.5 * iqr
        outliers = tuple(float(v) for v in nonzero_pp[(nonzero_pp < low) | (nonzero_pp > high)])
    else:
        q1 = med = q3 = None
        outliers = ()
    return DeltaDistribution(
        n_pairs=n, positive=positive, negative=negative, zero=zero,
        positive_share=shares[0], negative_share=shares[1], zero_share=shares[2],
        median_pp=med, q1_pp=q1, q3_pp=q3, outliers_pp=outliers,
    )


# --------------------------------------------------------------- emitters


def matrix_to_csv(matrix: DeltaRecallMatrix) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["token", *matrix.authors])
    for r, token in enumerate(matrix.tokens):
        writer.writerow([token, *(repr(float(100.0 * v)) for v in matrix.deltas[r])])
    return out.getvalue()


def extremes_to_json(report: ExtremesReport) -> str:
    payload = {
        "threshold_pp": report.threshold_pp,
        "authors": [
            {
                "author": a.author,
                "harmful": [{"token": e.token, "delta_pp": e.delta_pp} for e in a.harmful],
                "helpful": [{"token": e.token, "delta_pp": e.delta_pp} for e in a.helpful],
            }
            for a in report.per_author
        ],
        "skipped_authors": list(report.skipped_authors),
    }
    return json.dumps(payload, ensure_ascii=False, indent=2)


def _extreme_cell(entries: tuple[ExtremeEntry, ...], slot: int, decimals: int) -> str:
    if slot >= len(entries):
        return "—"
    e = entries[slot]
    return f"{e.token} ({e.delta_pp:+.{decimals}f} pp)"


def extremes_to_markdown(report: ExtremesReport, decimals: int = 1) -> str:
    lines = [
        "| Author | Most harmful token (largest +Δ) | 2nd most harmful "
        "| Most helpful-to-remove token (most −Δ) | 2nd most helpful-to-remove |",
        "| --- | --- | --- | --- | --- |",
    ]
    for a in report.per_author:
        cells = [
            _extreme_cell(a.harmful, 0, decimals),
            _extreme_cell(a.harmful, 1, decimals),
            _extreme_cell(a.helpful, 0, decimals),
            _extreme_cell(a.helpful, 1, decimals),
        ]
        lines.append(f"| {a.author} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def distribution_to_json(dist: DeltaDistribution) -> str:
    payload = {
        "n_pairs": dist.n_pairs,
        "positive": dist.positive,
        "negative": dist.negative,
        "zero": dist.zero,
        "positive_share": dist.positive_share,
        "negative_share": dist.negative_share,
        "zero_share": dist.zero_share,
        "median_pp": dist.median_pp,
        "q1_pp": dist.q1_pp,
        "q3_pp": dist.q3_pp,
        "outliers_pp": list(dist.outliers_pp),
    }
    return json.dumps(payload, ensure_ascii=False, indent=2)
