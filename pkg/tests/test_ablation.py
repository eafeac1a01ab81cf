"""Frozen-model ablation checked two independent ways.

The hand fixture is a one-machine model whose predictions can be enumerated
on paper, so expected recall vectors are written down directly. The pipeline
fixture runs the real vectorizer and solver, then verifies every matrix row
against the slow reference route: zero the column with zero_columns, predict,
recount recall with exact fractions. The sweep must match that reference to
the bit, serial or parallel.
"""

from fractions import Fraction

import numpy as np
import pytest

from banglastylo.ablation import (
    DeltaRecallMatrix,
    ablate_token,
    baseline_recall,
    delta_recall_matrix,
    distribution_report,
    distribution_to_json,
    extremes_report,
    extremes_to_json,
    extremes_to_markdown,
    matrix_to_csv,
)
from banglastylo.errors import DataError
from banglastylo.svm import (
    BinaryMachine,
    SvmConfig,
    SvmModel,
    predict,
    save_model,
    train_svm,
)
from banglastylo.textprep import AnalyzerConfig, StopwordSet
from banglastylo.tfidf import (
    SparseMatrix,
    VectorizerModel,
    fit_vectorizer,
    save_vectorizer,
    transform,
    zero_columns,
)


def sm(rows):
    rows = [list(map(float, r)) for r in rows]
    indptr = [0]
    indices = []
    data = []
    for r in rows:
        for j, v in enumerate(r):
            if v != 0.0:
                indices.append(j)
                data.append(v)
        indptr.append(len(indices))
    n_cols = len(rows[0]) if rows else 0
    return SparseMatrix(rows=len(rows), cols=n_cols,
                        indptr=np.array(indptr, dtype=np.int64),
                        indices=np.array(indices, dtype=np.int32),
                        data=np.array(data, dtype=np.float64))


def hand_vectorizer(vocab):
    return VectorizerModel(vocab=tuple(vocab), idf=np.ones(len(vocab)),
                           train_doc_count=2, analyzer=AnalyzerConfig(),
                           ngram_range=(1, 1))


def stopset(*projected):
    return StopwordSet(raw=frozenset(projected), projected=frozenset(projected),
                       unprojected=(), source="inline")


# ------------------------------------------------------------- hand fixture
# One machine (pos=0, neg=1), w=(1,0), b=0: predicts 0 exactly when the first
# feature is positive, 1 otherwise (a zero margin votes the negative side).

HAND_VOCAB = ("ss", "tt")


def hand_setup():
    vec = hand_vectorizer(HAND_VOCAB)
    machine = BinaryMachine(pos=0, neg=1, weights=np.array([1.0, 0.0]),
                            bias=0.0, epochs=1, converged=True,
                            final_violation=0.0)
    model = SvmModel(scheme="one-vs-one", classes=("p", "q"), n_features=2,
                     machines=(machine,), config=SvmConfig())
    x_test = sm([
        [1.0, 0.0],   # author 0, survives only through column ss
        [0.5, 0.2],   # author 0
        [0.0, 0.3],   # author 1
        [0.0, 0.7],   # author 1
    ])
    y_test = np.array([0, 0, 1, 1])
    return model, vec, x_test, y_test


def test_baseline_recall_hand_counted():
    model, _, x_test, y_test = hand_setup()
    base = baseline_recall(model, x_test, y_test)
    assert base.values.tolist() == [1.0, 1.0]
    assert base.defined.tolist() == [True, True]
    assert base.support.tolist() == [2, 2]


def test_perfect_classifier_recall_is_all_ones():
    model, _, x_test, y_test = hand_setup()
    assert np.all(baseline_recall(model, x_test, y_test).values == 1.0)


def test_ablating_the_separating_feature_drops_only_that_author():
    model, vec, x_test, y_test = hand_setup()
    after = ablate_token(model, x_test, y_test, "ss", vec)
    # both author-0 rows lose their margin and fall to the negative vote
    assert after.values.tolist() == [0.0, 1.0]


def test_ablating_a_non_separating_feature_changes_nothing():
    model, vec, x_test, y_test = hand_setup()
    after = ablate_token(model, x_test, y_test, "tt", vec)
    assert after.values.tolist() == [1.0, 1.0]


def test_out_of_vocabulary_token_returns_baseline_unchanged():
    model, vec, x_test, y_test = hand_setup()
    base = baseline_recall(model, x_test, y_test)
    after = ablate_token(model, x_test, y_test, "zz", vec)
    assert np.array_equal(after.values, base.values)


def test_hand_matrix_values():
    model, vec, x_test, y_test = hand_setup()
    mat = delta_recall_matrix(model, x_test, y_test, stopset("ss", "zz", "tt"), vec)
    assert mat.tokens == ("ss", "tt", "zz")  # deduplicated, lexicographic
    assert mat.authors == ("p", "q")
    assert mat.deltas.tolist() == [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]
    assert mat.baseline.tolist() == [1.0, 1.0]
    assert mat.ablated.tolist() == [[0.0, 1.0], [1.0, 1.0], [1.0, 1.0]]


def test_baseline_recall_flags_empty_test_class():
    model, _, x_test, _ = hand_setup()
    base = baseline_recall(model, x_test, np.array([0, 0, 0, 0]))
    assert base.defined.tolist() == [True, False]
    assert base.values[1] == 0.0


def test_baseline_recall_validates_labels():
    model, _, x_test, _ = hand_setup()
    with pytest.raises(DataError):
        baseline_recall(model, x_test, np.array([0, 0, 1]))  # length mismatch
    with pytest.raises(DataError):
        baseline_recall(model, x_test, np.array([0, 0, 1, 2]))  # out of range


# --------------------------------------------------------- pipeline fixture
# Real vectorizer and solver on a corpus whose authors each lean on one
# planted token; "dd" occurs in training only and "qq" never occurs.

def pipeline_setup():
    filler = "xx yy zz"
    train_texts = [
        f"aa aa aa {filler}", f"aa aa {filler} aa", f"aa {filler} aa aa", f"aa aa aa aa {filler} dd",
        f"bb bb bb {filler}", f"bb bb {filler} bb", f"bb {filler} bb bb", f"bb bb bb bb {filler}",
        f"cc cc cc {filler}", f"cc cc {filler} cc", f"cc {filler} cc cc", f"cc cc cc cc {filler}",
    ]
    train_y = np.array([0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2])
    test_texts = [
        f"aa aa aa bb {filler}", f"aa aa {filler}",
        f"bb bb bb cc {filler}", f"bb bb {filler}",
        f"cc cc cc aa {filler}", f"cc cc {filler}",
    ]
    test_y = np.array([0, 0, 1, 1, 2, 2])
    vec = fit_vectorizer(train_texts)
    x_train = transform(vec, train_texts)
    x_test = transform(vec, test_texts)
    model = train_svm(x_train, train_y, SvmConfig(C=10.0, tol=1e-8, seed=3),
                      class_labels=("A0", "A1", "A2"))
    words = stopset("aa", "bb", "dd", "qq")
    return model, vec, x_test, test_y, words


def reference_recalls(model, vec, x_test, y_test, token):
    """Slow route: zeroed copy, full predict, exact fraction recalls."""
    preds = predict(model, zero_columns(x_test, [token], vec))
    out = []
    for a in range(len(model.classes)):
        hits = int(np.sum((y_test == a) & (preds == a)))
        n = int(np.sum(y_test == a))
        out.append(float(Fraction(hits, n)) if n else 0.0)
    return np.array(out)


def test_sweep_rows_match_zero_column_reference_bitwise():
    model, vec, x_test, y_test, words = pipeline_setup()
    mat = delta_recall_matrix(model, x_test, y_test, words, vec)
    for r, token in enumerate(mat.tokens):
        want = reference_recalls(model, vec, x_test, y_test, token)
        assert np.array_equal(mat.ablated[r], want), token
        assert np.array_equal(mat.deltas[r], mat.baseline - want), token
    # the planted signal actually moves recall somewhere
    assert np.any(mat.deltas != 0.0)


def test_ablate_token_matches_reference_bitwise():
    model, vec, x_test, y_test, _ = pipeline_setup()
    for token in ("aa", "bb", "dd"):
        got = ablate_token(model, x_test, y_test, token, vec)
        assert np.array_equal(got.values,
                              reference_recalls(model, vec, x_test, y_test, token))


def test_training_only_token_has_exactly_zero_row():
    model, vec, x_test, y_test, words = pipeline_setup()
    assert vec.column_of("dd") is not None  # in vocabulary via training
    mat = delta_recall_matrix(model, x_test, y_test, words, vec)
    r = mat.tokens.index("dd")
    assert np.all(mat.deltas[r] == 0.0)
    assert np.array_equal(mat.ablated[r], mat.baseline)


def test_out_of_vocabulary_row_is_exactly_zero():
    model, vec, x_test, y_test, words = pipeline_setup()
    mat = delta_recall_matrix(model, x_test, y_test, words, vec)
    r = mat.tokens.index("qq")
    assert np.all(mat.deltas[r] == 0.0)


def test_ablation_only_touches_rows_containing_the_token():
    model, vec, x_test, y_test, _ = pipeline_setup()
    col = vec.column_of("aa")
    before = predict(model, x_test)
    after = predict(model, zero_columns(x_test, ["aa"], vec))
    untouched = np.array([col not in x_test.row(i)[0] for i in range(x_test.rows)])
    assert np.array_equal(before[untouched], after[untouched])


def test_parallel_sweep_is_bit_identical_to_serial():
    model, vec, x_test, y_test, words = pipeline_setup()
    serial = delta_recall_matrix(model, x_test, y_test, words, vec, n_jobs=1)
    threaded = delta_recall_matrix(model, x_test, y_test, words, vec, n_jobs=8)
    assert serial.tokens == threaded.tokens
    assert np.array_equal(serial.deltas, threaded.deltas)
    assert np.array_equal(serial.ablated, threaded.ablated)
    assert np.array_equal(serial.baseline, threaded.baseline)


def test_sweep_leaves_model_and_vectorizer_files_byte_identical(tmp_path):
    model, vec, x_test, y_test, words = pipeline_setup()
    save_model(model, tmp_path / "model_before.json")
    save_vectorizer(vec, tmp_path / "vec_before.json")
    delta_recall_matrix(model, x_test, y_test, words, vec, n_jobs=4)
    save_model(model, tmp_path / "model_after.json")
    save_vectorizer(vec, tmp_path / "vec_after.json")
    assert (tmp_path / "model_before.json").read_bytes() == \
        (tmp_path / "model_after.json").read_bytes()
    assert (tmp_path / "vec_before.json").read_bytes() == \
        (tmp_path / "vec_after.json").read_bytes()


def test_matrix_invariants_hold_on_pipeline_fixture():
    model, vec, x_test, y_test, words = pipeline_setup()
    mat = delta_recall_matrix(model, x_test, y_test, words, vec)
    assert np.all(mat.deltas >= -1.0) and np.all(mat.deltas <= 1.0)
    assert np.array_equal(mat.deltas, mat.baseline[None, :] - mat.ablated)


def test_undefined_author_column_is_flagged_and_zero():
    model, vec, x_test, _, words = pipeline_setup()
    y_partial = np.array([0, 0, 1, 1, 0, 1])  # class 2 missing from the test set
    mat = delta_recall_matrix(model, x_test, y_partial, words, vec)
    assert mat.author_defined.tolist() == [True, True, False]
    assert np.all(mat.deltas[:, 2] == 0.0)
    rep = extremes_report(mat)
    assert [a.author for a in rep.per_author] == ["A0", "A1"]
    assert rep.skipped_authors == ("A2",)


# ------------------------------------------------------------- extremes


def hand_matrix(deltas, tokens, authors):
    deltas = np.asarray(deltas, dtype=np.float64)
    k = deltas.shape[1]
    baseline = np.full(k, 0.5)
    return DeltaRecallMatrix(tokens=tuple(tokens), authors=tuple(authors),
                             deltas=deltas, baseline=baseline,
                             ablated=baseline[None, :] - deltas,
                             author_defined=np.ones(k, dtype=bool),
                             support=np.full(k, 10, dtype=np.int64))


def test_extremes_top_two_each_direction():
    mat = hand_matrix(
        [[0.081, 0.020],
         [0.054, 0.020],
         [-0.056, -0.004],
         [0.002, 0.000]],
        tokens=("aa", "ab", "ba", "cc"), authors=("A0", "A1"))
    rep = extremes_report(mat)
    assert rep.threshold_pp == 0.5
    a0, a1 = rep.per_author
    assert [e.token for e in a0.harmful] == ["aa", "ab"]
    assert a0.harmful[0].delta_pp == pytest.approx(8.1, rel=1e-12)
    assert a0.harmful[1].delta_pp == pytest.approx(5.4, rel=1e-12)
    assert [e.token for e in a0.helpful] == ["ba"]
    assert a0.helpful[0].delta_pp == pytest.approx(-5.6, rel=1e-12)
    # equal deltas rank lexicographically
    assert [e.token for e in a1.harmful] == ["aa", "ab"]
    assert a1.helpful == ()


def test_extremes_threshold_is_inclusive():
    mat = hand_matrix([[0.005, 0.0049], [-0.005, -0.0049]],
                      tokens=("aa", "bb"), authors=("A0", "A1"))
    rep = extremes_report(mat, threshold_pp=0.5)
    a0, a1 = rep.per_author
    assert [e.token for e in a0.harmful] == ["aa"]
    assert [e.token for e in a0.helpful] == ["bb"]
    assert a1.harmful == () and a1.helpful == ()


def test_extremes_single_positive_cell():
    mat = hand_matrix([[0.02, 0.0]], tokens=("ww",), authors=("A0", "A1"))
    rep = extremes_report(mat)
    a0, a1 = rep.per_author
    assert [e.token for e in a0.harmful] == ["ww"]
    assert a0.helpful == ()
    assert a1.harmful == () and a1.helpful == ()


def test_extremes_markdown_layout_and_rendering():
    mat = hand_matrix(
        [[0.081, 0.0], [-0.056, 0.0]], tokens=("aa", "ba"), authors=("A0", "A1"))
    md = extremes_to_markdown(extremes_report(mat))
    lines = md.strip().splitlines()
    assert lines[0].startswith("| Author | Most harmful")
    assert set(lines[1].replace("|", "").split()) == {"---"}
    assert "aa (+8.1 pp)" in md
    assert "ba (-5.6 pp)" in md
    row_a1 = next(line for line in lines if line.startswith("| A1 "))
    assert row_a1.count("—") == 4  # nothing qualifies, all dashes


def test_extremes_markdown_two_decimal_rendering():
    mat = hand_matrix([[0.0333, 0.0]], tokens=("tr",), authors=("A0", "A1"))
    md = extremes_to_markdown(extremes_report(mat), decimals=2)
    assert "tr (+3.33 pp)" in md


def test_extremes_json_round_trip():
    import json

    mat = hand_matrix([[0.081, 0.0], [-0.056, 0.0]],
                      tokens=("aa", "ba"), authors=("A0", "A1"))
    payload = json.loads(extremes_to_json(extremes_report(mat)))
    assert payload["threshold_pp"] == 0.5
    assert payload["authors"][0]["author"] == "A0"
    assert payload["authors"][0]["harmful"][0]["token"] == "aa"
    assert payload["authors"][0]["helpful"][0]["delta_pp"] == pytest.approx(-5.6)
    assert payload["skipped_authors"] == []


# ----------------------------------------------------------- distribution


def test_distribution_counts_of_hand_matrix():
    # one +1 pp cell, one -1 pp cell, two zeros
    mat = hand_matrix([[0.01, -0.01], [0.0, 0.0]],
                      tokens=("aa", "bb"), authors=("A0", "A1"))
    dist = distribution_report(mat)
    assert (dist.positive, dist.negative, dist.zero) == (1, 1, 2)
    assert dist.positive_share == 0.25
    assert dist.negative_share == 0.25
    assert dist.zero_share == 0.5
    assert dist.median_pp == 1.0
    assert dist.outliers_pp == ()


def test_distribution_all_zero_matrix():
    mat = hand_matrix([[0.0, 0.0]], tokens=("aa",), authors=("A0", "A1"))
    dist = distribution_report(mat)
    assert (dist.positive_share, dist.negative_share, dist.zero_share) == (0.0, 0.0, 1.0)
    assert dist.median_pp is None and dist.q1_pp is None and dist.q3_pp is None
    assert dist.outliers_pp == ()


def test_distribution_zero_threshold():
    mat = hand_matrix([[5e-13, -5e-13], [1e-12, -1e-12]],
                      tokens=("aa", "bb"), authors=("A0", "A1"))
    dist = distribution_report(mat)
    assert (dist.positive, dist.negative, dist.zero) == (1, 1, 2)


def test_distribution_quartiles_and_outliers():
    # non-zero |deltas| in pp: [1, 1, 1, 1, 20]; box collapses on 1.0 so the
    # single large value sits outside the fences
    mat = hand_matrix([[0.01, 0.01], [0.01, -0.01], [0.2, 0.0]],
                      tokens=("aa", "bb", "cc"), authors=("A0", "A1"))
    dist = distribution_report(mat)
    assert dist.q1_pp == 1.0 and dist.median_pp == 1.0 and dist.q3_pp == 1.0
    assert dist.outliers_pp == (20.0,)


def test_distribution_interpolated_quartiles():
    # |pp| values 12.5, 25, 50, 75: linear interpolation between order stats
    mat = hand_matrix([[0.125, -0.25], [0.5, 0.75]],
                      tokens=("aa", "bb"), authors=("A0", "A1"))
    dist = distribution_report(mat)
    assert dist.q1_pp == pytest.approx(21.875, abs=1e-12)
    assert dist.median_pp == pytest.approx(37.5, abs=1e-12)
    assert dist.q3_pp == pytest.approx(56.25, abs=1e-12)
    assert dist.outliers_pp == ()


def test_distribution_json_fields():
    import json

    mat = hand_matrix([[0.01, -0.01], [0.0, 0.0]],
                      tokens=("aa", "bb"), authors=("A0", "A1"))
    payload = json.loads(distribution_to_json(distribution_report(mat)))
    assert payload["n_pairs"] == 4
    assert payload["positive"] == 1
    assert payload["zero_share"] == 0.5
    assert payload["median_pp"] == 1.0
    assert payload["outliers_pp"] == []


# ------------------------------------------------------------- matrix CSV


def test_matrix_csv_full_precision_pp():
    import csv
    import io

    model, vec, x_test, y_test, words = pipeline_setup()
    mat = delta_recall_matrix(model, x_test, y_test, words, vec)
    rows = list(csv.reader(io.StringIO(matrix_to_csv(mat))))
    assert rows[0] == ["token", "A0", "A1", "A2"]
    assert len(rows) == 1 + len(mat.tokens)
    for r, token in enumerate(mat.tokens):
        assert rows[1 + r][0] == token
        got = np.array([float(v) for v in rows[1 + r][1:]])
        assert np.array_equal(got, 100.0 * mat.deltas[r])
