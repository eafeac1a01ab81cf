"""End-to-end experiment orchestration.

One invocation owns one run directory: config.json, split.json, a
subdirectory per preprocessing variant (model, vectorizer, metrics,
confusion matrix), run_record.json, and optionally ablation/. The split is
created once and shared by both variants; the removed variant reuses it with
the stop-word columns zeroed (or, in text mode, with surface stop-words
deleted and the vectorizer refit). Any stage failure removes whatever this
invocation created and re-raises with the stage name attached.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import shutil
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path

from .ablation import (
    delta_recall_matrix,
    distribution_report,
    distribution_to_json,
    extremes_report,
    extremes_to_json,
    extremes_to_markdown,
    matrix_to_csv,
)
from .corpus import (
    CORPUS_FORMATS,
    Corpus,
    CorpusStats,
    corpus_stats,
    load_corpus,
    segment_documents,
    stratified_split,
)
from .errors import ConfigError, DataError, NumericError
from .metrics import (
    confusion_matrix,
    confusion_to_csv,
    delta_f1,
    metrics,
    metrics_to_csv,
    metrics_to_json,
)
from .svm import SvmConfig, load_model, predict, save_model, train_svm
from .textprep import AnalyzerConfig, load_stopwords, prepare_text, remove_stopwords_from_text
from .tfidf import fit_vectorizer, load_vectorizer, save_vectorizer, transform, zero_columns

VARIANTS = ("retained", "removed")
REMOVAL_MODES = ("columns", "text")
RECORD_FORMAT = "banglastylo.run-record"
RECORD_VERSION = 1


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: str
    stopwords_path: str
    output_dir: str
    dataset_format: str = "author-dirs"
    segment_words: int | None = None
    split_ratio: float = 0.8
    split_seed: int = 42
    ngram_range: tuple[int, int] = (1, 1)
    variants: tuple[str, ...] = VARIANTS
    removal_mode: str = "columns"
    analyzer: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    svm: SvmConfig = field(default_factory=SvmConfig)

    def __post_init__(self):
        for name in ("dataset_path", "stopwords_path", "output_dir"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be set")
        if self.dataset_format not in CORPUS_FORMATS:
            raise ConfigError(
                f"unknown dataset format {self.dataset_format!r}; expected one of {CORPUS_FORMATS}")
        if self.segment_words is not None and self.segment_words < 1:
            raise ConfigError(f"segment_words must be >= 1, got {self.segment_words}")
        if not (0.0 < self.split_ratio < 1.0):
            raise ConfigError(f"split_ratio must lie in (0, 1), got {self.split_ratio}")
        lo, hi = self.ngram_range
        if lo < 1 or hi < lo:
            raise ConfigError(f"ngram_range must satisfy 1 <= lo <= hi, got {self.ngram_range}")
        object.__setattr__(self, "ngram_range", (int(lo), int(hi)))
        variants = tuple(dict.fromkeys(self.variants))
        if not variants:
            raise ConfigError("at least one variant is required")
        unknown = [v for v in variants if v not in VARIANTS]
        if unknown:
            raise ConfigError(f"unknown variants {unknown}; expected subset of {VARIANTS}")
        object.__setattr__(self, "variants",
                           tuple(v for v in VARIANTS if v in variants))
        if self.removal_mode not in REMOVAL_MODES:
            raise ConfigError(
                f"unknown removal_mode {self.removal_mode!r}; expected one of {REMOVAL_MODES}")

    def to_dict(self) -> dict:
        return {
            "dataset_path": self.dataset_path,
            "stopwords_path": self.stopwords_path,
            "output_dir": self.output_dir,
            "dataset_format": self.dataset_format,
            "segment_words": self.segment_words,
            "split_ratio": self.split_ratio,
            "split_seed": self.split_seed,
            "ngram_range": list(self.ngram_range),
            "variants": list(self.variants),
            "removal_mode": self.removal_mode,
            "analyzer": self.analyzer.to_dict(),
            "svm": self.svm.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        if not isinstance(payload, dict):
            raise ConfigError("experiment config must be a JSON object")
        known = {
            "dataset_path", "stopwords_path", "output_dir", "dataset_format",
            "segment_words", "split_ratio", "split_seed", "ngram_range",
            "variants", "removal_mode", "analyzer", "svm",
        }
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = dict(payload)
        if "ngram_range" in kwargs and kwargs["ngram_range"] is not None:
            kwargs["ngram_range"] = tuple(int(v) for v in kwargs["ngram_range"])
        if "variants" in kwargs and kwargs["variants"] is not None:
            kwargs["variants"] = tuple(kwargs["variants"])
        if "analyzer" in kwargs:
            kwargs["analyzer"] = AnalyzerConfig.from_dict(kwargs["analyzer"] or {})
        if "svm" in kwargs:
            kwargs["svm"] = SvmConfig.from_dict(kwargs["svm"] or {})
        kwargs = {k: v for k, v in kwargs.items() if v is not None or k == "segment_words"}
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"incomplete experiment config: {exc}") from exc


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    try:
        payload = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid JSON: {exc.msg}") from exc
    return ExperimentConfig.from_dict(payload)


@dataclass(frozen=True)
class VariantResult:
    name: str
    accuracy: float
    macro_f1: float
    model_path: str
    vectorizer_path: str
    metrics_path: str
    metrics_csv_path: str
    confusion_path: str

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "model": self.model_path,
            "vectorizer": self.vectorizer_path,
            "metrics": self.metrics_path,
            "metrics_csv": self.metrics_csv_path,
            "confusion": self.confusion_path,
        }

    @classmethod
    def from_dict(cls, name: str, payload: dict) -> "VariantResult":
        return cls(name=name, accuracy=float(payload["accuracy"]),
                   macro_f1=float(payload["macro_f1"]),
                   model_path=payload["model"],
                   vectorizer_path=payload["vectorizer"],
                   metrics_path=payload["metrics"],
                   metrics_csv_path=payload["metrics_csv"],
                   confusion_path=payload["confusion"])


@dataclass(frozen=True)
class RunRecord:
    config: dict
    split_fingerprint: str
    train_size: int
    test_size: int
    classes: tuple[str, ...]
    variants: dict[str, VariantResult]
    delta_f1: float | None
    ablation: dict | None
    timings: dict[str, float]

    def to_dict(self) -> dict:
        payload = {
            "format": RECORD_FORMAT,
            "format_version": RECORD_VERSION,
            "config": self.config,
            "split": {
                "fingerprint": self.split_fingerprint,
                "train_size": self.train_size,
                "test_size": self.test_size,
            },
            "classes": list(self.classes),
            "variants": {name: v.to_dict() for name, v in self.variants.items()},
        }
        if self.delta_f1 is not None:
            payload["delta_f1"] = self.delta_f1
        if self.ablation is not None:
            payload["ablation"] = self.ablation
        payload["timings"] = self.timings
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "RunRecord":
        if not isinstance(payload, dict) or payload.get("format") != RECORD_FORMAT:
            raise DataError("not a run record")
        if payload.get("format_version") != RECORD_VERSION:
            raise DataError(
                f"unsupported run record format_version {payload.get('format_version')}")
        try:
            split = payload["split"]
            return cls(
                config=payload["config"],
                split_fingerprint=split["fingerprint"],
                train_size=int(split["train_size"]),
                test_size=int(split["test_size"]),
                classes=tuple(payload["classes"]),
                variants={name: VariantResult.from_dict(name, v)
                          for name, v in payload["variants"].items()},
                delta_f1=payload.get("delta_f1"),
                ablation=payload.get("ablation"),
                timings=dict(payload.get("timings", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed run record: {exc}") from exc

    def digest(self) -> str:
        """Content hash of the scientific result: everything except wall-clock
        timings and the output location."""
        payload = self.to_dict()
        payload.pop("timings", None)
        config = dict(payload["config"])
        config.pop("output_dir", None)
        payload["config"] = config
        blob = json.dumps(payload, sort_keys=True, ensure_ascii=False,
                          separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def save_run_record(record: RunRecord, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(record.to_dict(), ensure_ascii=False, indent=2), encoding="utf-8")


def load_run_record(path: str | Path) -> RunRecord:
    p = Path(path)
    try:
        payload = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read run record {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt run record {p}: {exc.msg}") from exc
    return RunRecord.from_dict(payload)


# ------------------------------------------------------------------ stages


@contextmanager
def _stage(name: str, timings: dict):
    start = time.perf_counter()
    try:
        yield
    except (ConfigError, DataError, NumericError) as exc:
        raise type(exc)(f"{name}: {exc}") from exc
    finally:
        timings[name] = time.perf_counter() - start


def _prepare_corpus(corpus: Corpus) -> Corpus:
    docs = tuple(replace(d, text=prepare_text(d.text)) for d in corpus.documents)
    return Corpus(documents=docs, authors=corpus.authors)


def _load_prepared(config: ExperimentConfig, timings: dict) -> Corpus:
    with _stage("load", timings):
        corpus = load_corpus(config.dataset_path, config.dataset_format)
    if config.segment_words is not None:
        with _stage("segment", timings):
            corpus = segment_documents(corpus, config.segment_words)
    with _stage("prepare", timings):
        return _prepare_corpus(corpus)


def _evaluate(model, x, y, classes):
    cm = confusion_matrix(y, predict(model, x), len(classes), classes)
    return cm, metrics(cm)


def _write_variant(run_dir: Path, name: str, model, vectorizer, cm, report) -> VariantResult:
    vdir = run_dir / "variants" / name
    vdir.mkdir(parents=True, exist_ok=True)
    rel = f"variants/{name}"
    save_model(model, vdir / "model.json")
    save_vectorizer(vectorizer, vdir / "vectorizer.json")
    (vdir / "metrics.json").write_text(metrics_to_json(report), encoding="utf-8")
    (vdir / "metrics.csv").write_text(metrics_to_csv(report), encoding="utf-8")
    (vdir / "confusion.csv").write_text(confusion_to_csv(cm), encoding="utf-8")
    return VariantResult(
        name=name, accuracy=report.accuracy, macro_f1=report.macro_f1,
        model_path=f"{rel}/model.json", vectorizer_path=f"{rel}/vectorizer.json",
        metrics_path=f"{rel}/metrics.json", metrics_csv_path=f"{rel}/metrics.csv",
        confusion_path=f"{rel}/confusion.csv")


def _split_payload(split, classes) -> dict:
    return {
        "fingerprint": split.fingerprint(),
        "seed": split.seed,
        "ratio": split.ratio,
        "classes": list(classes),
        "train_ids": [d.id for d in split.train.documents],
        "test_ids": [d.id for d in split.test.documents],
    }


def _write_ablation_artifacts(run_dir: Path, matrix, threshold_pp: float,
                              decimals: int, meta: dict) -> dict:
    adir = run_dir / "ablation"
    adir.mkdir(parents=True, exist_ok=True)
    extremes = extremes_report(matrix, threshold_pp)
    dist = distribution_report(matrix)
    (adir / "delta_matrix.csv").write_text(matrix_to_csv(matrix), encoding="utf-8")
    (adir / "extremes.json").write_text(extremes_to_json(extremes), encoding="utf-8")
    (adir / "extremes.md").write_text(extremes_to_markdown(extremes, decimals), encoding="utf-8")
    (adir / "distribution.json").write_text(distribution_to_json(dist), encoding="utf-8")
    baseline = {
        "authors": list(matrix.authors),
        "recall": [float(v) for v in matrix.baseline],
        "defined": [bool(v) for v in matrix.author_defined],
        "support": [int(v) for v in matrix.support],
    }
    paths = {
        "delta_matrix": "ablation/delta_matrix.csv",
        "extremes": "ablation/extremes.json",
        "extremes_md": "ablation/extremes.md",
        "distribution": "ablation/distribution.json",
    }
    record = {"threshold_pp": threshold_pp, "decimals": decimals,
              "baseline": baseline, "paths": paths}
    record.update(meta)
    (adir / "ablation_record.json").write_text(
        json.dumps(record, ensure_ascii=False, indent=2), encoding="utf-8")
    paths = dict(paths)
    paths["record"] = "ablation/ablation_record.json"
    return paths


# -------------------------------------------------------------- experiment


def run_experiment(config: ExperimentConfig, with_ablation: bool = False,
                   ablation_threshold_pp: float = 0.5,
                   ablation_decimals: int = 1, n_jobs: int = 1) -> RunRecord:
    """Run the configured variants on one frozen split and write every
    artifact into config.output_dir. Deterministic given the config seeds;
    n_jobs only parallelizes the ablation sweep and cannot change outputs."""
    run_dir = Path(config.output_dir)
    created_dir = not run_dir.exists()
    run_dir.mkdir(parents=True, exist_ok=True)
    if any(run_dir.iterdir()):
        raise ConfigError(f"output directory {run_dir} is not empty")
    try:
        return _run_experiment_inner(config, run_dir, with_ablation,
                                     ablation_threshold_pp, ablation_decimals, n_jobs)
    except BaseException:
        if created_dir:
            shutil.rmtree(run_dir, ignore_errors=True)
        else:
            for child in run_dir.iterdir():
                if child.is_dir():
                    shutil.rmtree(child, ignore_errors=True)
                else:
                    child.unlink(missing_ok=True)
        raise


def _run_experiment_inner(config: ExperimentConfig, run_dir: Path,
                          with_ablation: bool, ablation_threshold_pp: float,
                          ablation_decimals: int, n_jobs: int) -> RunRecord:
    timings: dict[str, float] = {}
    prepared = _load_prepared(config, timings)
    classes = prepared.authors

    with _stage("split", timings):
        split = stratified_split(prepared, config.split_ratio, config.split_seed)
        fingerprint = split.fingerprint()
    with _stage("stopwords", timings):
        stopwords = load_stopwords(config.stopwords_path, config.analyzer)

    (run_dir / "config.json").write_text(
        json.dumps(config.to_dict(), ensure_ascii=False, indent=2), encoding="utf-8")
    (run_dir / "split.json").write_text(
        json.dumps(_split_payload(split, classes), ensure_ascii=False, indent=2),
        encoding="utf-8")

    y_train = split.train.label_array()
    y_test = split.test.label_array()

    with _stage("vectorize", timings):
        vectorizer = fit_vectorizer(split.train, config.analyzer, config.ngram_range)
        x_train = transform(vectorizer, split.train)
        x_test = transform(vectorizer, split.test)

    variants: dict[str, VariantResult] = {}
    reports = {}
    retained_state = None

    if "retained" in config.variants:
        with _stage("train-retained", timings):
            model = train_svm(x_train, y_train, config.svm, classes)
        with _stage("eval-retained", timings):
            cm, report = _evaluate(model, x_test, y_test, classes)
        variants["retained"] = _write_variant(run_dir, "retained", model,
                                              vectorizer, cm, report)
        reports["retained"] = report
        retained_state = (model, vectorizer, x_test)

    if "removed" in config.variants:
        with _stage("train-removed", timings):
            if config.removal_mode == "columns":
                r_vec = vectorizer
                xr_train = zero_columns(x_train, stopwords.projected, r_vec)
                xr_test = zero_columns(x_test, stopwords.projected, r_vec)
            else:
                train_texts = [remove_stopwords_from_text(d.text, stopwords)
                               for d in split.train.documents]
                test_texts = [remove_stopwords_from_text(d.text, stopwords)
                              for d in split.test.documents]
                r_vec = fit_vectorizer(train_texts, config.analyzer, config.ngram_range)
                xr_train = transform(r_vec, train_texts)
                xr_test = transform(r_vec, test_texts)
            r_model = train_svm(xr_train, y_train, config.svm, classes)
        with _stage("eval-removed", timings):
            r_cm, r_report = _evaluate(r_model, xr_test, y_test, classes)
        variants["removed"] = _write_variant(run_dir, "removed", r_model,
                                             r_vec, r_cm, r_report)
        reports["removed"] = r_report

    delta = None
    if "retained" in reports and "removed" in reports:
        delta = delta_f1(reports["removed"], reports["retained"])

    ablation_paths = None
    if with_ablation:
        if retained_state is None:
            raise ConfigError("ablation requires the retained variant")
        with _stage("ablation", timings):
            model, vec, x_eval = retained_state
            matrix = delta_recall_matrix(model, x_eval, y_test, stopwords,
                                         vec, n_jobs=n_jobs)
            ablation_paths = _write_ablation_artifacts(
                run_dir, matrix, ablation_threshold_pp, ablation_decimals,
                {"split_fingerprint": fingerprint})

    record = RunRecord(
        config=config.to_dict(),
        split_fingerprint=fingerprint,
        train_size=len(split.train.documents),
        test_size=len(split.test.documents),
        classes=classes,
        variants=variants,
        delta_f1=delta,
        ablation=ablation_paths,
        timings=timings,
    )
    save_run_record(record, run_dir / "run_record.json")
    return record


def materialize_split(config: ExperimentConfig) -> dict:
    """Produce the frozen split payload (fingerprint, seed, ratio, document
    ids per side) without training anything."""
    timings: dict[str, float] = {}
    prepared = _load_prepared(config, timings)
    with _stage("split", timings):
        split = stratified_split(prepared, config.split_ratio, config.split_seed)
    return _split_payload(split, prepared.authors)


# ---------------------------------------------------------------- ablation


def _load_split_payload(run_dir: Path) -> dict:
    p = run_dir / "split.json"
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read split file {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt split file {p}: {exc.msg}") from exc


def _subset_by_ids(prepared: Corpus, ids) -> Corpus:
    wanted = set(ids)
    docs = tuple(d for d in prepared.documents if d.id in wanted)
    if len(docs) != len(wanted):
        missing = sorted(wanted - {d.id for d in docs})[:3]
        raise DataError(f"split references unknown document ids, e.g. {missing}")
    return Corpus(documents=docs, authors=prepared.authors)


def run_ablation(run_dir: str | Path, threshold_pp: float = 0.5,
                 n_jobs: int = 1, decimals: int = 1) -> dict:
    """Frozen-model ablation over an existing run directory's retained
    variant. Writes the matrix and reports under <run_dir>/ablation and
    returns their paths; model and vectorizer files are never rewritten."""
    run_dir = Path(run_dir)
    record = load_run_record(run_dir / "run_record.json")
    if "retained" not in record.variants:
        raise DataError("run has no retained variant; ablation needs the "
                        "stop-words-retained model")
    config = ExperimentConfig.from_dict(record.config)
    timings: dict[str, float] = {}

    retained = record.variants["retained"]
    model = load_model(run_dir / retained.model_path)
    vectorizer = load_vectorizer(run_dir / retained.vectorizer_path)
    if tuple(model.classes) != tuple(record.classes):
        raise DataError("model classes do not match the run record")

    prepared = _load_prepared(config, timings)
    if prepared.authors != tuple(record.classes):
        raise DataError("dataset authors no longer match the recorded classes")
    split_payload = _load_split_payload(run_dir)
    test = _subset_by_ids(prepared, split_payload["test_ids"])
    y_test = test.label_array()

    stopwords = load_stopwords(config.stopwords_path, config.analyzer)
    x_test = transform(vectorizer, test)
    matrix = delta_recall_matrix(model, x_test, y_test, stopwords, vectorizer,
                                 n_jobs=n_jobs)
    return _write_ablation_artifacts(
        run_dir, matrix, threshold_pp, decimals,
        {"split_fingerprint": record.split_fingerprint})


def evaluate_run(run_dir: str | Path, variant: str = "retained"):
    """Re-score one variant of a finished run from its on-disk artifacts.

    Rebuilds the test matrix the same way the original run did (including
    column zeroing or text-level removal for the removed variant) and returns
    a fresh MetricsReport. Nothing in the run directory is modified.
    """
    run_dir = Path(run_dir)
    record = load_run_record(run_dir / "run_record.json")
    if variant not in record.variants:
        raise DataError(f"run has no {variant!r} variant "
                        f"(present: {', '.join(sorted(record.variants))})")
    config = ExperimentConfig.from_dict(record.config)
    result = record.variants[variant]
    model = load_model(run_dir / result.model_path)
    vectorizer = load_vectorizer(run_dir / result.vectorizer_path)

    timings: dict[str, float] = {}
    prepared = _load_prepared(config, timings)
    if prepared.authors != tuple(record.classes):
        raise DataError("dataset authors no longer match the recorded classes")
    split_payload = _load_split_payload(run_dir)
    test = _subset_by_ids(prepared, split_payload["test_ids"])
    y_test = test.label_array()

    if variant == "removed":
        stopwords = load_stopwords(config.stopwords_path, config.analyzer)
        if config.removal_mode == "columns":
            x_test = zero_columns(transform(vectorizer, test),
                                  stopwords.projected, vectorizer)
        else:
            texts = [remove_stopwords_from_text(d.text, stopwords)
                     for d in test.documents]
            x_test = transform(vectorizer, texts)
    else:
        x_test = transform(vectorizer, test)
    _, report = _evaluate(model, x_test, y_test, tuple(record.classes))
    return report


# ------------------------------------------------------------------ report


def _read_metrics_payload(run_dir: Path, rel_path: str) -> dict:
    p = run_dir / rel_path
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read metrics file {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt metrics file {p}: {exc.msg}") from exc


def render_report(run_dir: str | Path) -> str:
    """Markdown summary of a finished run: variant results, the macro-F1
    change from stop-word removal, and ablation highlights when present."""
    run_dir = Path(run_dir)
    record = load_run_record(run_dir / "run_record.json")
    lines = ["# Experiment report", ""]
    lines.append(
        f"{len(record.classes)} authors; {record.train_size} training and "
        f"{record.test_size} test documents; split fingerprint "
        f"`{record.split_fingerprint[:12]}`.")
    lines.append("")
    lines.append("## Test-set results")
    lines.append("")
    lines.append("| Variant | Accuracy | Macro precision | Macro recall | Macro F1 |")
    lines.append("| --- | --- | --- | --- | --- |")
    for name in VARIANTS:
        if name not in record.variants:
            continue
        m = _read_metrics_payload(run_dir, record.variants[name].metrics_path)
        lines.append(
            f"| stop-words {name} | {m['accuracy']:.3f} | {m['macro_precision']:.3f} "
            f"| {m['macro_recall']:.3f} | {m['macro_f1']:.3f} |")
    if record.delta_f1 is not None:
        lines.append("")
        lines.append(
            f"Macro-F1 change from removal (removed minus retained): "
            f"{record.delta_f1:+.3f}. A negative value favours retaining "
            f"stop-words.")
    if record.ablation is not None:
        lines.append("")
        lines.append("## Frozen-model stop-word ablation")
        lines.append("")
        extremes_md = (run_dir / record.ablation["extremes_md"]).read_text(
            encoding="utf-8")
        lines.append(extremes_md.rstrip())
        dist = json.loads(
            (run_dir / record.ablation["distribution"]).read_text(encoding="utf-8"))
        lines.append("")
        lines.append(
            f"Sign shares over {dist['n_pairs']} token-author pairs: "
            f"{100.0 * dist['positive_share']:.1f}% positive, "
            f"{100.0 * dist['negative_share']:.1f}% negative, "
            f"{100.0 * dist['zero_share']:.1f}% zero.")
        if dist.get("median_pp") is not None:
            lines.append(
                f"Non-zero |delta| in pp: median {dist['median_pp']:.2f}, "
                f"quartiles {dist['q1_pp']:.2f} to {dist['q3_pp']:.2f}, "
                f"{len(dist['outliers_pp'])} outliers beyond 1.5 IQR.")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------- stats


def emit_stats(config: ExperimentConfig) -> CorpusStats:
    """Per-author sample, word, and stop-word statistics written as CSV,
    JSON, and Markdown into config.output_dir."""
    corpus = load_corpus(config.dataset_path, config.dataset_format)
    if config.segment_words is not None:
        corpus = segment_documents(corpus, config.segment_words)
    stopwords = load_stopwords(config.stopwords_path, config.analyzer)
    stats = corpus_stats(corpus, stopwords)

    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "stats.csv").write_text(stats_to_csv(stats), encoding="utf-8")
    (out / "stats.json").write_text(stats_to_json(stats), encoding="utf-8")
    (out / "stats.md").write_text(stats_to_markdown(stats), encoding="utf-8")
    return stats


def stats_to_csv(stats: CorpusStats) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["author_id", "author", "samples", "total_words",
                     "stopword_count", "stopword_pct"])
    for i, row in enumerate(stats.per_author):
        writer.writerow([f"A{i}", row.author, row.sample_count, row.total_words,
                         row.stopword_count, repr(row.stopword_pct)])
    return out.getvalue()


def stats_to_json(stats: CorpusStats) -> str:
    payload = {
        "per_author": [
            {
                "author_id": f"A{i}",
                "author": row.author,
                "samples": row.sample_count,
                "total_words": row.total_words,
                "stopword_count": row.stopword_count,
                "stopword_pct": row.stopword_pct,
            }
            for i, row in enumerate(stats.per_author)
        ],
        "mean_samples_per_author": stats.mean_samples_per_author,
    }
    return json.dumps(payload, ensure_ascii=False, indent=2)


def stats_to_markdown(stats: CorpusStats) -> str:
    lines = [
        "| Author ID | Author | Samples | Total words | Stop-word tokens | Stop-word % |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for i, row in enumerate(stats.per_author):
        lines.append(
            f"| A{i} | {row.author} | {row.sample_count} | {row.total_words} "
            f"| {row.stopword_count} | {row.stopword_pct:.1f} |")
    lines.append("")
    lines.append(f"Corpus mean: {stats.mean_samples_per_author:.1f} samples per author.")
    return "\n".join(lines) + "\n"
