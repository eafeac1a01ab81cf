"""Command-line front end.

Every subcommand is a thin wrapper over the library: configuration comes
from one JSON file, any flag given explicitly overrides the corresponding
file entry, and failures map to stable exit codes (1 configuration, 2 data,
3 numerics). The --jobs flag only adds threads inside the ablation sweep and
can never change what gets written.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import CORPUS_FORMATS
from .errors import ConfigError, DataError, NumericError
from .experiment import (
    REMOVAL_MODES,
    VARIANTS,
    ExperimentConfig,
    emit_stats,
    evaluate_run,
    load_run_record,
    materialize_split,
    render_report,
    run_ablation,
    run_experiment,
)
from .metrics import metrics_to_json
from .svm import SVM_SCHEMES
from .textprep import ANALYZER_MODES

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; route through the shared
    # error taxonomy instead so usage mistakes land on the config exit code.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _read_json_object(path: str) -> dict:
    p = Path(path)
    try:
        payload = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid JSON: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"config file {p} must hold a JSON object")
    return payload


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="JSON config file")
    parser.add_argument("--dataset", metavar="PATH", help="corpus location")
    parser.add_argument("--dataset-format", choices=CORPUS_FORMATS)
    parser.add_argument("--stopwords", metavar="FILE", help="one token per line")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--segment-words", type=int, metavar="N",
                        help="resegment documents to N-word chunks before splitting")
    parser.add_argument("--split-ratio", type=float, metavar="R")
    parser.add_argument("--split-seed", type=int, metavar="N")
    parser.add_argument("--ngram", type=int, nargs=2, metavar=("LO", "HI"))
    parser.add_argument("--variants", nargs="+", choices=VARIANTS)
    parser.add_argument("--removal-mode", choices=REMOVAL_MODES)
    parser.add_argument("--analyzer-mode", choices=ANALYZER_MODES)
    parser.add_argument("--min-token-len", type=int, metavar="N")
    parser.add_argument("--svm-c", type=float, metavar="C")
    parser.add_argument("--svm-tol", type=float, metavar="TOL")
    parser.add_argument("--svm-max-iter", type=int, metavar="N")
    parser.add_argument("--svm-scheme", choices=SVM_SCHEMES)
    parser.add_argument("--svm-seed", type=int, metavar="N")


_TOP_LEVEL_FLAGS = {
    "dataset": "dataset_path",
    "dataset_format": "dataset_format",
    "stopwords": "stopwords_path",
    "out": "output_dir",
    "segment_words": "segment_words",
    "split_ratio": "split_ratio",
    "split_seed": "split_seed",
    "ngram": "ngram_range",
    "variants": "variants",
    "removal_mode": "removal_mode",
}
_ANALYZER_FLAGS = {"analyzer_mode": "mode", "min_token_len": "min_token_len"}
_SVM_FLAGS = {"svm_c": "C", "svm_tol": "tol", "svm_max_iter": "max_iter",
              "svm_scheme": "scheme", "svm_seed": "seed"}


def _config_from_args(args) -> ExperimentConfig:
    payload = _read_json_object(args.config) if args.config else {}
    for flag, key in _TOP_LEVEL_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            payload[key] = value
    for flags, key in ((_ANALYZER_FLAGS, "analyzer"), (_SVM_FLAGS, "svm")):
        overrides = {dest: getattr(args, flag)
                     for flag, dest in flags.items()
                     if getattr(args, flag) is not None}
        if overrides:
            sub = payload.get(key)
            sub = dict(sub) if isinstance(sub, dict) else {}
            sub.update(overrides)
            payload[key] = sub
    return ExperimentConfig.from_dict(payload)


# ------------------------------------------------------------- subcommands


def _cmd_stats(args) -> int:
    config = _config_from_args(args)
    stats = emit_stats(config)
    for i, row in enumerate(stats.per_author):
        print(f"A{i} {row.author}: {row.sample_count} samples, "
              f"{row.total_words} words, stop-word share {row.stopword_pct:.1f}%")
    print(f"mean samples per author: {stats.mean_samples_per_author:.1f}")
    print(f"written: {config.output_dir}/stats.csv, stats.json, stats.md")
    return EXIT_OK


def _cmd_split(args) -> int:
    config = _config_from_args(args)
    payload = materialize_split(config)
    out = Path(config.output_dir)
    target = out / "split.json"
    if target.exists():
        raise ConfigError(f"{target} already exists; refusing to overwrite a frozen split")
    out.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(payload, ensure_ascii=False, indent=2),
                      encoding="utf-8")
    print(f"split fingerprint: {payload['fingerprint']}")
    print(f"train {len(payload['train_ids'])} / test {len(payload['test_ids'])} "
          f"documents over {len(payload['classes'])} authors")
    print(f"written: {target}")
    return EXIT_OK


def _print_record_summary(record, run_dir: str) -> None:
    print(f"run directory: {run_dir}")
    print(f"split fingerprint: {record.split_fingerprint}")
    for name in VARIANTS:
        if name in record.variants:
            v = record.variants[name]
            print(f"{name}: accuracy {v.accuracy:.4f}, macro F1 {v.macro_f1:.4f}")
    if record.delta_f1 is not None:
        print(f"delta macro F1 (removed minus retained): {record.delta_f1:+.4f}")
    print(f"record digest: {record.digest()}")


def _cmd_train(args) -> int:
    config = _config_from_args(args)
    if args.variant != "both":
        config = ExperimentConfig.from_dict(
            {**config.to_dict(), "variants": [args.variant]})
    record = run_experiment(config)
    _print_record_summary(record, config.output_dir)
    return EXIT_OK


def _cmd_eval(args) -> int:
    report = evaluate_run(args.run_dir, args.variant)
    record = load_run_record(Path(args.run_dir) / "run_record.json")
    print(f"variant: {args.variant}")
    print(f"accuracy: {report.accuracy:.4f}")
    print(f"macro precision/recall/F1: {report.macro_precision:.4f} "
          f"{report.macro_recall:.4f} {report.macro_f1:.4f}")
    for pc in report.per_class:
        print(f"  {pc.label}: precision {pc.precision:.4f}, recall {pc.recall:.4f}, "
              f"f1 {pc.f1:.4f}, support {pc.support}")
    stored = (Path(args.run_dir)
              / record.variants[args.variant].metrics_path).read_text(encoding="utf-8")
    fresh = metrics_to_json(report)
    print(f"matches stored metrics: {'yes' if fresh == stored else 'NO'}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    config = _config_from_args(args)
    record = run_experiment(config, with_ablation=args.with_ablation,
                            ablation_threshold_pp=args.threshold_pp,
                            ablation_decimals=args.decimals, n_jobs=args.jobs)
    _print_record_summary(record, config.output_dir)
    if record.ablation is not None:
        print(f"ablation artifacts: {config.output_dir}/ablation")
    return EXIT_OK


def _cmd_ablate(args) -> int:
    paths = run_ablation(args.run_dir, threshold_pp=args.threshold_pp,
                         n_jobs=args.jobs, decimals=args.decimals)
    for key in ("delta_matrix", "extremes", "extremes_md", "distribution", "record"):
        print(f"{key}: {Path(args.run_dir) / paths[key]}")
    return EXIT_OK


def _cmd_report(args) -> int:
    text = render_report(args.run_dir)
    out = Path(args.out) if args.out else Path(args.run_dir) / "report.md"
    out.write_text(text, encoding="utf-8")
    print(text, end="")
    print(f"written: {out}", file=sys.stderr)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="banglastylo",
                     description="Authorship attribution experiments with "
                                 "controlled stop-word preprocessing")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stats", help="per-author corpus statistics")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("split", help="materialize the frozen stratified split")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train", help="train and evaluate selected variants")
    _add_config_flags(p)
    p.add_argument("--variant", choices=(*VARIANTS, "both"), default="both")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="re-score a finished run from its artifacts")
    p.add_argument("--run-dir", required=True, metavar="DIR")
    p.add_argument("--variant", choices=VARIANTS, default="retained")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("experiment",
                       help="full pipeline: both variants on one frozen split")
    _add_config_flags(p)
    p.add_argument("--with-ablation", action="store_true",
                   help="run the frozen-model stop-word sweep afterwards")
    p.add_argument("--threshold-pp", type=float, default=0.5,
                   help="extremes report threshold in percentage points")
    p.add_argument("--decimals", type=int, default=1,
                   help="decimals in the extremes Markdown table")
    p.add_argument("--jobs", type=int, default=1,
                   help="ablation sweep threads; outputs do not depend on it")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("ablate", help="frozen-model sweep over a finished run")
    p.add_argument("--run-dir", required=True, metavar="DIR")
    p.add_argument("--threshold-pp", type=float, default=0.5)
    p.add_argument("--decimals", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("report", help="render a Markdown summary of a run")
    p.add_argument("--run-dir", required=True, metavar="DIR")
    p.add_argument("--out", metavar="FILE",
                   help="target path (default: <run-dir>/report.md)")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
