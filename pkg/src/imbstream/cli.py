"""Command-line entry point: dataset validation/conversion and the stream
experiment grid.

``imbstream run --config cfg.txt`` executes the full grid described by a flat
key=value config file and writes per-run rows, per-cell mean/std summaries,
and per-(ratio, labeling) significance blocks.  Output is byte-identical
across re-runs of the same config (timings are deliberately excluded).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import statistics
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

from .core import ConfigurationError, ValidationError
from .harness import DatasetError, StreamResult, load_csv, run_grid
from .metrics import tukey_hsd
from .tree import TreeConfig
from . import ALGORITHMS, make_tree_config

__all__ = ["ExperimentConfig", "parse_config", "main"]

THREADS_ENV = "IMBSTREAM_THREADS"

METRIC_NAMES = ("recall", "fpr", "gmean", "fscore", "precision")


@dataclass
class ExperimentConfig:
    dataset_path: str = ""
    algorithms: list[str] = field(default_factory=lambda: list(ALGORITHMS))
    ratios: list[int] = field(default_factory=lambda: [10, 100, 1000, 10000])
    labelings: list[float] = field(default_factory=lambda: [0.1, 0.5, 0.75, 1.0])
    repeats: int = 10
    seed: int = 0
    delta: float = 1e-7
    tau: float = 0.05
    bins: int = 10
    grace_period: int = 200
    pretrain_pos: int = 200
    pretrain_neg: int = 1000
    alpha: float = 0.01
    max_eval_positives: Optional[int] = None
    shuffle: bool = True
    output_path: Optional[str] = None
    output_format: str = "csv"

    def tree_configs(self) -> dict[str, TreeConfig]:
        return {
            name: make_tree_config(name, delta=self.delta, tau=self.tau,
                                   bins=self.bins, grace_period=self.grace_period)
            for name in self.algorithms
        }


_PARSERS = {
    "dataset_path": str,
    "algorithms": lambda v: [s.strip() for s in v.split(",") if s.strip()],
    "ratios": lambda v: [int(s) for s in v.split(",")],
    "labelings": lambda v: [float(s) for s in v.split(",")],
    "repeats": int,
    "seed": int,
    "delta": float,
    "tau": float,
    "bins": int,
    "grace_period": int,
    "pretrain_pos": int,
    "pretrain_neg": int,
    "alpha": float,
    "max_eval_positives": lambda v: None if v.lower() == "none" else int(v),
    "shuffle": lambda v: v.lower() in ("1", "true", "yes"),
    "output_path": str,
    "output_format": str,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat ``key = value`` config format.  Unknown keys and
    unparsable values are collected and reported together."""
    config = ExperimentConfig()
    problems = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value'")
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        parser = _PARSERS.get(key)
        if parser is None:
            problems.append(f"line {lineno}: unknown key {key!r}")
            continue
        try:
            setattr(config, key, parser(value))
        except ValueError:
            problems.append(f"line {lineno}: bad value for {key!r}: {value!r}")
    unknown_algorithms = [a for a in config.algorithms if a not in ALGORITHMS]
    if unknown_algorithms:
        problems.append(f"unknown algorithms: {unknown_algorithms} "
                        f"(choose from {sorted(ALGORITHMS)})")
    if not config.dataset_path:
        problems.append("missing required key 'dataset_path'")
    if config.output_format not in ("csv", "json"):
        problems.append(f"output_format must be csv or json, "
                        f"got {config.output_format!r}")
    if problems:
        raise ConfigurationError("config errors:\n  " + "\n  ".join(problems))
    return config


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _summaries(results: list[StreamResult]) -> list[dict]:
    cells: dict[tuple, list[StreamResult]] = {}
    for res in results:
        key = (res.algorithm, res.imbalance_ratio, res.labeling_fraction)
        cells.setdefault(key, []).append(res)
    out = []
    for (alg, ratio, labeling), group in sorted(
            cells.items(), key=lambda kv: (kv[0][1], kv[0][2], kv[0][0])):
        ok = [g for g in group if g.metrics is not None]
        row = {"algorithm": alg, "ratio": ratio, "labeling": labeling,
               "repeats": len(group), "failed": len(group) - len(ok)}
        for m in METRIC_NAMES:
            values = [getattr(g.metrics, m) for g in ok]
            row[f"mean_{m}"] = statistics.fmean(values) if values else None
            row[f"std_{m}"] = (statistics.pstdev(values)
                               if len(values) > 1 else 0.0 if values else None)
        out.append(row)
    return out


def _significance(results: list[StreamResult], alpha: float) -> list[dict]:
    """Per (ratio, labeling): ANOVA + Tukey over the paired per-repeat
    G-Mean vectors, one group per algorithm."""
    cells: dict[tuple, dict[str, list[float]]] = {}
    for res in results:
        if res.metrics is None:
            continue
        key = (res.imbalance_ratio, res.labeling_fraction)
        cells.setdefault(key, {}).setdefault(res.algorithm, []).append(
            res.metrics.gmean)
    out = []
    for (ratio, labeling), groups in sorted(cells.items()):
        names = sorted(groups)
        vectors = [groups[n] for n in names]
        if len(names) < 2 or any(len(v) < 2 for v in vectors):
            continue
        report = tukey_hsd(vectors, alpha, labels=names)
        out.append({
            "ratio": ratio,
            "labeling": labeling,
            "metric": "gmean",
            "f_statistic": report.f_statistic,
            "p_value": report.p_value,
            "alpha": report.alpha,
            "q_critical": report.q_critical,
            "pairwise": [
                {"pair": list(p.pair),
                 "mean_difference": p.mean_difference,
                 "significant": p.significant}
                for p in report.pairwise
            ],
        })
    return out


CSV_COLUMNS = [
    "kind", "algorithm", "ratio", "labeling", "repeat", "seed",
    "tp", "fp", "tn", "fn", "splits", "instances",
    "recall", "fpr", "gmean", "fscore", "precision",
    "recall_std", "fpr_std", "gmean_std", "fscore_std", "precision_std",
    "pair", "mean_difference", "f_statistic", "p_value", "q_critical",
    "significant", "error",
]


def _render_csv(config: ExperimentConfig, results: list[StreamResult],
                summaries: list[dict], significance: list[dict]) -> str:
    buf = io.StringIO()
    for f in fields(ExperimentConfig):
        if f.name == "output_path":  # not needed to reproduce a cell
            continue
        value = getattr(config, f.name)
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        buf.write(f"# {f.name} = {value}\n")
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()

    def emit(row: dict) -> None:
        writer.writerow({k: _fmt(row.get(k)) for k in CSV_COLUMNS})

    for res in results:
        row = {"kind": "run", "algorithm": res.algorithm,
               "ratio": res.imbalance_ratio, "labeling": res.labeling_fraction,
               "repeat": res.repeat, "seed": res.seed, "error": res.error}
        if res.result is not None:
            row.update(tp=res.result.tp, fp=res.result.fp, tn=res.result.tn,
                       fn=res.result.fn, splits=res.result.splits,
                       instances=res.result.instances_processed)
        if res.metrics is not None:
            row.update({m: getattr(res.metrics, m) for m in METRIC_NAMES})
        emit(row)
    for s in summaries:
        row = {"kind": "summary", "algorithm": s["algorithm"],
               "ratio": s["ratio"], "labeling": s["labeling"]}
        for m in METRIC_NAMES:
            row[m] = s[f"mean_{m}"]
            row[f"{m}_std"] = s[f"std_{m}"]
        emit(row)
    for block in significance:
        base = {"kind": "anova", "ratio": block["ratio"],
                "labeling": block["labeling"],
                "f_statistic": block["f_statistic"],
                "p_value": block["p_value"],
                "q_critical": block["q_critical"]}
        emit(base)
        for p in block["pairwise"]:
            emit({"kind": "tukey", "ratio": block["ratio"],
                  "labeling": block["labeling"],
                  "pair": " vs ".join(p["pair"]),
                  "mean_difference": p["mean_difference"],
                  "significant": p["significant"]})
    return buf.getvalue()


def _render_json(config: ExperimentConfig, results: list[StreamResult],
                 summaries: list[dict], significance: list[dict]) -> str:
    doc = {
        "config": {f.name: getattr(config, f.name)
                   for f in fields(ExperimentConfig)
                   if f.name != "output_path"},
        "runs": [
            {
                "algorithm": r.algorithm,
                "ratio": r.imbalance_ratio,
                "labeling": r.labeling_fraction,
                "repeat": r.repeat,
                "seed": r.seed,
                "confusion": None if r.result is None else {
                    "tp": r.result.tp, "fp": r.result.fp,
                    "tn": r.result.tn, "fn": r.result.fn,
                },
                "splits": None if r.result is None else r.result.splits,
                "instances": (None if r.result is None
                              else r.result.instances_processed),
                "metrics": None if r.metrics is None else {
                    m: getattr(r.metrics, m) for m in METRIC_NAMES},
                "error": r.error,
            }
            for r in results
        ],
        "summaries": summaries,
        "significance": significance,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(int(env), 1)
        except ValueError:
            pass
    return os.cpu_count() or 1


def cmd_run(args) -> int:
    try:
        config = parse_config(Path(args.config).read_text())
    except OSError as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return 2
    except ConfigurationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.output:
        config.output_path = args.output
    if args.format:
        config.output_format = args.format
    try:
        dataset = load_csv(config.dataset_path)
    except DatasetError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    threads = args.threads if args.threads else _default_threads()
    results = run_grid(
        dataset, config.tree_configs(), config.ratios, config.labelings,
        config.repeats, base_seed=config.seed,
        pretrain_pos=config.pretrain_pos, pretrain_neg=config.pretrain_neg,
        max_eval_positives=config.max_eval_positives, shuffle=config.shuffle,
        n_jobs=threads)
    summaries = _summaries(results)
    significance = _significance(results, config.alpha)
    if config.output_format == "json":
        text = _render_json(config, results, summaries, significance)
    else:
        text = _render_csv(config, results, summaries, significance)
    if config.output_path:
        target = Path(config.output_path)
        tmp = target.with_suffix(target.suffix + ".tmp")
        tmp.write_text(text)
        os.replace(tmp, target)
    else:
        sys.stdout.write(text)
    failed = sum(1 for r in results if r.error is not None)
    if failed:
        print(f"warning: {failed} of {len(results)} cells failed",
              file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    path = Path(args.dataset)
    try:
        fh = path.open(newline="")
    except OSError as e:
        print(f"error: cannot read dataset {path}: {e}", file=sys.stderr)
        return 1
    n_rows = 0
    n_pos = n_neg = n_other = 0
    non_finite: list[int] = []
    malformed: list[int] = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            print(f"{path}: empty file (no header row)")
            return 0
        width = len(header)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            n_rows += 1
            if len(row) != width:
                malformed.append(lineno)
                continue
            try:
                values = [float(v) for v in row]
            except ValueError:
                malformed.append(lineno)
                continue
            if not all(math.isfinite(v) for v in values):
                non_finite.append(lineno)
            label = values[-1]
            if label == 1:
                n_pos += 1
            elif label in (-1, 0):
                n_neg += 1
            else:
                n_other += 1
    print(f"dataset: {path}")
    print(f"rows: {n_rows}")
    print(f"features: {width - 1}")
    print(f"positives: {n_pos}")
    print(f"negatives: {n_neg}")
    if n_other:
        print(f"rows with labels outside {{-1,0,1}}: {n_other}")
    avail_pos = n_pos - args.pretrain_pos
    avail_neg = n_neg - args.pretrain_neg
    if avail_pos >= 1 and avail_neg >= 1:
        print(f"max imbalance ratio with pre-training reserve "
              f"({args.pretrain_pos}+/{args.pretrain_neg}-): +1:-{avail_neg}")
        for r in (10, 100, 1000, 10000):
            n_eval_pos = min(avail_pos, avail_neg // r)
            status = (f"achievable ({n_eval_pos} positives, "
                      f"{n_eval_pos * r} negatives)"
                      if n_eval_pos >= 1 else "NOT achievable")
            print(f"ratio +1:-{r}: {status}")
    else:
        print("insufficient data for the pre-training reserve "
              f"({args.pretrain_pos}+/{args.pretrain_neg}-)")
    if non_finite:
        shown = ", ".join(str(l) for l in non_finite[:20])
        more = "" if len(non_finite) <= 20 else f" (+{len(non_finite) - 20} more)"
        print(f"warning: non-finite values on lines: {shown}{more}")
    if malformed:
        shown = ", ".join(str(l) for l in malformed[:20])
        more = "" if len(malformed) <= 20 else f" (+{len(malformed) - 20} more)"
        print(f"warning: malformed rows on lines: {shown}{more}")
    if n_rows == 0:
        print("warning: dataset contains no data rows")
    return 0


def cmd_convert(args) -> int:
    src = Path(args.dataset)
    dst = Path(args.output) if args.output else src.with_suffix(".binary.csv")
    try:
        fh = src.open(newline="")
    except OSError as e:
        print(f"error: cannot read dataset {src}: {e}", file=sys.stderr)
        return 1
    minority = args.minority_class
    n_pos = n_neg = 0
    rows_out = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            print(f"error: {src}: empty file", file=sys.stderr)
            return 1
        out_header = header[:-1] + ["label"]
        for row in reader:
            if not row:
                continue
            if row[-1].strip() == minority:
                rows_out.append(row[:-1] + ["1"])
                n_pos += 1
            else:
                rows_out.append(row[:-1] + ["-1"])
                n_neg += 1
    if n_pos == 0:
        print(f"error: no rows matched minority class {minority!r}",
              file=sys.stderr)
        return 1
    with dst.open("w", newline="") as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(out_header)
        writer.writerows(rows_out)
    print(f"wrote {dst}: {n_pos} positives, {n_neg} negatives")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imbstream",
        description="Streamed decision-tree experiments on imbalanced data")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment grid")
    run.add_argument("--config", required=True, help="flat key=value config file")
    run.add_argument("--threads", type=int, default=0,
                     help=f"parallel grid cells (default: ${THREADS_ENV} "
                          "or machine core count)")
    run.add_argument("--output", help="output file (default: from config/stdout)")
    run.add_argument("--format", choices=("csv", "json"))
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="inspect a dataset CSV")
    val.add_argument("dataset")
    val.add_argument("--pretrain-pos", type=int, default=200, dest="pretrain_pos")
    val.add_argument("--pretrain-neg", type=int, default=1000, dest="pretrain_neg")
    val.set_defaults(func=cmd_validate)

    conv = sub.add_parser(
        "convert", help="binarize a multi-class CSV (smallest class = +1)")
    conv.add_argument("dataset")
    conv.add_argument("--minority-class", required=True, dest="minority_class",
                      help="label value to map to the positive class")
    conv.add_argument("--output")
    conv.set_defaults(func=cmd_convert)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
