"""Command-line pipeline: ingest/synth -> windows -> split -> predictions ->
overlap, confusion, histogram, mask, plots, and a bundled report.

Every command reads its declared inputs from the run directory (or explicit
paths), writes its artifacts there, and records their SHA-256 hashes in
manifest.json. Partial outputs are removed when a command fails.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import confusion as conf
from . import ifc as ifc_mod
from . import mask as mask_mod
from . import svgplot
from .baseline import TrainConfig
from .pipeline import audit_records, baseline_prediction_records
from .predictions import (
    MERGE_POLICIES,
    best_hyperparams,
    filter_to_configs,
    merge_runs,
    model_metrics,
    read_records,
    write_records,
)
from .recordings import corpus_num_classes, parse_canonical, write_canonical
from .splits import group_k_fold, read_plan, write_plan
from .synth import default_scenario, generate_corpus, load_scenario, save_scenario
from .windowing import WindowConfig, slice_corpus

OUT_ENV = "HAR_AUDIT_OUT"


class CommandError(Exception):
    """User-facing failure: message printed to stderr, nonzero exit."""


class RunDir:
    """Tracks artifacts a command writes so failures leave no partial files."""

    def __init__(self, out: Path):
        self.out = out
        self.written: list[Path] = []

    def file(self, name: str) -> Path:
        path = self.out / name
        self.written.append(path)
        return path

    def need(self, name: str) -> Path:
        path = self.out / name
        if not path.exists():
            raise CommandError(f"missing input {path}; run the producing command first")
        return path

    def cleanup(self) -> None:
        for path in self.written:
            if path.exists():
                path.unlink()

    def update_manifest(self) -> None:
        manifest_path = self.out / "manifest.json"
        manifest = {"artifacts": {}}
        if manifest_path.exists():
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        for path in self.written:
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            manifest["artifacts"][path.name] = digest
        manifest["artifacts"] = dict(sorted(manifest["artifacts"].items()))
        manifest_path.write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise CommandError(f"config file {p} does not exist")
    try:
        cfg = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CommandError(f"config file {p} is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise CommandError(f"config file {p} must hold a JSON object")
    return cfg


def _opt(args, cfg: dict, key: str, default):
    """Command line beats config file beats built-in default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in cfg:
        return cfg[key]
    return default


def _resolve_out(args, cfg: dict) -> Path:
    out = _opt(args, cfg, "out", None) or os.environ.get(OUT_ENV)
    if not out:
        raise CommandError(f"no output directory: pass --out or set {OUT_ENV}")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------- artifacts

def _read_windows_csv(path: Path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = [
            "window_id", "start_sample", "end_sample", "label",
            "group_key", "recording_index", "transition",
        ]
        if header != expected:
            raise CommandError(f"{path} header mismatch: {header}")
        bounds, labels, groups, rec_idx = [], [], [], []
        for row in reader:
            bounds.append((int(row[1]), int(row[2])))
            labels.append(int(row[3]))
            groups.append(row[4])
            rec_idx.append(int(row[5]))
    return (
        np.asarray(bounds, dtype=int),
        np.asarray(labels, dtype=int),
        groups,
        np.asarray(rec_idx, dtype=int),
    )


def _read_meta(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def _rebuild_dataset(run: RunDir):
    """Re-slice the canonical recordings with the recorded window config."""
    meta = _read_meta(run.need("windows_meta.json"))
    recordings, _ = parse_canonical(
        run.need("recordings.csv"), sample_rate=meta["sample_rate"]
    )
    config = WindowConfig(
        size=meta["window_size"],
        stride=meta["stride"],
        label_policy=meta["label_policy"],
    )
    return slice_corpus(
        recordings, config, group_by=meta["group_by"], num_classes=meta["num_classes"]
    )


def _load_ifc_flags(run: RunDir) -> np.ndarray:
    path = run.need("ifc_windows.csv")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        flags = [bool(int(row[4])) for row in reader]
    return np.asarray(flags, dtype=bool)


def _load_records(run: RunDir):
    path = run.need("predictions.jsonl")
    bounds, labels, _, _ = _read_windows_csv(run.need("windows.csv"))
    meta = _read_meta(run.need("windows_meta.json"))
    records = read_records(
        path, valid_window_ids=range(len(labels)), num_classes=meta["num_classes"]
    )
    if not records:
        raise CommandError(f"{path} holds no prediction records")
    return records, bounds, labels, meta


def _fused_for_mask(run: RunDir, flags: np.ndarray):
    """Reuse fused.jsonl when the confusion stage ran, else recompute."""
    fused_path = run.out / "fused.jsonl"
    if fused_path.exists():
        return conf.read_fused_jsonl(fused_path)
    records, _, _, _ = _load_records(run)
    chosen = best_hyperparams(records)
    filtered = filter_to_configs(records, chosen)
    return conf.fuse_probabilities(filtered, [int(w) for w in np.flatnonzero(flags)])


# ----------------------------------------------------------------- commands

def cmd_ingest(args, cfg: dict, run: RunDir) -> None:
    source = _opt(args, cfg, "recordings", None)
    if not source:
        raise CommandError("ingest needs --recordings <csv>")
    if not Path(source).exists():
        raise CommandError(f"recordings file {source} does not exist")
    sample_rate = float(_opt(args, cfg, "sample_rate", 100.0))
    recordings, repaired = parse_canonical(source, sample_rate=sample_rate)
    num_classes = corpus_num_classes(recordings)
    write_canonical(recordings, run.file("recordings.csv"))
    _write_json(
        run.file("ingest.json"),
        {
            "num_recordings": len(recordings),
            "num_samples": int(sum(r.num_samples for r in recordings)),
            "num_classes": num_classes,
            "repaired_cells": repaired,
            "sample_rate": sample_rate,
        },
    )


def cmd_synth(args, cfg: dict, run: RunDir) -> None:
    scenario_path = _opt(args, cfg, "scenario", None)
    spec = load_scenario(scenario_path) if scenario_path else default_scenario()
    seed = _opt(args, cfg, "seed", None)
    if seed is not None:
        from dataclasses import replace

        spec = replace(spec, seed=int(seed))
    subjects = int(_opt(args, cfg, "subjects", 4))
    recordings, annotations = generate_corpus(spec, num_subjects=subjects)
    save_scenario(spec, run.file("scenario.json"))
    write_canonical(recordings, run.file("recordings.csv"))
    _write_json(
        run.file("injections.json"),
        [
            {
                "subject": rec.subject_id,
                "kind": span.kind,
                "start_sample": span.start_sample,
                "end_sample": span.end_sample,
            }
            for rec, spans in zip(recordings, annotations)
            for span in spans
        ],
    )


def cmd_windows(args, cfg: dict, run: RunDir) -> None:
    source = _opt(args, cfg, "recordings", None) or run.need("recordings.csv")
    sample_rate = float(_opt(args, cfg, "sample_rate", 100.0))
    recordings, _ = parse_canonical(source, sample_rate=sample_rate)
    config = WindowConfig(
        size=int(_opt(args, cfg, "window_size", 200)),
        stride=int(_opt(args, cfg, "stride", 100)),
        label_policy=_opt(args, cfg, "label_policy", "majority"),
    )
    group_by = _opt(args, cfg, "group_by", "subject")
    dataset = slice_corpus(recordings, config, group_by=group_by)
    with open(run.file("windows.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "window_id", "start_sample", "end_sample", "label",
                "group_key", "recording_index", "transition",
            ]
        )
        for w in dataset.windows:
            writer.writerow(
                [
                    w.window_id, w.start_sample, w.end_sample, w.label,
                    w.group_key, w.recording_index, int(w.transition),
                ]
            )
    _write_json(
        run.file("windows_meta.json"),
        {
            "num_windows": dataset.num_windows,
            "num_classes": dataset.num_classes,
            "total_samples": dataset.total_samples,
            "window_size": config.size,
            "stride": config.stride,
            "label_policy": config.label_policy,
            "group_by": group_by,
            "sample_rate": sample_rate,
            "recording_spans": [list(span) for span in dataset.recording_spans],
        },
    )


def cmd_split(args, cfg: dict, run: RunDir) -> None:
    _, _, groups, _ = _read_windows_csv(run.need("windows.csv"))
    max_k = int(_opt(args, cfg, "max_k", 10))
    group_windows: dict[str, list[int]] = {}
    for window_id, key in enumerate(groups):
        group_windows.setdefault(key, []).append(window_id)
    plan = group_k_fold(group_windows, max_k=max_k)
    write_plan(plan, run.file("splits.json"))


def cmd_train_baseline(args, cfg: dict, run: RunDir) -> None:
    dataset = _rebuild_dataset(run)
    plan = read_plan(run.need("splits.json"))
    config = TrainConfig(
        step_size=float(_opt(args, cfg, "step_size", 0.1)),
        epochs=int(_opt(args, cfg, "epochs", 200)),
        seed=int(_opt(args, cfg, "seed", 0)),
    )
    records = baseline_prediction_records(
        dataset,
        plan,
        dataset_id=_opt(args, cfg, "dataset_id", "dataset"),
        runs=int(_opt(args, cfg, "runs", 1)),
        config=config,
    )
    write_records(records, run.file("predictions.jsonl"))


def cmd_import_logs(args, cfg: dict, run: RunDir) -> None:
    logs = _opt(args, cfg, "logs", None)
    if not logs:
        raise CommandError("import-logs needs --logs <jsonl>")
    if not Path(logs).exists():
        raise CommandError(f"prediction log {logs} does not exist")
    _, labels, _, _ = _read_windows_csv(run.need("windows.csv"))
    meta = _read_meta(run.need("windows_meta.json"))
    records = read_records(
        logs, valid_window_ids=range(len(labels)), num_classes=meta["num_classes"]
    )
    write_records(records, run.file("predictions.jsonl"))


def cmd_ifc(args, cfg: dict, run: RunDir) -> None:
    records, bounds, labels, _ = _load_records(run)
    policy = _opt(args, cfg, "merge_policy", "majority")
    chosen = best_hyperparams(records)
    filtered = filter_to_configs(records, chosen)
    consolidated = merge_runs(filtered, policy=policy)
    matrix = ifc_mod.build_matrix(consolidated)
    summary = ifc_mod.compute_ifc(matrix, merge_policy=policy)
    order = summary.window_ids
    ifc_mod.write_ifc_windows_csv(
        summary, bounds[order], labels[order], run.file("ifc_windows.csv")
    )
    ifc_mod.write_ifc_summary_json(summary, run.file("ifc_summary.json"))


def cmd_histogram(args, cfg: dict, run: RunDir) -> None:
    flags = _load_ifc_flags(run)
    _, _, _, rec_idx = _read_windows_csv(run.need("windows.csv"))
    hist = ifc_mod.run_lengths(flags, rec_idx[: flags.size])
    ifc_mod.write_histogram_csv(hist, run.file("ifc_histogram.csv"))


def cmd_confusion(args, cfg: dict, run: RunDir) -> None:
    records, _, labels, meta = _load_records(run)
    flags = _load_ifc_flags(run)
    chosen = best_hyperparams(records)
    filtered = filter_to_configs(records, chosen)
    fused = conf.fuse_probabilities(
        filtered, [int(w) for w in np.flatnonzero(flags)]
    )
    table = conf.confusion_table(flags, labels, num_classes=meta["num_classes"])
    edges = conf.chord_edges(fused)
    names = [f"class_{c}" for c in range(meta["num_classes"])]
    conf.write_fused_jsonl(fused, run.file("fused.jsonl"))
    conf.write_confusion_csv(table, run.file("confusion_table.csv"))
    conf.write_chord_json(edges, names, run.file("chord.json"))


def cmd_mask(args, cfg: dict, run: RunDir) -> None:
    flags = _load_ifc_flags(run)
    bounds, _, _, _ = _read_windows_csv(run.need("windows.csv"))
    meta = _read_meta(run.need("windows_meta.json"))
    policy = _opt(args, cfg, "merge_policy", "majority")
    fused = _fused_for_mask(run, flags)
    mask = mask_mod.build_mask(
        flags, fused, bounds, meta["total_samples"], policy=policy
    )
    mask_mod.write_window_mask_csv(mask, bounds, run.file("mask_windows.csv"))
    mask_mod.write_sample_mask_csv(mask, run.file("mask_samples.csv"))
    mask_mod.write_mask_summary_json(mask, run.file("mask_summary.json"))


def cmd_plot(args, cfg: dict, run: RunDir) -> None:
    flags = _load_ifc_flags(run)
    dataset = _rebuild_dataset(run)
    if dataset.num_windows != flags.size:
        raise CommandError("window table and overlap flags are out of step")
    means = dataset.blocks.mean(axis=1)
    with open(run.file("condensed.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["window_id"]
            + [f"mean_ch{c}" for c in range(dataset.num_channels)]
            + ["ifc_flag"]
        )
        for w in range(dataset.num_windows):
            writer.writerow(
                [w] + [repr(float(v)) for v in means[w]] + [int(flags[w])]
            )
    run.file("condensed.svg").write_text(
        svgplot.condensed_view_svg(means, flags), encoding="utf-8"
    )
    _, _, _, rec_idx = _read_windows_csv(run.need("windows.csv"))
    hist = ifc_mod.run_lengths(flags, rec_idx[: flags.size])
    run.file("histogram.svg").write_text(
        svgplot.histogram_svg(hist.bins), encoding="utf-8"
    )
    fused = _fused_for_mask(run, flags)
    edges = conf.chord_edges(fused)
    names = [f"class_{c}" for c in range(dataset.num_classes)]
    run.file("chord.svg").write_text(
        svgplot.chord_svg(
            [(e.true_class, e.confused_class, e.weight) for e in edges], names
        ),
        encoding="utf-8",
    )
    # A figure is never the only record of its data.
    if not (run.out / "ifc_histogram.csv").exists():
        ifc_mod.write_histogram_csv(hist, run.file("ifc_histogram.csv"))
    if not (run.out / "chord.json").exists():
        conf.write_chord_json(edges, names, run.file("chord.json"))


def cmd_report(args, cfg: dict, run: RunDir) -> None:
    records, bounds, labels, meta = _load_records(run)
    policy = _opt(args, cfg, "merge_policy", "majority")
    result = audit_records(
        records,
        bounds,
        labels,
        meta["total_samples"],
        num_classes=meta["num_classes"],
        merge_policy=policy,
    )
    metrics = model_metrics(filter_to_configs(records, result.chosen_configs))
    payload = {
        "dataset_id": records[0].dataset_id,
        "merge_policy": policy,
        "num_windows": int(len(labels)),
        "num_classes": int(meta["num_classes"]),
        # With two classes the gap rule has a single gap, so every flagged
        # window is necessarily major.
        "two_class_major_only": int(meta["num_classes"]) == 2,
        "overlap": {
            "single_contributions": {
                m: v for m, v in sorted(result.ifc.single_contribution.items())
            },
            "common_ground": result.ifc.common_ground,
            "ifc": result.ifc.ifc,
        },
        "mask": result.mask.distribution,
        "confusion": [
            {
                "class_id": row.class_id,
                "name": row.name,
                "dist_pct": row.distribution_pct,
                "rel_pct": row.relative_pct,
                "abs_pct": row.absolute_pct,
            }
            for row in result.table
        ],
        "model_metrics": {
            f"{d}/{m}/{c}": {
                "accuracy_mean": v.accuracy_mean,
                "accuracy_std": v.accuracy_std,
                "weighted_f1_mean": v.weighted_f1_mean,
                "weighted_f1_std": v.weighted_f1_std,
                "num_runs": v.num_runs,
            }
            for (d, m, c), v in sorted(metrics.items())
        },
    }
    validate_report(payload)
    _write_json(run.file("report.json"), payload)


def validate_report(payload: dict) -> None:
    """Structural check of a report bundle; raises on schema mismatch."""
    required = {
        "dataset_id": str,
        "merge_policy": str,
        "num_windows": int,
        "overlap": dict,
        "mask": dict,
        "confusion": list,
        "model_metrics": dict,
    }
    for key, kind in required.items():
        if key not in payload or not isinstance(payload[key], kind):
            raise CommandError(f"report schema mismatch at {key!r}")
    for key in ("single_contributions", "common_ground", "ifc"):
        if key not in payload["overlap"]:
            raise CommandError(f"report schema mismatch at overlap.{key}")
    for key in ("clean_pct", "minor_pct", "major_pct"):
        if key not in payload["mask"]:
            raise CommandError(f"report schema mismatch at mask.{key}")


COMMANDS = {
    "ingest": cmd_ingest,
    "windows": cmd_windows,
    "split": cmd_split,
    "synth": cmd_synth,
    "train-baseline": cmd_train_baseline,
    "import-logs": cmd_import_logs,
    "ifc": cmd_ifc,
    "confusion": cmd_confusion,
    "histogram": cmd_histogram,
    "mask": cmd_mask,
    "plot": cmd_plot,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="haraudit",
        description="Audit windowed time-series classification benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, *flags) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with flag defaults")
        p.add_argument("--out", help=f"run directory (fallback: ${OUT_ENV})")
        for flag, kwargs in flags:
            p.add_argument(flag, **kwargs)
        return p

    intf = {"type": int}
    floatf = {"type": float}
    add("ingest", "parse recordings into the run directory",
        ("--recordings", {}), ("--sample-rate", dict(floatf, dest="sample_rate")))
    add("synth", "generate a synthetic corpus",
        ("--scenario", {}), ("--subjects", dict(intf)), ("--seed", dict(intf)))
    add("windows", "slice recordings into labelled windows",
        ("--recordings", {}), ("--window-size", dict(intf, dest="window_size")),
        ("--stride", dict(intf)), ("--label-policy", {"dest": "label_policy"}),
        ("--group-by", {"dest": "group_by", "choices": ["subject", "subject_session"]}),
        ("--sample-rate", dict(floatf, dest="sample_rate")))
    add("split", "plan grouped cross-validation folds",
        ("--max-k", dict(intf, dest="max_k")))
    add("train-baseline", "train the reference classifier per fold",
        ("--runs", dict(intf)), ("--step-size", dict(floatf, dest="step_size")),
        ("--epochs", dict(intf)), ("--seed", dict(intf)),
        ("--dataset-id", {"dest": "dataset_id"}))
    policyf = {"dest": "merge_policy", "choices": list(MERGE_POLICIES)}
    add("import-logs", "validate and import an external prediction log",
        ("--logs", {}))
    add("ifc", "compute the intersect of false classifications",
        ("--merge-policy", policyf))
    add("confusion", "fuse probabilities and tabulate confusion")
    add("histogram", "bin the run lengths of flagged windows")
    add("mask", "emit the trinary clean/minor/major mask",
        ("--merge-policy", policyf))
    add("plot", "emit SVG views plus their data exports")
    add("report", "bundle overlap, mask, and confusion summaries",
        ("--merge-policy", policyf))
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config_file(getattr(args, "config", None))
        run = RunDir(_resolve_out(args, cfg))
    except CommandError as exc:
        print(f"haraudit: {exc}", file=sys.stderr)
        return 1
    try:
        COMMANDS[args.command](args, cfg, run)
        run.update_manifest()
    except Exception as exc:
        run.cleanup()
        print(f"haraudit {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
