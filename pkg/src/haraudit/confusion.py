"""Confusion structure of unclassifiable windows.

For windows no model classifies correctly, the per-model probability vectors
are fused by an unweighted mean over every (model, run) record; the confused
class is the argmax of the fused vector. Class-level rates and chord-diagram
edge data are derived from those fusions.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .predictions import PredictionRecord

PCT_SUM_TOL = 1e-9


@dataclass
class FusedDistribution:
    """Mean probability vector of one flagged window across all records."""

    window_id: int
    mean_probs: np.ndarray
    confused_class: int
    true_label: int
    #: True when the fused argmax recovers the true label even though every
    #: model failed individually; confused_class then holds the runner-up.
    fused_agrees_with_truth: bool = False


@dataclass(frozen=True)
class ClassConfusionRow:
    """Distribution and confusion percentages for one true class.

    ``relative_pct`` is the share of the class's own windows that are
    unclassifiable; ``absolute_pct`` is that confusion expressed against the
    whole dataset and equals distribution * relative / 100 exactly. Classes
    with no unclassifiable windows report both as None.
    """

    class_id: int
    name: str
    distribution_pct: float
    relative_pct: float | None
    absolute_pct: float | None
    window_count: int
    flagged_count: int


@dataclass(frozen=True)
class ChordEdge:
    true_class: int
    confused_class: int
    weight: int


def fuse_probabilities(
    records: Sequence[PredictionRecord], flagged_window_ids: Iterable[int]
) -> list[FusedDistribution]:
    """Fuse records of flagged windows into one mean distribution per window.

    Every flagged window must carry at least one record from every model
    present in ``records``. Argmax ties resolve to the lowest class id; when
    the argmax equals the true label the window keeps its flag and the
    runner-up class is reported instead.
    """
    flagged = set(int(w) for w in flagged_window_ids)
    all_models = sorted({rec.model_id for rec in records})
    per_window: dict[int, list[PredictionRecord]] = {}
    for rec in records:
        if rec.window_id in flagged:
            per_window.setdefault(rec.window_id, []).append(rec)

    fused = []
    for window_id in sorted(flagged):
        recs = per_window.get(window_id)
        if not recs:
            raise ValueError(f"flagged window {window_id} has no records")
        models_here = {r.model_id for r in recs}
        missing = sorted(set(all_models) - models_here)
        if missing:
            raise ValueError(
                f"flagged window {window_id} lacks records from models {missing}"
            )
        labels = {r.true_label for r in recs}
        if len(labels) != 1:
            raise ValueError(
                f"window {window_id} carries conflicting true labels {sorted(labels)}"
            )
        true_label = labels.pop()
        # Sum in a canonical order so the mean is bit-for-bit independent of
        # record order.
        recs.sort(key=lambda r: (r.model_id, r.config_id, r.run_id))
        mean_probs = np.mean([np.asarray(r.probs, dtype=float) for r in recs], axis=0)
        top = int(np.argmax(mean_probs))
        agrees = top == true_label
        if agrees:
            runner_up = mean_probs.copy()
            runner_up[top] = -np.inf
            confused = int(np.argmax(runner_up))
        else:
            confused = top
        fused.append(
            FusedDistribution(
                window_id=window_id,
                mean_probs=mean_probs,
                confused_class=confused,
                true_label=true_label,
                fused_agrees_with_truth=agrees,
            )
        )
    return fused


def confusion_table(
    ifc_flags: np.ndarray,
    labels: Sequence[int],
    num_classes: int | None = None,
    class_names: Sequence[str] | None = None,
) -> list[ClassConfusionRow]:
    """Per-class distribution, relative confusion, and absolute confusion."""
    flags = np.asarray(ifc_flags, dtype=bool)
    labels = np.asarray(labels, dtype=int)
    if flags.size != labels.size:
        raise ValueError("ifc_flags and labels must align")
    if flags.size == 0:
        raise ValueError("no windows")
    if num_classes is None:
        num_classes = int(labels.max()) + 1
    if class_names is None:
        class_names = [f"class_{c}" for c in range(num_classes)]
    total = flags.size
    rows = []
    for c in range(num_classes):
        of_class = labels == c
        n_class = int(of_class.sum())
        n_flagged = int((of_class & flags).sum())
        dist = 100.0 * n_class / total
        if n_class == 0 or n_flagged == 0:
            rel: float | None = None
            absolute: float | None = None
        else:
            rel = 100.0 * n_flagged / n_class
            absolute = dist * rel / 100.0
        rows.append(
            ClassConfusionRow(
                class_id=c,
                name=str(class_names[c]),
                distribution_pct=dist,
                relative_pct=rel,
                absolute_pct=absolute,
                window_count=n_class,
                flagged_count=n_flagged,
            )
        )
    check = sum(r.distribution_pct for r in rows)
    if abs(check - 100.0) > PCT_SUM_TOL:
        raise RuntimeError(f"class distribution sums to {check!r}, not 100")
    return rows


def chord_edges(fused: Sequence[FusedDistribution]) -> list[ChordEdge]:
    """Count flagged windows per (true class -> confused class) pair.

    Edges come back sorted by descending weight, then by class ids, so the
    heaviest confusion flow leads the export.
    """
    counts: dict[tuple[int, int], int] = {}
    for f in fused:
        key = (f.true_label, f.confused_class)
        counts[key] = counts.get(key, 0) + 1
    edges = [
        ChordEdge(true_class=t, confused_class=c, weight=w)
        for (t, c), w in counts.items()
    ]
    edges.sort(key=lambda e: (-e.weight, e.true_class, e.confused_class))
    return edges


def write_confusion_csv(rows: Sequence[ClassConfusionRow], dest) -> None:
    """Table export: class_id,name,dist_pct,rel_pct,abs_pct (absent cells empty)."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            write_confusion_csv(rows, fh)
            return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(["class_id", "name", "dist_pct", "rel_pct", "abs_pct"])
    for row in rows:
        writer.writerow(
            [
                row.class_id,
                row.name,
                repr(row.distribution_pct),
                "" if row.relative_pct is None else repr(row.relative_pct),
                "" if row.absolute_pct is None else repr(row.absolute_pct),
            ]
        )


def write_chord_json(
    edges: Sequence[ChordEdge], class_names: Sequence[str], dest
) -> None:
    payload = {
        "classes": list(class_names),
        "edges": [
            {"from": e.true_class, "to": e.confused_class, "weight": e.weight}
            for e in edges
        ],
    }
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        json.dump(payload, dest, indent=2)
        dest.write("\n")


def write_fused_jsonl(fused: Sequence[FusedDistribution], dest) -> None:
    """Persist fused distributions so downstream stages can reuse them."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as fh:
            write_fused_jsonl(fused, fh)
            return
    for f in fused:
        dest.write(
            json.dumps(
                {
                    "window": f.window_id,
                    "label": f.true_label,
                    "confused": f.confused_class,
                    "agrees_with_truth": f.fused_agrees_with_truth,
                    "mean_probs": [float(p) for p in f.mean_probs],
                }
            )
        )
        dest.write("\n")


def read_fused_jsonl(src) -> list[FusedDistribution]:
    if isinstance(src, (str, Path)):
        with open(src, "r", encoding="utf-8") as fh:
            return read_fused_jsonl(fh)
    fused = []
    for line in src:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        fused.append(
            FusedDistribution(
                window_id=int(obj["window"]),
                mean_probs=np.asarray(obj["mean_probs"], dtype=float),
                confused_class=int(obj["confused"]),
                true_label=int(obj["label"]),
                fused_agrees_with_truth=bool(obj["agrees_with_truth"]),
            )
        )
    return fused
