"""End-to-end audit plumbing: fold-wise baseline training and log auditing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .baseline import TrainConfig, extract_feature_matrix, predict_proba, train_baseline
from .confusion import (
    ChordEdge,
    ClassConfusionRow,
    FusedDistribution,
    chord_edges,
    confusion_table,
    fuse_probabilities,
)
from .ifc import IfcSummary, build_matrix, compute_ifc
from .mask import MaskSequence, build_mask
from .predictions import (
    PredictionRecord,
    best_hyperparams,
    filter_to_configs,
    merge_runs,
)
from .splits import FoldPlan
from .windowing import WindowedDataset, apply_normalizer, fit_normalizer


def baseline_prediction_records(
    dataset: WindowedDataset,
    plan: FoldPlan,
    dataset_id: str = "dataset",
    model_id: str = "baseline",
    runs: int = 1,
    config: TrainConfig = TrainConfig(),
) -> list[PredictionRecord]:
    """Train the reference classifier per fold and emit out-of-fold records.

    For each fold the normalizer is fit on the training windows only, then
    applied to the whole dataset before feature extraction. Training is
    deterministic, so all runs carry identical probabilities; they exist to
    exercise the run-merging interfaces.
    """
    config_id = f"gd_lr{config.step_size}_ep{config.epochs}"
    labels = dataset.labels
    records: list[PredictionRecord] = []
    for fold in plan.folds:
        test_ids = np.asarray(fold.test_window_ids, dtype=int)
        train_ids = np.asarray(
            plan.train_windows(fold.fold_id, dataset.num_windows), dtype=int
        )
        stats = fit_normalizer(dataset, train_ids)
        normalized = apply_normalizer(dataset, stats)
        features = extract_feature_matrix(normalized.blocks)
        model = train_baseline(
            features[train_ids],
            labels[train_ids],
            dataset.num_classes,
            config,
        )
        probs = predict_proba(model, features[test_ids])
        for run in range(runs):
            for row, window_id in enumerate(test_ids):
                records.append(
                    PredictionRecord(
                        dataset_id=dataset_id,
                        model_id=model_id,
                        config_id=config_id,
                        run_id=run,
                        fold_id=fold.fold_id,
                        window_id=int(window_id),
                        true_label=int(labels[window_id]),
                        probs=tuple(float(p) for p in probs[row]),
                    )
                )
    return records


@dataclass
class AuditResult:
    """Everything the downstream exports need, computed in one pass."""

    ifc: IfcSummary
    fused: list[FusedDistribution]
    table: list[ClassConfusionRow]
    edges: list[ChordEdge]
    mask: MaskSequence
    chosen_configs: dict[tuple[str, str], str]


def audit_records(
    records: Sequence[PredictionRecord],
    window_bounds: np.ndarray,
    labels: Sequence[int],
    total_samples: int,
    num_classes: int | None = None,
    merge_policy: str = "majority",
    class_names: Sequence[str] | None = None,
) -> AuditResult:
    """Run the full audit over a prediction log.

    Windows in the log must be positions 0..W-1 matching ``window_bounds``
    and ``labels``. Picks the best config per model, merges runs under
    ``merge_policy``, computes the overlap summary, fuses probabilities of
    the flagged windows, and builds confusion plus mask outputs.
    """
    chosen = best_hyperparams(records)
    filtered = filter_to_configs(records, chosen)
    consolidated = merge_runs(filtered, policy=merge_policy)
    matrix = build_matrix(consolidated)
    if matrix.num_windows != len(labels) or not np.array_equal(
        matrix.window_ids, np.arange(len(labels))
    ):
        raise ValueError(
            f"log covers {matrix.num_windows} windows but the dataset defines "
            f"{len(labels)} dense window ids"
        )
    summary = compute_ifc(matrix, merge_policy=merge_policy)
    flagged_ids = [int(w) for w in summary.window_ids[summary.ifc_flags]]
    fused = fuse_probabilities(filtered, flagged_ids)
    table = confusion_table(
        summary.ifc_flags, labels, num_classes=num_classes, class_names=class_names
    )
    edges = chord_edges(fused)
    mask = build_mask(
        summary.ifc_flags,
        fused,
        window_bounds,
        total_samples,
        policy=merge_policy,
    )
    return AuditResult(
        ifc=summary,
        fused=fused,
        table=table,
        edges=edges,
        mask=mask,
        chosen_configs=chosen,
    )
