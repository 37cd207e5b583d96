"""Windowing walkthrough: from raw sample streams to labelled windows and
grouped cross-validation folds.

Run with:  python3 demos/01_windows_and_folds.py
"""

import numpy as np

from haraudit import (
    SensorRecording,
    WindowConfig,
    apply_normalizer,
    assign_window_label,
    fit_normalizer,
    group_k_fold,
    plan_folds,
    slice_corpus,
)

rng = np.random.default_rng(0)

# ---------------------------------------------------------------------------
# Three subjects, each a short two-channel stream with a label change halfway.
# ---------------------------------------------------------------------------
recordings = []
for k in range(3):
    n = 1200
    labels = np.array([0] * (n // 2) + [1] * (n - n // 2))
    channels = np.where(labels[:, None] == 0, -1.0, 1.0) + rng.normal(0, 0.3, (n, 2))
    recordings.append(
        SensorRecording(
            channels=channels,
            sample_rate=100.0,
            labels=labels,
            subject_id=f"s{k}",
            session_id="r0",
            channel_names=["ax", "ay"],
        )
    )

config = WindowConfig(size=200, stride=100, label_policy="majority")
dataset = slice_corpus(recordings, config)
print(f"{dataset.num_windows} windows of {config.size} samples "
      f"(stride {config.stride}) over {dataset.total_samples} samples")

# Windows spanning the label change carry the transition flag.
spanning = [w.window_id for w in dataset.windows if w.transition]
print(f"windows spanning a label change: {spanning}")

# ---------------------------------------------------------------------------
# Window labelling policies differ exactly on those spanning windows.
# ---------------------------------------------------------------------------
mixed = [0] * 120 + [1] * 80
for policy in ("majority", "last_sample", "strict_uniform"):
    label, transition = assign_window_label(mixed, policy)
    print(f"policy {policy:>14}: label={label} transition={transition}")

# ---------------------------------------------------------------------------
# Normalization statistics come from the training split only.
# ---------------------------------------------------------------------------
train_ids = [w.window_id for w in dataset.windows if w.group_key != "s2"]
stats = fit_normalizer(dataset, train_ids)
normalized = apply_normalizer(dataset, stats)
print(f"train-split channel means {np.round(stats.mean, 3)}, "
      f"stds {np.round(stats.std, 3)}")
print(f"normalized corpus mean ~ {normalized.blocks.mean():.4f}")

# ---------------------------------------------------------------------------
# Grouped folds: one fold per subject up to the cap, merged beyond it.
# ---------------------------------------------------------------------------
plan = plan_folds(dataset)
for fold in plan.folds:
    print(f"fold {fold.fold_id}: groups={fold.test_group_keys} "
          f"({len(fold.test_window_ids)} test windows)")

many_groups = {f"subject{g:02d}": list(range(g * 10, g * 10 + 10)) for g in range(24)}
merged = group_k_fold(many_groups, max_k=10)
sizes = sorted(len(f.test_group_keys) for f in merged.folds)
print(f"24 groups capped at 10 folds -> groups per fold {sizes}")
