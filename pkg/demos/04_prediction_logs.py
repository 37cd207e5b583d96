"""Prediction-log walkthrough: validating probability records, picking the
best hyperparameter config per model, and merging correctness across runs.

This is the ingestion side used when the probabilities come from externally
trained models rather than the built-in reference classifier.

Run with:  python3 demos/04_prediction_logs.py
"""

import io

import numpy as np

from haraudit import (
    PredictionRecord,
    best_hyperparams,
    filter_to_configs,
    merge_runs,
    model_metrics,
    read_records,
    write_records,
)
from haraudit.predictions import RecordError

rng = np.random.default_rng(4)

# ---------------------------------------------------------------------------
# Fake logs for two models x two configs x three runs over 60 windows.
# Config quality differs so the selection has something to find.
# ---------------------------------------------------------------------------
QUALITY = {("cnn", "bs064_lr0.01"): 0.9, ("cnn", "bs256_lr0.1"): 0.7,
           ("gru", "bs064_lr0.01"): 0.6, ("gru", "bs256_lr0.1"): 0.8}
records = []
for (model, config), quality in QUALITY.items():
    for run in range(3):
        for window in range(60):
            label = window % 3
            correct = rng.random() < quality
            probs = np.full(3, 0.1)
            probs[label if correct else (label + 1) % 3] = 0.8
            records.append(
                PredictionRecord(
                    dataset_id="demo", model_id=model, config_id=config,
                    run_id=run, fold_id=window % 4, window_id=window,
                    true_label=label, probs=tuple(probs),
                )
            )

# ---------------------------------------------------------------------------
# The JSONL round trip is exact; validation rejects malformed records.
# ---------------------------------------------------------------------------
buf = io.StringIO()
write_records(records, buf)
buf.seek(0)
assert read_records(buf) == records
print(f"{len(records)} records round-tripped losslessly")

bad = io.StringIO(
    '{"dataset":"demo","model":"cnn","config":"c","run":0,"fold":0,'
    '"window":0,"label":0,"probs":[0.6,0.5,0.1]}\n'
)
try:
    read_records(bad)
except RecordError as exc:
    print(f"rejected: {exc}")

# ---------------------------------------------------------------------------
# Best config per model by mean out-of-fold accuracy across runs.
# ---------------------------------------------------------------------------
chosen = best_hyperparams(records)
for (dataset, model), config in sorted(chosen.items()):
    print(f"best config for {model}: {config}")

filtered = filter_to_configs(records, chosen)
for key, m in sorted(model_metrics(filtered).items()):
    print(f"{'/'.join(key)}: acc {m.accuracy_mean:.3f} +/- {m.accuracy_std:.3f}, "
          f"weighted F1 {m.weighted_f1_mean:.3f} +/- {m.weighted_f1_std:.3f}")

# ---------------------------------------------------------------------------
# Run merging: a window only counts as correct for a model per the policy.
# ---------------------------------------------------------------------------
for policy in ("any", "majority", "all"):
    merged = merge_runs(filtered, policy=policy)
    shares = {
        model: 100 * sum(v.values()) / len(v) for model, v in sorted(merged.by_model.items())
    }
    line = "  ".join(f"{m}: {s:.1f}%" for m, s in shares.items())
    print(f"windows correct under {policy:>8}: {line}")
