"""Grouped cross-validation fold planning with a fold-count cap."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .windowing import WindowedDataset

MAX_FOLDS_DEFAULT = 10


@dataclass(frozen=True)
class Fold:
    fold_id: int
    test_group_keys: tuple[str, ...]
    test_window_ids: tuple[int, ...]


@dataclass
class FoldPlan:
    """Partition of windows into held-out test folds, one group set per fold."""

    folds: list[Fold]
    k: int

    def validate(self) -> None:
        seen_windows: set[int] = set()
        seen_groups: set[str] = set()
        for fold in self.folds:
            for g in fold.test_group_keys:
                if g in seen_groups:
                    raise ValueError(f"group {g!r} appears in two folds")
                seen_groups.add(g)
            for w in fold.test_window_ids:
                if w in seen_windows:
                    raise ValueError(f"window {w} appears in two test folds")
                seen_windows.add(w)
        if self.k != len(self.folds):
            raise ValueError("k does not match the number of folds")

    def test_windows(self, fold_id: int) -> tuple[int, ...]:
        return self.folds[fold_id].test_window_ids

    def train_windows(self, fold_id: int, num_windows: int) -> list[int]:
        held_out = set(self.folds[fold_id].test_window_ids)
        return [w for w in range(num_windows) if w not in held_out]


def group_k_fold(
    group_windows: Mapping[str, Sequence[int]], max_k: int = MAX_FOLDS_DEFAULT
) -> FoldPlan:
    """Build a leave-groups-out fold plan capped at ``max_k`` folds.

    With at most ``max_k`` groups every group gets its own fold. With more,
    groups are merged: sorted by descending window count (ties by key), each
    group joins the currently smallest fold. Deterministic for a given set of
    groups and counts regardless of mapping order.
    """
    if len(group_windows) < 2:
        raise ValueError("need at least 2 groups for a leave-out split")
    if max_k < 2:
        raise ValueError("max_k must be at least 2")
    items = sorted(group_windows.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    if len(items) <= max_k:
        folds = []
        for fold_id, (key, wins) in enumerate(sorted(group_windows.items())):
            folds.append(
                Fold(
                    fold_id=fold_id,
                    test_group_keys=(key,),
                    test_window_ids=tuple(sorted(int(w) for w in wins)),
                )
            )
        plan = FoldPlan(folds=folds, k=len(folds))
        plan.validate()
        return plan

    bins: list[list[str]] = [[] for _ in range(max_k)]
    sizes = [0] * max_k
    for key, wins in items:
        target = min(range(max_k), key=lambda i: (sizes[i], i))
        bins[target].append(key)
        sizes[target] += len(wins)
    folds = []
    for fold_id, keys in enumerate(bins):
        wins: list[int] = []
        for key in keys:
            wins.extend(int(w) for w in group_windows[key])
        folds.append(
            Fold(
                fold_id=fold_id,
                test_group_keys=tuple(sorted(keys)),
                test_window_ids=tuple(sorted(wins)),
            )
        )
    plan = FoldPlan(folds=folds, k=max_k)
    plan.validate()
    return plan


def plan_folds(dataset: WindowedDataset, max_k: int = MAX_FOLDS_DEFAULT) -> FoldPlan:
    """Fold plan for a windowed dataset, grouping by each window's group key."""
    groups: dict[str, list[int]] = {}
    for w in dataset.windows:
        groups.setdefault(w.group_key, []).append(w.window_id)
    return group_k_fold(groups, max_k=max_k)


def write_plan(plan: FoldPlan, dest) -> None:
    payload = {
        "k": plan.k,
        "folds": [
            {
                "fold_id": f.fold_id,
                "groups": list(f.test_group_keys),
                "test_windows": list(f.test_window_ids),
            }
            for f in plan.folds
        ],
    }
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        json.dump(payload, dest, indent=2)
        dest.write("\n")


def read_plan(src) -> FoldPlan:
    if isinstance(src, (str, Path)):
        with open(src, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    else:
        payload = json.load(src)
    folds = [
        Fold(
            fold_id=int(f["fold_id"]),
            test_group_keys=tuple(f["groups"]),
            test_window_ids=tuple(int(w) for w in f["test_windows"]),
        )
        for f in payload["folds"]
    ]
    plan = FoldPlan(folds=folds, k=int(payload["k"]))
    plan.validate()
    return plan
