import io

import numpy as np
import pytest

from haraudit.predictions import (
    PredictionRecord,
    RecordError,
    accuracy,
    best_hyperparams,
    filter_to_configs,
    is_correct,
    merge_runs,
    model_metrics,
    read_records,
    weighted_f1,
    write_records,
)


def rec(
    window=0,
    label=0,
    probs=(0.6, 0.4),
    model="m1",
    config="c1",
    run=0,
    fold=0,
    dataset="d",
):
    return PredictionRecord(
        dataset_id=dataset,
        model_id=model,
        config_id=config,
        run_id=run,
        fold_id=fold,
        window_id=window,
        true_label=label,
        probs=tuple(probs),
    )


class TestCorrectness:
    def test_clear_argmax(self):
        assert is_correct(rec(label=1, probs=(0.1, 0.9)))

    def test_tie_resolves_to_lowest_index(self):
        assert not is_correct(rec(label=1, probs=(0.5, 0.5)))

    def test_three_way(self):
        assert is_correct(rec(label=2, probs=(0.3, 0.3, 0.4)))


class TestRoundTrip:
    def test_write_read_identity(self):
        rng = np.random.default_rng(11)
        records = []
        for w in range(25):
            p = rng.dirichlet(np.ones(4))
            records.append(
                rec(window=w, label=int(rng.integers(0, 4)), probs=tuple(p), run=w % 3)
            )
        buf = io.StringIO()
        write_records(records, buf)
        buf.seek(0)
        back = read_records(buf)
        assert back == records  # float text is exact round-trip

    def test_simplex_accepted_at_exact_sum(self):
        buf = io.StringIO()
        write_records([rec(probs=(0.5, 0.5))], buf)
        buf.seek(0)
        assert len(read_records(buf)) == 1

    def test_simplex_violation_rejected_with_index(self):
        buf = io.StringIO()
        write_records([rec(probs=(0.5, 0.5)), rec(window=1, probs=(0.6, 0.5))], buf)
        buf.seek(0)
        with pytest.raises(RecordError, match="record 1"):
            read_records(buf)

    def test_duplicate_key_rejected(self):
        buf = io.StringIO()
        write_records([rec(probs=(0.5, 0.5)), rec(probs=(0.4, 0.6))], buf)
        buf.seek(0)
        with pytest.raises(RecordError, match="duplicate"):
            read_records(buf)

    def test_unknown_window_rejected(self):
        buf = io.StringIO()
        write_records([rec(window=99)], buf)
        buf.seek(0)
        with pytest.raises(RecordError, match="unknown window"):
            read_records(buf, valid_window_ids=range(10))

    def test_negative_probability_rejected(self):
        buf = io.StringIO()
        buf.write('{"dataset":"d","model":"m","config":"c","run":0,"fold":0,'
                  '"window":0,"label":0,"probs":[1.2,-0.2]}\n')
        buf.seek(0)
        with pytest.raises(RecordError, match="negative"):
            read_records(buf)


def correctness_records(model, config, flags_per_run, label=0):
    """One record per (run, window); flags say whether that run was correct."""
    records = []
    for run, flags in enumerate(flags_per_run):
        for window, good in enumerate(flags):
            probs = (0.9, 0.1) if good else (0.1, 0.9)
            records.append(
                rec(window=window, label=label, probs=probs,
                    model=model, config=config, run=run, fold=0)
            )
    return records


class TestBestHyperparams:
    def test_higher_accuracy_wins(self):
        records = correctness_records("m1", "A", [[1, 1, 1, 0]])
        records += correctness_records("m1", "B", [[1, 1, 0, 0]])
        assert best_hyperparams(records) == {("d", "m1"): "A"}

    def test_tie_takes_lexicographically_smallest_config(self):
        records = correctness_records("m1", "bs256_lr0.01", [[1, 0]])
        records += correctness_records("m1", "bs064_lr0.01", [[0, 1]])
        assert best_hyperparams(records)[("d", "m1")] == "bs064_lr0.01"

    def test_nine_config_grid_has_unique_argmax(self):
        # 3x3 grid over 10 windows; config k gets k+... distinct accuracies
        records = []
        accs = {}
        k = 0
        for lr in ("0.1", "0.01", "0.001"):
            for bs in ("0064", "0256", "1024"):
                config = f"bs{bs}_lr{lr}"
                correct = k + 1  # 1..9 of 10 windows correct
                accs[config] = correct / 10
                records += correctness_records(
                    "m1", config, [[1] * correct + [0] * (10 - correct)]
                )
                k += 1
        chosen = best_hyperparams(records)[("d", "m1")]
        assert chosen == max(accs, key=lambda c: (accs[c], c))
        assert accs[chosen] == 0.9

    def test_mean_over_runs_decides(self):
        # A: runs 100% and 0% -> mean 0.5; B: runs 100% and 50% -> mean 0.75
        records = correctness_records("m1", "A", [[1, 1], [0, 0]])
        records += correctness_records("m1", "B", [[1, 1], [1, 0]])
        assert best_hyperparams(records)[("d", "m1")] == "B"

    def test_missing_fold_coverage_raises(self):
        records = correctness_records("m1", "A", [[1, 1]])
        extra = rec(window=5, model="m1", config="B", fold=3)
        with pytest.raises(ValueError, match="lacks folds"):
            best_hyperparams(records + [extra])

    def test_filtering_keeps_window_coverage(self):
        records = correctness_records("m1", "A", [[1, 0, 1]])
        records += correctness_records("m1", "B", [[0, 1, 1]])
        chosen = best_hyperparams(records)
        kept = filter_to_configs(records, chosen)
        assert {r.window_id for r in kept} == {r.window_id for r in records}


class TestMergeRuns:
    def test_majority_three_of_four(self):
        records = correctness_records("m1", "c", [[1], [1], [1], [0]])
        merged = merge_runs(records, "majority")
        assert merged.by_model["m1"][0] is True

    def test_exact_half_is_incorrect(self):
        records = correctness_records("m1", "c", [[1], [1], [0], [0]])
        assert merge_runs(records, "majority").by_model["m1"][0] is False

    def test_single_run_equal_under_all_policies(self):
        for flag in (0, 1):
            records = correctness_records("m1", "c", [[flag]])
            for policy in ("any", "majority", "all"):
                assert merge_runs(records, policy).by_model["m1"][0] is bool(flag)

    def test_differing_run_counts_rejected(self):
        records = correctness_records("m1", "c", [[1, 1], [1, 1]])
        records.append(rec(window=2, model="m1", config="c", run=0))
        with pytest.raises(ValueError, match="differing run counts"):
            merge_runs(records)

    def test_multiple_configs_rejected(self):
        records = correctness_records("m1", "A", [[1]])
        records += correctness_records("m1", "B", [[1]])
        with pytest.raises(ValueError, match="filter"):
            merge_runs(records)

    def test_policy_monotonicity_property(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            n_runs = int(rng.integers(1, 6))
            n_windows = int(rng.integers(1, 30))
            flags = rng.integers(0, 2, size=(n_runs, n_windows))
            records = correctness_records("m1", "c", flags.tolist())
            sets = {}
            for policy in ("all", "majority", "any"):
                merged = merge_runs(records, policy).by_model["m1"]
                sets[policy] = {w for w, good in merged.items() if good}
            assert sets["all"] <= sets["majority"] <= sets["any"]

    def test_order_independence(self):
        rng = np.random.default_rng(5)
        records = correctness_records("m1", "c", rng.integers(0, 2, (4, 20)).tolist())
        shuffled = list(records)
        rng.shuffle(shuffled)
        assert merge_runs(records).by_model == merge_runs(shuffled).by_model


class TestMetrics:
    def test_accuracy(self):
        assert accuracy([0, 1, 2, 2], [0, 1, 1, 2]) == 0.75

    def test_weighted_f1_matches_sklearn(self):
        sklearn_metrics = pytest.importorskip("sklearn.metrics")
        rng = np.random.default_rng(9)
        y_true = rng.integers(0, 4, size=200)
        y_pred = rng.integers(0, 4, size=200)
        ours = weighted_f1(y_true, y_pred, 4)
        ref = sklearn_metrics.f1_score(y_true, y_pred, average="weighted")
        assert abs(ours - ref) < 1e-12

    def test_model_metrics_mean_and_std_over_runs(self):
        records = correctness_records("m1", "c", [[1, 1, 1, 1], [1, 1, 0, 0]])
        metrics = model_metrics(records)[("d", "m1", "c")]
        assert metrics.accuracy_mean == 0.75
        assert metrics.accuracy_std == 0.25
        assert metrics.num_runs == 2
