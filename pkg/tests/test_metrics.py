import time

import pytest

from spambench.metrics import (
    CellMetrics,
    MetricsError,
    confusion,
    macro_over_datasets,
    mean_std_over_k,
    metrics_from_confusion,
    score,
    time_block,
)


def cell(f1=0.0, precision=0.0, recall=0.0):
    return CellMetrics(f1=f1, precision=precision, recall=recall)


class TestScore:
    def test_perfect_predictions(self):
        _, m = score([1, 0, 1, 0], [1, 0, 1, 0])
        assert (m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0)

    def test_hand_computed_cell(self):
        # tp=8 fp=2 fn=4 -> P=0.8, R=2/3, F1=2PR/(P+R)
        y_true = [1] * 12 + [0] * 2
        y_pred = [1] * 8 + [0] * 4 + [1] * 2
        c, m = score(y_true, y_pred)
        assert (c.tp, c.fp, c.fn, c.tn) == (8, 2, 4, 0)
        assert m.precision == pytest.approx(0.8)
        assert m.recall == pytest.approx(0.6667, abs=1e-4)
        assert m.f1 == pytest.approx(0.7273, abs=1e-4)

    def test_all_ham_predictions_zero_f1(self):
        _, m = score([1, 0, 1], [0, 0, 0])
        assert m.f1 == 0.0
        assert m.precision == 0.0
        assert m.recall == 0.0

    def test_length_mismatch(self):
        with pytest.raises(MetricsError):
            score([1, 0], [1])

    def test_non_binary_label(self):
        with pytest.raises(MetricsError):
            score([2], [1])

    def test_exhaustive_exactness_small_totals(self):
        # every confusion matrix with total <= 30 against closed-form arithmetic
        checked = 0
        for total in range(1, 31):
            for tp in range(total + 1):
                for fp in range(total - tp + 1):
                    for fn in range(total - tp - fp + 1):
                        tn = total - tp - fp - fn
                        y_true = [1] * tp + [0] * fp + [1] * fn + [0] * tn
                        y_pred = [1] * tp + [1] * fp + [0] * fn + [0] * tn
                        c, m = score(y_true, y_pred)
                        assert (c.tp, c.fp, c.fn, c.tn) == (tp, fp, fn, tn)
                        p = tp / (tp + fp) if tp + fp else 0.0
                        r = tp / (tp + fn) if tp + fn else 0.0
                        f1 = 2 * p * r / (p + r) if p + r else 0.0
                        assert m.precision == p and m.recall == r and m.f1 == f1
                        checked += 1
        assert checked == sum(1 for t in range(1, 31) for _ in range((t + 1) * (t + 2) * (t + 3) // 6))

    def test_f1_between_precision_and_recall(self):
        for tp, fp, fn, tn in [(3, 1, 2, 4), (1, 5, 1, 1), (7, 0, 2, 1)]:
            y_true = [1] * tp + [0] * fp + [1] * fn + [0] * tn
            y_pred = [1] * tp + [1] * fp + [0] * fn + [0] * tn
            _, m = score(y_true, y_pred)
            if m.precision + m.recall > 0:
                assert min(m.precision, m.recall) <= m.f1 <= max(m.precision, m.recall)


class TestMacroOverDatasets:
    def test_single_dataset_identity(self):
        m = macro_over_datasets({"a": cell(f1=0.7, precision=0.6, recall=0.9)})
        assert (m.f1, m.precision, m.recall) == (0.7, 0.6, 0.9)

    def test_two_dataset_mean(self):
        m = macro_over_datasets({"a": cell(f1=1.0), "b": cell(f1=0.5)})
        assert m.f1 == pytest.approx(0.75)

    def test_four_dataset_average_matches_published_summary(self):
        # the published full-train summary rounds per-dataset cells to 2 digits,
        # so the recomputed macro must agree within that rounding slack
        cells = {d: cell(f1=v) for d, v in zip("abcd", (0.99, 0.95, 0.96, 0.99))}
        m = macro_over_datasets(cells)
        assert m.f1 == pytest.approx(0.9725, abs=1e-9)
        assert abs(m.f1 - 0.9742) <= 0.01

    def test_permutation_invariant(self):
        cells = {"a": cell(f1=0.2), "b": cell(f1=0.4), "c": cell(f1=0.9)}
        rotated = {"c": cells["c"], "a": cells["a"], "b": cells["b"]}
        assert macro_over_datasets(cells).f1 == macro_over_datasets(rotated).f1

    def test_empty_error(self):
        with pytest.raises(MetricsError):
            macro_over_datasets({})


class TestMeanStdOverK:
    def test_constant_series(self):
        mean, std = mean_std_over_k({k: 0.5 for k in (4, 8, 16, 32, 64, 128, 256, "full")})
        assert mean == pytest.approx(0.5)
        assert std == 0.0

    def test_published_seq2seq_row(self):
        row = dict(zip((4, 8, 16, 32, 64, 128, 256, "full"),
                       (0.544, 0.534, 0.619, 0.726, 0.806, 0.864, 0.933, 0.974)))
        mean, _ = mean_std_over_k(row)
        assert mean == pytest.approx(0.7498, abs=5e-4)

    def test_missing_k_error(self):
        with pytest.raises(MetricsError):
            mean_std_over_k({4: 0.5})

    def test_population_std_two_levels(self):
        row = {k: (0.0 if i < 4 else 1.0)
               for i, k in enumerate((4, 8, 16, 32, 64, 128, 256, "full"))}
        mean, std = mean_std_over_k(row)
        assert mean == pytest.approx(0.5)
        assert std == pytest.approx(0.5)


class TestTimeBlock:
    def test_noop_duration_small(self):
        _, dt = time_block(lambda: None)
        assert 0.0 <= dt < 0.010

    def test_returns_action_result(self):
        value, dt = time_block(lambda: 41 + 1)
        assert value == 42 and dt >= 0.0

    def test_measures_sleep(self):
        _, dt = time_block(lambda: time.sleep(0.02))
        assert dt >= 0.015


def test_metrics_from_confusion_zero_division_convention():
    m = metrics_from_confusion(confusion([0, 0], [0, 0]))
    assert (m.precision, m.recall, m.f1) == (0.0, 0.0, 0.0)
