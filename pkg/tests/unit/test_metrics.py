import numpy as np
import pytest

from src.app.prediction.metrics import aggregate_reports, evaluate, evaluate_arrays
from src.app.prediction.models import EvalReport


def test_perfect_predictions():
    report = evaluate([(0, 0, 5), (1, 2, 3)], [(1, 2, 3), (0, 0, 5)])
    assert (report.mae, report.mse, report.ar, report.n_evaluated) == (0.0, 0.0, 1.0, 2)


def test_mixed_errors():
    report = evaluate_arrays([4.0, 2.0, 3.0], [5.0, 2.0, 1.0])
    assert report.mae == pytest.approx(1.0)
    assert report.mse == pytest.approx(5.0 / 3.0)
    assert report.ar == pytest.approx(1.0 / 3.0)


def test_real_valued_predictions_never_hit():
    report = evaluate_arrays([3.5], [3.0])
    assert report.ar == 0.0
    assert report.mae == pytest.approx(0.5)


def test_key_mismatch_lists_missing_pairs():
    with pytest.raises(ValueError, match=r"sin predicción: \(1, 1\)"):
        evaluate([(0, 0, 1)], [(0, 0, 1), (1, 1, 2)])
    with pytest.raises(ValueError, match="sin valor real"):
        evaluate([(0, 0, 1), (3, 3, 1)], [(0, 0, 1)])


def test_mismatch_message_is_truncated():
    truth = [(i, 0, 1) for i in range(15)]
    with pytest.raises(ValueError, match=r"\+5 más"):
        evaluate([], truth)


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        evaluate_arrays([], [])


def test_aggregate_reports_standard_error():
    reports = [
        EvalReport(mae=0.8, mse=1.2, ar=0.4, n_evaluated=10),
        EvalReport(mae=1.0, mse=1.4, ar=0.5, n_evaluated=10),
        EvalReport(mae=0.9, mse=1.0, ar=0.3, n_evaluated=10),
    ]
    agg = aggregate_reports(reports)
    assert agg.n_runs == 3
    assert agg.n_evaluated == 30
    assert agg.mae == pytest.approx(0.9)
    assert agg.mae_se == pytest.approx(np.std([0.8, 1.0, 0.9], ddof=1) / np.sqrt(3))


def test_single_report_has_zero_standard_error():
    agg = aggregate_reports([EvalReport(mae=0.5, mse=0.5, ar=0.5, n_evaluated=4)])
    assert agg.mae_se == 0.0
