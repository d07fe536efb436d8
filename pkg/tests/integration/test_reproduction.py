"""
Reproducciones numéricas del modelo sobre los escenarios integrados y
MovieLens 100K. Se ejecutan solo con --runslow.
"""
import time

import numpy as np
import pytest

from src.app.baselines.models import NeighborConfig, PmfConfig
from src.app.baselines.naive import NaiveRecommender
from src.app.baselines.neighbors import ItemBasedRecommender, UserBasedRecommender
from src.app.baselines.pmf import pmf_fit, pmf_predict_many
from src.app.inference.engine import fit, init_state, iterate
from src.app.prediction.metrics import aggregate_reports, evaluate_arrays
from src.app.prediction.predictor import estimate_memberships, predict_many
from src.app.selection.models import CvPlan
from src.app.selection.service import selection_frequencies
from src.app.simulation.generator import generate
from src.app.simulation.scenarios import builtin_scenario, with_prior
from src.core.types import ModelConfig
from src.database.movielens import load_movielens, split_train_hidden

N_REPLICATES = 30


def _bm2_report(train, hidden, config):
    result = fit(train, config)
    est = estimate_memberships(result)
    predicted = hidden.scale.array[predict_many(est, result.mu, hidden.users, hidden.items)]
    return evaluate_arrays(predicted, hidden.values), result


@pytest.mark.slow
def test_elbo_monotone_on_builtin_scenario():
    output = generate(builtin_scenario(5))
    _, result = _bm2_report(output.observed, output.hidden, ModelConfig.non_informative(5, 5))
    trace = result.elbo_trace
    assert all(b >= a - 1e-8 * abs(a) for a, b in zip(trace, trace[1:]))


@pytest.mark.slow
def test_simulation_accuracy_and_informative_prior():
    base = builtin_scenario(5, eta=0.2)
    plain, informed = [], []
    for r in range(N_REPLICATES):
        scenario = base.with_options(seed=r)
        output = generate(scenario)
        plain.append(_bm2_report(output.observed, output.hidden,
                                 ModelConfig.non_informative(5, 5, seed=r))[0])
        informed.append(_bm2_report(output.observed, output.hidden, with_prior(scenario, seed=r))[0])

    bm2 = aggregate_reports(plain)
    assert bm2.mae == pytest.approx(0.7994, abs=0.06)
    assert bm2.mse == pytest.approx(1.2807, abs=0.17)
    assert bm2.ar == pytest.approx(0.4012, abs=0.03)
    assert aggregate_reports(informed).mae <= bm2.mae


@pytest.mark.slow
def test_cross_validation_never_under_selects():
    plan = CvPlan(n_folds=5, candidates=[(k, k) for k in (3, 4, 5, 6, 7)])
    counts = selection_frequencies(builtin_scenario(5), plan, ModelConfig.non_informative(1, 1), n_replicates=20)
    assert counts[(3, 3)] == counts[(4, 4)] == 0


@pytest.mark.slow
def test_iteration_cost_is_linear_in_ratings():
    def seconds_per_iteration(eta):
        output = generate(builtin_scenario(5, eta=eta))
        config = ModelConfig.non_informative(5, 5)
        state, mu = init_state(output.observed, config)
        iterate(output.observed, state, mu, config)
        start = time.perf_counter()
        for _ in range(20):
            state, mu = iterate(output.observed, state, mu, config)
        return (time.perf_counter() - start) / 20

    assert seconds_per_iteration(0.4) <= 2.5 * seconds_per_iteration(0.2)


@pytest.mark.slow
def test_movielens_accuracy(movielens_path):
    data, _ = load_movielens(movielens_path)
    train, hidden = split_train_hidden(data, 0.2, seed=0)

    bm2, _ = _bm2_report(train, hidden, ModelConfig.non_informative(10, 10))
    assert bm2.mae == pytest.approx(0.7300, abs=0.02)
    assert bm2.mse == pytest.approx(1.1613, abs=0.06)
    assert bm2.ar == pytest.approx(0.4417, abs=0.015)

    def mae(predicted):
        return evaluate_arrays(predicted, hidden.values).mae

    # La media por usuario queda bastante por debajo del 1.3269 publicado; ese valor es solo un techo.
    naive_mae = mae(NaiveRecommender(train).predict_many(hidden.users, hidden.items))
    assert bm2.mae < naive_mae <= 1.3269 + 0.02
    neighbors = NeighborConfig()
    assert mae(ItemBasedRecommender(train, neighbors).predict_many(hidden.users, hidden.items)) == \
        pytest.approx(0.8068, abs=0.02)
    assert mae(UserBasedRecommender(train, neighbors).predict_many(hidden.users, hidden.items)) == \
        pytest.approx(0.8110, abs=0.02)
    factors = pmf_fit(train, PmfConfig())
    assert mae(pmf_predict_many(factors, hidden.users, hidden.items)) == pytest.approx(0.8493, abs=0.04)
    assert np.isfinite(factors.objective_trace[-1])
