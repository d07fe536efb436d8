import numpy as np
import pytest
from pydantic import ValidationError

from src.app.selection.models import CvPlan
from src.app.selection.service import candidate_config, cross_validate, selection_frequencies, split_folds
from src.app.simulation.scenarios import builtin_scenario
from src.core.types import ModelConfig, RatingDataset


def test_folds_partition_the_ratings(block_dataset):
    pairs = split_folds(block_dataset, 4, seed=0)
    assert len(pairs) == 4
    test_keys = []
    for train, test in pairs:
        assert len(train) + len(test) == len(block_dataset)
        test_keys.extend(zip(test.users.tolist(), test.items.tolist()))
    assert len(test_keys) == len(set(test_keys)) == len(block_dataset)
    sizes = [len(test) for _, test in pairs]
    assert max(sizes) - min(sizes) <= 1


def test_folds_are_seeded(block_dataset):
    first = split_folds(block_dataset, 3, seed=5)
    second = split_folds(block_dataset, 3, seed=5)
    for (_, a), (_, b) in zip(first, second):
        assert a.triplets() == b.triplets()


def test_too_few_ratings(tiny_dataset):
    with pytest.raises(ValueError):
        split_folds(tiny_dataset, 9, seed=0)


def test_candidate_config_keeps_template_controls():
    template = ModelConfig.non_informative(1, 1, max_iters=7, rel_tol=1e-3, seed=4)
    config = candidate_config(template, 3, 2)
    assert (config.K, config.L, config.max_iters, config.rel_tol, config.seed) == (3, 2, 7, 1e-3, 4)
    assert config.alpha == [1 / 3] * 3


def test_plan_needs_candidates():
    with pytest.raises(ValidationError):
        CvPlan(candidates=[])


def test_cross_validate_report(block_dataset):
    plan = CvPlan(n_folds=3, candidates=[(1, 1), (2, 2)], replicate_seeds=[0, 1])
    template = ModelConfig.non_informative(1, 1, max_iters=100)
    report = cross_validate(block_dataset, plan, template)

    assert len(report.folds) == 2 * 2 * 3
    assert [s.selected for s in report.summary].count(True) == 1
    best = min(report.summary, key=lambda s: (s.mean_mae, s.K + s.L, s.K))
    assert report.selected == (best.K, best.L)
    for summary in report.summary:
        assert summary.mean_mae == pytest.approx(np.mean(summary.fold_maes))

    folds = report.fold_frame()
    assert list(folds.columns) == ["K", "L", "replicate", "fold", "mae"]
    assert list(report.summary_frame().columns) == ["K", "L", "mean_mae", "selected"]


def test_ties_prefer_fewer_clusters(scale5):
    constant = RatingDataset.from_values(4, 4, scale5, [(i, j, 5) for i in range(4) for j in range(4)])
    plan = CvPlan(n_folds=2, candidates=[(2, 1), (1, 2), (2, 2), (1, 1)])
    report = cross_validate(constant, plan, ModelConfig.non_informative(1, 1, max_iters=5))
    assert all(s.mean_mae == 0.0 for s in report.summary)
    assert report.selected == (1, 1)


def test_parallel_matches_sequential(block_dataset):
    template = ModelConfig.non_informative(1, 1, max_iters=30)
    sequential = cross_validate(block_dataset, CvPlan(n_folds=2, candidates=[(1, 1), (2, 2)]), template)
    parallel = cross_validate(block_dataset, CvPlan(n_folds=2, candidates=[(1, 1), (2, 2)], n_jobs=2), template)
    assert [f.mae for f in sequential.folds] == pytest.approx([f.mae for f in parallel.folds])
    assert sequential.selected == parallel.selected


def test_selection_frequencies_count_replicates():
    scenario = builtin_scenario(5).with_options(n_users=30, n_items=20, eta=0.5)
    plan = CvPlan(n_folds=2, candidates=[(1, 1), (2, 2)])
    counts = selection_frequencies(scenario, plan, ModelConfig.non_informative(1, 1, max_iters=20), n_replicates=2)
    assert set(counts) == {(1, 1), (2, 2)}
    assert sum(counts.values()) == 2
