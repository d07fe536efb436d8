import numpy as np
import pytest
from scipy import stats

from src.app.simulation.generator import (
    exact_marginal, generate, inject_outliers, observation_mask, round_half_up, sample_levels,
)
from src.app.simulation.models import DeltaMode, MaskingMode, SimScenario
from src.app.simulation.scenario_io import export_scenario, import_scenario
from src.app.simulation.scenarios import SUPPORTED_SIZES, builtin_scenario, raw_tables, with_prior
from src.core.types import BlockArray


class TestScenarios:
    @pytest.mark.parametrize("k", SUPPORTED_SIZES)
    def test_builtin_dimensions(self, k):
        scenario = builtin_scenario(k)
        assert (scenario.n_users, scenario.n_items) == (300, 200)
        assert scenario.mu.shape == (k, k, 5)
        np.testing.assert_allclose(scenario.mu.mu.sum(axis=2), 1.0, atol=1e-12)
        assert scenario.alpha_probs.sum() == pytest.approx(1.0)

    def test_raw_tables_k5_first_cell(self):
        tables = raw_tables(5)
        assert tables.shape == (5, 5, 5)
        np.testing.assert_allclose(tables[:, 0, 0], [0.65, 0.18, 0.10, 0.05, 0.02])

    def test_first_block_is_normalized_raw_vector(self):
        raw = raw_tables(5)[:, 0, 0]
        np.testing.assert_allclose(builtin_scenario(5).mu.mu[0, 0], raw / raw.sum())

    def test_k9_padding_is_noted(self):
        scenario = builtin_scenario(9)
        assert scenario.notes
        tables = raw_tables(9)
        np.testing.assert_array_equal(tables[3, 8], tables[3, 7])

    def test_unsupported_size(self):
        with pytest.raises(ValueError):
            builtin_scenario(6)

    def test_with_prior_uses_true_hyperparameters(self):
        scenario = builtin_scenario(5)
        config = with_prior(scenario, max_iters=10)
        assert config.alpha == list(scenario.alpha)
        assert config.beta == list(scenario.beta)
        assert (config.K, config.L, config.max_iters) == (5, 5, 10)

    def test_scenario_validation(self):
        scenario = builtin_scenario(5)
        with pytest.raises(ValueError):
            scenario.with_options(eta=0.0)
        with pytest.raises(ValueError):
            scenario.with_options(outlier_rate=1.5)
        with pytest.raises(ValueError):
            SimScenario(10, 10, (1.0, 1.0), (1.0,), BlockArray.uniform(3, 1, 5))


class TestGenerator:
    def test_round_half_up(self):
        assert [round_half_up(x) for x in (0.5, 1.5, 2.5, 2.4999)] == [1, 2, 3, 2]

    def test_sample_levels_distribution(self):
        probs = np.array([0.1, 0.2, 0.3, 0.25, 0.15])
        rng = np.random.default_rng(0)
        draws = sample_levels(np.broadcast_to(probs, (100_000, 5)), rng)
        observed = np.bincount(draws, minlength=5)
        result = stats.chisquare(observed, probs * len(draws))
        assert result.pvalue > 0.01

    def test_generated_frequencies_follow_blocks(self):
        scenario = builtin_scenario(5).with_options(outlier_rate=0.0, eta=1.0, seed=4)
        n_draws = 0
        for replicate in range(2):
            output = generate(scenario.with_options(seed=4 + replicate))
            levels = output.levels
            z_u, z_i = output.true_user_clusters, output.true_item_clusters
            cell = (z_u[:, None] == 2) & (z_i[None, :] == 2)
            observed = np.bincount(levels[cell], minlength=5)
            n_draws += observed.sum()
            expected = scenario.mu.mu[2, 2] * observed.sum()
            assert stats.chisquare(observed, expected).pvalue > 0.01
        assert n_draws > 0

    def test_global_delta_matches_exact_marginal(self):
        scenario = builtin_scenario(5).with_options(delta_mode=DeltaMode.global_, outlier_rate=0.0, eta=1.0)
        output = generate(scenario)
        observed = np.bincount(output.levels.ravel(), minlength=5)
        expected = exact_marginal(scenario) * observed.sum()
        assert stats.chisquare(observed, expected).pvalue > 0.01

    def test_outlier_counts_are_exact(self):
        rng = np.random.default_rng(1)
        levels = np.array([[4, 4, 4, 0], [4, 0, 0, 2], [0, 0, 4, 4]])
        z_users = np.array([1, 1, 0])
        z_items = np.array([1, 1, 0, 0])
        report = inject_outliers(levels, z_users, z_items, K=2, L=2, S=5, rate=0.5, rng=rng)
        # alto: usuarios {0,1} x ítems {0,1} con nivel 4 -> (0,0), (0,1), (1,0)
        assert (report.eligible_high, report.flipped_high) == (3, 2)
        # bajo: usuario 2 x ítems {2,3} con nivel 0 -> ninguno
        assert (report.eligible_low, report.flipped_low) == (0, 0)
        assert int(np.sum(levels[:2, :2] == 0)) == 1 + 2

    def test_outlier_rate_zero_and_one(self):
        base = builtin_scenario(5).with_options(eta=1.0, seed=2)
        untouched = generate(base.with_options(outlier_rate=0.0))
        assert untouched.outliers.flipped_high == untouched.outliers.flipped_low == 0
        flipped = generate(base.with_options(outlier_rate=1.0))
        assert flipped.outliers.flipped_high == flipped.outliers.eligible_high
        assert flipped.outliers.flipped_low == flipped.outliers.eligible_low

    def test_observation_mask_modes(self):
        rng = np.random.default_rng(0)
        exact = observation_mask((300, 200), 0.2, MaskingMode.exact, rng)
        assert exact.sum() == 12_000
        bernoulli = observation_mask((300, 200), 0.2, MaskingMode.bernoulli, rng)
        assert abs(bernoulli.mean() - 0.2) < 0.01

    def test_generate_partitions_all_pairs(self):
        output = generate(builtin_scenario(5, eta=0.2, seed=3))
        assert len(output.observed) + len(output.hidden) == 300 * 200
        observed = set(zip(output.observed.users.tolist(), output.observed.items.tolist()))
        hidden = set(zip(output.hidden.users.tolist(), output.hidden.items.tolist()))
        assert not observed & hidden
        np.testing.assert_array_equal(output.levels[output.observed.users, output.observed.items],
                                      output.observed.levels)

    def test_eta_one_leaves_nothing_hidden(self):
        output = generate(builtin_scenario(5, eta=1.0))
        assert len(output.hidden) == 0

    def test_generation_is_reproducible(self):
        scenario = builtin_scenario(7, seed=9)
        first, second = generate(scenario), generate(scenario)
        np.testing.assert_array_equal(first.levels, second.levels)
        np.testing.assert_array_equal(first.observed.users, second.observed.users)


class TestScenarioIO:
    def test_export_import_is_bit_exact(self, tmp_path):
        scenario = builtin_scenario(9, eta=0.35, outlier_rate=0.05, seed=12, masking=MaskingMode.exact)
        path = str(tmp_path / "scenario.txt")
        export_scenario(scenario, path)
        loaded = import_scenario(path)
        np.testing.assert_array_equal(loaded.mu.mu, scenario.mu.mu)
        assert loaded.alpha == scenario.alpha
        assert (loaded.eta, loaded.outlier_rate, loaded.seed) == (0.35, 0.05, 12)
        assert loaded.masking == MaskingMode.exact
        assert loaded.notes == scenario.notes

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            import_scenario(str(tmp_path / "nada.txt"))

    def test_bad_number_reports_line(self, tmp_path):
        path = tmp_path / "scenario.txt"
        export_scenario(builtin_scenario(5), str(path))
        lines = path.read_text(encoding="utf-8").splitlines()
        index = next(n for n, line in enumerate(lines) if line.startswith("[mu level=2]")) + 1
        lines[index] = "0.1 abc 0.3"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(ValueError, match=f"Línea {index + 1}"):
            import_scenario(str(path))

    def test_missing_keys(self, tmp_path):
        path = tmp_path / "scenario.txt"
        path.write_text("n_users = 3\n", encoding="utf-8")
        with pytest.raises(ValueError, match="Faltan claves"):
            import_scenario(str(path))
