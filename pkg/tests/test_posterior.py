#!/usr/bin/env python3
"""
Tests for grid posteriors, annealed importance sampling and posterior summaries
"""
import numpy as np
import pytest
from scipy.stats import norm

from datasets import generate_synthetic, load_dataset
from estimation import Dataset
from models.model_interface import ParameterError
from posterior import (
    AnnealingSchedule,
    PosteriorSampleSet,
    WeightCollapseError,
    ais_posterior,
    count_modes,
    credible_interval,
    grid_log_likelihoods,
    grid_points,
    grid_posterior_1d,
    marginal_cdf,
    monte_carlo_standard_error,
    update_grid_log_posterior,
    weighted_mean,
    weighted_median,
)

SHORT_SCHEDULE = AnnealingSchedule(np.array([0.0, 0.25, 0.5, 1.0]), metropolis_updates=2)


def equal_weight_samples(values, name="x"):
    values = np.asarray(values, dtype=float)
    return PosteriorSampleSet((name,), values.reshape(-1, 1), np.zeros(values.size))


class TestSchedule:

    def test_default_shape(self):
        schedule = AnnealingSchedule.default()
        assert len(schedule) == 200
        assert schedule.gammas[0] == 0.0
        assert schedule.gammas[-1] == 1.0
        assert np.all(np.diff(schedule.gammas) >= 0)
        assert schedule.gammas[39] < 0.01 <= schedule.gammas[40]

    @pytest.mark.parametrize("gammas", [[0.0, 0.9], [0.0, 0.6, 0.4, 1.0], [-0.1, 1.0], [0.5]])
    def test_invalid_temperatures(self, gammas):
        with pytest.raises(ValueError):
            AnnealingSchedule(np.array(gammas))

    def test_needs_updates(self):
        with pytest.raises(ValueError):
            AnnealingSchedule(np.array([0.0, 1.0]), metropolis_updates=0)


class TestGrid:

    def test_point_count(self):
        assert len(grid_points(0.0, 1.0, 0.25)) == 5
        assert len(grid_points(0.0, 10.0, 0.01)) == 1001

    def test_bad_grids(self):
        with pytest.raises(ValueError):
            grid_points(0.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            grid_points(2.0, 1.0, 0.1)

    def test_single_point(self, registry, demo_manifest):
        data = load_dataset(demo_manifest)
        posterior = grid_posterior_1d(registry.resolve("Poisson-CH"), data, 1.0, 1.0, 0.5)
        assert posterior == [(1.0, pytest.approx(1.0))]

    def test_empty_dataset_is_flat(self, registry):
        posterior = grid_posterior_1d(registry.resolve("QRE"), Dataset({}, ()), 0.0, 2.0, 0.5)
        assert [p for _, p in posterior] == pytest.approx([0.2] * 5)

    def test_needs_one_parameter(self, registry, demo_manifest):
        with pytest.raises(ParameterError):
            grid_posterior_1d(registry.resolve("QLk"), load_dataset(demo_manifest), 0.0, 1.0, 0.5)

    def test_sequential_updates_match_batch(self, registry, demo_manifest):
        data = load_dataset(demo_manifest)
        model = registry.resolve("Poisson-CH")
        values = grid_points(0.0, 3.0, 0.25)
        first = data.restrict_games(["prisoners_dilemma", "stag_hunt"])
        second = data.restrict_games(["matching_pennies", "battle_of_sexes", "dominance_chain_3x3"])
        log_post = np.full(values.size, -np.log(values.size))
        log_post = update_grid_log_posterior(log_post, model, values, first)
        log_post = update_grid_log_posterior(log_post, model, values, second)
        batch = grid_posterior_1d(model, data, 0.0, 3.0, 0.25)
        assert np.exp(log_post) == pytest.approx([p for _, p in batch])

    def test_zero_parameter_model_rejected(self, registry, demo_manifest):
        data = load_dataset(demo_manifest)
        model = registry.resolve("uniform")
        with pytest.raises(ParameterError):
            grid_log_likelihoods(model, data, np.array([0.0]))


class TestSampleSet:

    def test_collapsed_weights(self):
        with pytest.raises(WeightCollapseError):
            PosteriorSampleSet(("x",), np.array([[1.0], [2.0]]), np.array([-np.inf, -np.inf]))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            PosteriorSampleSet(("x", "y"), np.array([[1.0], [2.0]]), np.zeros(2))

    def test_equal_weights(self):
        samples = equal_weight_samples([1.0, 2.0, 3.0, 4.0])
        assert samples.weights == pytest.approx([0.25] * 4)
        assert samples.ess == pytest.approx(4.0)

    def test_unknown_column(self):
        with pytest.raises(ParameterError):
            equal_weight_samples([1.0]).column("y")

    def test_frame(self):
        frame = equal_weight_samples([1.0, 2.0]).to_frame()
        assert list(frame.columns) == ["sample", "parameter", "value", "weight"]
        assert frame["weight"].sum() == pytest.approx(1.0)

    def test_from_grid_drops_zero_mass(self):
        samples = PosteriorSampleSet.from_grid("tau", [0.0, 1.0, 2.0], [0.0, 0.5, 0.5])
        assert samples.method == "grid"
        assert samples.weights == pytest.approx([0.0, 0.5, 0.5])


class TestSummaries:

    def test_cdf_of_three_points(self):
        table = marginal_cdf(equal_weight_samples([3.0, 1.0, 2.0]), "x")
        assert table.at(2.0) == pytest.approx(2 / 3)
        assert table.at(0.5) == 0.0
        assert table.at(3.0) == 1.0

    def test_cdf_of_identical_samples(self):
        table = marginal_cdf(equal_weight_samples([1.5] * 6), "x")
        assert table.values.tolist() == [1.5]
        assert table.at(1.4) == 0.0 and table.at(1.5) == 1.0

    def test_cdf_is_monotone(self):
        rng = np.random.default_rng(0)
        samples = PosteriorSampleSet(("x",), rng.normal(size=(50, 1)), rng.normal(size=50))
        assert np.all(np.diff(marginal_cdf(samples, "x").cdf) >= 0)

    def test_point_mass_interval(self):
        assert credible_interval(equal_weight_samples([0.7] * 5), "x", 0.95) == (0.7, 0.7)

    def test_uniform_grid_interval(self):
        values = grid_points(0.0, 1.0, 0.01)
        samples = PosteriorSampleSet.from_grid("x", values, np.full(values.size, 1.0 / values.size))
        lower, upper = credible_interval(samples, "x", 0.5)
        assert lower == pytest.approx(0.25, abs=0.01)
        assert upper == pytest.approx(0.75, abs=0.01)
        assert weighted_median(samples, "x") == pytest.approx(0.5, abs=0.01)

    @pytest.mark.parametrize("mass", [0.0, 1.0, 1.5])
    def test_interval_mass_range(self, mass):
        with pytest.raises(ValueError):
            credible_interval(equal_weight_samples([1.0, 2.0]), "x", mass)

    def test_mean_and_standard_error(self):
        samples = equal_weight_samples([1.0, 2.0, 3.0, 4.0])
        assert weighted_mean(samples, "x") == pytest.approx(2.5)
        assert monte_carlo_standard_error(samples, "x") == pytest.approx(np.sqrt(1.25 / 4))

    def test_modes(self):
        quantiles = norm.ppf(np.linspace(0.01, 0.99, 200))
        assert count_modes(equal_weight_samples(quantiles), "x") == 1
        assert count_modes(equal_weight_samples(np.concatenate([quantiles, quantiles + 10.0])), "x") == 2
        assert count_modes(equal_weight_samples([2.0] * 3), "x") == 1


class TestAis:

    def test_empty_dataset_gives_equal_weights(self, registry):
        samples = ais_posterior(registry.resolve("ah-QCH-sp"), Dataset({}, ()), 20, schedule=SHORT_SCHEDULE, seed=3)
        assert samples.weights == pytest.approx([1 / 20] * 20)
        assert samples.ess == pytest.approx(20.0)
        assert samples.names == ("tau", "epsilon", "lambda")

    def test_same_seed_same_samples(self, registry, demo_manifest):
        data = load_dataset(demo_manifest)
        model = registry.resolve("Poisson-CH")
        a = ais_posterior(model, data, 8, schedule=SHORT_SCHEDULE, seed=11)
        b = ais_posterior(model, data, 8, schedule=SHORT_SCHEDULE, seed=11, max_workers=4)
        assert np.array_equal(a.samples, b.samples)
        assert np.array_equal(a.log_weights, b.log_weights)

    def test_samples_are_valid(self, registry, demo_manifest):
        model = registry.resolve("QLk")
        samples = ais_posterior(model, load_dataset(demo_manifest), 6, schedule=SHORT_SCHEDULE, seed=2)
        for row in samples.samples:
            model.vector(row)
        assert 0.0 <= samples.acceptance_rate <= 1.0

    def test_acceptance_rate_in_band(self, registry, demo_manifest):
        samples = ais_posterior(
            registry.resolve("Poisson-CH"), load_dataset(demo_manifest), 8,
            schedule=AnnealingSchedule.default(10, 40), seed=6,
        )
        assert 0.2 <= samples.acceptance_rate <= 0.8

    def test_needs_parameters(self, registry, demo_manifest):
        with pytest.raises(ParameterError):
            ais_posterior(registry.resolve("uniform"), load_dataset(demo_manifest), 5)

    def test_needs_samples(self, registry, demo_manifest):
        with pytest.raises(ValueError):
            ais_posterior(registry.resolve("QRE"), load_dataset(demo_manifest), 0)


@pytest.mark.slow
def test_grid_recovers_poisson_rate(registry, games):
    model = registry.resolve("Poisson-CH")
    data = generate_synthetic(model, model.vector(tau=0.8), list(games.values()), 2000, seed=31)
    posterior = grid_posterior_1d(model, data, 0.0, 10.0, 0.01)
    mode = max(posterior, key=lambda point: point[1])[0]
    assert abs(mode - 0.8) <= 0.05
    samples = PosteriorSampleSet.from_grid("tau", *zip(*posterior))
    lower, upper = credible_interval(samples, "tau", 0.99)
    assert lower <= 0.8 <= upper


@pytest.mark.slow
def test_ais_seeds_agree(registry, demo_manifest):
    model = registry.resolve("Poisson-CH")
    data = load_dataset(demo_manifest)
    schedule = AnnealingSchedule.default(uniform_count=10, geometric_count=40, metropolis_updates=3)
    a = ais_posterior(model, data, 200, schedule=schedule, seed=1)
    b = ais_posterior(model, data, 200, schedule=schedule, seed=2)
    spread = np.hypot(monte_carlo_standard_error(a, "tau"), monte_carlo_standard_error(b, "tau"))
    assert abs(weighted_mean(a, "tau") - weighted_mean(b, "tau")) < 3 * spread


@pytest.mark.slow
def test_grid_and_ais_agree(registry, games):
    model = registry.resolve("Poisson-CH")
    data = generate_synthetic(model, model.vector(tau=1.0), list(games.values()), 300, seed=5)
    grid = grid_posterior_1d(model, data, 0.0, 10.0, 0.01)
    values = np.array([v for v, _ in grid])
    grid_cdf = np.cumsum([p for _, p in grid])
    ais = marginal_cdf(ais_posterior(model, data, 1000, seed=8), "tau")
    distance = max(abs(ais.at(v) - f) for v, f in zip(values, grid_cdf))
    assert distance <= 0.05


@pytest.mark.slow
def test_credible_intervals_are_calibrated(registry, games):
    model = registry.resolve("Poisson-CH")
    chosen = [games[name] for name in ("prisoners_dilemma", "stag_hunt", "dominance_chain_3x3", "asymmetric_3x3")]
    covered = 0
    for replication in range(100):
        data = generate_synthetic(model, model.vector(tau=1.0), chosen, 120, seed=1000 + replication)
        samples = PosteriorSampleSet.from_grid("tau", *zip(*grid_posterior_1d(model, data, 0.0, 6.0, 0.02)))
        lower, upper = credible_interval(samples, "tau", 0.99)
        covered += lower <= 1.0 <= upper
    assert covered >= 95


@pytest.mark.slow
@pytest.mark.parametrize("name", ["QRE", "QLk", "ah-QCH-sp"])
def test_default_proposal_acceptance_rate(registry, demo_manifest, name):
    samples = ais_posterior(registry.resolve(name), load_dataset(demo_manifest), 50, seed=13, max_workers=4)
    assert 0.2 <= samples.acceptance_rate <= 0.8
