#!/usr/bin/env python3
"""
Tests for the behavioral models, the parameter layer and the model registry
"""
import math

import numpy as np
import pytest

import oracles
from game import Game
from models.levels import poisson_levels, spike_poisson_levels, tabular_levels
from models.model_interface import ModelSpec, ParameterError, ParameterSpace, PRECISION, PROPORTION, PROBABILITY
from models.registry import ModelRegistry, UnknownModelError
from priors import PriorSpec, ProposalSpec


def dominant_game():
    """Symmetric 2x2 game where action 0 strictly dominates for both players"""
    return Game("dominant", (("d", "x"), ("d", "x")), ([[2, 1], [1, 0]], [[2, 1], [1, 0]]))


class TestParameterSpace:

    def setup_method(self):
        self.space = ParameterSpace.build(
            (PROPORTION, ["alpha_1", "alpha_2"]),
            (PRECISION, ["lambda"]),
            (PROBABILITY, ["epsilon"]),
        )

    def test_vector_by_name(self):
        theta = self.space.vector({"epsilon": 0.1, "lambda": 2.0, "alpha_2": 0.2, "alpha_1": 0.3})
        assert theta.names == ("alpha_1", "alpha_2", "lambda", "epsilon")
        assert theta["lambda"] == 2.0

    def test_missing_and_extra_names(self):
        with pytest.raises(ParameterError, match="missing"):
            self.space.vector({"alpha_1": 0.3, "alpha_2": 0.2, "lambda": 1.0})
        with pytest.raises(ParameterError, match="unexpected"):
            self.space.vector({"alpha_1": 0.3, "alpha_2": 0.2, "lambda": 1.0, "epsilon": 0.1, "tau": 1.0})

    @pytest.mark.parametrize("values", [
        [0.7, 0.5, 1.0, 0.1],
        [0.3, 0.2, -1.0, 0.1],
        [0.3, 0.2, 1.0, 1.5],
        [0.3, 0.2, np.inf, 0.1],
    ])
    def test_constraint_violations(self, values):
        with pytest.raises(ParameterError):
            self.space.vector(values)

    def test_unconstrained_round_trip(self):
        values = np.array([0.3, 0.2, 2.5, 0.1])
        z = self.space.to_unconstrained(values)
        assert np.allclose(self.space.from_unconstrained(z), values)

    def test_any_unconstrained_point_is_valid(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            values = self.space.from_unconstrained(rng.normal(scale=5.0, size=4))
            self.space.vector(values)

    def test_unknown_parameter_lookup(self):
        theta = self.space.vector([0.3, 0.2, 1.0, 0.1])
        with pytest.raises(ParameterError):
            theta["tau"]
        assert theta.get("tau") is None


class TestModelSpec:

    def test_variant_name(self):
        spec = ModelSpec("VariantGrid", 3, "CH", "homogeneous", "accurate")
        assert spec.variant_name == "ah-QCH3"

    def test_axes_only_for_variants(self):
        with pytest.raises(ParameterError):
            ModelSpec("QRE", population_beliefs="CH")

    def test_poisson_needs_ah(self):
        with pytest.raises(ParameterError):
            ModelSpec("VariantGrid", "poisson", "CH", "inhomogeneous", "accurate")

    def test_unknown_family(self):
        with pytest.raises(ParameterError):
            ModelSpec("Bogus")


class TestLevels:

    def test_tabular_remainder_is_level_zero(self):
        levels = tabular_levels([0.3, 0.2])
        assert np.allclose(levels.masses, [0.5, 0.3, 0.2])

    def test_poisson_truncation(self):
        levels = poisson_levels(1.0)
        assert levels.masses.sum() == pytest.approx(1.0)
        assert levels.max_level < 20
        assert levels.masses[0] == pytest.approx(math.exp(-1.0), abs=1e-6)

    def test_zero_rate_is_all_level_zero(self):
        assert poisson_levels(0.0).masses.tolist() == [1.0]

    def test_spike_adds_mass_at_zero(self):
        levels = spike_poisson_levels(1.5, 0.3)
        assert levels.masses[0] == pytest.approx(0.3 + 0.7 * math.exp(-1.5), abs=1e-6)

    def test_spike_bounds(self):
        with pytest.raises(ParameterError):
            spike_poisson_levels(1.0, 1.2)
        with pytest.raises(ParameterError):
            poisson_levels(-0.5)


class TestLk:

    def test_all_level_zero_is_uniform(self, registry, games):
        model = registry.resolve("Lk")
        theta = model.vector(alpha_1=0.0, alpha_2=0.0, epsilon_1=0.3, epsilon_2=0.3)
        assert np.allclose(model.predict(games["dominance_chain_3x3"], 1, theta), 1 / 3)

    def test_hand_evaluation(self, registry):
        model = registry.resolve("Lk")
        theta = model.vector(alpha_1=0.3, alpha_2=0.2, epsilon_1=0.1, epsilon_2=0.1)
        assert model.predict(dominant_game(), 1, theta)[0] == pytest.approx(0.70)

    def test_follows_dominance_chain(self, registry, games):
        model = registry.resolve("Lk")
        theta = model.vector(alpha_1=0.0, alpha_2=1.0, epsilon_1=0.0, epsilon_2=0.0)
        row, column = model.predict_profile(games["dominance_chain_3x3"], theta)
        assert np.allclose(row, [1.0, 0.0, 0.0])
        assert np.allclose(column, [1.0, 0.0, 0.0])

    def test_indifferent_level_plays_uniform(self, registry, games):
        model = registry.resolve("Lk")
        theta = model.vector(alpha_1=1.0, alpha_2=0.0, epsilon_1=0.4, epsilon_2=0.0)
        assert np.allclose(model.predict(games["matching_pennies"], 1, theta), [0.5, 0.5])


class TestPoissonCh:

    def test_zero_rate_is_uniform(self, registry, games):
        model = registry.resolve("Poisson-CH")
        assert np.allclose(model.predict(games["asymmetric_3x3"], 2, model.vector(tau=0.0)), 1 / 3)

    def test_dominant_action_closed_form(self, registry):
        model = registry.resolve("Poisson-CH")
        expected = math.exp(-1) / 2 + (1 - math.exp(-1))
        assert model.predict(dominant_game(), 1, model.vector(tau=1.0))[0] == pytest.approx(expected, abs=1e-6)

    @pytest.mark.parametrize("tau", [0.5, 1.5, 4.0])
    def test_matching_pennies_uniform(self, registry, games, tau):
        model = registry.resolve("Poisson-CH")
        assert np.allclose(model.predict(games["matching_pennies"], 1, model.vector(tau=tau)), [0.5, 0.5])

    @pytest.mark.parametrize("name", ["stag_hunt", "dominance_chain_3x3", "asymmetric_3x3", "chicken"])
    def test_agrees_with_oracle(self, registry, games, name):
        model = registry.resolve("Poisson-CH")
        game = games[name]
        for player in (1, 2):
            expected = oracles.poisson_ch(game, player, 1.3)
            assert np.allclose(model.predict(game, player, model.vector(tau=1.3)), expected, atol=1e-10)


class TestQlk:

    def test_zero_precisions_uniform(self, registry, games):
        model = registry.resolve("QLk")
        theta = model.vector([0.3, 0.4, 0.0, 0.0, 0.0])
        assert np.allclose(model.predict(games["asymmetric_3x3"], 1, theta), 1 / 3)

    def test_level_one_logit_odds(self, registry):
        model = registry.resolve("QLk")
        game = Game("odds", (("a", "b"), ("c", "d")), ([[1, 1], [0, 0]], [[0, 0], [0, 0]]))
        theta = model.vector([1.0, 0.0, math.log(9), 0.0, 0.0])
        assert np.allclose(model.predict(game, 1, theta), [0.9, 0.1])

    def test_level_two_with_uninformed_belief(self, registry, games):
        model = registry.resolve("QLk")
        game = games["asymmetric_3x3"]
        level_two = model.vector([0.0, 1.0, 0.7, 1.8, 0.0])
        level_one = model.vector([1.0, 0.0, 1.8, 1.8, 0.0])
        assert np.allclose(model.predict(game, 1, level_two), model.predict(game, 1, level_one))

    def test_agrees_with_oracle(self, registry, games):
        model = registry.resolve("QLk")
        game = games["asymmetric_3x3"]
        theta = model.vector([0.25, 0.45, 0.6, 1.2, 0.9])
        for player in (1, 2):
            expected = oracles.qlk(game, player, 0.25, 0.45, 0.6, 1.2, 0.9)
            assert np.allclose(model.predict(game, player, theta), expected, atol=1e-10)


class TestSpikePoisson:

    def test_all_spike_is_uniform(self, registry, games):
        model = registry.resolve("ah-QCH-sp")
        theta = model.vector(tau=2.0, epsilon=1.0, **{"lambda": 3.0})
        assert np.allclose(model.predict(games["chicken"], 1, theta), [0.5, 0.5])

    def test_zero_precision_is_uniform(self, registry, games):
        model = registry.resolve("ah-QCH-sp")
        theta = model.vector(tau=2.0, epsilon=0.2, **{"lambda": 0.0})
        assert np.allclose(model.predict(games["asymmetric_3x3"], 2, theta), 1 / 3)

    @pytest.mark.parametrize("name", ["dominance_chain_3x3", "asymmetric_3x3", "battle_of_sexes"])
    def test_agrees_with_oracle(self, registry, games, name):
        model = registry.resolve("ah-QCH-sp")
        game = games[name]
        theta = model.vector(tau=1.5, epsilon=0.3, **{"lambda": 0.2})
        for player in (1, 2):
            expected = oracles.spike_poisson_qch(game, player, 1.5, 0.3, 0.2)
            assert np.allclose(model.predict(game, player, theta), expected, atol=1e-10)

    def test_no_spike_matches_poisson_variant(self, registry, games):
        spike = registry.resolve("ah-QCH-sp")
        plain = registry.resolve("ah-QCHp")
        game = games["stag_hunt"]
        a = spike.predict(game, 1, spike.vector(tau=1.2, epsilon=0.0, **{"lambda": 0.8}))
        b = plain.predict(game, 1, plain.vector(tau=1.2, **{"lambda": 0.8}))
        assert np.allclose(a, b, atol=1e-12)


class TestNee:

    def test_full_error_is_uniform(self, registry, games):
        model = registry.resolve("NEE")
        assert np.allclose(model.predict(games["prisoners_dilemma"], 1, model.vector(epsilon=1.0)), [0.5, 0.5])

    def test_prisoners_dilemma(self, registry, games):
        model = registry.resolve("NEE")
        probs = model.predict(games["prisoners_dilemma"], 1, model.vector(epsilon=0.2))
        assert probs[1] == pytest.approx(0.9)

    @pytest.mark.parametrize("epsilon", [0.0, 0.35, 0.8])
    def test_matching_pennies(self, registry, games, epsilon):
        model = registry.resolve("NEE")
        assert np.allclose(model.predict(games["matching_pennies"], 2, model.vector(epsilon=epsilon)), [0.5, 0.5])

    def test_selected_equilibrium(self, registry, games):
        model = registry.resolve("NEE")
        theta = model.vector(epsilon=0.0)
        picks = [model.predict_selected(games["stag_hunt"], 1, theta, i) for i in range(3)]
        assert any(np.allclose(p, [1.0, 0.0]) for p in picks)
        assert any(np.allclose(p, [0.0, 1.0]) for p in picks)

    def test_bad_selection(self, registry, games):
        from game import GameError

        model = registry.resolve("NEE")
        with pytest.raises(GameError):
            model.predict_selected(games["prisoners_dilemma"], 1, model.vector(epsilon=0.1), 4)


class TestUniformAndQre:

    def test_uniform_has_no_parameters(self, registry, games):
        model = registry.resolve("uniform")
        assert model.parameter_count == 0
        assert np.allclose(model.predict(games["rock_paper_scissors"], 1, model.vector([])), 1 / 3)

    def test_qre_model_uses_solver(self, registry, games):
        from qre import solve_qre

        model = registry.resolve("QRE")
        row, column = model.predict_profile(games["stag_hunt"], model.vector([1.5]))
        profile = solve_qre(games["stag_hunt"], 1.5)
        assert np.allclose(row, profile.row) and np.allclose(column, profile.column)

    def test_wrong_vector_rejected(self, registry, games):
        qre_model = registry.resolve("QRE")
        lk_theta = registry.resolve("Lk").vector([0.3, 0.2, 0.1, 0.1])
        with pytest.raises(ParameterError):
            qre_model.predict(games["stag_hunt"], 1, lk_theta)

    def test_predictions_are_distributions(self, registry, games):
        for name in ("Lk", "Poisson-CH", "QLk", "ah-QCH-sp", "NEE", "gi-QCH3"):
            model = registry.resolve(name)
            theta = model.vector(PriorSpec().sample(model.space, np.random.default_rng(7)))
            for game in games.values():
                for player in (1, 2):
                    probs = model.predict(game, player, theta)
                    assert probs.shape == (game.num_actions(player),)
                    assert np.all(probs >= 0) and probs.sum() == pytest.approx(1.0)


class TestRegistry:

    def test_discovers_every_family(self, registry):
        names = set(registry.list_models())
        assert {"uniform", "QRE", "Lk", "Poisson-CH", "QLk", "ah-QCH-sp", "NEE", "ah-QCH3"} <= names
        assert registry.get_family_status()["total_failed"] == 0

    def test_parameter_counts(self, registry):
        assert registry.resolve("QRE").parameter_count == 1
        assert registry.resolve("Lk").parameter_count == 4
        assert registry.resolve("Poisson-CH").parameter_count == 1
        assert registry.resolve("QLk").parameter_count == 5
        assert registry.resolve("ah-QCH-sp").parameter_count == 3
        assert registry.resolve("NEE").parameter_count == 1

    def test_unlisted_variant_names_resolve(self, registry):
        assert registry.resolve("gi-QCH4").parameter_count > 0
        assert "ah-QLk9" in registry

    def test_unknown_name(self, registry):
        with pytest.raises(UnknownModelError):
            registry.resolve("level-zero-only")
        assert "gi-QCH9" not in registry

    def test_disabled_family(self):
        registry = ModelRegistry(family_config={"nee": {"enabled": False}})
        registry.discover()
        assert "NEE" not in registry
        assert "QRE" in registry

    def test_resolve_is_cached(self, registry):
        assert registry.resolve("QLk") is registry.resolve("QLk")

    def test_info(self, registry):
        info = registry.resolve("QLk").get_info()
        assert info["parameters"] == ["alpha_1", "alpha_2", "lambda_1", "lambda_2", "lambda_1(2)"]


class TestPriors:

    def test_samples_lie_in_support(self, registry):
        prior = PriorSpec()
        rng = np.random.default_rng(11)
        for name in ("QLk", "ah-QCH-sp", "gi-QLk3", "NEE"):
            space = registry.resolve(name).space
            for _ in range(10):
                values = prior.sample(space, rng)
                space.vector(values)
                assert np.isfinite(prior.log_density(space, values))

    def test_rate_outside_flat_prior(self, registry):
        space = registry.resolve("Poisson-CH").space
        assert PriorSpec().log_density(space, np.array([12.0])) == -np.inf
        assert PriorSpec().log_density(space, np.array([5.0])) == pytest.approx(-math.log(10.0))

    def test_proposal_stays_valid(self, registry):
        proposal = ProposalSpec()
        rng = np.random.default_rng(5)
        space = registry.resolve("ah-QCH-sp").space
        current = np.array([1.5, 0.3, 0.2])
        for _ in range(10):
            candidate = proposal.propose(space, current, rng)
            space.vector(candidate)
            assert np.isfinite(proposal.log_density(space, candidate, current))

    def test_proposal_scaling(self):
        proposal = ProposalSpec()
        wider = proposal.scaled(2.0)
        assert wider.precision_step == pytest.approx(0.4)
        assert wider.proportion_concentration == pytest.approx(5.0)

    def test_adaptation_moves_toward_target(self):
        proposal = ProposalSpec()
        assert proposal.adapt(1.0, 1.0) > 1.0
        assert proposal.adapt(1.0, 0.0) < 1.0
        assert proposal.adapt(1.0, 0.5) == pytest.approx(1.0)
        assert ProposalSpec(target_acceptance=None).adapt(1.0, 0.0) == 1.0

    def test_bad_target(self):
        with pytest.raises(ValueError):
            ProposalSpec(target_acceptance=1.5)
