import math

import numpy as np
import pytest

from hybrid_teleport import fock, gadgets, states, teleport
from hybrid_teleport.errors import DimensionMismatch, MaxRoundsExceeded
from hybrid_teleport.gadgets import ECS_VERDICT, INCONCLUSIVE, MIXTURE_VERDICT
from hybrid_teleport.teleport import MeasurementModel

DIM2 = teleport.default_dim(2.0)


@pytest.fixture(scope="module")
def ghz2():
    return gadgets.build_ghz(2.0, DIM2)


class TestVerifyZZ:
    @pytest.mark.parametrize("model", list(MeasurementModel))
    def test_ecs_phi(self, model):
        assert gadgets.verify_zz(states.ecs("phi+", 2.0, DIM2), 2.0, model) >= 1 - 1e-3

    def test_ecs_psi(self):
        assert gadgets.verify_zz(states.ecs("psi+", 2.0, DIM2), 2.0) == pytest.approx(-1.0, abs=1e-3)

    def test_mixture_same_as_ecs(self):
        zz_mix = gadgets.verify_zz(teleport.classical_channel(2.0, DIM2), 2.0)
        assert zz_mix == pytest.approx(1.0, abs=1e-3)

    def test_rejects_other_modes(self):
        with pytest.raises(DimensionMismatch):
            gadgets.verify_zz(teleport.prepare_total(teleport.UnknownQubit(0), 1.0), 1.0)


class TestVerifyParity:
    def test_ecs(self):
        corr, cond = gadgets.verify_parity(states.ecs("phi+", 2.0, DIM2))
        assert corr == pytest.approx(1.0, abs=1e-9)
        assert fock.fidelity(states.scs(1, 2.0, DIM2, "B"), cond) >= 1 - 1e-9

    def test_mixture(self):
        corr, cond = gadgets.verify_parity(teleport.classical_channel(2.0, DIM2))
        assert corr == pytest.approx(math.exp(-16), rel=1e-6)
        assert fock.wigner_point(cond, 0) == pytest.approx(2 / math.pi * math.exp(-8), rel=1e-3)

    def test_ecs_fringe(self):
        _, cond = gadgets.verify_parity(states.ecs("phi+", 2.0, DIM2))
        assert fock.wigner_point(cond, 0) == pytest.approx(2 / math.pi, abs=1e-9)


class TestVerdict:
    @pytest.mark.parametrize("alpha", [1.5, 2.0, 2.5])
    def test_discrimination(self, alpha):
        dim = teleport.default_dim(alpha)
        assert gadgets.verify_ecs(states.ecs("phi+", alpha, dim), alpha).verdict == ECS_VERDICT
        assert gadgets.verify_ecs(teleport.classical_channel(alpha, dim), alpha).verdict == MIXTURE_VERDICT

    def test_pure_function_of_stats(self):
        assert gadgets.verdict_for(0.95, 0.95) == ECS_VERDICT
        assert gadgets.verdict_for(0.95, 0.05) == MIXTURE_VERDICT
        assert gadgets.verdict_for(0.5, 0.95) == INCONCLUSIVE
        assert gadgets.verdict_for(0.95, 0.5) == INCONCLUSIVE


class TestGhz:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_two_forms_agree(self, alpha):
        dim = teleport.default_dim(alpha)
        built = gadgets.build_ghz(alpha, dim)
        ecs_form = gadgets.ghz_ecs_form(alpha, dim)
        cat_form = gadgets.ghz_cat_form(alpha, dim)
        assert fock.fidelity(ecs_form, built) == pytest.approx(1.0, abs=1e-9)
        assert fock.fidelity(cat_form, built) == pytest.approx(1.0, abs=1e-9)
        assert fock.fidelity(ecs_form, cat_form) == pytest.approx(1.0, abs=1e-9)

    def test_unit_cats_would_not_match(self):
        # equal-weight unit-norm cat branches differ from the true state at small alpha
        alpha, dim = 0.5, teleport.default_dim(0.5)
        ep, em = states.scs(1, alpha, dim, "B"), states.scs(-1, alpha, dim, "B")
        unit = fock.tensor(gadgets.bell_qubits("++"), ep, ep.relabel({"B": "C"})) + fock.tensor(
            gadgets.bell_qubits("--"), em, em.relabel({"B": "C"})
        )
        assert fock.fidelity(unit, gadgets.build_ghz(alpha, dim)) < 1 - 1e-3

    def test_alpha0_degenerates_to_product(self):
        # with both cavities in vacuum the controlled phases act trivially
        s = gadgets.build_ghz(0.0, 10)
        expected = fock.tensor(gadgets.bell_qubits("++"), states.vacuum(10, "B"), states.vacuum(10, "C"))
        assert fock.fidelity(expected, s) == pytest.approx(1.0, abs=1e-12)
        assert fock.von_neumann_entropy(fock.partial_trace(s, "A")) == pytest.approx(0.0, abs=1e-10)


class TestRounds:
    def test_success_channel(self, ghz2):
        probs = gadgets.round_probabilities(ghz2)
        post = probs[(0, 1)][1].normalize()
        assert fock.fidelity(states.ecs("psi+", 2.0, DIM2), post) >= 1 - 1e-6

    def test_retry_channel(self, ghz2):
        post = gadgets.round_probabilities(ghz2)[(0, 0)][1].normalize()
        assert fock.fidelity(states.ecs("phi+", 2.0, DIM2), post) >= 1 - 1e-6

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_success_probability_half(self, alpha):
        # both even-ECS sectors carry weight 1/2 exactly, so there is no small-alpha deviation
        assert gadgets.success_probability(alpha) == pytest.approx(0.5, abs=1e-12)

    def test_round_record(self, ghz2):
        r = gadgets.pauli_x_round(ghz2, 5)
        assert r.success == (r.outcome_A != r.outcome_X)
        assert r.post_channel.labels == ("B", "C")

    def test_until_success(self, ghz2):
        rounds, channel = gadgets.pauli_x_until_success(2.0, 50, rng=1, state=ghz2)
        assert rounds >= 1
        assert fock.fidelity(states.ecs("psi+", 2.0, DIM2), channel) >= 1 - 1e-6

    def test_max_rounds(self, ghz2):
        # find a seed whose first draw is a retry, then cap at one round
        for seed in range(50):
            if not gadgets.pauli_x_round(ghz2, seed).success:
                break
        with pytest.raises(MaxRoundsExceeded) as err:
            gadgets.pauli_x_until_success(2.0, 1, rng=seed, state=ghz2)
        assert err.value.rounds == 1

    def test_mean_rounds(self, ghz2):
        table = gadgets.round_probabilities(ghz2)
        rng = np.random.default_rng(2024)
        counts = [gadgets.pauli_x_until_success(2.0, 100, rng=rng, table=table)[0] for _ in range(10_000)]
        assert np.mean(counts) == pytest.approx(2.0, rel=0.05)

    def test_bad_max_rounds(self):
        with pytest.raises(ValueError):
            gadgets.pauli_x_until_success(1.0, 0)
