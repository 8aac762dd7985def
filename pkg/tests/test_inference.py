import math
import random
from dataclasses import replace

import pytest

from conftest import case, make_snapshot, random_ward
from oracle import COMMUNITY as ORACLE_C
from oracle import HOSPITAL as ORACLE_H
from oracle import naive_source_probabilities
from wardsource.distributions import NEG_INF, WaitingTimeModel, waiting_time_log_mass
from wardsource.epidemiology import TransmissionProfile, candidate_onset_log_lik
from wardsource.genomics import null_genetic_log_lik
from wardsource.inference import (
    COMMUNITY,
    HOSPITAL,
    DataToggles,
    DegenerateEvidenceError,
    Hypothesis,
    SourcePrior,
    ablation_sequence,
    log_lik_direct_pair,
    log_lik_null_candidate,
    posterior,
)
from wardsource.ingest import ModelParams, default_params

ON = DataToggles()
CUH_GENOME = 29903


def cuh_params(**overrides) -> ModelParams:
    return replace(default_params(), **overrides)


def simple_pair_snapshot(**kwargs):
    return make_snapshot(
        {"A": case("A", onset=8), "B": case("B", onset=12)}, **kwargs
    )


class TestNullCandidate:
    def test_no_optional_data_is_onset_only(self):
        snapshot = simple_pair_snapshot()
        got = log_lik_null_candidate("A", "B", snapshot, ON)
        expected = candidate_onset_log_lik(
            snapshot.case("A"), snapshot.params.waiting, snapshot.frame
        )
        assert got == expected

    def test_genetics_toggle_is_additive(self):
        seq = "ACGT" * 25
        snapshot = simple_pair_snapshot(sequences={"A": seq, "B": seq})
        with_gen = log_lik_null_candidate("A", "B", snapshot, ON)
        without = log_lik_null_candidate(
            "A", "B", snapshot, DataToggles(use_genetics=False)
        )
        delta = null_genetic_log_lik(
            snapshot.genetic_summary("A", "B"), snapshot.params.genetic
        )
        assert with_gen - without == pytest.approx(delta, abs=1e-12)

    def test_cuh_composition(self):
        seq = "ACGT" * (CUH_GENOME // 4) + "ACG"
        assert len(seq) == CUH_GENOME
        snapshot = make_snapshot(
            {"A": case("A", onset=8), "B": case("B", onset=8)},
            sequences={"A": seq, "B": seq},
            locations={
                "A": {5: "W1", 6: "W1", 7: "W2"},
                "B": {5: "W1", 6: "W2", 7: "W2"},
            },
        )
        got = log_lik_null_candidate("A", "B", snapshot, ON)
        onset = candidate_onset_log_lik(
            snapshot.case("A"), snapshot.params.waiting, snapshot.frame
        )
        genetic = null_genetic_log_lik(
            snapshot.genetic_summary("A", "B"), snapshot.params.genetic
        )
        alpha = 2.0 * 1.829e-6 * 5.5 * 51.0 * CUH_GENOME
        assert genetic == pytest.approx(-0.404 - math.log1p(alpha), abs=1e-12)
        assert got == pytest.approx(onset + genetic + math.log(0.125), abs=1e-12)

    def test_unknown_case(self):
        with pytest.raises(KeyError):
            log_lik_null_candidate("ZZ", "B", simple_pair_snapshot(), ON)


class TestDirectPair:
    def test_point_mass_profile_collapses_to_single_day(self):
        # All profile mass on offset +2: infection day is onset(A) + 2 = 10.
        params = cuh_params(profile=TransmissionProfile({2: 1.0}))
        snapshot = make_snapshot(
            {"A": case("A", onset=8), "B": case("B", onset=12)}, params=params
        )
        got = log_lik_direct_pair("A", "B", snapshot, ON)
        waiting = snapshot.params.waiting
        expected = candidate_onset_log_lik(
            snapshot.case("A"), waiting, snapshot.frame
        ) + waiting_time_log_mass(12 - 10, waiting)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_apart_on_every_feasible_day_is_impossible(self):
        profile = TransmissionProfile({0: 0.5, 1: 0.5})
        params = cuh_params(profile=profile)
        snapshot = make_snapshot(
            {"A": case("A", onset=8), "B": case("B", onset=12)},
            locations={
                "A": {8: "W1", 9: "W1"},
                "B": {8: "W2", 9: "BAY1"},
            },
            params=params,
        )
        assert log_lik_direct_pair("A", "B", snapshot, ON) == NEG_INF

    def test_empty_feasible_window_is_impossible(self):
        # Profile support lands entirely after the focal onset.
        params = cuh_params(profile=TransmissionProfile({5: 1.0}))
        snapshot = make_snapshot(
            {"A": case("A", onset=10), "B": case("B", onset=12)}, params=params
        )
        assert log_lik_direct_pair("A", "B", snapshot, ON) == NEG_INF

    def test_matches_naive_summation_oracle(self):
        rng = random.Random(20240811)
        for _ in range(25):
            snapshot, focal, candidates = random_ward(rng, max_candidates=3, max_frame=20)
            z = candidates[0]
            naive = naive_source_probabilities(snapshot, focal, [z])
            engine = posterior(focal, [z], snapshot)
            assert engine.probs[Hypothesis.candidate(z)] == pytest.approx(
                naive[z], rel=1e-9, abs=1e-300
            )


class TestPosterior:
    def test_no_candidates_no_admission_splits_evenly(self):
        snapshot = make_snapshot({"B": case("B", onset=10)})
        post = posterior("B", [], snapshot)
        assert post.probs[HOSPITAL] == pytest.approx(0.5, abs=1e-15)
        assert post.probs[COMMUNITY] == pytest.approx(0.5, abs=1e-15)
        assert post.nosocomial == pytest.approx(0.5, abs=1e-15)

    def test_prior_passes_through_equal_likelihoods(self):
        snapshot = make_snapshot({"B": case("B", onset=10)})
        post = posterior(
            "B", [], snapshot, prior=SourcePrior(mode="nosocomial-split", p_nosocomial=0.9)
        )
        assert post.probs[HOSPITAL] == pytest.approx(0.9, abs=1e-12)
        assert post.probs[COMMUNITY] == pytest.approx(0.1, abs=1e-12)

    def test_matches_oracle_on_synthetic_wards(self):
        rng = random.Random(7)
        for _ in range(40):
            snapshot, focal, candidates = random_ward(rng, max_candidates=4, max_frame=20)
            naive = naive_source_probabilities(snapshot, focal, candidates)
            engine = posterior(focal, candidates, snapshot)
            for z in candidates:
                assert engine.probs[Hypothesis.candidate(z)] == pytest.approx(
                    naive[z], rel=1e-9, abs=1e-300
                )
            assert engine.probs[HOSPITAL] == pytest.approx(naive[ORACLE_H], rel=1e-9)
            assert engine.probs[COMMUNITY] == pytest.approx(naive[ORACLE_C], rel=1e-9)

    def test_probabilities_sum_to_one(self):
        rng = random.Random(99)
        for _ in range(50):
            snapshot, focal, candidates = random_ward(rng)
            post = posterior(focal, candidates, snapshot)
            assert sum(post.probs.values()) == pytest.approx(1.0, abs=1e-9)
            assert all(0.0 <= p <= 1.0 for p in post.probs.values())

    def test_hospital_equals_community_without_admission(self):
        rng = random.Random(3)
        for _ in range(25):
            snapshot, focal, candidates = random_ward(rng)
            stripped = {
                cid: replace(c, admission=None if cid == focal else c.admission)
                for cid, c in snapshot.cases.items()
            }
            snapshot = replace(snapshot, cases=stripped)
            post = posterior(focal, candidates, snapshot)
            assert post.probs[HOSPITAL] == post.probs[COMMUNITY]

    def test_candidate_order_is_irrelevant(self):
        rng = random.Random(12)
        snapshot, focal, candidates = random_ward(rng, max_candidates=6)
        shuffled = list(candidates)
        rng.shuffle(shuffled)
        a = posterior(focal, candidates, snapshot)
        b = posterior(focal, shuffled, snapshot)
        assert a.probs == b.probs
        assert list(a.probs) == list(b.probs)  # canonical ordering

    def test_uniform_prior_equals_matching_split_prior(self):
        snapshot, focal, candidates = random_ward(random.Random(5), max_candidates=4)
        n = len(candidates) + 2
        split = SourcePrior(mode="nosocomial-split", p_nosocomial=(n - 1) / n)
        a = posterior(focal, candidates, snapshot)
        b = posterior(focal, candidates, snapshot, prior=split)
        for h in a.probs:
            assert a.probs[h] == pytest.approx(b.probs[h], rel=1e-12)

    def test_shared_product_matches_per_hypothesis_recomputation(self):
        rng = random.Random(31)
        for _ in range(10):
            snapshot, focal, candidates = random_ward(rng, max_candidates=6)
            post = posterior(focal, candidates, snapshot)
            for z in candidates:
                direct = log_lik_direct_pair(z, focal, snapshot, ON)
                others = sum(
                    log_lik_null_candidate(j, focal, snapshot, ON)
                    for j in candidates
                    if j != z
                )
                recomputed = direct + others
                engine = post.log_liks[Hypothesis.candidate(z)]
                if recomputed == NEG_INF:
                    assert engine == NEG_INF
                else:
                    assert engine == pytest.approx(recomputed, abs=1e-12)

    def test_nosocomial_is_everything_but_community(self):
        snapshot, focal, candidates = random_ward(random.Random(17))
        post = posterior(focal, candidates, snapshot)
        assert post.nosocomial == pytest.approx(1.0 - post.probs[COMMUNITY], abs=1e-12)

    def test_impossible_candidate_kept_at_zero(self):
        profile = TransmissionProfile({0: 1.0})
        snapshot = make_snapshot(
            {"A": case("A", onset=8), "B": case("B", onset=12)},
            locations={"A": {8: "W1"}, "B": {8: "W2"}},
            params=cuh_params(profile=profile),
        )
        post = posterior("B", ["A"], snapshot)
        assert post.probs[Hypothesis.candidate("A")] == 0.0
        assert Hypothesis.candidate("A") in post.probs

    def test_focal_cannot_be_candidate(self):
        snapshot = simple_pair_snapshot()
        with pytest.raises(ValueError):
            posterior("B", ["B"], snapshot)
        with pytest.raises(ValueError):
            posterior("B", ["A", "A"], snapshot)

    def test_degenerate_evidence(self):
        # Density-mode waiting time has zero mass at offset 0, so onsets on
        # the epidemic start day zero out every hypothesis.
        params = cuh_params(
            waiting=WaitingTimeModel(meanlog=1.434, sdlog=0.6612, discretization="density")
        )
        snapshot = make_snapshot(
            {"A": case("A", onset=0), "B": case("B", onset=0)}, params=params
        )
        with pytest.raises(DegenerateEvidenceError):
            posterior("B", ["A"], snapshot)


class TestHandDerivedPosterior:
    """Closed-form expectations computed at 50-digit precision with mpmath,
    independently of both the engine and the naive oracle, then frozen."""

    def ward(self, with_sequences):
        sequences = {"A": "ACGT" * 25, "B": "ACGT" * 25} if with_sequences else None
        return make_snapshot(
            {"A": case("A", onset=2), "B": case("B", onset=4, admission=3)},
            sequences=sequences,
            params=cuh_params(profile=TransmissionProfile({1: 1.0})),
        )

    def test_onsets_only(self):
        # Single candidate, point-mass profile one day after the candidate's
        # onset: every hypothesis is a short product of day-bin masses.
        post = posterior("B", ["A"], self.ward(with_sequences=False))
        assert post.probs[Hypothesis.candidate("A")] == pytest.approx(
            0.35296858824048644, rel=1e-12
        )
        assert post.probs[HOSPITAL] == pytest.approx(0.19933996046841, rel=1e-12)
        assert post.probs[COMMUNITY] == pytest.approx(0.44769145129110355, rel=1e-12)

    def test_with_identical_sequences(self):
        # Adds the genetic factors: a 2-day sampling gap inflates the
        # background rate, direct transmission carries 2 branch days.
        post = posterior("B", ["A"], self.ward(with_sequences=True))
        assert post.probs[Hypothesis.candidate("A")] == pytest.approx(
            0.37558310289357916, rel=1e-12
        )
        assert post.probs[HOSPITAL] == pytest.approx(0.19237279260757775, rel=1e-12)
        assert post.probs[COMMUNITY] == pytest.approx(0.43204410449884306, rel=1e-12)


class TestAblation:
    def test_stage_zero_is_onsets_only(self):
        snapshot, focal, candidates = random_ward(random.Random(41))
        stages = ablation_sequence(focal, candidates, snapshot)
        baseline = posterior(
            focal, candidates, snapshot, toggles=DataToggles.onsets_only()
        )
        assert stages[0].stage == "onsets"
        assert stages[0].posterior.probs == baseline.probs

    def test_toggle_without_data_changes_nothing(self):
        snapshot = make_snapshot(
            {"A": case("A", onset=8), "B": case("B", onset=12, admission=5)}
        )  # no sequences, no locations
        stages = ablation_sequence(
            "B", ["A"], snapshot, order=("genetics", "locations", "admissions")
        )
        assert stages[0].posterior.probs == stages[1].posterior.probs
        assert stages[1].posterior.probs == stages[2].posterior.probs
        assert stages[2].posterior.probs != stages[3].posterior.probs  # admission exists

    def test_matching_genetics_lifts_candidate(self):
        base = "".join(random.Random(2).choice("ACGT") for _ in range(CUH_GENOME))
        mutated = "T" + base[1:] if base[0] != "T" else "A" + base[1:]
        far = list(base)
        for i in range(0, 40, 4):
            far[i] = "A" if far[i] != "A" else "C"
        far = "".join(far)
        snapshot = make_snapshot(
            {
                "A1": case("A1", onset=8),
                "A2": case("A2", onset=9),
                "A3": case("A3", onset=10),
                "B": case("B", onset=12),
            },
            sequences={"A1": base, "A2": far, "A3": far, "B": base},
        )
        stages = ablation_sequence(
            "B",
            ["A1", "A2", "A3"],
            snapshot,
            order=("genetics", "locations", "admissions"),
        )
        onsets_only = stages[0].posterior
        with_genetics = stages[1].posterior
        a1 = Hypothesis.candidate("A1")
        assert with_genetics.probs[a1] > onsets_only.probs[a1]
        assert with_genetics.probs[HOSPITAL] < onsets_only.probs[HOSPITAL]
        assert with_genetics.probs[COMMUNITY] < onsets_only.probs[COMMUNITY]

    def test_invalid_order(self):
        snapshot = simple_pair_snapshot()
        with pytest.raises(ValueError):
            ablation_sequence("B", ["A"], snapshot, order=("genetics", "locations"))
        with pytest.raises(ValueError):
            ablation_sequence("B", ["A"], snapshot, order=("genetics", "genetics", "admissions"))


class TestPriorAndToggleValidation:
    def test_prior_modes(self):
        with pytest.raises(ValueError):
            SourcePrior(mode="flat")
        with pytest.raises(ValueError):
            SourcePrior(mode="nosocomial-split", p_nosocomial=1.2)
        with pytest.raises(ValueError):
            SourcePrior(mode="uniform", p_nosocomial=0.5)

    def test_onsets_cannot_be_disabled(self):
        with pytest.raises(ValueError):
            DataToggles(use_onsets=False)

    def test_split_prior_masses(self):
        prior = SourcePrior(mode="nosocomial-split", p_nosocomial=0.3)
        hyps = [Hypothesis.candidate("A"), Hypothesis.candidate("B"), HOSPITAL, COMMUNITY]
        masses = {h: math.exp(v) for h, v in prior.log_masses(hyps).items()}
        assert masses[COMMUNITY] == pytest.approx(0.7)
        assert masses[HOSPITAL] == pytest.approx(0.1)
        assert masses[Hypothesis.candidate("A")] == pytest.approx(0.1)
        assert sum(masses.values()) == pytest.approx(1.0)

    def test_split_prior_survives_subnormal_p(self):
        # p/(n-1) underflows to 0.0 for subnormal p; the log-space masses
        # must stay finite instead of raising.
        prior = SourcePrior(mode="nosocomial-split", p_nosocomial=5e-324)
        hyps = [Hypothesis.candidate("A"), HOSPITAL, COMMUNITY]
        masses = prior.log_masses(hyps)
        assert masses[HOSPITAL] == pytest.approx(math.log(5e-324) - math.log(2))
        assert masses[COMMUNITY] == pytest.approx(0.0, abs=1e-300)
