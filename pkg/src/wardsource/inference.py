"""Per-hypothesis likelihood assembly, posterior normalization, and ablations.

The hypothesis space for a focal patient is categorical: each named
candidate infector, an unidentified in-hospital source, or acquisition
in the community. Candidate hypotheses share every non-candidate
factor, so the engine computes the product of all candidates' null
terms once and swaps a single term per candidate hypothesis, turning a
quadratic pass into a linear one. All arithmetic stays in log space
until the final normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .contact import direct_contact_log_lik, null_contact_log_lik
from .distributions import NEG_INF, LogProb, log_sum_exp
from .epidemiology import (
    candidate_onset_log_lik,
    onset_given_infection_log_lik,
    onset_log_lik_community,
    onset_log_lik_hospital,
    transmission_time_log_mass,
)
from .genomics import direct_genetic_log_lik, null_genetic_log_lik
from .ingest import WardSnapshot

CANDIDATE = "candidate"
HOSPITAL_KIND = "hospital"
COMMUNITY_KIND = "community"

#: Data sources that can be ablated; symptom onsets are always in the model.
ABLATABLE_SOURCES = ("genetics", "locations", "admissions")


class DegenerateEvidenceError(ValueError):
    """Every hypothesis has zero likelihood; no posterior exists."""


@dataclass(frozen=True)
class Hypothesis:
    kind: str
    case_id: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in (CANDIDATE, HOSPITAL_KIND, COMMUNITY_KIND):
            raise ValueError(f"unknown hypothesis kind {self.kind!r}")
        if (self.kind == CANDIDATE) != (self.case_id is not None):
            raise ValueError("candidate hypotheses carry a case id; others must not")

    @classmethod
    def candidate(cls, case_id: str) -> "Hypothesis":
        return cls(kind=CANDIDATE, case_id=case_id)

    def sort_key(self) -> tuple[int, str]:
        if self.kind == CANDIDATE:
            return (0, self.case_id)
        return (1, "") if self.kind == HOSPITAL_KIND else (2, "")

    def label(self) -> str:
        return self.case_id if self.kind == CANDIDATE else self.kind


HOSPITAL = Hypothesis(kind=HOSPITAL_KIND)
COMMUNITY = Hypothesis(kind=COMMUNITY_KIND)


@dataclass(frozen=True)
class DataToggles:
    """Which optional data sources enter the likelihood; onsets always do."""

    use_onsets: bool = True
    use_genetics: bool = True
    use_locations: bool = True
    use_admissions: bool = True

    def __post_init__(self) -> None:
        if not self.use_onsets:
            raise ValueError("symptom onsets cannot be disabled")

    @classmethod
    def onsets_only(cls) -> "DataToggles":
        return cls(use_genetics=False, use_locations=False, use_admissions=False)

    def enable(self, source: str) -> "DataToggles":
        if source not in ABLATABLE_SOURCES:
            raise ValueError(f"unknown data source {source!r}")
        return DataToggles(
            use_genetics=self.use_genetics or source == "genetics",
            use_locations=self.use_locations or source == "locations",
            use_admissions=self.use_admissions or source == "admissions",
        )


UNIFORM = "uniform"
NOSOCOMIAL_SPLIT = "nosocomial-split"


@dataclass(frozen=True)
class SourcePrior:
    """Prior over sources: uniform, or a fixed nosocomiality probability
    split equally over the candidates and the unidentified-hospital source."""

    mode: str = UNIFORM
    p_nosocomial: float | None = None

    def __post_init__(self) -> None:
        if self.mode not in (UNIFORM, NOSOCOMIAL_SPLIT):
            raise ValueError(f"unknown prior mode {self.mode!r}")
        if self.mode == NOSOCOMIAL_SPLIT:
            if self.p_nosocomial is None or not (0.0 <= self.p_nosocomial <= 1.0):
                raise ValueError(
                    f"nosocomial prior probability must be in [0, 1], "
                    f"got {self.p_nosocomial}"
                )
        elif self.p_nosocomial is not None:
            raise ValueError("uniform prior takes no probability parameter")

    def log_masses(self, hypotheses: Sequence[Hypothesis]) -> dict[Hypothesis, LogProb]:
        n = len(hypotheses)
        if self.mode == UNIFORM:
            mass = -math.log(n)
            return {h: mass for h in hypotheses}
        p = self.p_nosocomial
        community = math.log(1.0 - p) if p < 1.0 else NEG_INF
        # log(p) - log(n-1), not log(p/(n-1)): the division can underflow
        # to zero for subnormal p while the log-space form stays finite.
        hospital_side = math.log(p) - math.log(n - 1) if p > 0.0 else NEG_INF
        return {
            h: community if h.kind == COMMUNITY_KIND else hospital_side
            for h in hypotheses
        }

    def describe(self) -> dict[str, object]:
        if self.mode == UNIFORM:
            return {"mode": UNIFORM}
        return {"mode": NOSOCOMIAL_SPLIT, "p_nosocomial": self.p_nosocomial}


@dataclass(frozen=True)
class SourcePosterior:
    """Normalized posterior plus the per-hypothesis log likelihoods."""

    probs: Mapping[Hypothesis, float]
    nosocomial: float
    log_liks: Mapping[Hypothesis, LogProb]

    def prob(self, hypothesis: Hypothesis) -> float:
        return self.probs[hypothesis]


def _genetic_summary_if_enabled(snapshot, az, focal, toggles):
    return snapshot.genetic_summary(az, focal) if toggles.use_genetics else None


def _contact_history_if_enabled(snapshot, az, focal, toggles):
    if not toggles.use_locations:
        return None
    history = snapshot.contact_history(az, focal)
    return history if history.days else None


def log_lik_null_candidate(
    az: str, focal: str, snapshot: WardSnapshot, toggles: DataToggles
) -> LogProb:
    """Log likelihood of the candidate's data when they were not the source.

    Sum of the enabled, available terms: candidate onset, background
    genetic distance, and the uninformative co-location pattern. Missing
    or disabled terms contribute log 1.
    """
    case = snapshot.case(az)
    snapshot.case(focal)
    total = candidate_onset_log_lik(case, snapshot.params.waiting, snapshot.frame)
    summary = _genetic_summary_if_enabled(snapshot, az, focal, toggles)
    if summary is not None:
        total += null_genetic_log_lik(summary, snapshot.params.genetic)
    history = _contact_history_if_enabled(snapshot, az, focal, toggles)
    if history is not None:
        total += null_contact_log_lik(history)
    return total


def log_lik_direct_pair(
    az: str, focal: str, snapshot: WardSnapshot, toggles: DataToggles
) -> LogProb:
    """Log likelihood of the pair's data when the candidate infected the focal.

    Marginalizes the focal's unknown infection day over the transmission
    profile (clipped to feasible days), scoring the waiting time to onset
    and, when present, the direct-transmission genetic and co-location
    terms at each infection day. Returns ``-inf`` when no feasible
    infection day remains.
    """
    a = snapshot.case(az)
    b = snapshot.case(focal)
    params = snapshot.params
    summary = _genetic_summary_if_enabled(snapshot, az, focal, toggles)
    history = _contact_history_if_enabled(snapshot, az, focal, toggles)
    if summary is not None:
        ts_focal = snapshot.sample_day(focal)
        ts_candidate = snapshot.sample_day(az)

    terms: list[LogProb] = []
    for offset in sorted(params.profile.offsets):
        t = a.onset + offset
        lt = transmission_time_log_mass(t, a.onset, params.profile, snapshot.frame, b.onset)
        if lt == NEG_INF:
            continue
        term = lt + onset_given_infection_log_lik(b.onset, t, params.waiting)
        if term == NEG_INF:
            terms.append(NEG_INF)
            continue
        if summary is not None:
            term += direct_genetic_log_lik(
                summary, t, ts_focal, ts_candidate, params.genetic
            )
        if history is not None:
            term += direct_contact_log_lik(
                history, t, params.default_unknown_contact_weight
            )
        terms.append(term)
    if not terms:
        return NEG_INF
    base = candidate_onset_log_lik(a, params.waiting, snapshot.frame)
    return base + log_sum_exp(terms)


def posterior(
    focal: str,
    candidates: Sequence[str],
    snapshot: WardSnapshot,
    prior: SourcePrior = SourcePrior(),
    toggles: DataToggles = DataToggles(),
) -> SourcePosterior:
    """Posterior over the candidate, hospital, and community sources.

    Candidates are canonicalized to lexicographic order, which fixes the
    summation order and makes results independent of both the caller's
    ordering and any parallel schedule upstream. Impossible hypotheses
    are kept with probability zero so the output shape is stable.
    """
    focal_case = snapshot.case(focal)
    ordered = sorted(candidates)
    if len(set(ordered)) != len(ordered):
        raise ValueError("candidate ids must be distinct")
    if focal in ordered:
        raise ValueError(f"focal case {focal!r} cannot be its own candidate")

    null_lls = {z: log_lik_null_candidate(z, focal, snapshot, toggles) for z in ordered}
    finite_total = 0.0
    impossible = []
    for z in ordered:
        if null_lls[z] == NEG_INF:
            impossible.append(z)
        else:
            finite_total += null_lls[z]

    log_liks: dict[Hypothesis, LogProb] = {}
    for z in ordered:
        blocked = [j for j in impossible if j != z]
        if blocked:
            log_liks[Hypothesis.candidate(z)] = NEG_INF
            continue
        others = finite_total - (null_lls[z] if z not in impossible else 0.0)
        direct = log_lik_direct_pair(z, focal, snapshot, toggles)
        log_liks[Hypothesis.candidate(z)] = others + direct

    shared_null = NEG_INF if impossible else finite_total
    if toggles.use_admissions:
        hospital_onset = onset_log_lik_hospital(
            focal_case, snapshot.params.waiting, snapshot.frame
        )
        community_onset = onset_log_lik_community(
            focal_case, snapshot.params.waiting, snapshot.frame
        )
    else:
        hospital_onset = community_onset = 0.0
    log_liks[HOSPITAL] = shared_null + hospital_onset
    log_liks[COMMUNITY] = shared_null + community_onset

    hypotheses = sorted(log_liks, key=Hypothesis.sort_key)
    prior_masses = prior.log_masses(hypotheses)
    log_unnorm = [log_liks[h] + prior_masses[h] for h in hypotheses]
    log_z = log_sum_exp(log_unnorm)
    if log_z == NEG_INF:
        raise DegenerateEvidenceError(
            f"focal {focal!r}: every hypothesis has zero likelihood"
        )
    probs = {
        h: math.exp(lu - log_z) if lu > NEG_INF else 0.0
        for h, lu in zip(hypotheses, log_unnorm)
    }
    nosocomial = sum(p for h, p in probs.items() if h.kind != COMMUNITY_KIND)
    ordered_probs = {h: probs[h] for h in hypotheses}
    ordered_liks = {h: log_liks[h] for h in hypotheses}
    return SourcePosterior(probs=ordered_probs, nosocomial=nosocomial, log_liks=ordered_liks)


@dataclass(frozen=True)
class AblationStage:
    stage: str
    toggles: DataToggles
    posterior: SourcePosterior


def ablation_sequence(
    focal: str,
    candidates: Sequence[str],
    snapshot: WardSnapshot,
    prior: SourcePrior = SourcePrior(),
    order: Sequence[str] = ABLATABLE_SOURCES,
) -> list[AblationStage]:
    """Posteriors after cumulatively enabling each data source.

    The first stage uses symptom onsets alone; each later stage adds one
    source from ``order``, which must be a permutation of
    ``("genetics", "locations", "admissions")``.
    """
    if sorted(order) != sorted(ABLATABLE_SOURCES):
        raise ValueError(
            f"ablation order must be a permutation of {ABLATABLE_SOURCES}, got {tuple(order)}"
        )
    toggles = DataToggles.onsets_only()
    stages = [
        AblationStage(
            stage="onsets",
            toggles=toggles,
            posterior=posterior(focal, candidates, snapshot, prior, toggles),
        )
    ]
    for source in order:
        toggles = toggles.enable(source)
        stages.append(
            AblationStage(
                stage=source,
                toggles=toggles,
                posterior=posterior(focal, candidates, snapshot, prior, toggles),
            )
        )
    return stages
