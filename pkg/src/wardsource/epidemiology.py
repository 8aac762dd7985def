"""Symptom-onset likelihood terms and the direct-transmission time model.

All dates are integers counting days since the epidemic start, which is
day 0 of the :class:`EpidemicFrame`. Infection-time integrals are
discretized as daily sums (the data are dated in whole days) with a
uniform infection-time prior inside each window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .distributions import (
    NEG_INF,
    LogProb,
    WaitingTimeModel,
    lognormal_cdf,
    log_sum_exp,
    waiting_time_log_mass,
)

__all__ = [
    "CaseRecord",
    "EpidemicFrame",
    "TransmissionProfile",
    "WaitingTimeModel",
    "candidate_onset_log_lik",
    "default_transmission_profile",
    "onset_given_infection_log_lik",
    "onset_log_lik_community",
    "onset_log_lik_hospital",
    "onset_window_log_lik",
    "transmission_time_log_mass",
]


@dataclass(frozen=True)
class CaseRecord:
    """One person's epidemiological facts, in days since epidemic start."""

    id: str
    onset: int
    admission: int | None = None
    sample_time: int | None = None
    has_sequence: bool = False

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("case id must be non-empty")
        if self.onset < 0:
            raise ValueError(f"case {self.id}: onset precedes the epidemic start")
        if self.admission is not None:
            if self.admission < 0:
                raise ValueError(
                    f"case {self.id}: admission precedes the epidemic start"
                )
            if self.admission > self.onset:
                raise ValueError(
                    f"case {self.id}: admission (day {self.admission}) is after "
                    f"onset (day {self.onset})"
                )
        if self.sample_time is not None and self.sample_time < 0:
            raise ValueError(f"case {self.id}: sample time precedes the epidemic start")


@dataclass(frozen=True)
class EpidemicFrame:
    """Modeled day range; day 0 is the epidemic start."""

    epidemic_start: int
    horizon_end: int

    def __post_init__(self) -> None:
        if self.epidemic_start > self.horizon_end:
            raise ValueError(
                f"epidemic start day {self.epidemic_start} is after horizon "
                f"day {self.horizon_end}"
            )


@dataclass(frozen=True)
class TransmissionProfile:
    """Mass of the infectee's infection day relative to the infector's onset day.

    Keys are day offsets (infection day minus infector onset day, so
    negative offsets are pre-symptomatic transmission); masses sum to 1.
    """

    offsets: Mapping[int, float]

    def __post_init__(self) -> None:
        if not self.offsets:
            raise ValueError("transmission profile must have at least one offset")
        total = 0.0
        for offset, mass in self.offsets.items():
            if mass < 0.0 or not math.isfinite(mass):
                raise ValueError(f"profile mass at offset {offset} must be >= 0")
            total += mass
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"profile masses must sum to 1, got {total}")

    @classmethod
    def from_masses(cls, offsets: Mapping[int, float]) -> "TransmissionProfile":
        """Build a profile from non-negative masses, normalizing their sum to 1."""
        total = sum(offsets.values())
        if total <= 0.0:
            raise ValueError("profile masses must have a positive sum")
        return cls({int(k): v / total for k, v in offsets.items()})


def default_transmission_profile() -> TransmissionProfile:
    """Bounded default infectiousness profile: offsets -3..+7 days.

    A lognormal shifted so its mode lands on the infector's onset day,
    discretized to day bins and renormalized; covers pre-symptomatic
    transmission a few days before onset through a week after, consistent
    with respiratory-virus shedding studies. Fully overrideable from the
    run configuration.
    """
    lo, hi = -3, 7
    shift = 1 - lo  # offset `lo` maps to the [1, 2) lognormal bin
    sdlog = 0.5
    meanlog = math.log(float(shift)) + sdlog**2  # mode at offset 0
    masses = {
        k: lognormal_cdf(k + shift + 1, meanlog, sdlog)
        - lognormal_cdf(k + shift, meanlog, sdlog)
        for k in range(lo, hi + 1)
    }
    return TransmissionProfile.from_masses(masses)


def onset_window_log_lik(
    onset: int,
    window_start: int,
    window_end: int,
    wt: WaitingTimeModel,
    log_weight: float | None = None,
) -> LogProb:
    """Log of the onset probability with infection uniform on a day window.

    ``log Σ_{t=window_start..window_end} weight * P(T_w = onset - t)``
    with the uniform weight ``1 / window size`` unless ``log_weight``
    overrides it (used to share one infection prior across sub-windows).
    Window days after the onset contribute nothing (no negative waits).
    """
    if window_start > window_end:
        raise ValueError(f"empty infection window [{window_start}, {window_end}]")
    if log_weight is None:
        log_weight = -math.log(window_end - window_start + 1)
    terms = [
        waiting_time_log_mass(onset - t, wt)
        for t in range(window_start, min(window_end, onset) + 1)
    ]
    if not terms:
        return NEG_INF
    return log_weight + log_sum_exp(terms)


def onset_log_lik_community(
    b: CaseRecord, wt: WaitingTimeModel, frame: EpidemicFrame
) -> LogProb:
    """Focal onset likelihood when infection happened before admission.

    Sums the waiting-time mass over infection days from the epidemic
    start through the admission day. Without an admission date there is
    nothing to separate community from hospital acquisition and the term
    is fixed at log 1.
    """
    if b.onset < frame.epidemic_start:
        raise ValueError(f"case {b.id}: onset precedes the epidemic start")
    if b.admission is None:
        return 0.0
    return onset_window_log_lik(b.onset, frame.epidemic_start, b.admission, wt)


def onset_log_lik_hospital(
    b: CaseRecord, wt: WaitingTimeModel, frame: EpidemicFrame
) -> LogProb:
    """Focal onset likelihood when infection happened during the stay.

    As the community term but with infection days running from admission
    through onset.
    """
    if b.admission is None:
        return 0.0
    if b.admission > b.onset:
        raise ValueError(f"case {b.id}: admission is after onset")
    return onset_window_log_lik(b.onset, b.admission, b.onset, wt)


def candidate_onset_log_lik(
    a: CaseRecord, wt: WaitingTimeModel, frame: EpidemicFrame
) -> LogProb:
    """Candidate onset likelihood, infection uniform on [epidemic start, onset]."""
    if a.onset < frame.epidemic_start:
        raise ValueError(f"case {a.id}: onset precedes the epidemic start")
    return onset_window_log_lik(a.onset, frame.epidemic_start, a.onset, wt)


def transmission_time_log_mass(
    t: int,
    a_onset: int,
    profile: TransmissionProfile,
    frame: EpidemicFrame,
    b_onset: int,
) -> LogProb:
    """Log mass for the focal infection on day ``t`` given the infector's onset.

    Looks up the profile at offset ``t - a_onset`` after clipping to the
    feasible range ``[epidemic start, focal onset]``. Clipped mass is
    dropped, not renormalized: transmission days the hypothesis cannot
    accommodate count against it rather than being silently redistributed.
    """
    if t < frame.epidemic_start or t > b_onset:
        return NEG_INF
    mass = profile.offsets.get(t - a_onset, 0.0)
    return math.log(mass) if mass > 0.0 else NEG_INF


def onset_given_infection_log_lik(
    b_onset: int, t: int, wt: WaitingTimeModel
) -> LogProb:
    """Log probability of the focal onset day given infection on day ``t``."""
    if b_onset < t:
        return NEG_INF
    return waiting_time_log_mass(b_onset - t, wt)
