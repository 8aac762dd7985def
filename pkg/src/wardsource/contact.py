"""Co-location likelihood terms for a candidate infector and the focal patient.

A pair's contact history lists, day by day, whether the two were in the
same location (``together``), in different locations (``apart``), or
unobserved (``unknown`` with an elicited probability of having been
together). Days with no row at all are outside the history; the
likelihoods treat them as unobserved with a caller-supplied default
weight when they matter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from .distributions import NEG_INF, LogProb

TOGETHER = "together"
APART = "apart"
UNKNOWN = "unknown"

_LOG_HALF = math.log(0.5)


@dataclass(frozen=True)
class ContactDay:
    day: int
    status: str
    weight: float | None = None  # elicited P(together) for unknown days

    def __post_init__(self) -> None:
        if self.status not in (TOGETHER, APART, UNKNOWN):
            raise ValueError(f"unknown contact status {self.status!r}")
        if self.status == UNKNOWN:
            if self.weight is None or not (0.0 <= self.weight <= 1.0):
                raise ValueError(
                    f"unknown day {self.day} needs a weight in [0, 1], "
                    f"got {self.weight}"
                )
        elif self.weight is not None:
            raise ValueError(f"observed day {self.day} must not carry a weight")


@dataclass(frozen=True)
class ContactHistory:
    """Sorted, de-duplicated per-day co-location record for one pair."""

    days: tuple[ContactDay, ...]
    _by_day: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.days, key=lambda d: d.day))
        seen = {d.day for d in ordered}
        if len(seen) != len(ordered):
            raise ValueError("contact history has duplicate days")
        object.__setattr__(self, "days", ordered)
        object.__setattr__(self, "_by_day", {d.day: d for d in ordered})

    @classmethod
    def build(cls, days: Iterable[ContactDay]) -> "ContactHistory":
        return cls(days=tuple(days))

    def lookup(self, day: int) -> ContactDay | None:
        return self._by_day.get(day)


def null_contact_log_lik(h: ContactHistory) -> LogProb:
    """Log probability of the history when the candidate was not the source.

    Any of the 2^|D| contact patterns is equally likely, so every listed
    day contributes a factor 1/2 -- including unknown days, whose
    weighted average (1-w)/2 + w/2 collapses to 1/2 regardless of w.
    """
    return len(h.days) * _LOG_HALF


def direct_contact_log_lik(
    h: ContactHistory, t_infect: int, default_weight: float = 0.5
) -> LogProb:
    """Log probability of the history given transmission on ``t_infect``.

    Contact is necessary for infection: the infection-day factor is 1 if
    the pair was together, 0 if apart (the hypothesis dies), and the
    elicited weight if unobserved. Every other listed day contributes 1/2
    exactly as under the null. An infection day missing from the history
    entirely is scored with ``default_weight``.
    """
    if not (0.0 <= default_weight <= 1.0):
        raise ValueError(f"default weight must be in [0, 1], got {default_weight}")
    entry = h.lookup(t_infect)
    if entry is None:
        return len(h.days) * _LOG_HALF + (
            math.log(default_weight) if default_weight > 0.0 else NEG_INF
        )
    if entry.status == TOGETHER:
        factor = 1.0
    elif entry.status == APART:
        return NEG_INF
    else:
        factor = entry.weight
    if factor == 0.0:
        return NEG_INF
    return (len(h.days) - 1) * _LOG_HALF + math.log(factor)
