"""Log-space probability kernels shared by every likelihood term.

All functions return natural-log probabilities as plain floats, with
``-inf`` encoding an exactly-zero probability. Working in log space
end-to-end keeps products over dozens of candidate infectors from
underflowing double precision; values are exponentiated only when the
posterior is normalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from scipy.special import ndtr

NEG_INF = float("-inf")

#: Natural-log probability; -inf encodes exactly zero.
LogProb = float

DAY_BIN = "day-bin"
DENSITY = "density"


@dataclass(frozen=True)
class DelaporteParams:
    """Parameters of a Poisson(lam) + NegativeBinomial(r=beta, p=1/(1+alpha)) sum.

    ``alpha`` is the mean of the negative-binomial component when
    ``beta == 1`` (the geometric case used throughout this package).
    """

    alpha: float
    beta: float = 1.0
    lam: float = 0.0

    def __post_init__(self) -> None:
        if not (self.alpha >= 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be finite and > 0, got {self.beta}")
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise ValueError(f"lam must be finite and >= 0, got {self.lam}")


@dataclass(frozen=True)
class WaitingTimeModel:
    """Lognormal infection-to-onset (incubation) time in days.

    ``meanlog`` and ``sdlog`` are log-scale parameters (the median is
    ``exp(meanlog)`` days, about 4.2 days with the default COVID-19
    values 1.434/0.6612). They are sometimes quoted as a "mean" and
    "standard deviation" in the incubation literature; treating them as
    natural-scale moments would put the median at 1.4 days, which is
    inconsistent with that same literature, so log-scale is assumed.

    ``discretization`` selects how whole-day offsets are scored:
    ``"day-bin"`` (default) integrates the density over ``[d, d+1)`` so
    the masses sum to one; ``"density"`` evaluates the continuous
    density at the integer offset, for comparability with tools that do.
    """

    meanlog: float
    sdlog: float
    discretization: str = DAY_BIN

    def __post_init__(self) -> None:
        if not (self.sdlog > 0.0 and math.isfinite(self.sdlog)):
            raise ValueError(f"sdlog must be finite and > 0, got {self.sdlog}")
        if not math.isfinite(self.meanlog):
            raise ValueError(f"meanlog must be finite, got {self.meanlog}")
        if self.discretization not in (DAY_BIN, DENSITY):
            raise ValueError(
                f"discretization must be {DAY_BIN!r} or {DENSITY!r}, "
                f"got {self.discretization!r}"
            )


def lognormal_cdf(x: float, meanlog: float, sdlog: float) -> float:
    """CDF of the lognormal distribution with log-scale parameters."""
    if x <= 0.0:
        return 0.0
    return float(ndtr((math.log(x) - meanlog) / sdlog))


def poisson_log_pmf(k: int, lam: float) -> LogProb:
    """Log Poisson pmf; lam = 0 degenerates to a point mass at zero."""
    if k < 0 or k != int(k):
        raise ValueError(f"count must be a non-negative integer, got {k}")
    if not (lam >= 0.0 and math.isfinite(lam)):
        raise ValueError(f"rate must be finite and >= 0, got {lam}")
    k = int(k)
    if lam == 0.0:
        return 0.0 if k == 0 else NEG_INF
    if k == 0:
        return -lam
    return k * math.log(lam) - lam - math.lgamma(k + 1)


def _neg_binomial_log_pmf(m: int, beta: float, alpha: float) -> LogProb:
    # Failure-count form: NB(r=beta, p=1/(1+alpha)); alpha = 0 degenerates
    # to a point mass at zero.
    log_p = -math.log1p(alpha)
    if m == 0:
        return beta * log_p
    if alpha == 0.0:
        return NEG_INF
    log_q = math.log(alpha) - math.log1p(alpha)
    return (
        math.lgamma(m + beta)
        - math.lgamma(beta)
        - math.lgamma(m + 1)
        + beta * log_p
        + m * log_q
    )


def delaporte_log_pmf(k: int, params: DelaporteParams) -> LogProb:
    """Log pmf of the Poisson + negative-binomial convolution.

    Computed as the exact finite convolution over the ``k + 1`` ways of
    splitting the count between the two components; no series truncation
    or sampling is involved. Observed counts are small in practice, so
    the quadratic cost in ``k`` is irrelevant.
    """
    if k < 0 or k != int(k):
        raise ValueError(f"count must be a non-negative integer, got {k}")
    k = int(k)
    terms = [
        poisson_log_pmf(j, params.lam)
        + _neg_binomial_log_pmf(k - j, params.beta, params.alpha)
        for j in range(k + 1)
    ]
    return log_sum_exp(terms)


def waiting_time_log_mass(days: int, wt: WaitingTimeModel) -> LogProb:
    """Log probability that the infection-to-onset time falls on a whole-day offset.

    In day-bin mode this is ``log(CDF(days + 1) - CDF(days))``; in
    density mode it is the log density at ``days`` (zero at offset 0,
    where the lognormal density vanishes).
    """
    if days < 0:
        raise ValueError(f"day offset must be >= 0, got {days}")
    if wt.discretization == DENSITY:
        return _lognormal_log_pdf(float(days), wt.meanlog, wt.sdlog)
    return _day_bin_log_mass(int(days), wt.meanlog, wt.sdlog)


@lru_cache(maxsize=None)
def _day_bin_log_mass(days: int, meanlog: float, sdlog: float) -> LogProb:
    zb = (math.log(days + 1) - meanlog) / sdlog
    if days == 0:
        mass = float(ndtr(zb))
    else:
        za = (math.log(days) - meanlog) / sdlog
        if za > 0.0:
            # Upper tail: difference of survival functions avoids the
            # 1 - (1 - eps) cancellation of the CDF form.
            mass = float(ndtr(-za)) - float(ndtr(-zb))
        else:
            mass = float(ndtr(zb)) - float(ndtr(za))
    return math.log(mass) if mass > 0.0 else NEG_INF


def _lognormal_log_pdf(x: float, meanlog: float, sdlog: float) -> LogProb:
    if x <= 0.0:
        return NEG_INF
    z = (math.log(x) - meanlog) / sdlog
    return -math.log(x * sdlog * math.sqrt(2.0 * math.pi)) - 0.5 * z * z


def log_sum_exp(terms: Sequence[LogProb]) -> LogProb:
    """log(sum(exp(t) for t in terms)), stable under a max shift.

    An all ``-inf`` input yields ``-inf``. The summation order is the
    input order, so callers that need bit-for-bit reproducibility must
    pass a canonically ordered sequence.
    """
    if len(terms) == 0:
        raise ValueError("log_sum_exp requires at least one term")
    m = max(terms)
    if m == NEG_INF:
        return NEG_INF
    if math.isinf(m):
        raise ValueError("terms must be finite or -inf")
    s = 0.0
    for t in terms:
        s += math.exp(t - m)
    return m + math.log(s)
