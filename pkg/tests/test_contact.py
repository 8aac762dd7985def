import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wardsource.contact import (
    APART,
    TOGETHER,
    UNKNOWN,
    ContactDay,
    ContactHistory,
    direct_contact_log_lik,
    null_contact_log_lik,
)
from wardsource.distributions import NEG_INF


def history(*entries) -> ContactHistory:
    days = []
    for day, status, *weight in entries:
        days.append(ContactDay(day=day, status=status, weight=weight[0] if weight else None))
    return ContactHistory.build(days)


def brute_force_product(h: ContactHistory, t_infect=None, default_weight=0.5) -> float:
    """Day-by-day probability product, with the explicit weighted average
    over the missing contact indicator rather than the collapsed 1/2."""
    prob = 1.0
    listed = {d.day for d in h.days}
    for d in h.days:
        if t_infect is None or d.day != t_infect:
            if d.status == UNKNOWN:
                prob *= (1.0 - d.weight) * 0.5 + d.weight * 0.5
            else:
                prob *= 0.5
        else:
            if d.status == TOGETHER:
                prob *= 1.0
            elif d.status == APART:
                prob *= 0.0
            else:
                prob *= d.weight
    if t_infect is not None and t_infect not in listed:
        prob *= default_weight
    return prob


statuses = st.one_of(
    st.tuples(st.just(TOGETHER), st.none()),
    st.tuples(st.just(APART), st.none()),
    st.tuples(st.just(UNKNOWN), st.floats(min_value=0.0, max_value=1.0)),
)


@st.composite
def histories(draw):
    days = draw(st.lists(st.integers(min_value=0, max_value=30), unique=True, max_size=12))
    entries = []
    for day in days:
        status, weight = draw(statuses)
        entries.append(ContactDay(day=day, status=status, weight=weight))
    return ContactHistory.build(entries)


class TestNull:
    def test_three_observed_days(self):
        h = history((1, TOGETHER), (2, APART), (3, TOGETHER))
        assert null_contact_log_lik(h) == pytest.approx(math.log(0.125))

    def test_empty(self):
        assert null_contact_log_lik(ContactHistory.build([])) == 0.0

    def test_unknown_days_collapse_to_half(self):
        h = history((1, TOGETHER), (2, APART), (3, UNKNOWN, 0.7))
        assert null_contact_log_lik(h) == pytest.approx(math.log(0.125))

    @given(histories())
    def test_matches_brute_force(self, h):
        assert math.exp(null_contact_log_lik(h)) == pytest.approx(
            brute_force_product(h), rel=1e-12
        )


class TestDirect:
    def test_together_on_infection_day(self):
        h = history((5, TOGETHER), (6, APART), (7, TOGETHER))
        assert direct_contact_log_lik(h, 5) == pytest.approx(math.log(0.25))

    def test_apart_on_infection_day_kills_hypothesis(self):
        h = history((5, TOGETHER), (6, APART))
        assert direct_contact_log_lik(h, 6) == NEG_INF

    def test_unknown_infection_day_uses_weight(self):
        h = history((5, UNKNOWN, 0.3), (6, TOGETHER))
        assert direct_contact_log_lik(h, 5) == pytest.approx(math.log(0.3 * 0.5))

    def test_unlisted_infection_day_uses_default(self):
        h = history((5, TOGETHER), (6, APART))
        assert direct_contact_log_lik(h, 20, default_weight=0.25) == pytest.approx(
            math.log(0.25 * 0.25)
        )
        assert direct_contact_log_lik(h, 20, default_weight=0.0) == NEG_INF

    def test_zero_weight_unknown_day(self):
        h = history((5, UNKNOWN, 0.0))
        assert direct_contact_log_lik(h, 5) == NEG_INF

    @settings(max_examples=200)
    @given(histories(), st.integers(min_value=0, max_value=30))
    def test_matches_brute_force(self, h, t):
        expected = brute_force_product(h, t_infect=t, default_weight=0.5)
        got = direct_contact_log_lik(h, t)
        if expected == 0.0:
            assert got == NEG_INF
        else:
            assert math.exp(got) == pytest.approx(expected, rel=1e-12)

    @settings(max_examples=200)
    @given(histories(), st.integers(min_value=0, max_value=30))
    def test_differs_from_null_only_in_infection_day_factor(self, h, t):
        # direct <= null + log 2 when the infection day is listed; <= null otherwise.
        null = null_contact_log_lik(h)
        direct = direct_contact_log_lik(h, t)
        listed = h.lookup(t) is not None
        bound = null + (math.log(2.0) if listed else 0.0)
        assert direct <= bound + 1e-12

    def test_half_weight_unknowns_give_exact_offset(self):
        h = history((1, UNKNOWN, 0.5), (2, UNKNOWN, 0.5), (3, TOGETHER))
        assert direct_contact_log_lik(h, 3) == pytest.approx(
            null_contact_log_lik(h) + math.log(2.0)
        )


class TestHistoryInvariants:
    def test_reordering_changes_nothing(self):
        a = history((3, TOGETHER), (1, APART), (2, UNKNOWN, 0.4))
        b = history((1, APART), (2, UNKNOWN, 0.4), (3, TOGETHER))
        assert a == b
        assert null_contact_log_lik(a) == null_contact_log_lik(b)
        assert direct_contact_log_lik(a, 2) == direct_contact_log_lik(b, 2)

    def test_duplicate_days_rejected(self):
        with pytest.raises(ValueError):
            history((1, TOGETHER), (1, APART))

    def test_status_validation(self):
        with pytest.raises(ValueError):
            ContactDay(day=1, status="nearby")
        with pytest.raises(ValueError):
            ContactDay(day=1, status=UNKNOWN, weight=None)
        with pytest.raises(ValueError):
            ContactDay(day=1, status=TOGETHER, weight=0.5)
        with pytest.raises(ValueError):
            ContactDay(day=1, status=UNKNOWN, weight=1.5)
