"""Shared builders for synthetic wards used across the test suite."""

import datetime
import random
from dataclasses import replace

from wardsource.epidemiology import CaseRecord, EpidemicFrame
from wardsource.genomics import Alignment
from wardsource.ingest import WardSnapshot, default_params

START_DATE = datetime.date(2020, 1, 1)
LOCATION_CODES = ("W1", "W2", "BAY1")


def make_snapshot(
    cases,
    sequences=None,
    locations=None,
    weights=None,
    params=None,
    horizon=None,
):
    """Build a snapshot directly from in-memory pieces."""
    sequences = sequences or {}
    locations = locations or {}
    weights = weights or {}
    cases = {
        cid: replace(case, has_sequence=cid in sequences)
        for cid, case in cases.items()
    }
    days = [c.onset for c in cases.values()]
    days += [c.admission for c in cases.values() if c.admission is not None]
    days += [c.sample_time for c in cases.values() if c.sample_time is not None]
    days += [d for by_day in locations.values() for d in by_day]
    days += [d for (_, _, d) in weights]
    if horizon is None:
        horizon = max(days, default=0)
    return WardSnapshot(
        cases=cases,
        params=params or default_params(),
        frame=EpidemicFrame(epidemic_start=0, horizon_end=horizon),
        start_date=START_DATE,
        alignment=Alignment.from_sequences(sequences) if sequences else None,
        locations=locations,
        contact_weights=weights,
    )


def case(cid, onset, admission=None, sample=None):
    return CaseRecord(id=cid, onset=onset, admission=admission, sample_time=sample)


def random_ward(rng: random.Random, max_candidates=10, max_frame=60, params=None):
    """Randomized synthetic ward: returns (snapshot, focal id, candidate ids).

    Sequences are small mutations of a shared base so SNP counts stay
    realistic; every optional field (admission, sample date, sequence,
    locations, elicited weights) is independently present or absent.
    """
    n_candidates = rng.randint(1, max_candidates)
    horizon = rng.randint(14, max_frame)
    ids = [f"P{i:02d}" for i in range(n_candidates + 1)]

    cases = {}
    for cid in ids:
        onset = rng.randint(0, horizon)
        admission = rng.randint(0, onset) if rng.random() < 0.6 else None
        sample = min(horizon, onset + rng.randint(0, 3)) if rng.random() < 0.5 else None
        cases[cid] = CaseRecord(id=cid, onset=onset, admission=admission, sample_time=sample)

    sequences = {}
    if rng.random() < 0.9:
        length = rng.randint(40, 120)
        base = "".join(rng.choice("ACGT") for _ in range(length))
        for cid in ids:
            if rng.random() < 0.75:
                seq = list(base)
                for _ in range(rng.randint(0, 6)):
                    seq[rng.randrange(length)] = rng.choice("ACGTN-")
                sequences[cid] = "".join(seq)

    locations = {}
    for cid in ids:
        if rng.random() < 0.8:
            first = rng.randint(0, horizon)
            by_day = {}
            for day in range(first, min(horizon, first + rng.randint(1, 10)) + 1):
                if rng.random() < 0.8:
                    by_day[day] = rng.choice(LOCATION_CODES)
            if by_day:
                locations[cid] = by_day

    weights = {}
    for _ in range(rng.randint(0, 4)):
        a, b = rng.sample(ids, 2)
        key = (a, b) if a <= b else (b, a)
        weights[(key[0], key[1], rng.randint(0, horizon))] = rng.random()

    snapshot = make_snapshot(
        cases,
        sequences=sequences,
        locations=locations,
        weights=weights,
        params=params,
        horizon=horizon,
    )
    return snapshot, ids[0], ids[1:]
