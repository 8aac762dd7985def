#!/usr/bin/env python3
"""Timing experiment: posterior latency against ward size and frame length.

Prints single-focal latency and the full all-focal matrix time for a
ward with full data (sequences, admissions, locations), single-threaded.
"""

import argparse
import random
import time

from wardsource.epidemiology import CaseRecord, EpidemicFrame
from wardsource.genomics import Alignment
from wardsource.inference import posterior
from wardsource.ingest import WardSnapshot, default_params

import datetime

GENOME = 29903


def build_ward(n_cases: int, frame_days: int, seed: int = 787) -> WardSnapshot:
    rng = random.Random(seed)
    base = "".join(rng.choices("ACGT", k=GENOME))
    swap = {"A": "C", "C": "G", "G": "T", "T": "A"}
    cases, sequences, locations = {}, {}, {}
    for i in range(n_cases):
        cid = f"P{i:03d}"
        onset = frame_days // 2 + (i * 7) % (frame_days // 2 - 5)
        admission = max(0, onset - 3 - (i % 11))
        cases[cid] = CaseRecord(
            id=cid, onset=onset, admission=admission,
            sample_time=min(onset + 1, frame_days), has_sequence=True,
        )
        seq = list(base)
        for pos in rng.sample(range(GENOME), (i * 3) % 14):
            seq[pos] = swap[seq[pos]]
        sequences[cid] = "".join(seq)
        locations[cid] = {
            d: ("W1" if (d + i) % 3 else "W2")
            for d in range(max(0, onset - 30), min(frame_days, onset + 5))
        }
    return WardSnapshot(
        cases=cases,
        params=default_params(),
        frame=EpidemicFrame(0, frame_days),
        start_date=datetime.date(2020, 1, 1),
        alignment=Alignment.from_sequences(sequences),
        locations=locations,
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cases", type=int, default=31)
    parser.add_argument("--frame-days", type=int, default=120)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    snapshot = build_ward(args.cases, args.frame_days)
    ids = sorted(snapshot.cases)
    focal, candidates = ids[0], ids[1:]

    posterior(focal, candidates, snapshot)  # warm pair caches
    singles = []
    for _ in range(args.repeats):
        t0 = time.perf_counter()
        posterior(focal, candidates, snapshot)
        singles.append(time.perf_counter() - t0)
    print(
        f"single focal ({len(candidates)} candidates, {args.frame_days}-day frame): "
        f"best {min(singles) * 1000:.2f} ms, mean {sum(singles) / len(singles) * 1000:.2f} ms"
    )

    cold = build_ward(args.cases, args.frame_days)
    t0 = time.perf_counter()
    for fid in sorted(cold.cases):
        posterior(fid, [c for c in cold.cases if c != fid], cold)
    print(f"all-focal matrix ({args.cases} cases, cold caches): {time.perf_counter() - t0:.3f} s")


if __name__ == "__main__":
    main()
