#!/usr/bin/env python3
"""Seed a running service with a demo ward through the public HTTP API.

Start the service first (``python3 -m wardsource.service --port 8470``),
then run this script; it creates ward ``demo`` and pushes cases,
locations, and sequences through the same endpoints the dashboard uses.
"""

import argparse
import random

import httpx

GENOME = 1200


def mutate(rng, seq, n):
    swap = {"A": "C", "C": "G", "G": "T", "T": "A"}
    out = list(seq)
    for pos in rng.sample(range(len(seq)), n):
        out[pos] = swap[out[pos]]
    return "".join(out)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--base-url", default="http://127.0.0.1:8470")
    parser.add_argument("--ward-id", default="demo")
    parser.add_argument("--token", default=None)
    args = parser.parse_args()

    headers = {"Authorization": f"Bearer {args.token}"} if args.token else {}
    client = httpx.Client(base_url=args.base_url, headers=headers, timeout=30)

    r = client.post("/v1/wards", json={"ward_id": args.ward_id})
    r.raise_for_status()
    print(f"created ward {args.ward_id} (revision {r.json()['revision']})")

    cases = {
        "ALPHA": {"onset_date": "2020-03-08", "admission_date": "2020-03-01"},
        "BRAVO": {"onset_date": "2020-03-09", "admission_date": "2020-03-02"},
        "CHARLIE": {"onset_date": "2020-03-10", "admission_date": "2020-03-03"},
        "FOCAL": {"onset_date": "2020-03-14", "admission_date": "2020-03-04"},
    }
    for cid, body in cases.items():
        client.put(f"/v1/wards/{args.ward_id}/cases/{cid}", json=body).raise_for_status()

    rows = []
    for day in range(5, 16):
        date = f"2020-03-{day:02d}"
        rows += [
            {"id": "ALPHA", "date": date, "location_code": "W1"},
            {"id": "BRAVO", "date": date, "location_code": "W1"},
            {"id": "CHARLIE", "date": date, "location_code": "W2"},
            {"id": "FOCAL", "date": date, "location_code": "W1"},
        ]
    client.post(
        f"/v1/wards/{args.ward_id}/locations", json={"rows": rows}
    ).raise_for_status()

    rng = random.Random(11)
    base = "".join(rng.choice("ACGT") for _ in range(GENOME))
    fasta = "".join(
        f">{cid}\n{seq}\n"
        for cid, seq in {
            "ALPHA": base,
            "BRAVO": mutate(rng, base, 14),
            "CHARLIE": mutate(rng, base, 12),
            "FOCAL": base,
        }.items()
    )
    r = client.post(
        f"/v1/wards/{args.ward_id}/sequences",
        files={"fasta": ("demo.fasta", fasta, "text/plain")},
    )
    r.raise_for_status()
    print(f"seeded: revision {r.json()['revision']}")

    post = client.get(
        f"/v1/wards/{args.ward_id}/posterior", params={"focal": "FOCAL"}
    ).json()
    for row in post["rows"]:
        print(f"  {row['source']:>10}: {row['probability']:.3f}")
    print(f"  nosocomial: {post['nosocomial']:.3f}")


if __name__ == "__main__":
    main()
