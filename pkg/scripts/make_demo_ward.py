#!/usr/bin/env python3
"""Generate a synthetic demo ward (cases, locations, FASTA, config) on disk.

The ward is built so the interesting behaviours are visible immediately:
one candidate genetically identical to the focal case and co-located at
the right time, one genetically distant, one plausible on timing but
apart on every feasible transmission day.
"""

import argparse
import random
from pathlib import Path

GENOME = 1200
START = "2020-03"


def mutate(rng, seq, n):
    swap = {"A": "C", "C": "G", "G": "T", "T": "A"}
    out = list(seq)
    for pos in rng.sample(range(len(seq)), n):
        out[pos] = swap[out[pos]]
    return "".join(out)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", help="directory to write the ward files into")
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    base = "".join(rng.choice("ACGT") for _ in range(GENOME))
    sequences = {
        "ALPHA": base,                 # matches the focal exactly
        "BRAVO": mutate(rng, base, 14),  # far
        "CHARLIE": mutate(rng, base, 12),  # far, apart at the critical time
        "FOCAL": base,
    }

    (out / "cases.csv").write_text(
        "id,onset_date,admission_date,sample_date\n"
        f"ALPHA,{START}-08,{START}-01,{START}-09\n"
        f"BRAVO,{START}-09,{START}-02,{START}-10\n"
        f"CHARLIE,{START}-10,{START}-03,{START}-11\n"
        f"FOCAL,{START}-14,{START}-04,{START}-15\n"
    )

    rows = ["id,date,location_code"]
    for day in range(5, 16):
        date = f"{START}-{day:02d}"
        rows.append(f"ALPHA,{date},W1")
        rows.append(f"BRAVO,{date},W1")
        rows.append(f"CHARLIE,{date},W2")  # never with the focal
        rows.append(f"FOCAL,{date},W1")
    (out / "locations.csv").write_text("\n".join(rows) + "\n")

    with open(out / "sequences.fasta", "w") as fh:
        for cid, seq in sequences.items():
            fh.write(f">{cid}\n{seq}\n")

    (out / "run.config").write_text(
        "frame.epidemic_start = 2020-01-01\n"
        "genetic.ne = 51\n"
        "genetic.mu = 1.829e-6\n"
        "genetic.generation_time = 5.5\n"
        "genetic.error_constant = 0.404\n"
        "waiting.meanlog = 1.434\n"
        "waiting.sdlog = 0.6612\n"
    )
    print(f"wrote demo ward to {out}/")
    print(
        "try: wardsource posterior "
        f"--cases {out}/cases.csv --locations {out}/locations.csv "
        f"--fasta {out}/sequences.fasta --config {out}/run.config "
        f"--focal FOCAL --out {out}/reports"
    )


if __name__ == "__main__":
    main()
