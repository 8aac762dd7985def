"""Batch command line: posteriors and data-source ablations for ward files.

Outputs are deterministic: hypothesis rows are ordered candidates-first
(lexicographic) then hospital then community, floats are serialized with
``repr``, and no timestamps enter the reports, so identical inputs give
byte-identical files regardless of worker count.

Exit codes: 0 success, 1 invalid input or flags, 2 degenerate evidence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .inference import (
    ABLATABLE_SOURCES,
    DataToggles,
    DegenerateEvidenceError,
    SourcePrior,
    ablation_sequence,
    posterior,
)
from .ingest import IngestError, WardSnapshot, load_ward, params_as_dict

SCHEMA_VERSION = "1"


def _parse_prior(raw: str) -> SourcePrior:
    if raw == "uniform":
        return SourcePrior()
    if raw.startswith("noso:"):
        try:
            p = float(raw.split(":", 1)[1])
        except ValueError:
            raise IngestError(f"--prior noso:<p> needs a number, got {raw!r}") from None
        return SourcePrior(mode="nosocomial-split", p_nosocomial=p)
    raise IngestError(f"--prior must be 'uniform' or 'noso:<p>', got {raw!r}")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _provenance(args, snapshot: WardSnapshot, prior: SourcePrior, toggles: DataToggles):
    inputs = {}
    for name in ("cases", "locations", "fasta", "config", "weights"):
        value = getattr(args, name, None)
        if value is not None:
            path = Path(value)
            inputs[name] = {"path": path.name, "sha256": _sha256(path)}
    return {
        "engine": "wardsource 0.1.0",
        "inputs": inputs,
        "params": params_as_dict(snapshot),
        "prior": prior.describe(),
        "toggles": _toggles_dict(toggles),
        "warnings": list(snapshot.warnings),
    }


def _loglik_json(value: float) -> float | None:
    # -inf (impossible hypothesis) has no strict-JSON encoding; null stands in.
    return None if value == float("-inf") else value


def _rows(post) -> list[dict[str, object]]:
    return [
        {
            "source": h.label(),
            "kind": h.kind,
            "probability": post.probs[h],
            "log_likelihood": _loglik_json(post.log_liks[h]),
        }
        for h in post.probs
    ]


def _toggles_dict(toggles: DataToggles) -> dict[str, bool]:
    return {
        "onsets": True,
        "genetics": toggles.use_genetics,
        "locations": toggles.use_locations,
        "admissions": toggles.use_admissions,
    }


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_posterior_csv(path: Path, payload: dict) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["focal", "source", "kind", "probability", "log_likelihood", "nosocomial"])
    for row in payload["rows"]:
        loglik = row["log_likelihood"]
        writer.writerow(
            [
                payload["focal"],
                row["source"],
                row["kind"],
                repr(row["probability"]),
                "-inf" if loglik is None else repr(loglik),
                repr(payload["nosocomial"]),
            ]
        )
    path.write_text(buffer.getvalue())


def _posterior_payload(focal, candidates, snapshot, prior, toggles, args) -> dict:
    post = posterior(focal, candidates, snapshot, prior, toggles)
    return {
        "schema_version": SCHEMA_VERSION,
        "focal": focal,
        "candidates": sorted(candidates),
        "rows": _rows(post),
        "nosocomial": post.nosocomial,
        "provenance": _provenance(args, snapshot, prior, toggles),
    }


def _focal_ids(args, snapshot: WardSnapshot) -> list[str]:
    if args.all:
        return sorted(snapshot.cases)
    if args.focal not in snapshot.cases:
        raise IngestError(f"unknown focal case {args.focal!r}")
    return [args.focal]


def _candidates_for(focal: str, snapshot: WardSnapshot) -> list[str]:
    return sorted(cid for cid in snapshot.cases if cid != focal)


def _heatmap(snapshot: WardSnapshot, results: dict[str, dict]) -> dict:
    """Matrix of probabilities: rows are focal cases, columns are sources."""
    case_ids = sorted(snapshot.cases)
    columns = case_ids + ["hospital", "community", "nosocomial"]
    values = []
    for focal in case_ids:
        by_source = {row["source"]: row["probability"] for row in results[focal]["rows"]}
        row = [None if cid == focal else by_source.get(cid) for cid in case_ids]
        row += [
            by_source["hospital"],
            by_source["community"],
            results[focal]["nosocomial"],
        ]
        values.append(row)
    return {
        "schema_version": SCHEMA_VERSION,
        "rows": case_ids,
        "columns": columns,
        "values": values,
    }


def _write_heatmap_csv(path: Path, heatmap: dict) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["focal"] + heatmap["columns"])
    for focal, row in zip(heatmap["rows"], heatmap["values"]):
        writer.writerow([focal] + ["" if v is None else repr(v) for v in row])
    path.write_text(buffer.getvalue())


def _run_many(work, focal_ids, jobs):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            computed = list(pool.map(work, focal_ids))
    else:
        computed = [work(f) for f in focal_ids]
    # Deterministic merge regardless of completion order.
    return dict(sorted(zip(focal_ids, computed)))


def run_posterior(args) -> int:
    snapshot = load_ward(
        args.cases,
        args.locations,
        fasta_path=args.fasta,
        config_path=args.config,
        weights_path=args.weights,
    )
    prior = _parse_prior(args.prior)
    toggles = DataToggles()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    focal_ids = _focal_ids(args, snapshot)

    def work(focal: str) -> dict:
        return _posterior_payload(
            focal, _candidates_for(focal, snapshot), snapshot, prior, toggles, args
        )

    results = _run_many(work, focal_ids, args.jobs)

    written = []
    for focal, payload in results.items():
        if args.format == "json":
            path = out / f"posterior_{focal}.json"
            _write_json(path, payload)
        else:
            path = out / f"posterior_{focal}.csv"
            _write_posterior_csv(path, payload)
        written.append(path)
    if args.all:
        heatmap = _heatmap(snapshot, results)
        if args.format == "json":
            path = out / "heatmap.json"
            _write_json(path, heatmap)
        else:
            path = out / "heatmap.csv"
            _write_heatmap_csv(path, heatmap)
        written.append(path)
    for path in written:
        print(path)
    return 0


def run_ablation(args) -> int:
    snapshot = load_ward(
        args.cases,
        args.locations,
        fasta_path=args.fasta,
        config_path=args.config,
        weights_path=args.weights,
    )
    prior = _parse_prior(args.prior)
    order = tuple(part.strip() for part in args.order.split(","))
    if sorted(order) != sorted(ABLATABLE_SOURCES):
        raise IngestError(
            f"--order must be a permutation of {','.join(ABLATABLE_SOURCES)}, got {args.order!r}"
        )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    focal_ids = _focal_ids(args, snapshot)

    def work(focal: str) -> dict:
        stages = ablation_sequence(
            focal, _candidates_for(focal, snapshot), snapshot, prior, order
        )
        blocks = []
        previous = None
        for stage in stages:
            post = stage.posterior
            rows = _rows(post)
            deltas = None
            if previous is not None:
                deltas = {
                    row["source"]: row["probability"] - previous[row["source"]]
                    for row in rows
                }
            blocks.append(
                {
                    "stage": stage.stage,
                    "toggles": _toggles_dict(stage.toggles),
                    "rows": rows,
                    "nosocomial": post.nosocomial,
                    "delta_vs_previous": deltas,
                }
            )
            previous = {row["source"]: row["probability"] for row in rows}
        return {
            "schema_version": SCHEMA_VERSION,
            "focal": focal,
            "order": list(order),
            "stages": blocks,
            "provenance": _provenance(args, snapshot, prior, DataToggles()),
        }

    results = _run_many(work, focal_ids, args.jobs)
    written = []
    for focal, payload in results.items():
        if args.format == "json":
            path = out / f"ablation_{focal}.json"
            _write_json(path, payload)
        else:
            path = out / f"ablation_{focal}.csv"
            buffer = io.StringIO()
            writer = csv.writer(buffer, lineterminator="\n")
            writer.writerow(
                [
                    "focal",
                    "stage",
                    "source",
                    "kind",
                    "probability",
                    "log_likelihood",
                    "nosocomial",
                    "delta_vs_previous",
                ]
            )
            for block in payload["stages"]:
                for row in block["rows"]:
                    delta = (
                        ""
                        if block["delta_vs_previous"] is None
                        else repr(block["delta_vs_previous"][row["source"]])
                    )
                    loglik = row["log_likelihood"]
                    writer.writerow(
                        [
                            focal,
                            block["stage"],
                            row["source"],
                            row["kind"],
                            repr(row["probability"]),
                            "-inf" if loglik is None else repr(loglik),
                            repr(block["nosocomial"]),
                            delta,
                        ]
                    )
            path.write_text(buffer.getvalue())
        written.append(path)
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wardsource",
        description="Attribute a hospital infection to candidate infectors, "
        "an unidentified hospital source, or the community.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--cases", required=True, help="cases CSV")
        sub.add_argument("--locations", required=True, help="locations CSV")
        sub.add_argument("--fasta", default=None, help="aligned FASTA (optional)")
        sub.add_argument("--config", required=True, help="run configuration file")
        sub.add_argument("--weights", default=None, help="elicited contact weights CSV")
        group = sub.add_mutually_exclusive_group(required=True)
        group.add_argument("--focal", help="focal case id")
        group.add_argument("--all", action="store_true", help="every case in turn")
        sub.add_argument(
            "--prior", default="uniform", help="'uniform' or 'noso:<p>' (default uniform)"
        )
        sub.add_argument("--out", required=True, help="output directory")
        sub.add_argument("--format", choices=("json", "csv"), default="json")
        sub.add_argument("--jobs", type=int, default=1, help="worker threads for --all")

    sub_posterior = subparsers.add_parser("posterior", help="source posterior per focal case")
    add_common(sub_posterior)
    sub_posterior.set_defaults(func=run_posterior)

    sub_ablation = subparsers.add_parser(
        "ablation", help="posteriors while cumulatively enabling data sources"
    )
    add_common(sub_ablation)
    sub_ablation.add_argument(
        "--order",
        default=",".join(ABLATABLE_SOURCES),
        help="comma-separated permutation of genetics,locations,admissions",
    )
    sub_ablation.set_defaults(func=run_ablation)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateEvidenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (IngestError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
