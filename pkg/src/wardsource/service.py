"""HTTP+JSON ward service for real-time use from the dashboard.

Each ward is an event-sourced session: every mutation (case upsert,
location rows, FASTA upload, parameter change) is validated against the
would-be ward state, appended to a per-ward JSONL event log on disk, and
bumps the revision. Reads always see one consistent revision: mutations
swap in a complete new version atomically, so a posterior never mixes
data from two revisions, and the revision it was computed against is
embedded in the response.

Concurrency: one writer at a time per ward (a per-ward lock), unlimited
concurrent readers across wards. Posteriors are computed synchronously;
ward-scale inputs stay well under the interactive budget.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import re
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path

from fastapi import Depends, FastAPI, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .inference import (
    ABLATABLE_SOURCES,
    DataToggles,
    DegenerateEvidenceError,
    SourcePrior,
    ablation_sequence,
    posterior,
)
from .genomics import parse_fasta_sequences
from .ingest import IngestError, WardSnapshot, build_snapshot, params_as_dict

_WARD_ID = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


class ApiError(Exception):
    def __init__(self, status: int, payload: dict) -> None:
        super().__init__(payload)
        self.status = status
        self.payload = payload


def _not_found(message: str) -> ApiError:
    return ApiError(404, {"detail": message})


def _validation_error(exc: IngestError) -> ApiError:
    return ApiError(
        400, {"errors": [{"field": exc.field_name, "message": str(exc)}]}
    )


@dataclass(frozen=True)
class WardVersion:
    """One immutable revision of a ward's raw inputs plus its built snapshot."""

    revision: int
    cases: dict[str, dict]
    locations: dict[tuple[str, str], str]  # (case id, ISO date) -> code
    fasta: str | None
    config: dict[str, str]
    snapshot: WardSnapshot


def _build_version(
    revision: int,
    cases: dict[str, dict],
    locations: dict[tuple[str, str], str],
    fasta: str | None,
    config: dict[str, str],
) -> WardVersion:
    sequences = parse_fasta_sequences(fasta, "uploaded FASTA") if fasta else None
    snapshot = build_snapshot(
        case_rows=[cases[cid] for cid in sorted(cases)],
        location_rows=[
            {"id": cid, "date": date, "location_code": code}
            for (cid, date), code in sorted(locations.items())
        ],
        sequences=sequences,
        config_values=config,
    )
    return WardVersion(
        revision=revision,
        cases=cases,
        locations=locations,
        fasta=fasta,
        config=config,
        snapshot=snapshot,
    )


class WardSession:
    """Event-sourced ward state: apply-validate-append-commit."""

    def __init__(self, ward_id: str, log_path: Path) -> None:
        self.ward_id = ward_id
        self._log_path = log_path
        self._write_lock = threading.Lock()
        self._version = _build_version(0, {}, {}, None, {})

    @property
    def version(self) -> WardVersion:
        return self._version

    @classmethod
    def create(cls, ward_id: str, log_path: Path, config: dict[str, str]) -> "WardSession":
        session = cls(ward_id, log_path)
        session.apply({"op": "create", "config": config})
        return session

    @classmethod
    def replay(cls, ward_id: str, log_path: Path) -> "WardSession":
        session = cls(ward_id, log_path)
        text = log_path.read_text()
        lines = text.splitlines()
        consumed = 0
        for index, line in enumerate(lines):
            stripped = line.strip()
            if not stripped:
                consumed += len(line) + 1
                continue
            try:
                event = json.loads(stripped)
            except json.JSONDecodeError:
                if index == len(lines) - 1:
                    # A torn final line can survive a crash mid-append; the
                    # event never committed, so truncate it away (otherwise
                    # later appends would corrupt the log for future replays).
                    with open(log_path, "r+") as fh:
                        fh.truncate(consumed)
                    break
                raise
            session._commit(event, persist=False)
            consumed += len(line) + 1
        return session

    def apply(self, event: dict, expected_revision: int | None = None) -> int:
        """Validate the event against the current state and commit it."""
        with self._write_lock:
            if (
                expected_revision is not None
                and expected_revision != self._version.revision
            ):
                raise ApiError(
                    409,
                    {
                        "detail": "revision conflict",
                        "expected": expected_revision,
                        "revision": self._version.revision,
                    },
                )
            return self._commit(event, persist=True)

    def _commit(self, event: dict, persist: bool) -> int:
        current = self._version
        cases = dict(current.cases)
        locations = dict(current.locations)
        fasta = current.fasta
        config = dict(current.config)

        op = event.get("op")
        if op == "create":
            config = dict(event.get("config") or {})
        elif op == "upsert_case":
            case = dict(event["case"])
            cases[case["id"]] = case
        elif op == "upsert_locations":
            for row in event["rows"]:
                locations[(row["id"], row["date"])] = row["location_code"]
        elif op == "set_sequences":
            fasta = event["fasta"]
        elif op == "set_params":
            config = dict(event["config"])
        else:
            raise IngestError(f"unknown event op {op!r}")

        try:
            new_version = _build_version(
                current.revision + 1, cases, locations, fasta, config
            )
        except IngestError:
            raise
        except ValueError as exc:
            # Alignment/FASTA problems are plain ValueErrors from the
            # genomics layer; surface them as 400s like other bad input.
            raise IngestError(str(exc)) from exc
        if persist:
            with open(self._log_path, "a") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        self._version = new_version
        return new_version.revision


class WardStore:
    def __init__(self, data_dir: Path) -> None:
        self._data_dir = data_dir
        self._data_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._wards: dict[str, WardSession] = {}
        for log_path in sorted(self._data_dir.glob("*.events.jsonl")):
            ward_id = log_path.name[: -len(".events.jsonl")]
            self._wards[ward_id] = WardSession.replay(ward_id, log_path)

    def create(self, ward_id: str | None, config: dict[str, str]) -> WardSession:
        with self._lock:
            wid = ward_id or uuid.uuid4().hex[:12]
            if not _WARD_ID.match(wid):
                raise IngestError(
                    f"ward id must match {_WARD_ID.pattern}", field_name="ward_id"
                )
            if wid in self._wards:
                raise ApiError(409, {"detail": f"ward {wid!r} already exists"})
            session = WardSession.create(
                wid, self._data_dir / f"{wid}.events.jsonl", config
            )
            self._wards[wid] = session
            return session

    def get(self, ward_id: str) -> WardSession:
        session = self._wards.get(ward_id)
        if session is None:
            raise _not_found(f"unknown ward {ward_id!r}")
        return session

    def list(self) -> list[WardSession]:
        return [self._wards[wid] for wid in sorted(self._wards)]


# --- request/response models --------------------------------------------------


class WardCreateIn(BaseModel):
    ward_id: str | None = None
    config: dict[str, str] = {}


class CaseIn(BaseModel):
    onset_date: datetime.date
    admission_date: datetime.date | None = None
    sample_date: datetime.date | None = None
    expected_revision: int | None = None


class LocationRowIn(BaseModel):
    id: str
    date: datetime.date
    location_code: str


class LocationsIn(BaseModel):
    rows: list[LocationRowIn]
    expected_revision: int | None = None


class ParamsIn(BaseModel):
    config: dict[str, str]
    expected_revision: int | None = None


def _parse_prior(raw: str) -> SourcePrior:
    if raw == "uniform":
        return SourcePrior()
    if raw.startswith("noso:"):
        try:
            return SourcePrior(mode="nosocomial-split", p_nosocomial=float(raw[5:]))
        except ValueError as exc:
            raise IngestError(f"invalid prior {raw!r}: {exc}", field_name="prior") from None
    raise IngestError(f"prior must be 'uniform' or 'noso:<p>', got {raw!r}", field_name="prior")


def _require_focal(snapshot: WardSnapshot, focal: str) -> None:
    if focal not in snapshot.cases:
        raise _not_found(f"unknown case {focal!r}")


def _loglik_json(value: float) -> float | None:
    # -inf (impossible hypothesis) has no strict-JSON encoding; null stands in.
    return None if value == float("-inf") else value


def _posterior_rows(post) -> list[dict]:
    return [
        {
            "source": h.label(),
            "kind": h.kind,
            "probability": post.probs[h],
            "log_likelihood": _loglik_json(post.log_liks[h]),
        }
        for h in post.probs
    ]


def _posterior_body(version: WardVersion, focal: str, toggles: DataToggles, prior: SourcePrior) -> dict:
    snapshot = version.snapshot
    _require_focal(snapshot, focal)
    candidates = sorted(cid for cid in snapshot.cases if cid != focal)
    post = posterior(focal, candidates, snapshot, prior, toggles)
    return {
        "revision": version.revision,
        "focal": focal,
        "candidates": candidates,
        "rows": _posterior_rows(post),
        "nosocomial": post.nosocomial,
        "toggles": {
            "onsets": True,
            "genetics": toggles.use_genetics,
            "locations": toggles.use_locations,
            "admissions": toggles.use_admissions,
        },
        "prior": prior.describe(),
    }


def create_app(
    data_dir: str | Path,
    token: str | None = None,
    cors_origins: list[str] | None = None,
) -> FastAPI:
    app = FastAPI(title="wardsource", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = WardStore(Path(data_dir))
    app.state.store = store

    def authorized(request: Request) -> None:
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise ApiError(401, {"detail": "missing or invalid bearer token"})

    auth = Depends(authorized)

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.payload)

    @app.exception_handler(IngestError)
    async def handle_ingest_error(request: Request, exc: IngestError):
        err = _validation_error(exc)
        return JSONResponse(status_code=err.status, content=err.payload)

    @app.exception_handler(DegenerateEvidenceError)
    async def handle_degenerate(request: Request, exc: DegenerateEvidenceError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def handle_request_validation(request: Request, exc: RequestValidationError):
        errors = [
            {
                "field": ".".join(str(part) for part in err.get("loc", []) if part != "body"),
                "message": err.get("msg", "invalid value"),
            }
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"errors": errors})

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    @app.post("/v1/wards", status_code=201, dependencies=[auth])
    def create_ward(body: WardCreateIn):
        session = store.create(body.ward_id, body.config)
        return {"ward_id": session.ward_id, "revision": session.version.revision}

    @app.get("/v1/wards", dependencies=[auth])
    def list_wards():
        return {
            "wards": [
                {
                    "ward_id": s.ward_id,
                    "revision": s.version.revision,
                    "cases": len(s.version.snapshot.cases),
                }
                for s in store.list()
            ]
        }

    @app.get("/v1/wards/{ward_id}", dependencies=[auth])
    def ward_detail(ward_id: str):
        version = store.get(ward_id).version
        snapshot = version.snapshot
        return {
            "ward_id": ward_id,
            "revision": version.revision,
            "cases": [
                {
                    "id": cid,
                    **{
                        k: version.cases[cid].get(k)
                        for k in ("onset_date", "admission_date", "sample_date")
                    },
                    "has_sequence": snapshot.cases[cid].has_sequence,
                    "location_days": len(snapshot.locations.get(cid, {})),
                }
                for cid in sorted(snapshot.cases)
            ],
            "params": params_as_dict(snapshot),
            "config": version.config,
            "warnings": list(snapshot.warnings),
        }

    @app.put("/v1/wards/{ward_id}/cases/{case_id}", dependencies=[auth])
    def upsert_case(ward_id: str, case_id: str, body: CaseIn):
        session = store.get(ward_id)
        case = {
            "id": case_id,
            "onset_date": body.onset_date.isoformat(),
            "admission_date": body.admission_date.isoformat() if body.admission_date else None,
            "sample_date": body.sample_date.isoformat() if body.sample_date else None,
        }
        revision = session.apply(
            {"op": "upsert_case", "case": case}, body.expected_revision
        )
        return {"ward_id": ward_id, "revision": revision}

    @app.post("/v1/wards/{ward_id}/locations", dependencies=[auth])
    def upsert_locations(ward_id: str, body: LocationsIn):
        session = store.get(ward_id)
        rows = [
            {"id": row.id, "date": row.date.isoformat(), "location_code": row.location_code}
            for row in body.rows
        ]
        revision = session.apply(
            {"op": "upsert_locations", "rows": rows}, body.expected_revision
        )
        return {"ward_id": ward_id, "revision": revision, "rows": len(rows)}

    @app.post("/v1/wards/{ward_id}/sequences", dependencies=[auth])
    async def upload_sequences(
        ward_id: str, fasta: UploadFile, expected_revision: int | None = None
    ):
        session = store.get(ward_id)
        text = (await fasta.read()).decode("utf-8")
        revision = session.apply({"op": "set_sequences", "fasta": text}, expected_revision)
        count = len(parse_fasta_sequences(text, "uploaded FASTA"))
        return {"ward_id": ward_id, "revision": revision, "sequences": count}

    @app.put("/v1/wards/{ward_id}/params", dependencies=[auth])
    def set_params(ward_id: str, body: ParamsIn):
        session = store.get(ward_id)
        revision = session.apply(
            {"op": "set_params", "config": body.config}, body.expected_revision
        )
        return {"ward_id": ward_id, "revision": revision}

    @app.get("/v1/wards/{ward_id}/posterior", dependencies=[auth])
    def get_posterior(
        ward_id: str,
        focal: str,
        genetics: bool = True,
        locations: bool = True,
        admissions: bool = True,
        prior: str = "uniform",
    ):
        version = store.get(ward_id).version
        toggles = DataToggles(
            use_genetics=genetics, use_locations=locations, use_admissions=admissions
        )
        return _posterior_body(version, focal, toggles, _parse_prior(prior))

    @app.get("/v1/wards/{ward_id}/ablation", dependencies=[auth])
    def get_ablation(
        ward_id: str,
        focal: str,
        order: str = ",".join(ABLATABLE_SOURCES),
        prior: str = "uniform",
    ):
        version = store.get(ward_id).version
        snapshot = version.snapshot
        _require_focal(snapshot, focal)
        parts = tuple(p.strip() for p in order.split(","))
        if sorted(parts) != sorted(ABLATABLE_SOURCES):
            raise IngestError(
                f"order must be a permutation of {','.join(ABLATABLE_SOURCES)}",
                field_name="order",
            )
        candidates = sorted(cid for cid in snapshot.cases if cid != focal)
        stages = ablation_sequence(focal, candidates, snapshot, _parse_prior(prior), parts)
        blocks = []
        previous = None
        for stage in stages:
            rows = _posterior_rows(stage.posterior)
            deltas = None
            if previous is not None:
                deltas = {
                    row["source"]: row["probability"] - previous[row["source"]]
                    for row in rows
                }
            blocks.append(
                {
                    "stage": stage.stage,
                    "toggles": {
                        "onsets": True,
                        "genetics": stage.toggles.use_genetics,
                        "locations": stage.toggles.use_locations,
                        "admissions": stage.toggles.use_admissions,
                    },
                    "rows": rows,
                    "nosocomial": stage.posterior.nosocomial,
                    "delta_vs_previous": deltas,
                }
            )
            previous = {row["source"]: row["probability"] for row in rows}
        return {
            "revision": version.revision,
            "focal": focal,
            "order": list(parts),
            "stages": blocks,
        }

    @app.get("/v1/wards/{ward_id}/summary", dependencies=[auth])
    def ward_summary(
        ward_id: str,
        genetics: bool = True,
        locations: bool = True,
        admissions: bool = True,
        prior: str = "uniform",
    ):
        version = store.get(ward_id).version
        snapshot = version.snapshot
        toggles = DataToggles(
            use_genetics=genetics, use_locations=locations, use_admissions=admissions
        )
        prior_obj = _parse_prior(prior)
        case_ids = sorted(snapshot.cases)
        columns = case_ids + ["hospital", "community", "nosocomial"]
        values = []
        for focal in case_ids:
            body = _posterior_body(version, focal, toggles, prior_obj)
            by_source = {row["source"]: row["probability"] for row in body["rows"]}
            row = [None if cid == focal else by_source.get(cid) for cid in case_ids]
            row += [by_source["hospital"], by_source["community"], body["nosocomial"]]
            values.append(row)
        return {
            "revision": version.revision,
            "rows": case_ids,
            "columns": columns,
            "values": values,
        }

    return app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="wardsource-service")
    parser.add_argument("--host", default=os.environ.get("WARDSOURCE_HOST", "127.0.0.1"))
    parser.add_argument(
        "--port", type=int, default=int(os.environ.get("WARDSOURCE_PORT", "8470"))
    )
    parser.add_argument(
        "--data-dir", default=os.environ.get("WARDSOURCE_DATA_DIR", "./ward-data")
    )
    parser.add_argument("--token", default=os.environ.get("WARDSOURCE_TOKEN"))
    parser.add_argument(
        "--cors-origin",
        action="append",
        default=None,
        help="allowed dashboard origin; repeatable (default: any)",
    )
    args = parser.parse_args(argv)

    import uvicorn

    app = create_app(args.data_dir, token=args.token, cors_origins=args.cors_origin)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
