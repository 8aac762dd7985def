"""Ward dataset ingestion: CSV/FASTA/config parsing and the immutable snapshot.

File formats
------------
cases CSV      ``id,onset_date,admission_date,sample_date`` (last two may be
               empty), ISO-8601 dates.
locations CSV  ``id,date,location_code`` -- one row per patient-day with a
               known location; two patients are together on a day iff their
               codes compare equal.
weights CSV    ``id_a,id_b,date,weight`` (optional) -- elicited probability
               that the pair was together on a day neither side has a
               location row for.
config         flat ``key = value`` lines with dotted keys (``genetic.ne =
               51``); ``#`` starts a comment. Unknown keys are errors.

Internally every date becomes an integer day offset from the configured
epidemic start, and the loaded :class:`WardSnapshot` is immutable.
"""

from __future__ import annotations

import csv
import datetime
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .contact import APART, TOGETHER, UNKNOWN, ContactDay, ContactHistory
from .distributions import DAY_BIN, DENSITY, WaitingTimeModel
from .epidemiology import (
    CaseRecord,
    EpidemicFrame,
    TransmissionProfile,
    default_transmission_profile,
)
from .genomics import (
    Alignment,
    PairwiseGeneticSummary,
    PairwiseReducer,
    PathogenGeneticParams,
    read_fasta,
)


class IngestError(ValueError):
    """Invalid ward input; ``field`` names the offending column when known."""

    def __init__(self, message: str, field_name: str | None = None) -> None:
        super().__init__(message)
        self.field_name = field_name


class DuplicateCaseIdError(IngestError):
    pass


class DateFormatError(IngestError):
    pass


class UnknownSequenceIdError(IngestError):
    """FASTA record id with no matching case row."""


class UnknownCaseIdError(IngestError):
    """Location or weight row referencing an id absent from the cases table."""


@dataclass(frozen=True)
class ModelParams:
    """Model constants bundled for one run."""

    genetic: PathogenGeneticParams
    waiting: WaitingTimeModel
    profile: TransmissionProfile
    default_unknown_contact_weight: float = 0.5

    def __post_init__(self) -> None:
        w = self.default_unknown_contact_weight
        if not (0.0 <= w <= 1.0):
            raise ValueError(f"default unknown-contact weight must be in [0, 1], got {w}")


def default_params() -> ModelParams:
    """SARS-CoV-2 defaults used when the config file leaves keys unset."""
    return ModelParams(
        genetic=PathogenGeneticParams(ne=51.0, mu=1.829e-6, gen_time=5.5),
        waiting=WaitingTimeModel(meanlog=1.434, sdlog=0.6612),
        profile=default_transmission_profile(),
    )


@dataclass(frozen=True)
class WardSnapshot:
    """Validated, immutable view of one ward's data.

    Derived per-pair quantities (alignment reductions, contact histories)
    are memoized internally; the memos are safe under concurrent readers
    with serialized insertion, so a snapshot can be shared across threads.
    """

    cases: Mapping[str, CaseRecord]
    params: ModelParams
    frame: EpidemicFrame
    start_date: datetime.date
    alignment: Alignment | None = None
    locations: Mapping[str, Mapping[int, str]] = field(default_factory=dict)
    contact_weights: Mapping[tuple[str, str, int], float] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()
    _reducer: PairwiseReducer | None = field(
        init=False, repr=False, compare=False, default=None
    )
    _contact_memo: dict = field(init=False, repr=False, compare=False, default=None)
    _contact_lock: threading.Lock = field(
        init=False, repr=False, compare=False, default=None
    )

    def __post_init__(self) -> None:
        self._validate()
        if self.alignment is not None:
            sample_times = {
                cid: self.sample_day(cid)
                for cid in self.alignment.sequences
                if cid in self.cases
            }
            object.__setattr__(
                self, "_reducer", PairwiseReducer(self.alignment, sample_times)
            )
        object.__setattr__(self, "_contact_memo", {})
        object.__setattr__(self, "_contact_lock", threading.Lock())

    def _validate(self) -> None:
        for cid, case in self.cases.items():
            if cid != case.id:
                raise IngestError(f"case key {cid!r} does not match record id {case.id!r}")
            for label, day in (
                ("onset", case.onset),
                ("admission", case.admission),
                ("sample", case.sample_time),
            ):
                if day is not None and not (
                    self.frame.epidemic_start <= day <= self.frame.horizon_end
                ):
                    raise IngestError(
                        f"case {cid}: {label} day {day} outside the modeled frame"
                    )
        if self.alignment is not None:
            for cid in self.alignment.sequences:
                if cid not in self.cases:
                    raise UnknownSequenceIdError(
                        f"FASTA record {cid!r} has no matching case row"
                    )
        for cid, by_day in self.locations.items():
            if cid not in self.cases:
                raise UnknownCaseIdError(
                    f"location rows reference unknown case {cid!r}"
                )
            for day in by_day:
                if not (self.frame.epidemic_start <= day <= self.frame.horizon_end):
                    raise IngestError(
                        f"location row for {cid} on day {day} outside the modeled frame"
                    )
        for (a, b, day), weight in self.contact_weights.items():
            for cid in (a, b):
                if cid not in self.cases:
                    raise UnknownCaseIdError(
                        f"contact weight references unknown case {cid!r}"
                    )
            if not (0.0 <= weight <= 1.0):
                raise IngestError(
                    f"contact weight for ({a}, {b}) on day {day} must be in [0, 1]"
                )
            if not (self.frame.epidemic_start <= day <= self.frame.horizon_end):
                raise IngestError(
                    f"contact weight for ({a}, {b}) on day {day} outside the frame"
                )

    def case(self, case_id: str) -> CaseRecord:
        try:
            return self.cases[case_id]
        except KeyError:
            raise KeyError(f"unknown case id {case_id!r}") from None

    def sample_day(self, case_id: str) -> int:
        """Sampling day for the case's isolate; onset stands in when unrecorded."""
        case = self.case(case_id)
        return case.sample_time if case.sample_time is not None else case.onset

    def genetic_summary(self, a: str, b: str) -> PairwiseGeneticSummary | None:
        """Pairwise reduction, or None when the pair's genetic data is missing."""
        if self._reducer is None:
            return None
        if (
            self.alignment is None
            or a not in self.alignment.sequences
            or b not in self.alignment.sequences
        ):
            return None
        summary = self._reducer.summary(a, b)
        return summary if summary.effective_length > 0 else None

    def contact_history(self, a: str, b: str) -> ContactHistory:
        key = (a, b) if a <= b else (b, a)
        got = self._contact_memo.get(key)
        if got is None:
            got = build_contact_history(self, key[0], key[1])
            with self._contact_lock:
                self._contact_memo.setdefault(key, got)
        return got

    def weight_for(self, a: str, b: str, day: int) -> float:
        key = (a, b) if a <= b else (b, a)
        return self.contact_weights.get(
            (key[0], key[1], day), self.params.default_unknown_contact_weight
        )


def build_contact_history(snapshot: WardSnapshot, az: str, focal: str) -> ContactHistory:
    """Pairwise co-location history over the pair's coverage window.

    Covered days are those where at least one of the two has a location
    row. Both recorded: together iff the codes are equal. One recorded:
    unknown, weighted by the elicited table or the configured default.
    Days with no row for either patient stay out of the history.
    """
    snapshot.case(az)
    snapshot.case(focal)
    a_days = snapshot.locations.get(az, {})
    b_days = snapshot.locations.get(focal, {})
    entries = []
    for day in sorted(set(a_days) | set(b_days)):
        loc_a = a_days.get(day)
        loc_b = b_days.get(day)
        if loc_a is not None and loc_b is not None:
            status = TOGETHER if loc_a == loc_b else APART
            entries.append(ContactDay(day=day, status=status))
        else:
            entries.append(
                ContactDay(day=day, status=UNKNOWN, weight=snapshot.weight_for(az, focal, day))
            )
    return ContactHistory.build(entries)


# --- config -----------------------------------------------------------------

_CONFIG_KEYS = {
    "frame.epidemic_start",
    "frame.horizon_end",
    "genetic.ne",
    "genetic.mu",
    "genetic.generation_time",
    "genetic.error_constant",
    "genetic.error_per_base",
    "waiting.meanlog",
    "waiting.sdlog",
    "waiting.discretization",
    "profile.offsets",
    "contact.default_unknown_weight",
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise IngestError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise IngestError(f"{source}:{lineno}: unknown config key {key!r}")
        if key in values:
            raise IngestError(f"{source}:{lineno}: duplicate config key {key!r}")
        values[key] = value
    return values


def _parse_date(value: str, context: str) -> datetime.date:
    try:
        return datetime.date.fromisoformat(value)
    except ValueError:
        raise DateFormatError(
            f"{context}: expected an ISO date (YYYY-MM-DD), got {value!r}",
            field_name=context.rsplit(" ", 1)[-1],
        ) from None


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise IngestError(f"config {key}: expected a number, got {raw!r}") from None


def _parse_profile(raw: str) -> TransmissionProfile:
    masses: dict[int, float] = {}
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            offset_str, mass_str = chunk.split(":")
            masses[int(offset_str)] = float(mass_str)
        except ValueError:
            raise IngestError(
                f"config profile.offsets: expected 'offset:mass,...', got {chunk!r}"
            ) from None
    if not masses:
        raise IngestError("config profile.offsets: no offsets given")
    return TransmissionProfile.from_masses(masses)


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    epidemic_start: datetime.date
    horizon_end: datetime.date | None  # None: derive from the data


def parse_config(values: Mapping[str, str], source: str = "<config>") -> RunConfig:
    unknown = sorted(set(values) - _CONFIG_KEYS)
    if unknown:
        raise IngestError(f"{source}: unknown config keys {unknown}", field_name="config")
    defaults = default_params()
    error_constant: float | None = 0.404
    error_per_base: float | None = None
    if "genetic.error_per_base" in values and "genetic.error_constant" in values:
        raise IngestError(
            f"{source}: set only one of genetic.error_constant and genetic.error_per_base"
        )
    if "genetic.error_per_base" in values:
        error_per_base = _parse_float(values["genetic.error_per_base"], "genetic.error_per_base")
        error_constant = None
    elif "genetic.error_constant" in values:
        error_constant = _parse_float(values["genetic.error_constant"], "genetic.error_constant")

    genetic = PathogenGeneticParams(
        ne=_parse_float(values.get("genetic.ne", "51"), "genetic.ne"),
        mu=_parse_float(values.get("genetic.mu", "1.829e-6"), "genetic.mu"),
        gen_time=_parse_float(
            values.get("genetic.generation_time", "5.5"), "genetic.generation_time"
        ),
        error_constant=error_constant,
        error_per_base=error_per_base,
    )
    discretization = values.get("waiting.discretization", DAY_BIN)
    if discretization not in (DAY_BIN, DENSITY):
        raise IngestError(
            f"config waiting.discretization: expected {DAY_BIN!r} or {DENSITY!r}, "
            f"got {discretization!r}"
        )
    waiting = WaitingTimeModel(
        meanlog=_parse_float(values.get("waiting.meanlog", "1.434"), "waiting.meanlog"),
        sdlog=_parse_float(values.get("waiting.sdlog", "0.6612"), "waiting.sdlog"),
        discretization=discretization,
    )
    profile = (
        _parse_profile(values["profile.offsets"])
        if "profile.offsets" in values
        else defaults.profile
    )
    weight = _parse_float(
        values.get("contact.default_unknown_weight", "0.5"),
        "contact.default_unknown_weight",
    )
    params = ModelParams(
        genetic=genetic,
        waiting=waiting,
        profile=profile,
        default_unknown_contact_weight=weight,
    )
    start = _parse_date(
        values.get("frame.epidemic_start", "2020-01-01"), "config frame.epidemic_start"
    )
    horizon = (
        _parse_date(values["frame.horizon_end"], "config frame.horizon_end")
        if "frame.horizon_end" in values
        else None
    )
    return RunConfig(params=params, epidemic_start=start, horizon_end=horizon)


# --- tabular loading --------------------------------------------------------


def _read_csv(path: Path, required: tuple[str, ...]) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestError(f"{path}: empty file, expected a CSV header")
        missing = [col for col in required if col not in reader.fieldnames]
        if missing:
            raise IngestError(f"{path}: missing required columns {missing}")
        return [dict(row) for row in reader]


def _day(value: str | None, start: datetime.date, context: str) -> int | None:
    if value is None or value.strip() == "":
        return None
    parsed = _parse_date(value.strip(), context)
    return (parsed - start).days


def build_snapshot(
    case_rows: Iterable[Mapping[str, str | None]],
    location_rows: Iterable[Mapping[str, str | None]] = (),
    sequences: Mapping[str, str] | None = None,
    weight_rows: Iterable[Mapping[str, str | None]] = (),
    config_values: Mapping[str, str] | None = None,
) -> WardSnapshot:
    """Build and cross-validate a snapshot from raw tabular rows.

    Rows carry the same string fields as the CSV files; this is the
    shared path behind both file loading and the HTTP service. Collects
    non-fatal issues (cases without sequences or location rows, proxied
    sampling dates) into ``snapshot.warnings``; structural problems raise
    a subclass of :class:`IngestError`.
    """
    run = parse_config(config_values or {})
    start = run.epidemic_start
    alignment = (
        Alignment.from_sequences(sequences) if sequences else None
    )

    cases: dict[str, CaseRecord] = {}
    for row in case_rows:
        cid = (row.get("id") or "").strip()
        if not cid:
            raise IngestError("case row with empty id", field_name="id")
        if cid in cases:
            raise DuplicateCaseIdError(f"duplicate case id {cid!r}", field_name="id")
        onset = _day(row.get("onset_date"), start, f"case {cid} onset_date")
        if onset is None:
            raise IngestError(
                f"case {cid}: onset_date is required", field_name="onset_date"
            )
        try:
            cases[cid] = CaseRecord(
                id=cid,
                onset=onset,
                admission=_day(row.get("admission_date"), start, f"case {cid} admission_date"),
                sample_time=_day(row.get("sample_date"), start, f"case {cid} sample_date"),
                has_sequence=alignment is not None and cid in alignment.sequences,
            )
        except ValueError as exc:
            raise IngestError(str(exc)) from exc

    locations: dict[str, dict[int, str]] = {}
    for row in location_rows:
        cid = (row.get("id") or "").strip()
        day = _day(row.get("date"), start, f"location row for {cid}")
        code = (row.get("location_code") or "").strip()
        if not cid or day is None or not code:
            missing = "id" if not cid else ("date" if day is None else "location_code")
            raise IngestError(
                f"location row for {cid!r} needs an id, a date and a code",
                field_name=missing,
            )
        by_day = locations.setdefault(cid, {})
        if day in by_day and by_day[day] != code:
            raise IngestError(f"conflicting locations for {cid} on day {day}")
        by_day[day] = code

    weights: dict[tuple[str, str, int], float] = {}
    for row in weight_rows:
        ida = (row.get("id_a") or "").strip()
        idb = (row.get("id_b") or "").strip()
        day = _day(row.get("date"), start, f"weight row for ({ida}, {idb})")
        if day is None or not ida or not idb:
            raise IngestError("weight row needs id_a, id_b and a date")
        weight = _parse_float(row.get("weight") or "", "weight")
        key = (ida, idb) if ida <= idb else (idb, ida)
        weights[(key[0], key[1], day)] = weight

    all_days = [c.onset for c in cases.values()]
    all_days += [c.admission for c in cases.values() if c.admission is not None]
    all_days += [c.sample_time for c in cases.values() if c.sample_time is not None]
    all_days += [d for by_day in locations.values() for d in by_day]
    all_days += [d for (_, _, d) in weights]
    derived_end = max(all_days, default=0)
    if run.horizon_end is not None:
        horizon = (run.horizon_end - start).days
        if derived_end > horizon:
            raise IngestError(
                f"data extends to day {derived_end}, beyond the configured "
                f"frame.horizon_end (day {horizon})",
                field_name="frame.horizon_end",
            )
    else:
        horizon = derived_end
    frame = EpidemicFrame(epidemic_start=0, horizon_end=max(horizon, 0))

    warnings = []
    for cid, case in sorted(cases.items()):
        if not case.has_sequence:
            warnings.append(f"case {cid}: no sequence; genetic terms treated as missing")
        elif case.sample_time is None:
            warnings.append(f"case {cid}: no sample_date; onset date used as sampling day")
        if cid not in locations:
            warnings.append(f"case {cid}: no location rows; co-location terms limited")

    return WardSnapshot(
        cases=cases,
        params=run.params,
        frame=frame,
        start_date=start,
        alignment=alignment,
        locations=locations,
        contact_weights=weights,
        warnings=tuple(warnings),
    )


def load_ward(
    cases_path: str | Path,
    locations_path: str | Path | None = None,
    fasta_path: str | Path | None = None,
    config_path: str | Path | None = None,
    weights_path: str | Path | None = None,
) -> WardSnapshot:
    """Load and cross-validate one ward's files into a snapshot."""
    config_values = (
        parse_config_text(Path(config_path).read_text(), str(config_path))
        if config_path is not None
        else {}
    )
    alignment = read_fasta(fasta_path) if fasta_path is not None else None
    return build_snapshot(
        case_rows=_read_csv(Path(cases_path), ("id", "onset_date")),
        location_rows=(
            _read_csv(Path(locations_path), ("id", "date", "location_code"))
            if locations_path is not None
            else ()
        ),
        sequences=dict(alignment.sequences) if alignment is not None else None,
        weight_rows=(
            _read_csv(Path(weights_path), ("id_a", "id_b", "date", "weight"))
            if weights_path is not None
            else ()
        ),
        config_values=config_values,
    )


# --- serialization (round-trip support) --------------------------------------


def write_ward(snapshot: WardSnapshot, out_dir: str | Path) -> dict[str, Path]:
    """Write a snapshot back to the on-disk formats accepted by load_ward."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = snapshot.start_date

    def iso(day: int | None) -> str:
        return "" if day is None else (start + datetime.timedelta(days=day)).isoformat()

    paths: dict[str, Path] = {}
    cases_path = out / "cases.csv"
    with open(cases_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "onset_date", "admission_date", "sample_date"])
        for cid in sorted(snapshot.cases):
            case = snapshot.cases[cid]
            writer.writerow([cid, iso(case.onset), iso(case.admission), iso(case.sample_time)])
    paths["cases"] = cases_path

    locations_path = out / "locations.csv"
    with open(locations_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "date", "location_code"])
        for cid in sorted(snapshot.locations):
            for day in sorted(snapshot.locations[cid]):
                writer.writerow([cid, iso(day), snapshot.locations[cid][day]])
    paths["locations"] = locations_path

    if snapshot.contact_weights:
        weights_path = out / "weights.csv"
        with open(weights_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id_a", "id_b", "date", "weight"])
            for (a, b, day) in sorted(snapshot.contact_weights):
                writer.writerow([a, b, iso(day), repr(snapshot.contact_weights[(a, b, day)])])
        paths["weights"] = weights_path

    if snapshot.alignment is not None:
        fasta_path = out / "sequences.fasta"
        with open(fasta_path, "w") as fh:
            for cid in sorted(snapshot.alignment.sequences):
                fh.write(f">{cid}\n{snapshot.alignment.sequences[cid]}\n")
        paths["fasta"] = fasta_path

    config_path = out / "run.config"
    config_path.write_text(render_config(snapshot))
    paths["config"] = config_path
    return paths


def render_config(snapshot: WardSnapshot) -> str:
    params = snapshot.params
    lines = [
        f"frame.epidemic_start = {snapshot.start_date.isoformat()}",
        "frame.horizon_end = "
        + (
            snapshot.start_date + datetime.timedelta(days=snapshot.frame.horizon_end)
        ).isoformat(),
        f"genetic.ne = {params.genetic.ne!r}",
        f"genetic.mu = {params.genetic.mu!r}",
        f"genetic.generation_time = {params.genetic.gen_time!r}",
    ]
    if params.genetic.error_constant is not None:
        lines.append(f"genetic.error_constant = {params.genetic.error_constant!r}")
    else:
        lines.append(f"genetic.error_per_base = {params.genetic.error_per_base!r}")
    lines += [
        f"waiting.meanlog = {params.waiting.meanlog!r}",
        f"waiting.sdlog = {params.waiting.sdlog!r}",
        f"waiting.discretization = {params.waiting.discretization}",
        "profile.offsets = "
        + ",".join(f"{k}:{params.profile.offsets[k]!r}" for k in sorted(params.profile.offsets)),
        f"contact.default_unknown_weight = {params.default_unknown_contact_weight!r}",
    ]
    return "\n".join(lines) + "\n"


def params_as_dict(snapshot: WardSnapshot) -> dict[str, object]:
    """Parameter echo for report provenance blocks."""
    params = snapshot.params
    genetic: dict[str, object] = {
        "ne": params.genetic.ne,
        "mu": params.genetic.mu,
        "generation_time": params.genetic.gen_time,
    }
    if params.genetic.error_constant is not None:
        genetic["error_constant"] = params.genetic.error_constant
    else:
        genetic["error_per_base"] = params.genetic.error_per_base
    return {
        "epidemic_start": snapshot.start_date.isoformat(),
        "horizon_end": (
            snapshot.start_date + datetime.timedelta(days=snapshot.frame.horizon_end)
        ).isoformat(),
        "genetic": genetic,
        "waiting": {
            "meanlog": params.waiting.meanlog,
            "sdlog": params.waiting.sdlog,
            "discretization": params.waiting.discretization,
        },
        "profile": {str(k): params.profile.offsets[k] for k in sorted(params.profile.offsets)},
        "default_unknown_contact_weight": params.default_unknown_contact_weight,
    }
