"""Flight-leg records and the delay / ground-delay-program variables derived
from them.

Records mirror ASPM-style event data: scheduled and actual gate times, wheels
times, unimpeded taxi references and EDCT fields, all in epoch seconds (or
decimal minutes for durations). Delay variables are signed: a flight arriving
early gets a negative gate-in delay rather than zero.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional


CSV_HEADER = [
    "tail_id", "airline", "origin", "dest",
    "sch_out", "act_out", "sch_in", "act_in", "wheels_off", "wheels_on",
    "unimp_taxi_out", "unimp_taxi_in", "plan_enroute", "edct_off", "nom_to",
    "weather_dest", "enroute_storm", "runway_config",
]

# Context counts are not part of the required schema; the writer emits them
# when present and the parser picks them up when the columns exist.
OPTIONAL_COLUMNS = ["dep_demand", "arr_throughput"]


class HeaderError(ValueError):
    """The CSV header is missing required columns."""


@dataclass
class FlightLegRecord:
    tail_id: str
    airline: str
    origin: str
    destination: str
    sch_gate_out: int
    act_gate_out: int
    sch_gate_in: int
    act_gate_in: int
    act_wheels_off: int
    act_wheels_on: int
    unimpeded_taxi_out_min: float
    unimpeded_taxi_in_min: float
    plan_enroute_min: float
    edct_off_sec: int
    nom_to_min: float
    weather_dest: str
    enroute_storm: str
    runway_config: str
    dep_demand: Optional[int] = None
    arr_throughput_raw: Optional[int] = None

    def validate(self) -> None:
        if self.act_wheels_off < self.act_gate_out:
            raise ValueError("wheels-off precedes gate-out")
        if self.act_gate_in < self.act_wheels_on:
            raise ValueError("gate-in precedes wheels-on")
        if not (self.edct_off_sec == -1 or self.edct_off_sec > 0):
            raise ValueError(f"edct_off must be -1 or positive, got {self.edct_off_sec}")
        if self.unimpeded_taxi_out_min < 0 or self.unimpeded_taxi_in_min < 0:
            raise ValueError("unimpeded taxi times must be nonnegative")
        if self.plan_enroute_min <= 0:
            raise ValueError("planned en route time must be positive")


@dataclass
class DerivedDelays:
    """Signed delay minutes per flight phase; None when not derivable."""

    gate_in_prev: Optional[float]
    turn_around: Optional[float]
    gate_out: float
    taxi_out: float
    airborne: float
    taxi_in: float
    gate_in_dest: float


@dataclass
class GdpVars:
    gdp: bool
    gdp_time: float
    gdp_gate: bool


@dataclass
class RowError:
    line: int
    message: str


@dataclass
class ParseResult:
    records: list[FlightLegRecord]
    errors: list[RowError] = field(default_factory=list)

    @property
    def n_skipped(self) -> int:
        return len(self.errors)


def parse_records(stream: Iterable[str] | io.TextIOBase) -> ParseResult:
    """Parse flight-leg CSV rows, skipping malformed rows with line numbers.

    A missing required header column raises HeaderError; per-row problems
    (unparseable numbers, invariant violations) are reported in the result
    and the row is skipped.
    """
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise HeaderError("empty input: no CSV header")
    missing = [c for c in CSV_HEADER if c not in reader.fieldnames]
    if missing:
        raise HeaderError(f"missing required columns: {', '.join(missing)}")
    has_optional = {c: c in reader.fieldnames for c in OPTIONAL_COLUMNS}

    records: list[FlightLegRecord] = []
    errors: list[RowError] = []
    for row in reader:
        line = reader.line_num
        try:
            rec = FlightLegRecord(
                tail_id=row["tail_id"],
                airline=row["airline"],
                origin=row["origin"],
                destination=row["dest"],
                sch_gate_out=_int(row, "sch_out"),
                act_gate_out=_int(row, "act_out"),
                sch_gate_in=_int(row, "sch_in"),
                act_gate_in=_int(row, "act_in"),
                act_wheels_off=_int(row, "wheels_off"),
                act_wheels_on=_int(row, "wheels_on"),
                unimpeded_taxi_out_min=_float(row, "unimp_taxi_out"),
                unimpeded_taxi_in_min=_float(row, "unimp_taxi_in"),
                plan_enroute_min=_float(row, "plan_enroute"),
                edct_off_sec=_int(row, "edct_off"),
                nom_to_min=_float(row, "nom_to"),
                weather_dest=row["weather_dest"],
                enroute_storm=row["enroute_storm"],
                runway_config=row["runway_config"],
                dep_demand=_opt_int(row, "dep_demand") if has_optional["dep_demand"] else None,
                arr_throughput_raw=_opt_int(row, "arr_throughput") if has_optional["arr_throughput"] else None,
            )
            rec.validate()
        except (ValueError, KeyError) as exc:
            errors.append(RowError(line=line, message=str(exc)))
            continue
        records.append(rec)
    return ParseResult(records=records, errors=errors)


def write_records(records: Iterable[FlightLegRecord], stream) -> None:
    """Write records in the documented CSV schema (plus context columns
    whenever any record carries them)."""
    records = list(records)
    with_context = any(r.dep_demand is not None or r.arr_throughput_raw is not None
                       for r in records)
    header = CSV_HEADER + (OPTIONAL_COLUMNS if with_context else [])
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for r in records:
        row = [
            r.tail_id, r.airline, r.origin, r.destination,
            r.sch_gate_out, r.act_gate_out, r.sch_gate_in, r.act_gate_in,
            r.act_wheels_off, r.act_wheels_on,
            _fmt_min(r.unimpeded_taxi_out_min), _fmt_min(r.unimpeded_taxi_in_min),
            _fmt_min(r.plan_enroute_min), r.edct_off_sec, _fmt_min(r.nom_to_min),
            r.weather_dest, r.enroute_storm, r.runway_config,
        ]
        if with_context:
            row += ["" if r.dep_demand is None else r.dep_demand,
                    "" if r.arr_throughput_raw is None else r.arr_throughput_raw]
        writer.writerow(row)


def derive_delays(rec: FlightLegRecord,
                  prev_leg: Optional[FlightLegRecord] = None) -> DerivedDelays:
    """Derive per-phase delay minutes for one leg.

    The previous leg of the same aircraft (its arrival at this leg's origin)
    supplies the inbound gate-in delay and the turn-around delay; without it
    those two fields are None. Turn-around is actual minus scheduled turn
    time, so a made-up turn shows as negative.
    """
    gate_out = (rec.act_gate_out - rec.sch_gate_out) / 60.0
    taxi_out = (rec.act_wheels_off - rec.act_gate_out) / 60.0 - rec.unimpeded_taxi_out_min
    airborne = (rec.act_wheels_on - rec.act_wheels_off) / 60.0 - rec.plan_enroute_min
    taxi_in = (rec.act_gate_in - rec.act_wheels_on) / 60.0 - rec.unimpeded_taxi_in_min
    gate_in_dest = (rec.act_gate_in - rec.sch_gate_in) / 60.0

    gate_in_prev = None
    turn_around = None
    if prev_leg is not None:
        gate_in_prev = (prev_leg.act_gate_in - prev_leg.sch_gate_in) / 60.0
        actual_turn = rec.act_gate_out - prev_leg.act_gate_in
        scheduled_turn = rec.sch_gate_out - prev_leg.sch_gate_in
        turn_around = (actual_turn - scheduled_turn) / 60.0

    return DerivedDelays(
        gate_in_prev=gate_in_prev,
        turn_around=turn_around,
        gate_out=gate_out,
        taxi_out=taxi_out,
        airborne=airborne,
        taxi_in=taxi_in,
        gate_in_dest=gate_in_dest,
    )


def default_gate_hold(gdp_time: float) -> bool:
    """A negative release gap means the hold landed on the pushback, not the
    departure queue."""
    return gdp_time < 0


def derive_gdp(rec: FlightLegRecord,
               gate_hold=default_gate_hold) -> GdpVars:
    """Ground-delay-program variables.

    gdp_time is the gap in minutes between the EDCT wheels-off instant and
    the pushback time plus nominal taxi-out. ``gate_hold`` decides whether a
    program flagged the gate (it sees gdp_time and only runs when a program
    is active); the default treats any negative gap as a gate hold.
    """
    if rec.edct_off_sec == -1:
        return GdpVars(gdp=False, gdp_time=0.0, gdp_gate=False)
    gdp_time = (rec.edct_off_sec - (rec.act_gate_out + rec.nom_to_min * 60.0)) / 60.0
    return GdpVars(gdp=True, gdp_time=gdp_time, gdp_gate=bool(gate_hold(gdp_time)))


def throughput(records: Iterable[FlightLegRecord], airport: str, kind: str,
               window_min: int, at: int) -> int:
    """Count departures (wheels-off) or arrivals (wheels-on) at ``airport``
    inside the half-open window ``[at - window, at)``."""
    if window_min not in (15, 30):
        raise ValueError(f"window_min must be 15 or 30, got {window_min}")
    if kind not in ("departures", "arrivals"):
        raise ValueError(f"kind must be 'departures' or 'arrivals', got {kind!r}")
    start = at - window_min * 60
    count = 0
    for rec in records:
        if kind == "departures":
            ok = rec.origin == airport and start <= rec.act_wheels_off < at
        else:
            ok = rec.destination == airport and start <= rec.act_wheels_on < at
        count += int(ok)
    return count


def _int(row: dict, key: str) -> int:
    raw = row[key]
    if raw is None or raw.strip() == "":
        raise ValueError(f"missing value for {key}")
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"unparseable integer for {key}: {raw!r}") from None


def _float(row: dict, key: str) -> float:
    raw = row[key]
    if raw is None or raw.strip() == "":
        raise ValueError(f"missing value for {key}")
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"unparseable number for {key}: {raw!r}") from None


def _opt_int(row: dict, key: str) -> Optional[int]:
    raw = row.get(key)
    if raw is None or raw.strip() == "":
        return None
    return int(raw)


def _fmt_min(x: float) -> str:
    return repr(float(x))
