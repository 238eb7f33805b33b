"""Turn flight-leg records into per-node variable values and discrete cases.

Node names in a network config bind to derived variables by a fixed
vocabulary: the seven phase delays, the GDP flags, the categorical context
fields, and the two attached traffic counts. A leg's inbound delay and
turn-around need its previous leg (same tail, arriving at this leg's
origin); legs without one produce None for those variables and are dropped
from training rather than imputed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .discretize import BinRangeError
from .flightdata import FlightLegRecord, derive_delays, derive_gdp
from .network import Network

#: Variables a network node name can bind to.
CONTINUOUS_VARS = ("gate_in_prev", "turn_around", "gate_out", "taxi_out",
                   "airborne", "taxi_in", "gate_in_dest", "gdp_time",
                   "dep_queue", "arr_throughput")
CATEGORICAL_VARS = ("airline", "weather_dest", "enroute_storm",
                    "runway_config", "gdp", "gdp_gate")
KNOWN_VARS = CONTINUOUS_VARS + CATEGORICAL_VARS

GDP_STATES = ("no", "yes")


@dataclass
class LegVariables:
    """Derived variable values for one modeled leg."""

    tail_id: str
    timestamp: int          # scheduled gate-out, used for date splits
    values: dict[str, object]


def pair_previous_legs(records: Sequence[FlightLegRecord]) -> list[
        tuple[FlightLegRecord, Optional[FlightLegRecord]]]:
    """Match each leg with the same aircraft's latest arrival into its origin."""
    by_tail: dict[str, list[FlightLegRecord]] = {}
    for rec in records:
        by_tail.setdefault(rec.tail_id, []).append(rec)
    pairs = []
    for rec in records:
        prev = None
        for cand in by_tail[rec.tail_id]:
            if (cand is not rec and cand.destination == rec.origin
                    and cand.act_gate_in <= rec.act_gate_out):
                if prev is None or cand.act_gate_in > prev.act_gate_in:
                    prev = cand
        pairs.append((rec, prev))
    return pairs


def leg_variables(rec: FlightLegRecord,
                  prev: Optional[FlightLegRecord]) -> LegVariables:
    delays = derive_delays(rec, prev)
    gdp = derive_gdp(rec)
    values: dict[str, object] = {
        "gate_in_prev": delays.gate_in_prev,
        "turn_around": delays.turn_around,
        "gate_out": delays.gate_out,
        "taxi_out": delays.taxi_out,
        "airborne": delays.airborne,
        "taxi_in": delays.taxi_in,
        "gate_in_dest": delays.gate_in_dest,
        "gdp": GDP_STATES[int(gdp.gdp)],
        "gdp_time": gdp.gdp_time,
        "gdp_gate": GDP_STATES[int(gdp.gdp_gate)],
        "airline": rec.airline,
        "weather_dest": rec.weather_dest,
        "enroute_storm": rec.enroute_storm,
        "runway_config": rec.runway_config,
        "dep_queue": None if rec.dep_demand is None else float(rec.dep_demand),
        "arr_throughput": (None if rec.arr_throughput_raw is None
                           else float(rec.arr_throughput_raw)),
    }
    return LegVariables(tail_id=rec.tail_id, timestamp=rec.sch_gate_out,
                        values=values)


def derive_leg_table(records: Sequence[FlightLegRecord],
                     origin: Optional[str] = None) -> list[LegVariables]:
    """Derived variables for every leg (optionally only legs out of ``origin``)."""
    out = []
    for rec, prev in pair_previous_legs(records):
        if origin is not None and rec.origin != origin:
            continue
        out.append(leg_variables(rec, prev))
    return out


@dataclass
class AssembledCases:
    cases: list[dict[str, int]]
    timestamps: list[int]
    n_dropped: int


def assemble_cases(records: Sequence[FlightLegRecord], network: Network,
                   origin: Optional[str] = None) -> AssembledCases:
    """Discretize leg variables into complete cases for the network's nodes.

    Legs missing any node's variable (no previous leg, unattached traffic
    counts, labels outside a node's state list, values outside closed-tail
    schemes) are dropped and counted, never partially assigned.
    """
    unknown = [n for n in network.node_names if n not in KNOWN_VARS]
    if unknown:
        raise ValueError(f"network nodes {unknown} have no record-derived "
                         f"variable; expected names from {sorted(KNOWN_VARS)}")
    legs = derive_leg_table(records, origin=origin)
    cases: list[dict[str, int]] = []
    timestamps: list[int] = []
    dropped = 0
    for leg in legs:
        case: Optional[dict[str, int]] = {}
        for name in network.node_names:
            value = leg.values[name]
            if value is None:
                case = None
                break
            node = network.node(name)
            if node.is_binned:
                try:
                    case[name] = node.bins.bin_index(float(value))
                except (BinRangeError, ValueError):
                    case = None
                    break
            else:
                label = str(value)
                if label not in node.states:
                    case = None
                    break
                case[name] = node.states.index(label)
        if case is None:
            dropped += 1
        else:
            cases.append(case)
            timestamps.append(leg.timestamp)
    return AssembledCases(cases=cases, timestamps=timestamps, n_dropped=dropped)
