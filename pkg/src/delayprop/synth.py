"""Synthetic flight-leg generator driven by a known ground-truth network.

Every learning, inference, and evaluation claim in this package is testable
at desk scale by sampling a fully specified network, emitting continuous
values inside each sampled bin, and inverting the delay definitions back
into consistent event-time records. Re-deriving the delays from those
records reproduces the emitted values to the second.

One structural identity is honored rather than sampled: gate-out delay is
exactly inbound gate-in delay plus turn-around delay (all three are linear
in the same four timestamps). The ground-truth table for such a node stores
the distribution induced by summing its components' within-bin emissions,
and generation computes the value instead of drawing a state.

Scenario files are the network-config JSON plus an ``emission`` section, so
ground-truth parameters ship as data, not code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import numpy as np

from .cases import assemble_cases
from .discretize import BinScheme
from .flightdata import FlightLegRecord
from .jsonio import FormatError, network_from_doc, network_to_doc
from .network import Network, NetworkSpec
from .regression import PiecewiseRegression, RegressionTerm

DEFAULT_SCENARIO_RESOURCE = "default_scenario.json"

#: Minimum distance (minutes) kept between an emitted value and its bin edge
#: so that rounding event times to whole seconds cannot flip the bin.
EDGE_MARGIN_MIN = 0.02


@dataclass(frozen=True)
class EmissionRule:
    """How one node's continuous value is produced from its sampled state.

    kind 'bin_uniform': uniform inside the bin (tails: edge +- exponential
    with mean tail_halfwidth, optionally truncated at a physical limit).
    kind 'bin_count':   integer count uniform inside the bin (upper tail:
    edge + floor(exponential)).
    kind 'sum':         value is the sum of other nodes' values; the state
    is derived by re-binning, never sampled.
    """

    kind: str
    lower_limit: Optional[float] = None
    of: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScheduleConfig:
    """Constants used to invert delays into consistent event times."""

    base_epoch: int = 1_088_640_000      # 2004-07-01T00:00Z
    spacing_sec: int = 180
    origin: str = "ORD"
    dest: str = "ATL"
    prev_origin: str = "DFW"
    sched_turn_min: float = 45.0
    unimp_taxi_out_min: float = 12.0
    unimp_taxi_in_min: float = 6.0
    plan_enroute_min: float = 89.0
    nom_to_min: float = 10.0
    gdp_time_range_min: tuple[float, float] = (-15.0, 45.0)
    airlines: tuple[str, ...] = ("AA", "UA", "DL", "MQ")
    runway_config: str = "27L_32R"


@dataclass
class GroundTruth:
    network: Network
    emission: dict[str, EmissionRule]
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)

    def validate(self) -> None:
        for name in self.network.node_names:
            node = self.network.node(name)
            if node.is_binned and name not in self.emission:
                raise FormatError(f"binned node {name} has no emission rule")
        for name, rule in self.emission.items():
            if rule.kind == "sum":
                for comp in rule.of:
                    if comp not in self.network.node_names:
                        raise FormatError(f"sum node {name}: unknown component {comp}")


@dataclass
class GeneratedData:
    """Flight legs (feeder and modeled leg per case) plus the latent truth."""

    records: list[FlightLegRecord]
    cases: list[dict[str, int]]
    values: list[dict[str, float]]
    timestamps: list[int]


def generate(gt: GroundTruth, n: int, seed: int) -> GeneratedData:
    """Sample ``n`` cases and synthesize their flight-leg records.

    Deterministic per seed. Each case yields two records: the feeder leg
    into the origin airport (carrying the inbound gate-in delay) and the
    modeled leg.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    gt.validate()
    rng = np.random.default_rng(seed)
    net = gt.network
    states: dict[str, np.ndarray] = {}
    values: dict[str, np.ndarray] = {}

    for name in net.topo_order:
        node = net.node(name)
        rule = gt.emission.get(name)
        if rule is not None and rule.kind == "sum":
            value = np.zeros(n)
            for comp in rule.of:
                value = value + values[comp]
            states[name] = np.array([node.bins.bin_index(v) for v in value],
                                    dtype=np.intp)
            values[name] = value
            continue
        states[name] = _sample_node(net, name, states, n, rng)
        if node.is_binned:
            values[name] = _emit(node.bins, rule, states[name], rng)

    records = _synthesize_records(gt, states, values, n, rng)
    case_list = [{name: int(states[name][i]) for name in net.node_names}
                 for i in range(n)]
    value_list = [{name: float(values[name][i]) for name in values}
                  for i in range(n)]
    timestamps = [gt.schedule.base_epoch + i * gt.schedule.spacing_sec
                  for i in range(n)]
    return GeneratedData(records=records, cases=case_list, values=value_list,
                         timestamps=timestamps)


def _sample_node(net: Network, name: str, states: dict[str, np.ndarray],
                 n: int, rng: np.random.Generator) -> np.ndarray:
    table = net.tables[name]
    probs = table.probabilities()
    if table.parents:
        idx = np.stack([states[p] for p in table.parents])
        rows = np.ravel_multi_index(idx, table.parent_cards)
    else:
        rows = np.zeros(n, dtype=np.intp)
    cum = np.cumsum(probs[rows], axis=1)
    u = rng.random(n)
    drawn = (u[:, None] > cum).sum(axis=1).astype(np.intp)
    return np.minimum(drawn, probs.shape[1] - 1)


def _emit(scheme: BinScheme, rule: EmissionRule, states: np.ndarray,
          rng: np.random.Generator) -> np.ndarray:
    n = states.shape[0]
    out = np.empty(n)
    tau = scheme.tail_halfwidth
    for k in range(scheme.n_bins):
        mask = states == k
        m = int(mask.sum())
        if m == 0:
            continue
        lo, hi = scheme.bounds(k)
        if rule.kind == "bin_count":
            if hi == np.inf:
                out[mask] = lo + np.floor(rng.exponential(tau, size=m))
            else:
                out[mask] = rng.integers(int(lo), int(hi), size=m)
            continue
        if lo == -np.inf:
            edge = hi - EDGE_MARGIN_MIN
            if rule.lower_limit is not None:
                span = edge - rule.lower_limit
                out[mask] = edge - _trunc_exponential(tau, span, m, rng)
            else:
                out[mask] = edge - rng.exponential(tau, size=m)
        elif hi == np.inf:
            out[mask] = lo + EDGE_MARGIN_MIN + rng.exponential(tau, size=m)
        else:
            out[mask] = rng.uniform(lo + EDGE_MARGIN_MIN,
                                    hi - EDGE_MARGIN_MIN, size=m)
    if rule.kind == "bin_count":
        return out
    # Whole-second quantization keeps record synthesis exactly invertible.
    return np.round(out * 60.0) / 60.0


def _trunc_exponential(tau: float, span: float, m: int,
                       rng: np.random.Generator) -> np.ndarray:
    u = rng.random(m)
    return -tau * np.log1p(-u * (1.0 - np.exp(-span / tau)))


def _synthesize_records(gt: GroundTruth, states, values, n: int,
                        rng: np.random.Generator) -> list[FlightLegRecord]:
    sch = gt.schedule
    net = gt.network

    def sec(minutes: float) -> int:
        return int(round(minutes * 60.0))

    gdp_states = None
    if "gdp" in net.node_names:
        gdp_states = states["gdp"]
        gdp_lo, gdp_hi = sch.gdp_time_range_min
        gdp_minutes = rng.uniform(gdp_lo, gdp_hi, size=n)

    weather = _labels(net, states, "weather_dest", n, default="clear")
    storm = _labels(net, states, "enroute_storm", n, default="none")

    records: list[FlightLegRecord] = []
    for i in range(n):
        tail = f"N{1000 + i}"
        airline = sch.airlines[i % len(sch.airlines)]
        sch_out = sch.base_epoch + i * sch.spacing_sec

        gip = values["gate_in_prev"][i]
        ta = values["turn_around"][i]
        to = values["taxi_out"][i]
        ab = values["airborne"][i]
        ti = values["taxi_in"][i]
        gid = values["gate_in_dest"][i]

        sch_in_prev = sch_out - sec(sch.sched_turn_min)
        act_in_prev = sch_in_prev + sec(gip)
        wheels_on_prev = act_in_prev - sec(sch.unimp_taxi_in_min)
        wheels_off_prev = wheels_on_prev - sec(sch.plan_enroute_min)
        act_out_prev = wheels_off_prev - sec(sch.unimp_taxi_out_min)
        records.append(FlightLegRecord(
            tail_id=tail, airline=airline, origin=sch.prev_origin,
            destination=sch.origin,
            sch_gate_out=act_out_prev, act_gate_out=act_out_prev,
            sch_gate_in=sch_in_prev, act_gate_in=act_in_prev,
            act_wheels_off=wheels_off_prev, act_wheels_on=wheels_on_prev,
            unimpeded_taxi_out_min=sch.unimp_taxi_out_min,
            unimpeded_taxi_in_min=sch.unimp_taxi_in_min,
            plan_enroute_min=sch.plan_enroute_min,
            edct_off_sec=-1, nom_to_min=sch.nom_to_min,
            weather_dest=weather[i], enroute_storm=storm[i],
            runway_config=sch.runway_config))

        act_out = act_in_prev + sec(sch.sched_turn_min) + sec(ta)
        wheels_off = act_out + sec(sch.unimp_taxi_out_min) + sec(to)
        wheels_on = wheels_off + sec(sch.plan_enroute_min) + sec(ab)
        act_in = wheels_on + sec(sch.unimp_taxi_in_min) + sec(ti)
        sch_in = act_in - sec(gid)
        if gdp_states is not None and gdp_states[i] == 1:
            edct = act_out + sec(sch.nom_to_min) + sec(gdp_minutes[i])
        else:
            edct = -1
        records.append(FlightLegRecord(
            tail_id=tail, airline=airline, origin=sch.origin,
            destination=sch.dest,
            sch_gate_out=sch_out, act_gate_out=act_out,
            sch_gate_in=sch_in, act_gate_in=act_in,
            act_wheels_off=wheels_off, act_wheels_on=wheels_on,
            unimpeded_taxi_out_min=sch.unimp_taxi_out_min,
            unimpeded_taxi_in_min=sch.unimp_taxi_in_min,
            plan_enroute_min=sch.plan_enroute_min,
            edct_off_sec=int(edct), nom_to_min=sch.nom_to_min,
            weather_dest=weather[i], enroute_storm=storm[i],
            runway_config=sch.runway_config,
            dep_demand=(int(values["dep_queue"][i])
                        if "dep_queue" in values else None),
            arr_throughput_raw=(int(values["arr_throughput"][i])
                                if "arr_throughput" in values else None)))
    return records


def _labels(net: Network, states, name: str, n: int, default: str) -> list[str]:
    if name not in net.node_names:
        return [default] * n
    labels = net.node(name).labels
    return [labels[states[name][i]] for i in range(n)]


def rederive_cases(gt: GroundTruth, records) -> "AssembledCases":
    """Round-trip helper: rebuild cases from records via the record pipeline."""
    return assemble_cases(records, gt.network, origin=gt.schedule.origin)


# --- scenario documents ---

def scenario_to_doc(gt: GroundTruth) -> dict:
    doc = network_to_doc(gt.network)
    doc["emission"] = {
        "margin_min": EDGE_MARGIN_MIN,
        "values": {
            name: _rule_to_doc(rule) for name, rule in sorted(gt.emission.items())
        },
        "schedule": {
            "base_epoch": gt.schedule.base_epoch,
            "spacing_sec": gt.schedule.spacing_sec,
            "origin": gt.schedule.origin,
            "dest": gt.schedule.dest,
            "prev_origin": gt.schedule.prev_origin,
            "sched_turn_min": gt.schedule.sched_turn_min,
            "unimp_taxi_out_min": gt.schedule.unimp_taxi_out_min,
            "unimp_taxi_in_min": gt.schedule.unimp_taxi_in_min,
            "plan_enroute_min": gt.schedule.plan_enroute_min,
            "nom_to_min": gt.schedule.nom_to_min,
            "gdp_time_range_min": list(gt.schedule.gdp_time_range_min),
            "airlines": list(gt.schedule.airlines),
            "runway_config": gt.schedule.runway_config,
        },
    }
    return doc


def _rule_to_doc(rule: EmissionRule) -> dict:
    d: dict = {"kind": rule.kind}
    if rule.lower_limit is not None:
        d["lower_limit"] = rule.lower_limit
    if rule.of:
        d["of"] = list(rule.of)
    return d


def scenario_from_doc(doc: dict) -> GroundTruth:
    if "emission" not in doc:
        raise FormatError("scenario document has no emission section")
    network = network_from_doc(doc)
    em = doc["emission"]
    emission = {}
    for name, d in em.get("values", {}).items():
        emission[name] = EmissionRule(
            kind=d["kind"],
            lower_limit=d.get("lower_limit"),
            of=tuple(d.get("of", ())))
    s = em.get("schedule", {})
    schedule = ScheduleConfig(
        base_epoch=int(s.get("base_epoch", 1_088_640_000)),
        spacing_sec=int(s.get("spacing_sec", 180)),
        origin=s.get("origin", "ORD"),
        dest=s.get("dest", "ATL"),
        prev_origin=s.get("prev_origin", "DFW"),
        sched_turn_min=float(s.get("sched_turn_min", 45.0)),
        unimp_taxi_out_min=float(s.get("unimp_taxi_out_min", 12.0)),
        unimp_taxi_in_min=float(s.get("unimp_taxi_in_min", 6.0)),
        plan_enroute_min=float(s.get("plan_enroute_min", 89.0)),
        nom_to_min=float(s.get("nom_to_min", 10.0)),
        gdp_time_range_min=tuple(s.get("gdp_time_range_min", (-15.0, 45.0))),
        airlines=tuple(s.get("airlines", ("AA", "UA", "DL", "MQ"))),
        runway_config=s.get("runway_config", "27L_32R"))
    gt = GroundTruth(network=network, emission=emission, schedule=schedule)
    gt.validate()
    return gt


def load_scenario(text: str) -> GroundTruth:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from exc
    return scenario_from_doc(doc)


def default_scenario() -> GroundTruth:
    """The shipped 12-node phase-chain scenario with documented parameters."""
    text = resources.files("delayprop").joinpath(
        f"data/{DEFAULT_SCENARIO_RESOURCE}").read_text()
    return load_scenario(text)


def perturbed_prior_spec(gt: GroundTruth, intercept_shift: float = 5.0,
                         slope_scale: float = 0.7,
                         sigma_scale: float = 1.5) -> NetworkSpec:
    """A deliberately biased copy of the scenario's prior regressions.

    Used to reproduce the sweep behavior where light case weights leave the
    biased prior in charge and heavy weights overfit the training sample.
    """
    spec = gt.network.spec
    priors = {}
    for name, model in spec.priors.items():
        terms = []
        for t in model.terms:
            if t.kind == "categorical":
                terms.append(RegressionTerm(
                    var=t.var, kind=t.kind,
                    levels={k: v * slope_scale for k, v in t.levels.items()}))
            else:
                terms.append(RegressionTerm(
                    var=t.var, kind=t.kind, slope=t.slope * slope_scale,
                    breakpoint=t.breakpoint,
                    hinge_slope=t.hinge_slope * slope_scale))
        priors[name] = PiecewiseRegression(
            response=model.response, intercept=model.intercept + intercept_shift,
            terms=tuple(terms), sigma=model.sigma * sigma_scale,
            cv_score=model.cv_score)
    return NetworkSpec(nodes=list(spec.nodes),
                       parents={k: list(v) for k, v in spec.parents.items()},
                       priors=priors, case_weight=spec.case_weight)
