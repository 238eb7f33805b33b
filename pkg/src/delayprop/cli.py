"""Command-line pipeline: ingest, fit, train, eval, sweep, query, simulate,
serve.

Exit codes: 0 success, 1 usage error, 2 data error. Every run logs the
sha256 of the config-like input it consumed, and all artifact writers are
deterministic (canonical JSON, fixed CSV formatting), so rerunning a command
with the same inputs and seeds reproduces the output byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluation, plots
from .cases import KNOWN_VARS, assemble_cases, derive_leg_table
from .flightdata import HeaderError, parse_records, write_records
from .inference import (EvidenceError, InconsistentEvidenceError,
                        log_likelihood, posterior)
from .jsonio import (FormatError, canonical_json, load_network, dump_network,
                     regression_to_doc, sha256_hex, spec_from_doc)
from .network import CaseError, SpecError, build_network, train_network
from .regression import FitError, fit_piecewise
from .synth import default_scenario, load_scenario, generate

DATA_ERRORS = (HeaderError, FormatError, FitError, SpecError, CaseError,
               EvidenceError, InconsistentEvidenceError, ValueError,
               KeyError, OSError, json.JSONDecodeError)


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not hasattr(args, "func"):
        parser.print_help(sys.stderr)
        return 1
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    return 0


def build_parser() -> Parser:
    parser = Parser(prog="delayprop",
                    description="Flight-delay propagation networks: build, "
                                "train, query, and evaluate.")
    sub = parser.add_subparsers(dest="command", parser_class=Parser)

    p = sub.add_parser("ingest", help="derive delay/GDP variables from a flights CSV")
    p.add_argument("--flights", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--origin", default=None,
                   help="keep only legs departing this airport")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fit", help="fit a piecewise regression prior")
    p.add_argument("--cases", required=True, help="derived-variable CSV from ingest")
    p.add_argument("--response", required=True)
    p.add_argument("--candidates", required=True,
                   help="comma-separated candidate variables")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("train", help="build priors and update them from flights")
    p.add_argument("--config", required=True, help="network config JSON")
    p.add_argument("--flights", required=True)
    p.add_argument("--weight", type=float, default=None,
                   help="case weight (default: config's case_weight)")
    p.add_argument("--origin", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a trained model on flights")
    p.add_argument("--model", required=True)
    p.add_argument("--flights", required=True)
    p.add_argument("--origin", default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--weights", default=None,
                   help="comma-separated case weights: adds a sweep "
                        "(requires --train-flights)")
    p.add_argument("--train-flights", default=None)
    p.add_argument("--ll-generated", type=int, default=0,
                   help="sample size for the likelihood comparison")
    p.add_argument("--ll-seed", type=int, default=7)
    p.add_argument("--ll-floor", action="store_true",
                   help="floor probabilities at 1e-9 in log-likelihoods")
    p.add_argument("--plot", action="store_true", help="emit SVG charts")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="case-weight sweep on train/test flights")
    p.add_argument("--config", required=True)
    p.add_argument("--train-flights", required=True)
    p.add_argument("--test-flights", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--origin", default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("query", help="posterior query against a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--query", required=True, help="query JSON file, or '-' for stdin")
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("simulate", help="generate synthetic flights from a scenario")
    p.add_argument("--scenario", default=None,
                   help="scenario JSON (default: the shipped scenario)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out", default=None,
                   help="also write the latent true bin assignments")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the what-if HTTP service")
    p.add_argument("--addr", default=None,
                   help="host:port (default: env DELAYPROP_ADDR or 127.0.0.1:8000)")
    p.add_argument("--model-dir", default=None,
                   help="default: env DELAYPROP_MODEL_DIR or ./models")
    p.set_defaults(func=cmd_serve)
    return parser


def _log_hash(path: str) -> bytes:
    data = Path(path).read_bytes()
    print(f"config sha256({path})={sha256_hex(data)}", file=sys.stderr)
    return data


def _read_flights(path: str):
    with open(path, newline="") as fh:
        result = parse_records(fh)
    for err in result.errors:
        print(f"{path}:{err.line}: {err.message}", file=sys.stderr)
    if result.errors:
        print(f"skipped {result.n_skipped} malformed rows", file=sys.stderr)
    return result.records


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def cmd_ingest(args) -> None:
    records = _read_flights(args.flights)
    legs = derive_leg_table(records, origin=args.origin)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tail_id", "ts", *KNOWN_VARS])
        for leg in legs:
            writer.writerow([leg.tail_id, leg.timestamp,
                             *(_fmt_cell(leg.values[k]) for k in KNOWN_VARS)])
    print(f"wrote {len(legs)} legs to {args.out}", file=sys.stderr)


def _read_derived(path: str) -> list[dict]:
    cases = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            case = {}
            for key, raw in row.items():
                if raw is None or raw == "":
                    continue
                try:
                    case[key] = float(raw)
                except ValueError:
                    case[key] = raw
            cases.append(case)
    return cases


def cmd_fit(args) -> None:
    _log_hash(args.cases)
    cases = _read_derived(args.cases)
    candidates = [c for c in args.candidates.split(",") if c]
    model = fit_piecewise(cases, args.response, candidates, folds=args.folds)
    Path(args.out).write_text(canonical_json(regression_to_doc(model)) + "\n")
    print(f"selected predictors: {model.predictors or '(intercept only)'}; "
          f"sigma={model.sigma:.3f} cv={model.cv_score:.3f}", file=sys.stderr)


def cmd_train(args) -> None:
    config = _log_hash(args.config)
    spec = spec_from_doc(json.loads(config))
    network = build_network(spec)
    records = _read_flights(args.flights)
    assembled = assemble_cases(records, network, origin=args.origin)
    if not assembled.cases:
        raise FormatError("no usable training cases after assembly")
    trained = train_network(network, assembled.cases, args.weight)
    Path(args.out).write_text(dump_network(trained) + "\n")
    print(f"trained on {len(assembled.cases)} cases "
          f"({assembled.n_dropped} dropped)", file=sys.stderr)


def _parse_weights(raw: str) -> list[float]:
    try:
        weights = [float(w) for w in raw.split(",") if w]
    except ValueError as exc:
        raise UsageError(f"bad --weights: {exc}")
    if not weights:
        raise UsageError("--weights is empty")
    return weights


def cmd_eval(args) -> None:
    model_bytes = _log_hash(args.model)
    network = load_network(model_bytes.decode())
    records = _read_flights(args.flights)
    assembled = assemble_cases(records, network, origin=args.origin)
    if not assembled.cases:
        raise FormatError("no usable evaluation cases after assembly")
    report = evaluation.evaluate_network(network, assembled.cases)

    if args.weights:
        if not args.train_flights:
            raise UsageError("--weights requires --train-flights")
        weights = _parse_weights(args.weights)
        train_records = _read_flights(args.train_flights)
        train_cases = assemble_cases(train_records, network,
                                     origin=args.origin).cases
        report.sweep = evaluation.weight_sweep(
            network.spec, train_cases, assembled.cases, weights)

    if args.ll_generated > 0:
        floor = 1e-9 if args.ll_floor else None
        ll_h = [log_likelihood(network, c, floor=floor)
                for c in assembled.cases]
        from .inference import forward_sample
        gen = forward_sample(network, args.ll_generated, args.ll_seed)
        ll_g = [log_likelihood(network, c, floor=floor) for c in gen]
        fin_h = [v for v in ll_h if np.isfinite(v)]
        fin_g = [v for v in ll_g if np.isfinite(v)]
        report.likelihood = evaluation.LikelihoodComparison(
            ll_holdout=ll_h, ll_generated=ll_g,
            ks=evaluation.ks_statistic(fin_h, fin_g),
            n_holdout_neginf=len(ll_h) - len(fin_h),
            n_generated_neginf=len(ll_g) - len(fin_g))

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(
        canonical_json(evaluation.report_to_doc(report)) + "\n")
    _write_csv(out / "confusion.csv",
               ["node", "actual_bin", "predicted_bin", "count"],
               evaluation.confusion_rows(report))
    if report.sweep is not None:
        _write_sweep(out, report.sweep, plot=args.plot)
    if args.plot and report.likelihood is not None:
        lc = report.likelihood
        svg = plots.histogram_chart(
            {"holdout": [v for v in lc.ll_holdout if np.isfinite(v)],
             "generated": [v for v in lc.ll_generated if np.isfinite(v)]},
            title="Log-likelihood comparison", x_label="log-likelihood")
        (out / "loglik.svg").write_text(svg + "\n")
    print(f"evaluated {report.n_cases} cases; report in {out}", file=sys.stderr)


def _write_sweep(out: Path, sweep, plot: bool) -> None:
    _write_csv(out / "sweep.csv",
               ["node", "weight", "train_mse", "test_mse",
                "train_scaled", "test_scaled"],
               evaluation.sweep_rows(sweep))
    _write_csv(out / "baselines.csv",
               ["node", "baseline", "train_mse", "test_mse"],
               evaluation.baseline_rows(sweep))
    if plot:
        series = {"train": (sweep.weights,
                            [sweep.total_train()[w] for w in sweep.weights]),
                  "test": (sweep.weights,
                           [sweep.total_test()[w] for w in sweep.weights])}
        svg = plots.line_chart(series, title="Case-weight sweep",
                               x_label="case weight", y_label="approx MSE",
                               log_x=True)
        (out / "sweep.svg").write_text(svg + "\n")


def cmd_sweep(args) -> None:
    config = _log_hash(args.config)
    spec = spec_from_doc(json.loads(config))
    network = build_network(spec)
    weights = _parse_weights(args.weights)
    train_cases = assemble_cases(_read_flights(args.train_flights), network,
                                 origin=args.origin).cases
    test_cases = assemble_cases(_read_flights(args.test_flights), network,
                                origin=args.origin).cases
    if not train_cases or not test_cases:
        raise FormatError("train or test assembly produced no cases")
    sweep = evaluation.weight_sweep(spec, train_cases, test_cases, weights)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_sweep(out, sweep, plot=args.plot)
    print(f"swept {len(weights)} weights over {len(sweep.nodes)} nodes",
          file=sys.stderr)


def cmd_query(args) -> None:
    model_bytes = _log_hash(args.model)
    network = load_network(model_bytes.decode())
    if args.query == "-":
        body = json.load(sys.stdin)
    else:
        body = json.loads(Path(args.query).read_text())
    evidence = body.get("evidence", {})
    query_nodes = body.get("query")
    result = posterior(network, evidence, query_nodes)
    doc = {
        "posteriors": {n: list(p) for n, p in result.posteriors.items()},
        "expected": result.expected,
        "evidence_logprob": result.evidence_logprob,
    }
    text = canonical_json(doc) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> None:
    if args.n < 0:
        raise UsageError("--n must be nonnegative")
    if args.scenario:
        _log_hash(args.scenario)
        gt = load_scenario(Path(args.scenario).read_text())
    else:
        gt = default_scenario()
        print("using the shipped default scenario", file=sys.stderr)
    data = generate(gt, args.n, args.seed)
    with open(args.out, "w", newline="") as fh:
        write_records(data.records, fh)
    if args.truth_out:
        names = gt.network.node_names
        _write_csv(Path(args.truth_out), ["case", *names],
                   [{"case": i, **{n: c[n] for n in names}}
                    for i, c in enumerate(data.cases)])
    print(f"simulated {args.n} cases ({len(data.records)} legs) to {args.out}",
          file=sys.stderr)


def cmd_serve(args) -> None:
    import uvicorn

    from .service import create_app

    addr = args.addr or os.environ.get("DELAYPROP_ADDR", "127.0.0.1:8000")
    model_dir = args.model_dir or os.environ.get("DELAYPROP_MODEL_DIR", "models")
    host, _, port = addr.partition(":")
    app = create_app(model_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))


def _write_csv(path: Path, header: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt_cell(row[h]) for h in header])


if __name__ == "__main__":
    sys.exit(main())
