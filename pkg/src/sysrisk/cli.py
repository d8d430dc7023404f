"""Command-line surface.

Subcommands: generate, propagate, psi, optimize, metrics, analytic,
scaling. Structured results go to stdout as JSON; bulk outputs (traces,
tables, networks) go to files under --out-dir. Failures print a
machine-readable error JSON on stderr and exit nonzero.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import amplification, analytic, metrics, propagation
from .core import lambda_from_exposures
from .errors import ParseError, SysriskError
from .experiment import (
    ChainSpec,
    ExperimentConfig,
    MetricsSpec,
    NetworkInput,
    load_experiment_config,
    run_chain,
    run_experiment,
)
from .generators import PopulationSpec, generate_population
from .io import load_network, write_edges_csv, write_nodes_csv
from .optimizer import AnnealConfig, initial_feasible_matrix

DEFAULT_TRIAL_TERMS = 50
DEFAULT_FINAL_TERMS = 200


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="random seed (default 0)")
    common.add_argument("--terms-trial", type=int, default=None,
                        help="series terms for update trials")
    common.add_argument("--terms-final", type=int, default=None,
                        help="series terms for final/traced evaluation")
    common.add_argument("--out-dir", default=".",
                        help="directory for emitted files (default .)")
    return common


def _add_network_args(parser) -> None:
    parser.add_argument("--nodes", required=True, help="nodes CSV")
    parser.add_argument("--edges", required=True, help="edges CSV")
    parser.add_argument("--largest-scc", action="store_true",
                        help="restrict to the largest strongly connected "
                             "component")
    parser.add_argument("--net-reciprocal", action="store_true",
                        help="net reciprocal edge pairs into one edge")


def _load(args):
    return load_network(args.nodes, args.edges,
                        largest_scc=args.largest_scc,
                        net_reciprocal=args.net_reciprocal,
                        equity_seed=args.seed)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _population_spec(args) -> PopulationSpec:
    return PopulationSpec(
        kind=args.kind,
        n_banks=args.n_banks,
        pareto_exponent=args.pareto_exponent,
        leverage_low=args.leverage_low,
        leverage_high=args.leverage_high,
        rescale=args.rescale,
        n1=args.n1, n2=args.n2, c1=args.c1, c2=args.c2,
        rng_seed=args.seed,
    )


def _add_population_args(parser) -> None:
    parser.add_argument("--kind", default="pareto_uniform",
                        choices=["pareto_uniform", "grid", "two_type"])
    parser.add_argument("--n-banks", type=int, default=30)
    parser.add_argument("--pareto-exponent", type=float, default=3.0)
    parser.add_argument("--leverage-low", type=float, default=0.32)
    parser.add_argument("--leverage-high", type=float, default=0.96)
    parser.add_argument("--rescale", type=float, default=1.0,
                        help="grid leverage multiplier")
    parser.add_argument("--n1", type=int, default=0)
    parser.add_argument("--n2", type=int, default=0)
    parser.add_argument("--c1", type=float, default=0.0)
    parser.add_argument("--c2", type=float, default=0.0)


def cmd_generate(args) -> int:
    spec = _population_spec(args)
    bank_set = generate_population(spec)
    m = initial_feasible_matrix(bank_set)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    nodes_path = out_dir / f"nodes_{args.label}.csv"
    edges_path = out_dir / f"edges_{args.label}.csv"
    write_nodes_csv(nodes_path, bank_set)
    write_edges_csv(edges_path, m)
    psi_1, psi_2 = amplification.psi_local_terms(bank_set)
    _emit({
        "label": args.label,
        "n_banks": bank_set.n_banks,
        "nodes": str(nodes_path),
        "edges": str(edges_path),
        "psi_1": psi_1,
        "psi_2": psi_2,
    })
    return 0


def cmd_propagate(args) -> int:
    loaded = _load(args)
    lm = lambda_from_exposures(loaded.exposures)
    n = loaded.bank_set.n_banks
    h1 = np.full(n, args.shock)
    states = propagation.propagate(lm, h1, args.t_max)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table_path = out_dir / f"propagation_{args.label}.csv"
    with table_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "H"] + [f"h_{i}" for i in loaded.ids])
        for st in states:
            writer.writerow([st.t, repr(st.aggregate_loss)]
                            + [repr(float(x)) for x in st.h])
    lam = lm.spectral_radius()
    if lam < 1.0 - propagation.CRITICAL_MARGIN:
        h_inf = propagation.h_infinity_exact(lm, h1)
        h_inf_total = float(h_inf @ lm.equity_weights)
    else:
        h_inf_total = None
    last = states[-1]
    _emit({
        "table": str(table_path),
        "spectral_radius": lam,
        "steps_computed": len(states),
        "aborted_early": len(states) < args.t_max,
        "aggregate_loss_final_step": last.aggregate_loss,
        "aggregate_loss_infinity": h_inf_total,
        "bankrupt_ids": [loaded.ids[i] for i in np.nonzero(last.bankrupt)[0]],
    })
    return 0


def cmd_psi(args) -> int:
    loaded = _load(args)
    t_terms = args.terms_final or DEFAULT_FINAL_TERMS
    report = amplification.psi_full(loaded.exposures, t_terms)
    _emit(report.as_dict())
    return 0


def cmd_metrics(args) -> int:
    loaded = _load(args)
    m = loaded.exposures
    out = {"network_summary": metrics.network_summary(m).as_dict()}
    try:
        res = metrics.scalar_assortativity(
            m, source_property=args.source_property,
            target_property=args.target_property, n_bins=args.bins)
        out["assortativity"] = res.as_dict()
    except SysriskError as exc:
        out["assortativity"] = {"degenerate": str(exc)}
    try:
        out["edge_correlation"] = metrics.edge_property_correlation(m)
    except SysriskError:
        out["edge_correlation"] = None
    _emit(out)
    return 0


def cmd_optimize(args) -> int:
    if args.config:
        cfg = load_experiment_config(args.config)
    else:
        directions = (["minimize", "maximize"] if args.direction == "both"
                      else [args.direction])
        beta = args.beta
        if beta != "geometric":
            beta = float(beta)
        trial = args.terms_trial or DEFAULT_TRIAL_TERMS
        final = args.terms_final or DEFAULT_FINAL_TERMS
        chains = []
        echo = {"seed": args.seed, "anneal": []}
        for k, direction in enumerate(directions):
            acfg = AnnealConfig(
                direction=direction, beta=beta, beta_k=args.beta_k,
                beta_asym=args.beta_asym, sweeps=args.sweeps,
                trial_terms=trial, final_terms=final,
                rng_seed=args.seed + k,
                full_transfer_prob=args.full_transfer_prob,
            )
            chains.append(ChainSpec(label=direction, config=acfg))
            echo["anneal"].append({
                "label": direction, "direction": direction,
                "beta": beta, "beta_k": args.beta_k,
                "beta_asym": args.beta_asym, "sweeps": args.sweeps,
                "trial_terms": trial, "final_terms": final,
                "seed": args.seed + k,
                "full_transfer_prob": args.full_transfer_prob,
            })
        if args.nodes or args.edges:
            if not (args.nodes and args.edges):
                raise ParseError("--nodes and --edges must be given together")
            network = NetworkInput(nodes=Path(args.nodes),
                                   edges=Path(args.edges),
                                   largest_scc=args.largest_scc,
                                   net_reciprocal=args.net_reciprocal)
            population = None
            echo["network"] = {"nodes": args.nodes, "edges": args.edges,
                               "largest_scc": args.largest_scc,
                               "net_reciprocal": args.net_reciprocal}
        else:
            population = _population_spec(args)
            network = None
            echo["population"] = {"kind": args.kind,
                                  "n_banks": args.n_banks,
                                  "seed": args.seed}
        cfg = ExperimentConfig(chains=chains, output_dir=Path(args.out_dir),
                               seed=args.seed, population=population,
                               network=network, echo=echo)
    artifacts = run_experiment(cfg, jobs=args.jobs)
    _emit({
        "chains": [
            {
                "label": art.label,
                "trace": str(art.trace_path),
                "result": str(art.result_path),
                "network": str(art.network_path),
                "psi_total": art.result["psi_report"]["psi_total"],
                "spectral_radius": art.result["psi_report"]["spectral_radius"],
            }
            for art in artifacts
        ]
    })
    return 0


def cmd_analytic(args) -> int:
    if args.model == "two-type":
        model = analytic.TwoTypeModel(n1=args.n1, n2=args.n2, c1=args.c1,
                                      c2=args.c2, kappa=args.kappa)
        lm = analytic.two_type_lambda_matrix(model)
        t_terms = args.terms_final or DEFAULT_FINAL_TERMS
        _emit({
            "model": "two-type",
            "kappa": model.kappa,
            "kappa_max": model.kappa_max,
            "lambda_closed_form": analytic.two_type_spectral_radius(model),
            "lambda_power_iteration": lm.spectral_radius(),
            "psi_truncated": analytic.two_type_psi(model, t_terms),
            "psi_terms": t_terms,
        })
    else:
        t_terms = args.terms_final or DEFAULT_FINAL_TERMS
        limit = analytic.constant_leverage_psi_limit(args.leverage)
        _emit({
            "model": "constant-leverage",
            "leverage": args.leverage,
            "psi_truncated": analytic.constant_leverage_psi(args.leverage,
                                                            t_terms),
            "psi_limit": limit if math.isfinite(limit) else None,
            "psi_terms": t_terms,
        })
    return 0


def cmd_scaling(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if not sizes:
        raise SysriskError("no sizes given")
    directions = (["minimize", "maximize"] if args.directions == "both"
                  else [args.directions])
    trial = args.terms_trial or 13
    final = args.terms_final or 103
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_rows = []
    for n in sizes:
        spec = PopulationSpec(kind="grid", n_banks=n, rescale=args.rescale,
                              rng_seed=args.seed)
        bank_set = generate_population(spec)
        for k, direction in enumerate(directions):
            label = f"{direction}_N{n}"
            acfg = AnnealConfig(
                direction=direction, beta="geometric", beta_k=args.beta_k,
                beta_asym=args.beta_asym, sweeps=args.sweeps,
                trial_terms=trial, final_terms=final,
                rng_seed=args.seed + k,
            )
            art = run_chain(bank_set, ChainSpec(label=label, config=acfg),
                            out_dir,
                            echo={"population": {"kind": "grid",
                                                 "n_banks": n,
                                                 "rescale": args.rescale},
                                  "seed": args.seed})
            rep = art.result["psi_report"]
            asst = art.result["assortativity"].get("r")
            summary_rows.append([n, direction, repr(rep["psi_total"]),
                                 repr(rep["spectral_radius"]),
                                 "" if asst is None else repr(asst)])
    summary_path = out_dir / "scaling_summary.csv"
    with summary_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_banks", "direction", "psi", "lambda",
                         "assortativity"])
        writer.writerows(summary_rows)
    _emit({"summary": str(summary_path), "sizes": sizes,
           "directions": directions})
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="sysrisk",
        description="Interbank shock propagation and extremal-network search",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common],
                       help="sample a bank population and write its files")
    _add_population_args(p)
    p.add_argument("--label", default="population")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("propagate", parents=[common],
                       help="run the shock recursion on a network")
    _add_network_args(p)
    p.add_argument("--shock", type=float, default=0.01,
                   help="uniform initial relative loss (default 0.01)")
    p.add_argument("--t-max", type=int, default=50)
    p.add_argument("--label", default="run")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("psi", parents=[common],
                       help="shock multiplier report for a network")
    _add_network_args(p)
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("optimize", parents=[common],
                       help="anneal exposure matrices toward extremal risk")
    p.add_argument("--config", default=None,
                   help="YAML experiment file (overrides other flags)")
    p.add_argument("--nodes", default=None)
    p.add_argument("--edges", default=None)
    p.add_argument("--largest-scc", action="store_true")
    p.add_argument("--net-reciprocal", action="store_true")
    _add_population_args(p)
    p.add_argument("--direction", default="both",
                   choices=["minimize", "maximize", "both"])
    p.add_argument("--beta", default="1e6",
                   help="acceptance sharpness, or 'geometric'")
    p.add_argument("--beta-k", type=float, default=0.1)
    p.add_argument("--beta-asym", type=float, default=2.0)
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--full-transfer-prob", type=float, default=0.5)
    p.add_argument("--jobs", type=int, default=1,
                   help="independent chains run in this many threads")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("metrics", parents=[common],
                       help="summary and assortativity of a network")
    _add_network_args(p)
    p.add_argument("--bins", type=int, default=metrics.DEFAULT_BINS)
    p.add_argument("--source-property", default="leverage")
    p.add_argument("--target-property", default=None)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("analytic", parents=[common],
                       help="closed-form reference values")
    p.add_argument("--model", required=True,
                   choices=["two-type", "constant-leverage"])
    p.add_argument("--n1", type=int, default=5)
    p.add_argument("--n2", type=int, default=50)
    p.add_argument("--c1", type=float, default=2.0)
    p.add_argument("--c2", type=float, default=0.5)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--leverage", type=float, default=0.5)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("scaling", parents=[common],
                       help="multi-size batch on the leverage grid")
    p.add_argument("--sizes", default="10,20,30,40")
    p.add_argument("--rescale", type=float, default=1.0)
    p.add_argument("--sweeps", type=int, default=5000)
    p.add_argument("--beta-k", type=float, default=0.1)
    p.add_argument("--beta-asym", type=float, default=2.0)
    p.add_argument("--directions", default="minimize",
                   choices=["minimize", "maximize", "both"])
    p.set_defaults(func=cmd_scaling)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SysriskError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
