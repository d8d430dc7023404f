"""Experiment configuration and the runner emitting plot-ready artifacts.

Per annealing chain the runner writes:

  trace_<label>.csv    one row per sweep: n,psi,lambda,assortativity,
                       mean_degree,acceptance_rate (streamed, so aborted
                       runs keep their partial trace)
  result_<label>.json  final multiplier report, network summary,
                       assortativity, config echo, seed, schema version
  network_<label>.csv  final exposure matrix as an edge list, with a
                       nodes_<label>.csv companion so it can be re-loaded
  meta_<label>.json    wall time and other non-reproducible run metadata

Result, trace and network files are byte-identical across reruns with the
same configuration and seed; volatile data stays in the meta file.
"""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import metrics
from .core import BankSet, ExposureMatrix
from .errors import DegenerateProperty, ParseError
from .generators import PopulationSpec, generate_population
from .io import load_network, write_nodes_csv, write_edges_csv
from .optimizer import AnnealConfig, AnnealTrace, anneal

SCHEMA_VERSION = 1

_TOP_KEYS = {"seed", "output_dir", "population", "network", "anneal",
             "metrics"}
_POPULATION_KEYS = {"kind", "n_banks", "pareto_exponent", "leverage_low",
                    "leverage_high", "rescale", "n1", "n2", "c1", "c2",
                    "equity", "custom_equity", "custom_assets",
                    "custom_liabilities", "seed"}
_NETWORK_KEYS = {"nodes", "edges", "largest_scc", "net_reciprocal"}
_ANNEAL_KEYS = {"label", "direction", "beta", "beta_k", "beta_asym",
                "sweeps", "trial_terms", "final_terms",
                "full_transfer_prob", "seed"}
_METRICS_KEYS = {"n_bins", "source_property", "target_property"}


@dataclass
class NetworkInput:
    nodes: Path
    edges: Path
    largest_scc: bool = False
    net_reciprocal: bool = False


@dataclass
class ChainSpec:
    label: str
    config: AnnealConfig


@dataclass
class MetricsSpec:
    n_bins: int = metrics.DEFAULT_BINS
    source_property: str = "leverage"
    target_property: str | None = None


@dataclass
class ExperimentConfig:
    chains: list
    output_dir: Path = Path(".")
    seed: int = 0
    population: PopulationSpec | None = None
    network: NetworkInput | None = None
    metrics: MetricsSpec = field(default_factory=MetricsSpec)
    echo: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.population is None) == (self.network is None):
            raise ParseError("exactly one of population/network is required")
        if not self.chains:
            raise ParseError("at least one annealing chain is required")
        labels = [c.label for c in self.chains]
        if len(set(labels)) != len(labels):
            raise ParseError(f"duplicate chain labels in {labels}")


def _require_keys(mapping, allowed: set, where: str) -> None:
    if not isinstance(mapping, dict):
        raise ParseError(f"{where}: expected a mapping")
    unknown = set(mapping) - allowed
    if unknown:
        raise ParseError(f"{where}: unknown key(s) {sorted(unknown)}")


def _coerce(mapping: dict, where: str, float_keys=(), int_keys=()) -> None:
    # YAML 1.1 reads exponents like 1.0e6 as strings; normalize in place.
    for key in float_keys:
        if key in mapping:
            try:
                mapping[key] = float(mapping[key])
            except (TypeError, ValueError):
                raise ParseError(f"{where}.{key}: expected a number, "
                                 f"got {mapping[key]!r}") from None
    for key in int_keys:
        if key in mapping:
            try:
                mapping[key] = int(mapping[key])
            except (TypeError, ValueError):
                raise ParseError(f"{where}.{key}: expected an integer, "
                                 f"got {mapping[key]!r}") from None


def load_experiment_config(path) -> ExperimentConfig:
    """Parse a YAML experiment file; unknown keys are hard errors."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: top level must be a mapping")
    return experiment_from_dict(raw, base_dir=path.parent)


def experiment_from_dict(raw: dict, base_dir=Path(".")) -> ExperimentConfig:
    _require_keys(raw, _TOP_KEYS, "config")
    seed = int(raw.get("seed", 0))
    output_dir = Path(raw.get("output_dir", "."))
    if not output_dir.is_absolute():
        output_dir = Path(base_dir) / output_dir

    population = None
    network = None
    if "population" in raw:
        pop = dict(raw["population"])
        _require_keys(pop, _POPULATION_KEYS, "population")
        _coerce(pop, "population",
                float_keys=("pareto_exponent", "leverage_low",
                            "leverage_high", "rescale", "c1", "c2", "equity"),
                int_keys=("n_banks", "n1", "n2", "seed"))
        pop.setdefault("seed", seed)
        pop["rng_seed"] = pop.pop("seed")
        try:
            population = PopulationSpec(**pop)
        except TypeError as exc:
            raise ParseError(f"population: {exc}") from exc
    if "network" in raw:
        net = dict(raw["network"])
        _require_keys(net, _NETWORK_KEYS, "network")
        for key in ("nodes", "edges"):
            if key not in net:
                raise ParseError(f"network: missing required key {key!r}")
            p = Path(net[key])
            if not p.is_absolute():
                p = Path(base_dir) / p
            if not p.exists():
                raise ParseError(f"network.{key}: no such file {p}")
            net[key] = p
        network = NetworkInput(**net)

    chains = []
    chain_specs = raw.get("anneal", [])
    if isinstance(chain_specs, dict):
        chain_specs = [chain_specs]
    if not isinstance(chain_specs, list):
        raise ParseError("anneal: expected a list of chain mappings")
    for k, spec in enumerate(chain_specs):
        _require_keys(spec, _ANNEAL_KEYS, f"anneal[{k}]")
        spec = dict(spec)
        if "direction" not in spec:
            raise ParseError(f"anneal[{k}]: missing required key 'direction'")
        label = str(spec.pop("label", spec["direction"]))
        _coerce(spec, f"anneal[{k}]",
                float_keys=("beta_k", "beta_asym", "full_transfer_prob"),
                int_keys=("sweeps", "trial_terms", "final_terms", "seed"))
        if "beta" in spec and spec["beta"] != "geometric":
            _coerce(spec, f"anneal[{k}]", float_keys=("beta",))
        spec.setdefault("seed", seed + k)
        spec["rng_seed"] = spec.pop("seed")
        try:
            cfg = AnnealConfig(**spec)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"anneal[{k}]: {exc}") from exc
        chains.append(ChainSpec(label=label, config=cfg))

    mspec = MetricsSpec()
    if "metrics" in raw:
        _require_keys(raw["metrics"], _METRICS_KEYS, "metrics")
        mspec = MetricsSpec(**raw["metrics"])

    return ExperimentConfig(chains=chains, output_dir=output_dir, seed=seed,
                            population=population, network=network,
                            metrics=mspec, echo=raw)


@dataclass(frozen=True)
class ChainArtifacts:
    label: str
    trace_path: Path
    result_path: Path
    network_path: Path
    nodes_path: Path
    meta_path: Path
    result: dict


def _json_dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _assortativity_entry(m: ExposureMatrix, mspec: MetricsSpec) -> dict:
    try:
        res = metrics.scalar_assortativity(
            m, source_property=mspec.source_property,
            target_property=mspec.target_property, n_bins=mspec.n_bins)
        return res.as_dict()
    except DegenerateProperty as exc:
        return {"r": None, "variance": None, "n_bins": mspec.n_bins,
                "source_property": str(mspec.source_property),
                "target_property": str(mspec.target_property
                                       or mspec.source_property),
                "degenerate": str(exc)}


def run_chain(bank_set: BankSet, chain: ChainSpec, out_dir: Path,
              initial: ExposureMatrix | None = None,
              mspec: MetricsSpec | None = None,
              echo: dict | None = None) -> ChainArtifacts:
    """Run one annealing chain and write its artifact files."""
    mspec = mspec or MetricsSpec()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    label = chain.label
    trace_path = out_dir / f"trace_{label}.csv"
    result_path = out_dir / f"result_{label}.json"
    network_path = out_dir / f"network_{label}.csv"
    nodes_path = out_dir / f"nodes_{label}.csv"
    meta_path = out_dir / f"meta_{label}.json"

    start = time.perf_counter()
    with trace_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AnnealTrace.COLUMNS)

        def on_sweep(rec):
            writer.writerow([rec.sweep, repr(rec.psi),
                             repr(rec.spectral_radius),
                             repr(rec.assortativity),
                             repr(rec.mean_degree),
                             repr(rec.acceptance_rate)])

        result = anneal(bank_set, chain.config, initial, on_sweep=on_sweep)
    elapsed = time.perf_counter() - start

    final = result.exposures
    write_nodes_csv(nodes_path, bank_set)
    write_edges_csv(network_path, final)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "label": label,
        "direction": chain.config.direction,
        "rng_seed": chain.config.rng_seed,
        "psi_report": result.report.as_dict(),
        "network_summary": metrics.network_summary(final).as_dict(),
        "assortativity": _assortativity_entry(final, mspec),
        "config": echo if echo is not None else {},
        "sweeps_completed": len(result.trace),
    }
    _json_dump(payload, result_path)
    _json_dump({"wall_time_s": elapsed}, meta_path)
    return ChainArtifacts(label=label, trace_path=trace_path,
                          result_path=result_path, network_path=network_path,
                          nodes_path=nodes_path, meta_path=meta_path,
                          result=payload)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> list:
    """Run all configured chains; independent chains may run in parallel."""
    if cfg.population is not None:
        bank_set = generate_population(cfg.population)
        initial = None
    else:
        loaded = load_network(cfg.network.nodes, cfg.network.edges,
                              largest_scc=cfg.network.largest_scc,
                              net_reciprocal=cfg.network.net_reciprocal,
                              equity_seed=cfg.seed)
        bank_set = loaded.bank_set
        initial = loaded.exposures
    echo = cfg.echo

    def run_one(chain):
        return run_chain(bank_set, chain, cfg.output_dir, initial=initial,
                         mspec=cfg.metrics, echo=echo)

    if jobs > 1 and len(cfg.chains) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_one, cfg.chains))
    return [run_one(chain) for chain in cfg.chains]
