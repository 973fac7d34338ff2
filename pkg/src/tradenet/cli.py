"""Batch command-line front end.

Subcommands: gen-data, simulate, calibrate, nullmodels, scenario, validate.
Global flags: --seed, --threads, --out. Log level via TRADENET_LOG.
Exit codes: 0 success, 1 domain/validation error, 2 I/O or config error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Optional

from . import calibration, dataio, nullmodels, scenarios, simulation
from ._kernels import KERNEL_NAME
from .calibration import GENE_ORDER, GAConfig, ga_run, normalized_params
from .dataio import SyntheticConfig, fmt_number, write_text_atomic
from .domain import Dataset, GlobalParams
from .errors import DataLoadError, TradenetError
from .metrics import ObservationRecord
from .simulation import DEFAULT_MAX_ITER, SimOptions

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2

DEFAULT_SIM_PARAMS = GlobalParams(
    n_social=2.0,
    w_price=25.0,
    w_dist=25.0,
    w_debts=25.0,
    w_social=25.0,
    w_s_education=20.0,
    w_s_ethnicity=20.0,
    w_s_activegroup=20.0,
    w_s_prestigious_job=20.0,
    w_s_proximity=20.0,
)

OBSERVATION_HEADER = ("run_id", "seed", "iterations", "converged") + ObservationRecord.CSV_FIELDS


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_csv(path: Path, header: tuple | list, rows: list[list]) -> None:
    lines = [",".join(str(c) for c in header)]
    for row in rows:
        lines.append(",".join(fmt_number(c) if isinstance(c, (int, float, bool)) else str(c) for c in row))
    write_text_atomic(path, "\n".join(lines) + "\n")


def _write_manifest(
    out_dir: Path,
    command: str,
    resolved: dict,
    seeds: list[int],
    input_paths: list[Path],
    output_paths: list[Path],
    t0: float,
) -> Path:
    manifest = {
        "schema_version": 1,
        "command": command,
        "resolved": resolved,
        "seeds": seeds,
        "input_hashes": {str(p): _sha256(p) for p in input_paths if p.is_file()},
        "outputs": [str(p) for p in output_paths],
        "wall_clock_s": round(time.time() - t0, 3),
        "kernel": KERNEL_NAME,
    }
    path = out_dir / "manifest.json"
    write_text_atomic(path, json.dumps(manifest, indent=2) + "\n")
    return path


def _data_paths(data_dir: Path) -> dict[str, Path]:
    paths = {
        "sellers": data_dir / "sellers.csv",
        "buyers": data_dir / "buyers.csv",
        "links": data_dir / "links.csv",
    }
    for name, p in paths.items():
        if not p.is_file():
            raise FileNotFoundError(f"missing input file: {p}")
    distances = data_dir / "distances.csv"
    if distances.is_file():
        paths["distances"] = distances
    return paths


def _load_data(data_dir: Path, sample: str) -> tuple[Dataset, list[Path]]:
    paths = _data_paths(data_dir)
    dataset = dataio.load_dataset(
        paths["sellers"], paths["buyers"], paths["links"], paths.get("distances")
    )
    if sample == "reduced":
        dataset = dataio.reduced_sample(dataset)
    return dataset, list(paths.values())


def _params_from_json(path: Path) -> GlobalParams:
    doc = json.loads(path.read_text(encoding="utf-8"))
    raw = doc.get("params", doc)
    try:
        return GlobalParams(**{k: float(v) for k, v in raw.items() if k in GENE_ORDER})
    except TypeError as exc:
        raise TradenetError(f"{path}: bad parameter file: {exc}") from exc


def _resolve_params(args, data_dir: Path) -> tuple[GlobalParams, str, Optional[Path]]:
    """Parameter file beats the data directory's planted truth beats neutral
    defaults; individual --w-*/--n-social flags override on top."""
    source_path = None
    if args.params:
        source_path = Path(args.params)
        params, source = _params_from_json(source_path), str(source_path)
    elif (data_dir / "planted_truth.json").is_file():
        source_path = data_dir / "planted_truth.json"
        params, source = _params_from_json(source_path), str(source_path)
    else:
        params, source = DEFAULT_SIM_PARAMS, "defaults"
    overrides = {g: getattr(args, g) for g in GENE_ORDER if getattr(args, g, None) is not None}
    if overrides:
        params = replace(params, **overrides)
        source += " + overrides"
    params.validate()
    return params, source, source_path


def _add_param_override_flags(parser: argparse.ArgumentParser) -> None:
    for gene in GENE_ORDER:
        parser.add_argument(f"--{gene.replace('_', '-')}", type=float, default=None, dest=gene)


def _options_from_args(args) -> SimOptions:
    return SimOptions(
        n_buyer_mode=args.n_buyer_mode,
        social_signal=getattr(args, "social_signal", "scores"),
        subscore_scope=getattr(args, "subscore_scope", "per_seller"),
    )


def _observation_row(run_id, seed: int, report) -> list:
    return [
        run_id,
        seed,
        report.iterations_used,
        int(report.converged),
        *report.observation.csv_values(),
    ]


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_data(args) -> int:
    t0 = time.time()
    try:
        if args.config:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
            config = SyntheticConfig.from_json_dict(doc)
        else:
            config = SyntheticConfig()
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        config.validate()
    except (TradenetError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: bad synthetic config: {exc}", file=sys.stderr)
        return EXIT_IO

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset, planted = dataio.gen_synthetic(config)
    paths = dataio.save_dataset(dataset, out_dir)
    truth_path = out_dir / "planted_truth.json"
    write_text_atomic(truth_path, json.dumps(planted.to_json_dict(), indent=2) + "\n")

    outputs = list(paths.values()) + [truth_path]
    _write_manifest(
        out_dir,
        "gen-data",
        {"config": config.to_json_dict(), "config_path": args.config},
        [config.seed],
        [Path(args.config)] if args.config else [],
        outputs,
        t0,
    )
    print(
        f"wrote {len(dataset.sellers)} sellers, {len(dataset.buyers)} buyers, "
        f"{len(dataset.empirical_links)} links to {out_dir}"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    t0 = time.time()
    data_dir = Path(args.data)
    dataset, input_paths = _load_data(data_dir, args.sample)
    params, source, source_path = _resolve_params(args, data_dir)
    seed = args.seed if args.seed is not None else 0
    options = _options_from_args(args)

    state = simulation.init_model(dataset, params, seed, options)
    while state.iteration < args.max_iter and not state.converged:
        simulation.step(state)
    report = simulation.RunReport(
        iterations_used=state.iteration,
        converged=state.converged,
        cycle_detected=state.cycle_detected,
        observation=state.observation(),
        active_links=state.active_link_set(),
    )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    obs_path = out_dir / "observation.csv"
    _write_csv(obs_path, OBSERVATION_HEADER, [_observation_row(0, seed, report)])

    links_path = out_dir / "active_links.csv"
    _write_csv(links_path, ("seller_id", "buyer_id"), [list(p) for p in sorted(report.active_links)])

    # per-seller match report: who the model predicts well
    emp_by_seller: dict[int, set[int]] = {}
    for sid, bid in dataset.empirical_links:
        emp_by_seller.setdefault(sid, set()).add(bid)
    act_by_seller: dict[int, set[int]] = {}
    for sid, bid in report.active_links:
        act_by_seller.setdefault(sid, set()).add(bid)
    seller_rows = []
    for s in dataset.sellers:
        act = act_by_seller.get(s.id, set())
        correct = len(act & emp_by_seller.get(s.id, set()))
        seller_rows.append(
            [
                s.id,
                s.village_id,
                s.education,
                s.ethnicity,
                s.age,
                s.transport,
                s.employees,
                sum(s.debt_by_buyer.values()),
                len(act),
                correct,
                correct / len(act) if act else 0.0,
            ]
        )
    seller_path = out_dir / "seller_report.csv"
    _write_csv(
        seller_path,
        (
            "seller_id",
            "village_id",
            "education",
            "ethnicity",
            "age",
            "transport",
            "employees",
            "debts_total",
            "active_n",
            "correct_n",
            "correct_p",
        ),
        seller_rows,
    )

    _write_manifest(
        out_dir,
        "simulate",
        {
            "params": vars(params).copy(),
            "params_source": source,
            "sample": args.sample,
            "options": vars(options).copy(),
            "max_iter": args.max_iter,
            "iterations_used": report.iterations_used,
            "converged": report.converged,
            "cycle_detected": report.cycle_detected,
        },
        [seed],
        input_paths + ([source_path] if source_path else []),
        [obs_path, links_path, seller_path],
        t0,
    )
    obs = report.observation
    print(
        f"converged={report.converged} iterations={report.iterations_used} "
        f"correct_tradings_p={obs.correct_tradings_p:.4f} "
        f"components_n={obs.components_n}"
    )
    return EXIT_OK


def cmd_calibrate(args) -> int:
    t0 = time.time()
    data_dir = Path(args.data)
    dataset, input_paths = _load_data(data_dir, args.sample)

    config = GAConfig()
    if args.ga_config:
        doc = json.loads(Path(args.ga_config).read_text(encoding="utf-8"))
        doc.pop("schema_version", None)
        options = SimOptions(**doc.pop("options", {}))
        config = GAConfig(**doc, options=options)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.population is not None:
        config = replace(config, population_size=args.population)
    if args.generations is not None:
        config = replace(config, generations=args.generations)
    config.validate()

    best, trace = ga_run(dataset, config, workers=args.threads)
    fitness_best = max(trace.best)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    best_path = out_dir / "best_params.json"
    write_text_atomic(
        best_path,
        json.dumps(
            {
                "schema_version": 1,
                "params": vars(best).copy(),
                "params_normalized": vars(normalized_params(best)).copy(),
                "fitness": fitness_best,
                "generations": len(trace),
            },
            indent=2,
        )
        + "\n",
    )
    trace_path = out_dir / "trace.csv"
    rows = []
    for g in range(len(trace)):
        rows.append([g, trace.best[g], trace.mean[g], trace.worst[g], *trace.best_genome[g]])
    _write_csv(trace_path, ("generation", "best", "mean", "worst", *GENE_ORDER), rows)

    _write_manifest(
        out_dir,
        "calibrate",
        {
            "ga_config": {
                **{k: v for k, v in vars(config).items() if k != "options"},
                "options": vars(config.options).copy(),
                "bounds": list(config.bounds),
            },
            "ga_config_path": args.ga_config,
            "sample": args.sample,
            "fitness": fitness_best,
        },
        [config.seed, config.eval_seed],
        input_paths + ([Path(args.ga_config)] if args.ga_config else []),
        [best_path, trace_path],
        t0,
    )
    print(f"best fitness {fitness_best:.4f} after {len(trace)} generations -> {best_path}")
    return EXIT_OK


def cmd_nullmodels(args) -> int:
    t0 = time.time()
    data_dir = Path(args.data)
    dataset, input_paths = _load_data(data_dir, args.sample)
    params, source, source_path = _resolve_params(args, data_dir)
    options = _options_from_args(args)
    base_seed = args.seed if args.seed is not None else 0
    seeds = [base_seed + i for i in range(args.n_seeds)]

    jobs = [(kind.value, seed) for kind in nullmodels.all_kinds() for seed in seeds]
    jobs += [("full_model", seed) for seed in seeds]

    def run_one(job):
        name, seed = job
        if name == "full_model":
            report = simulation.run(dataset, params, seed, args.max_iter, options)
        else:
            report = nullmodels.run_null(dataset, name, seed, options)
        return [name, seed, report.observation.correct_tradings_p, report.observation.components_n]

    if args.threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(run_one, jobs))
    else:
        rows = [run_one(job) for job in jobs]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "nullmodels.csv"
    _write_csv(csv_path, ("kind", "seed", "correct_tradings_p", "components_n"), rows)
    _write_manifest(
        out_dir,
        "nullmodels",
        {"params": vars(params).copy(), "params_source": source, "sample": args.sample},
        seeds,
        input_paths + ([source_path] if source_path else []),
        [csv_path],
        t0,
    )
    print(f"wrote {len(rows)} rows ({len(seeds)} seeds x 7 kinds) -> {csv_path}")
    return EXIT_OK


def cmd_scenario(args) -> int:
    t0 = time.time()
    data_dir = Path(args.data)
    dataset, input_paths = _load_data(data_dir, args.sample)
    params, source, source_path = _resolve_params(args, data_dir)
    options = _options_from_args(args)
    base_seed = args.seed if args.seed is not None else 0

    if args.scenarios == "all":
        ids = list(scenarios.SCENARIO_IDS)
    else:
        ids = [s.strip() for s in args.scenarios.split(",") if s.strip()]
        if "baseline" not in ids:
            ids = ["baseline"] + ids
    for sid in ids:
        if sid not in scenarios.SCENARIO_IDS:
            raise TradenetError(f"unknown scenario id {sid!r}")

    indicator_rows = []
    summary_rows = []
    for sid in ids:
        spec = scenarios.ScenarioSpec(id=sid, replications=args.replications, base_seed=base_seed)
        result = scenarios.run_scenario(
            dataset, params, spec, options, args.max_iter, workers=args.threads
        )
        for r, (seed, ind) in enumerate(zip(result.seeds, result.indicators)):
            indicator_rows.append([sid, r, seed, *ind])
        summary_rows.extend(result.summary())
        for err in result.errors:
            logger.warning("scenario %s: %s", sid, err)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ind_path = out_dir / "scenario_indicators.csv"
    _write_csv(
        ind_path,
        ("scenario", "replication", "seed", *scenarios.INDICATOR_NAMES),
        indicator_rows,
    )
    sum_path = out_dir / "scenario_summary.csv"
    _write_csv(sum_path, ("scenario", "indicator", "mean", "sd"), summary_rows)
    _write_manifest(
        out_dir,
        "scenario",
        {
            "params": vars(params).copy(),
            "params_source": source,
            "scenarios": ids,
            "replications": args.replications,
            "sample": args.sample,
        },
        [base_seed + r for r in range(args.replications)],
        input_paths + ([source_path] if source_path else []),
        [ind_path, sum_path],
        t0,
    )
    print(f"wrote {len(indicator_rows)} replication rows for {len(ids)} scenarios -> {ind_path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    data_dir = Path(args.data)
    try:
        dataset, _ = _load_data(data_dir, args.sample)
    except DataLoadError as exc:
        print(f"invalid dataset: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    print(
        f"dataset is well-formed: {len(dataset.sellers)} sellers, "
        f"{len(dataset.buyers)} buyers, {len(dataset.empirical_links)} links"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tradenet",
        description="Agent-based trading-network simulator, calibrator and scenario runner.",
    )
    parser.add_argument("--seed", type=int, default=None, help="base random seed")
    parser.add_argument("--threads", type=int, default=1, help="worker cap for parallel parts")
    parser.add_argument("--out", default="tradenet_out", help="output directory")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset with planted truth")
    p.add_argument("--config", default=None, help="SyntheticConfig JSON file")
    p.set_defaults(func=cmd_gen_data)

    def add_common(p: argparse.ArgumentParser, with_params: bool = True) -> None:
        p.add_argument("--data", required=True, help="directory with the dataset CSVs")
        p.add_argument("--sample", choices=("complete", "reduced"), default="complete")
        p.add_argument("--n-buyer-mode", choices=("empirical", "regression"), default="empirical")
        p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
        if with_params:
            p.add_argument("--params", default=None, help="parameter JSON file")
            _add_param_override_flags(p)

    p = sub.add_parser("simulate", help="run the model once and write observations")
    add_common(p)
    p.add_argument("--social-signal", choices=("scores", "active"), default="scores")
    p.add_argument("--subscore-scope", choices=("per_seller", "global"), default="per_seller")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="fit the weights with the genetic algorithm")
    add_common(p, with_params=False)
    p.add_argument("--ga-config", default=None, help="GAConfig JSON file")
    p.add_argument("--population", type=int, default=None)
    p.add_argument("--generations", type=int, default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("nullmodels", help="run the six baselines plus the full model")
    add_common(p)
    p.add_argument("--n-seeds", type=int, default=10)
    p.set_defaults(func=cmd_nullmodels)

    p = sub.add_parser("scenario", help="run policy scenarios with replications")
    add_common(p)
    p.add_argument("--scenarios", default="all", help="comma list of ids, or 'all'")
    p.add_argument("--replications", type=int, default=20)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("validate", help="load a dataset and report invariant violations")
    p.add_argument("--data", required=True)
    p.add_argument("--sample", choices=("complete", "reduced"), default="complete")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(
        level=os.environ.get("TRADENET_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TradenetError, DataLoadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
