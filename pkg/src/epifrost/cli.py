"""Command-line interface.

    epifrost simulate   --config cfg.json [--seed S] [--replicates R] [--out PATH]
    epifrost solve      --config cfg.json
    epifrost extinction --config cfg.json
    epifrost clt        --config cfg.json
    epifrost graph      --config cfg.json
    epifrost validate   --config cfg.json [--seed S] [--replicates R] [--out PATH]

Exit codes: 0 success (all enabled checks pass), 1 check failure,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import branching, clt, deterministic, harness
from .config import ExperimentConfig, load_config
from .errors import ConfigError, ConvergenceError, SingularMatrixError

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


def _jsonify(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return obj


def _emit(payload: dict) -> None:
    print(json.dumps(_jsonify(payload), indent=2))


def _load(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "replicates", None) is not None:
        overrides["replicates"] = args.replicates
    if getattr(args, "out", None) is not None:
        overrides["output_path"] = Path(args.out)
    return dataclasses.replace(config, **overrides) if overrides else config


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _load(args)
    records = harness.run_ensemble(config.population, config.kernel, config.replicates,
                                   config.seed, workers=config.workers,
                                   threshold=config.threshold_override)
    if config.output_path is not None:
        harness.write_records(records, config.output_path, config.output_format)
    stats = harness.estimate_outbreak_statistics(records)
    _emit({
        "replicates": len(records),
        "major_fraction": stats.major_fraction,
        "major_fraction_se": stats.major_fraction_se,
        "major_mean_fraction": stats.major_mean_fraction,
        "records": str(config.output_path) if config.output_path else None,
    })
    return EXIT_OK


def _solve(config: ExperimentConfig) -> deterministic.DeterministicSolution:
    return deterministic.solve_tau(config.kernel.mu, config.population.pi,
                                   config.population.zeta)


def _cmd_solve(args: argparse.Namespace) -> int:
    config = _load(args)
    sol = _solve(config)
    _emit({
        "tau": sol.tau,
        "sigma": sol.sigma,
        "R": sol.R,
        "regime": sol.regime.value,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "nonuniqueness_risk": sol.nonuniqueness_risk,
    })
    return EXIT_OK


def _cmd_extinction(args: argparse.Namespace) -> int:
    config = _load(args)
    law = branching.offspring_law_from_kernel(config.kernel, config.population.pi)
    sol = branching.extinction_probability(law, mc_samples=config.extinction_mc_samples,
                                           a=config.population.a)
    _emit({
        "q": sol.q,
        "major_outbreak_prob": sol.major_outbreak_prob,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "mc_samples": sol.mc_samples,
    })
    return EXIT_OK


def _cmd_clt(args: argparse.Namespace) -> int:
    config = _load(args)
    sol = _solve(config)
    summary = clt.asymptotic_covariance(config.kernel.mu, config.kernel.lam,
                                        config.population.pi, sol.tau,
                                        config.population.zeta,
                                        allocation=config.population.allocation)
    _emit({
        "sigma": np.diag(summary.sigma_diag),
        "xi": summary.xi,
        "u": summary.u_matrix,
        "upsilon": summary.upsilon,
        "asym_cov": summary.asym_cov,
        "cond_u": summary.cond_u,
        "allocation": summary.allocation.value,
    })
    return EXIT_OK


def _cmd_graph(args: argparse.Namespace) -> int:
    config = _load(args)
    kernel = config.kernel
    _emit({
        "kind": config.kernel_kind,
        "mu": kernel.mu,
        "lambda": kernel.lam,
        "R": deterministic.compute_R(kernel.mu, config.population.pi),
        "moments_estimated": kernel.moment_summary is not None,
    })
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    config = _load(args)
    records_path, report = harness.run_experiment(config)
    print(report.to_json())
    if records_path is not None:
        print(f"records written to {records_path}", file=sys.stderr)
    return EXIT_OK if report.all_passed else EXIT_CHECK_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epifrost",
        description="Multitype randomized Reed-Frost epidemics: simulation and asymptotics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("simulate", _cmd_simulate),
        ("solve", _cmd_solve),
        ("extinction", _cmd_extinction),
        ("clt", _cmd_clt),
        ("graph", _cmd_graph),
        ("validate", _cmd_validate),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--replicates", type=int, default=None,
                       help="override the config replicate count")
        p.add_argument("--out", type=str, default=None, help="override the records path")
        p.set_defaults(func=fn)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (ConvergenceError, SingularMatrixError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_FAILURE


if __name__ == "__main__":
    sys.exit(main())
