"""
Command-line front end.

Usage:
    tensormeans mean --config experiment.json [--inputs a.json b.json]
    tensormeans verify --config experiment.json --suite axioms
    tensormeans tailbound --config experiment.json --seed 7 --out results/

Exit codes: 0 all checks hold, 1 a contract violation, 2 a numerical
failure, 64 a configuration or input error.
"""

import argparse
import contextlib
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from .bounds import (
    TailBoundReport,
    ando_hiai_pair,
    collect_tail_samples,
    inverted_orderings,
    tail_bound_from_samples,
)
from .config import ExperimentConfig, load_config
from .core import _log_event, configure_logging
from .errors import ConfigError, ConvergenceError, NotPositiveDefiniteError, TrialError
from .means import MeanSpec, evaluate
from .reports import write_csv, write_json
from .sampling import draw_inputs
from .suites import SUITES, run_suite
from .tensor_core import HermitianTensor, identity, lambda_max, load_tensor, power, save_tensor

logger = logging.getLogger("tensormeans.cli")

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_NUMERICAL = 2
EXIT_CONFIG = 64

REPORT_COLUMNS = ["name", "holds", "margin", "witness_seed", "tolerance", "informational", "constant"]
TAIL_COLUMNS = ["series", "name", "p", "q", "r", "c", "threshold", "empirical_prob", "mc_stderr", "trace_bound",
                "n_samples", "holds", "informational"]
PLOT_COLUMNS = ["series", "p", "q", "r", "c", "empirical_prob", "stderr", "trace_bound"]


def _load(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    return config.with_overrides(seed=args.seed, output_dir=args.out)


def _output_dir(config: ExperimentConfig) -> Path:
    path = Path(config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _control(config: ExperimentConfig):
    return inverted_orderings() if config.negative_control == "invert" else contextlib.nullcontext()


def _read_inputs(paths: Sequence[str], config: ExperimentConfig):
    try:
        tensors = [load_tensor(p) for p in paths]
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read input tensors: {exc}") from exc
    if len(tensors) != config.k:
        if config.weights is not None:
            raise ConfigError(f"{len(tensors)} input tensors given for {config.k} configured weights")
        try:
            config = ExperimentConfig.model_validate({**config.model_dump(), "k": len(tensors)})
        except ValidationError as exc:
            raise ConfigError(f"invalid config for {len(tensors)} inputs: {exc}") from exc
    return tensors, config


def cmd_mean(args: argparse.Namespace) -> int:
    config = _load(args)
    if args.inputs:
        inputs, config = _read_inputs(args.inputs, config)
    else:
        inputs = draw_inputs(config.build_source(), 0, config.k)
    spec = config.mean_spec()
    out = _output_dir(config)

    with config.tolerances.activate():
        try:
            value, diagnostics = evaluate(spec, inputs, config.tolerances)
        except ConvergenceError as exc:
            write_json(out / "diagnostics.json", {"mean": spec.describe(), **exc.diagnostics.to_dict()})
            raise

    save_tensor(value, out / "mean.json")
    write_json(out / "diagnostics.json", {"mean": spec.describe(), **diagnostics.to_dict()})
    _log_event("mean_written", logging.INFO, log=logger, mean=spec.describe(), path=str(out / "mean.json"))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _output_dir(config)

    with config.tolerances.activate(), _control(config):
        reports = run_suite(args.suite, config, workers=args.workers)

    violations = [r for r in reports if r.violated]
    informational_failures = sum(1 for r in reports if r.informational and not r.holds)
    rows = [r.to_dict() for r in reports]
    write_json(out / f"verify_{args.suite}.json", {
        "suite": args.suite,
        "seed": config.seed,
        "trials": config.trials,
        "violations": len(violations),
        "informational_failures": informational_failures,
        "reports": rows,
    })
    write_csv(out / f"verify_{args.suite}.csv", REPORT_COLUMNS, rows)

    for report in violations:
        _log_event("violation", logging.WARNING, log=logger, suite=args.suite, name=report.name,
                   margin=report.margin, witness_seed=report.witness_seed)
    return EXIT_VIOLATION if violations else EXIT_OK


def _statistic_specs(config: ExperimentConfig) -> List[tuple]:
    """(q, MeanSpec) pairs; power means sweep q_values, every other kind uses the configured spec."""
    w = config.weight_values()
    if config.mean.kind == "power":
        return [(q, MeanSpec.power(w, q)) for q in config.q_values]
    return [(None, config.mean_spec())]


def _mean_top_eigenvalue(values: Sequence[HermitianTensor]) -> float:
    return float(np.mean([lambda_max(v) for v in values]))


def _sweep(series: str, samples, config: ExperimentConfig, p: float, q: Optional[float]) -> List[dict]:
    scale = _mean_top_eigenvalue(samples.values)
    eye = identity(config.shape)
    rows = []
    for r in config.r_values:
        for c in config.c_values:
            threshold = c * scale
            name = f"{series}[p={p:g},q={'-' if q is None else format(q, 'g')},r={r:g},c={c:g}]"
            report: TailBoundReport = tail_bound_from_samples(samples, eye * threshold, r, config.tolerances,
                                                              name=name, threshold=threshold)
            rows.append({"series": series, "p": p, "q": q, "c": c, **report.to_dict()})
    return rows


def cmd_tailbound(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _output_dir(config)
    source = config.build_source()
    w = config.weight_values()
    workers = args.workers or config.workers
    tol = config.tolerances
    rows: List[dict] = []

    with tol.activate():
        for p in config.p_values:
            for q, spec in _statistic_specs(config):
                def statistic(inputs, spec=spec, p=p):
                    return evaluate(spec, [power(A, p) for A in inputs], tol)[0]

                samples = collect_tail_samples(source, statistic, config.trials, config.k, workers=workers)
                rows.extend(_sweep("markov", samples, config, p, q))

                if config.mean.kind == "power":
                    # Pr(lower not <= C) <= Pr(upper not <= C) <= Tr(E[upper] C^{-1})
                    def pair(inputs, p=p, q=q):
                        return ando_hiai_pair(p, q, w, inputs, tol)

                    coupled = collect_tail_samples(source, None, config.trials, config.k, workers=workers, pair=pair)
                    rows.extend(_sweep("ando_hiai", coupled, config, p, q))

    violations = [row for row in rows if not row["holds"] and not row["informational"]]
    write_json(out / "tailbound.json", {
        "seed": config.seed,
        "trials": config.trials,
        "mean": config.mean_spec().describe(),
        "violations": len(violations),
        "reports": rows,
    })
    write_csv(out / "tailbound.csv", TAIL_COLUMNS, rows)
    write_csv(out / "tailbound_plot.csv", PLOT_COLUMNS,
              [{**row, "stderr": row["mc_stderr"]} for row in rows])
    return EXIT_VIOLATION if violations else EXIT_OK


class UsageParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as ConfigError instead of exiting with status 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(
        prog="tensormeans",
        description="Multivariate means of PD tensors and verification of Ando-Hiai type inequalities.",
    )
    parser.add_argument("--log-level", default=None, help="Package log level (DEBUG, INFO, WARNING, ...).")

    common = UsageParser(add_help=False)
    common.add_argument("--config", help="JSON experiment configuration; defaults apply when omitted.")
    common.add_argument("--seed", type=int, default=None, help="Override the configured root seed.")
    common.add_argument("--out", default=None, help="Override the configured output directory.")
    common.add_argument("--workers", type=int, default=None, help="Worker threads for trials.")

    commands = parser.add_subparsers(dest="command", required=True)

    mean = commands.add_parser("mean", parents=[common], help="Compute the configured mean.")
    mean.add_argument("--inputs", nargs="+", default=None, help="Input tensor JSON files.")
    mean.set_defaults(handler=cmd_mean)

    verify = commands.add_parser("verify", parents=[common], help="Run a verification suite.")
    verify.add_argument("--suite", required=True, choices=sorted(SUITES))
    verify.set_defaults(handler=cmd_verify)

    tailbound = commands.add_parser("tailbound", parents=[common], help="Estimate Markov tail bounds.")
    tailbound.set_defaults(handler=cmd_tailbound)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        logger.error(f"usage error: {exc}")
        return EXIT_CONFIG
    if args.log_level:
        configure_logging(args.log_level)
    if args.workers is not None and args.workers < 1:
        logger.error(f"configuration error: --workers must be >= 1, got {args.workers}")
        return EXIT_CONFIG

    _log_event("command_start", logging.INFO, log=logger, command=args.command)
    try:
        code = args.handler(args)
    except (ConfigError, ValidationError) as exc:
        logger.error(f"configuration error: {exc}")
        code = EXIT_CONFIG
    except (ArithmeticError, TrialError, NotPositiveDefiniteError) as exc:
        logger.error(f"numerical failure: {exc}")
        code = EXIT_NUMERICAL
    _log_event("command_finished", logging.INFO, log=logger, command=args.command, exit_code=code)
    return code


if __name__ == "__main__":
    sys.exit(main())
