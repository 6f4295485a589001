"""
Command-line entry point: ``stochqaoa {solve-exact, solve-qaoa, sweep, inspect}``.

Exit codes are 0 on success, 1 on solver/runtime errors and 2 on usage, parse and
validation errors. Logs go to stderr so that stdout and output files only carry
results.
"""
import argparse
import json
import logging
import sys
from typing import List, Sequence

import pandas as pd

import stochqaoa as sq
from stochqaoa import __version__
from stochqaoa.encoding import ising as isg
from stochqaoa.encoding import layout as lay
from stochqaoa.encoding import qubo as qb
from stochqaoa.errors import (InstanceParseError, InvalidInstanceError,
                              StochQAOAError)
from stochqaoa.model import instance as inst
from stochqaoa.model import io
from stochqaoa.oracle import benchmarks as bm
from stochqaoa.qaoa import config as qc
from stochqaoa.qaoa import runner
from stochqaoa.qaoa import sweep as sw

__author__ = "stochqaoa developers"
__license__ = "MIT"

_logger = logging.getLogger(__name__)


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return value


def layer_list(text: str) -> List[int]:
    try:
        return [positive_int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid layer list {text!r}")


def _add_common(parser: argparse.ArgumentParser, fmt: str) -> None:
    parser.add_argument("--instance", required=True, help="instance file (YAML)")
    parser.add_argument("--output", help="output file (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default=fmt)
    parser.add_argument("--timing", action="store_true",
                        help="include wall-clock fields in the output")
    parser.add_argument("-v", "--verbose", dest="loglevel", action="store_const",
                        const=logging.INFO, help="set loglevel to INFO")
    parser.add_argument("-vv", "--very-verbose", dest="loglevel",
                        action="store_const", const=logging.DEBUG,
                        help="set loglevel to DEBUG")


def _add_qaoa(parser: argparse.ArgumentParser, layers_type) -> None:
    parser.add_argument("--config", help="experiment configuration file (YAML)")
    parser.add_argument("--layers", type=layers_type)
    parser.add_argument("--init-strategy",
                        choices=[m.name for m in qc.InitStrategy])
    parser.add_argument("--optimizer", choices=[m.name for m in qc.Optimizer])
    parser.add_argument("--eval-mode", choices=[m.name for m in qc.EvalMode])
    parser.add_argument("--shots", type=positive_int)
    parser.add_argument("--max-evaluations", type=positive_int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--penalty", type=float)
    parser.add_argument("--solver-lib", choices=list(qc.SOLVER_LIBS))


def parse_args(args: Sequence[str]) -> argparse.Namespace:
    """Parse command line parameters

    Args:
      args (List[str]): command line parameters as list of strings
          (for example  ``["--help"]``).

    Returns:
      :obj:`argparse.Namespace`: command line parameters namespace
    """
    parser = argparse.ArgumentParser(
        prog="stochqaoa",
        description="Stochastic QAOA for two-stage EV-charging recourse problems")
    parser.add_argument("--version", action="version",
                        version=f"stochqaoa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-exact", help="classical benchmark report")
    _add_common(p, "json")
    p.add_argument("--round-mean", action="store_true",
                   help="round the mean scenario to the nearest support value")

    p = sub.add_parser("solve-qaoa", help="single seeded QAOA run")
    _add_common(p, "json")
    _add_qaoa(p, positive_int)

    p = sub.add_parser("sweep", help="repeated runs over several depths")
    _add_common(p, "csv")
    _add_qaoa(p, layer_list)
    p.add_argument("--runs", type=positive_int, default=1)
    p.add_argument("--workers", type=positive_int, default=1)
    p.add_argument("--summary", help="per-layer summary CSV")

    p = sub.add_parser("inspect", help="dump the encoding of an instance")
    _add_common(p, "json")
    p.add_argument("--what", choices=["layout", "qubo", "ising"], required=True)
    p.add_argument("--penalty", type=float, default=qb.DEFAULT_PENALTY)

    return parser.parse_args(args)


def setup_logging(loglevel: int | None) -> None:
    """Setup basic logging

    Args:
      loglevel (int): minimum loglevel for emitting messages
    """
    logformat = "[%(asctime)s] %(levelname)s:%(name)s:%(message)s"
    logging.basicConfig(level=loglevel or logging.WARNING, stream=sys.stderr,
                        format=logformat, datefmt="%Y-%m-%d %H:%M:%S")


def _emit(text: str, path: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as f:
            f.write(text)


def _qaoa_config(args: argparse.Namespace) -> qc.QaoaConfig:
    base = qc.QaoaConfig()
    if args.config is not None:
        base = qc.load_config(args.config, base)
    layers = args.layers if isinstance(args.layers, int) else None
    return base.with_updates(layers=layers, init_strategy=args.init_strategy,
                             optimizer=args.optimizer, eval_mode=args.eval_mode,
                             shots=args.shots,
                             max_evaluations=args.max_evaluations, seed=args.seed,
                             penalty=args.penalty, solver_lib=args.solver_lib)


def cmd_solve_exact(args: argparse.Namespace, instance: inst.InstanceSpec) -> None:
    report = bm.benchmark_report(instance, round_mean=args.round_mean)
    if args.format == "json":
        _emit(report.to_json(), args.output)
    else:
        row = report.to_dict()
        row["hn_j"] = ";".join(map(str, report.hn_j))
        row["ev_j"] = ";".join(map(str, report.ev_j))
        _emit(pd.DataFrame([row]).to_csv(index=False), args.output)


def cmd_solve_qaoa(args: argparse.Namespace, instance: inst.InstanceSpec) -> None:
    cfg = _qaoa_config(args)
    result = runner.optimize(cfg, instance)
    hn_j, _ = bm.solve_here_and_now(instance)
    if args.format == "json":
        d = {"config": cfg.to_dict(), "oracle_hn_j": list(hn_j),
             "matches_oracle": tuple(result.modal_j) == tuple(hn_j)}
        d.update(result.to_dict(include_timing=args.timing))
        _emit(json.dumps(d, indent=2), args.output)
    else:
        table = pd.DataFrame([{
            "layers": cfg.layers, "run": 0, "seed": cfg.seed,
            "best_expectation": result.best_expectation,
            "modal_j": ";".join(map(str, result.modal_j)),
            "success": tuple(result.modal_j) == tuple(hn_j),
            "evaluations": result.evaluations,
            "wall_ms": (round(result.wall_time*1e3, 3) if args.timing else None)}],
            columns=sw.COLUMNS)
        _emit(table.to_csv(index=False), args.output)


def cmd_sweep(args: argparse.Namespace, instance: inst.InstanceSpec) -> None:
    cfg = _qaoa_config(args)
    layers = args.layers if args.layers is not None else [cfg.layers]
    table, results = sw.layer_sweep(instance, layers, args.runs, cfg,
                                    workers=args.workers, timing=args.timing)
    if args.format == "csv":
        _emit(table.to_csv(index=False), args.output)
    else:
        _emit(json.dumps(sw.results_to_dict(results, args.timing), indent=2),
              args.output)
    if args.summary is not None:
        sw.summarize_sweep(table).to_csv(args.summary, index=False)


def cmd_inspect(args: argparse.Namespace, instance: inst.InstanceSpec) -> None:
    layout = lay.build_layout(instance)
    if args.what == "layout":
        _emit(layout.describe(), args.output)
        return
    qubo = qb.build_qubo(instance, args.penalty, layout)
    if args.what == "qubo":
        _emit(qubo.describe(), args.output)
    else:
        _emit(isg.qubo_to_split_ising(qubo, layout).to_json(), args.output)


COMMANDS = {"solve-exact": cmd_solve_exact, "solve-qaoa": cmd_solve_qaoa,
            "sweep": cmd_sweep, "inspect": cmd_inspect}


def main(args: Sequence[str]) -> int:
    """Runs a command and returns its exit code.

    Args:
      args (List[str]): command line parameters as list of strings
          (for example  ``["solve-exact", "--instance", "reference-instance.yaml"]``).
    """
    parsed = parse_args(args)
    setup_logging(parsed.loglevel)
    sq.config()
    try:
        instance = io.load_instance(parsed.instance)
        inst.ensure_valid(instance)
        COMMANDS[parsed.command](parsed, instance)
    except (InstanceParseError, InvalidInstanceError) as e:
        _logger.error("%s", e)
        return 2
    except StochQAOAError as e:
        _logger.error("%s", e)
        return 1
    except ValueError as e:
        # invalid option combinations rejected by the library
        _logger.error("%s", e)
        return 2
    return 0


def run():
    """Calls :func:`main` passing the CLI arguments extracted from :obj:`sys.argv`

    This function can be used as entry point to create console scripts with
    setuptools.
    """
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    # ^  This is a guard statement that will prevent the following code from
    #    being executed in the case someone imports this file instead of
    #    executing it as a script.
    #    https://docs.python.org/3/library/__main__.html

    run()
