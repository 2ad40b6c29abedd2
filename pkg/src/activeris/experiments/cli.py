"""``ris-sim`` command line.

Exit codes: 0 success, 2 config error, 3 infeasible parameters, 4 solver
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from typing import List, Optional

from activeris.errors import ConfigError, ConvergenceError, InfeasibleError, RisError
from activeris.experiments.config import FIGURES, default_paper_config, load_config
from activeris.experiments.scenarios import run_scenario
from activeris.sizing import LosParams, optimal_num_elements

EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_SOLVER = 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ris-sim", description="Active RIS link optimization scenarios.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a scenario from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=_u64)
    run.add_argument("--trials", type=_positive)
    run.add_argument("--out")
    run.add_argument("--debug", action="store_true",
                     help="re-check power budget and amplitude cap of every active solution")

    fig = sub.add_parser("paper-fig", help="run a built-in figure preset")
    fig.add_argument("figure", choices=FIGURES)
    fig.add_argument("--out")
    fig.add_argument("--seed", type=_u64)
    fig.add_argument("--trials", type=_positive)
    fig.add_argument("--debug", action="store_true")

    size = sub.add_parser("size", help="optimal element count for the config's LOS link")
    size.add_argument("--config", required=True)
    return parser


def _run(cfg, args) -> int:
    cfg = cfg.with_overrides(seed=args.seed, trials=args.trials, output_path=args.out)
    rows = run_scenario(cfg, debug=args.debug)
    logging.getLogger(__name__).info("wrote %d rows to %s", len(rows), cfg.output_path)
    if not cfg.output_path:
        print(f"{len(rows)} rows computed (no output path configured)", file=sys.stderr)
    return 0


def _size(args) -> int:
    cfg = load_config(args.config)
    if cfg.p_ris_values is None:
        raise ConfigError("size needs power.p_ris_dbm")
    lp = LosParams.from_geometry(cfg.geom, cfg.params.p_t, cfg.params.sigma1_sq,
                                 cfg.params.sigma2_sq, cfg.power_model(1, cfg.p_ris_values[0]),
                                 cfg.a_max_values[0])
    print(json.dumps(asdict(optimal_num_elements(lp)), indent=2))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s: %(message)s")
    try:
        if args.command == "run":
            return _run(load_config(args.config), args)
        if args.command == "paper-fig":
            return _run(default_paper_config(args.figure), args)
        return _size(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConvergenceError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except RisError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
