"""
Command-line front end.

    freqkelly solve     --dist FILE --n INT [--kkt-tol F --max-iters I] [--out FILE]
    freqkelly certify   --dist FILE --weights "0.5,0.5" --n INT [--tol F] [--out FILE]
    freqkelly dominance --dist FILE [--tol F] [--out FILE]
    freqkelly simulate  --dist FILE --k "..." --kstar "..." --horizon INT --paths INT --seed INT [--out FILE]
    freqkelly backtest  --prices FILE --window INT [--fallback hold|riskless|flat
                        --riskless-index I --v0 F] --out DIR

Exit status is 0 on success (a failing certificate is still a success),
1 on a domain error such as an enumeration cap, and 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import asymptotics, backtest, certificates, returns_model, solver
from ._io import atomic_write_json
from .errors import InvalidInputError, KellyError

log = logging.getLogger("freqkelly")

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _vector(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="freqkelly", description="Frequency-based Kelly portfolios: solve, certify, simulate, backtest.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="maximize expected log growth for rebalancing period n")
    s.add_argument("--dist", required=True)
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--kkt-tol", type=float, default=1e-8)
    s.add_argument("--max-iters", type=_positive_int, default=10_000)
    s.add_argument("--cert-tol", type=float, default=certificates.DEFAULT_TOL)
    s.add_argument("--out")

    c = sub.add_parser("certify", help="check the optimality conditions at given weights")
    c.add_argument("--dist", required=True)
    c.add_argument("--weights", type=_vector, required=True)
    c.add_argument("--n", type=_positive_int, required=True)
    c.add_argument("--tol", type=float, default=certificates.DEFAULT_TOL)
    c.add_argument("--out")

    d = sub.add_parser("dominance", help="pairwise dominance ratios and the dominant asset, if any")
    d.add_argument("--dist", required=True)
    d.add_argument("--tol", type=float, default=certificates.DEFAULT_DOMINANCE_TOL)
    d.add_argument("--out")

    m = sub.add_parser("simulate", help="relative log-growth paths of K against K*")
    m.add_argument("--dist", required=True)
    m.add_argument("--k", type=_vector, required=True)
    m.add_argument("--kstar", type=_vector, required=True)
    m.add_argument("--horizon", type=_positive_int, required=True)
    m.add_argument("--paths", type=_positive_int, required=True)
    m.add_argument("--seed", type=int, required=True)
    m.add_argument("--period", type=_positive_int, default=1)
    m.add_argument("--out")

    b = sub.add_parser("backtest", help="dominant ratio trading on a price CSV")
    b.add_argument("--prices", required=True)
    b.add_argument("--window", type=_positive_int, required=True)
    b.add_argument("--fallback", choices=backtest.FALLBACKS, default="hold")
    b.add_argument("--riskless-index", type=int)
    b.add_argument("--v0", type=float, default=1.0)
    b.add_argument("--out", required=True)
    return p


def _emit_json(doc: dict, out: str | None) -> None:
    if out:
        atomic_write_json(out, doc)
    else:
        json.dump(doc, sys.stdout, indent=2, allow_nan=False)
        sys.stdout.write("\n")


def _cmd_solve(args) -> int:
    dist = returns_model.load_distribution(args.dist)
    opts = solver.SolverOptions(kkt_tol=args.kkt_tol, max_iters=args.max_iters)
    compound = returns_model.compound_exact(dist, args.n, cap=opts.enumeration_cap)
    result = solver.solve_compound(compound, opts)
    cert = certificates.kkt_certify(compound, result.weights, tol=args.cert_tol)
    doc = {"assets": list(dist.assets), **result.to_dict(), "certificate": cert.to_dict()}
    _emit_json(doc, args.out)
    return EXIT_OK


def _cmd_certify(args) -> int:
    dist = returns_model.load_distribution(args.dist)
    compound = returns_model.compound_exact(dist, args.n)
    cert = certificates.kkt_certify(compound, args.weights, tol=args.tol)
    _emit_json({"assets": list(dist.assets), "n": args.n, **cert.to_dict()}, args.out)
    return EXIT_OK


def _cmd_dominance(args) -> int:
    dist = returns_model.load_distribution(args.dist)
    _emit_json(certificates.find_dominant(dist, tol=args.tol).to_dict(), args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    dist = returns_model.load_distribution(args.dist)
    ens = asymptotics.simulate_relative_paths(
        dist, args.k, args.kstar, args.horizon, args.paths, args.seed, period=args.period
    )
    check = asymptotics.check_asymptotic_bound(ens)
    if args.out:
        check.to_csv(args.out)
    else:
        sys.stdout.write(check.csv_text())
    log.info(
        "last violation at n=%s; tail violation fraction %.4g",
        check.last_violation,
        check.tail_violation_fraction,
    )
    return EXIT_OK


def _cmd_backtest(args) -> int:
    series = backtest.load_prices(args.prices)
    config = backtest.BacktestConfig(
        window=args.window,
        initial_value=args.v0,
        fallback=args.fallback,
        riskless_index=args.riskless_index,
    )
    result = backtest.run_backtest(series, config)
    csv_path, json_path = backtest.write_backtest(result, args.out)
    log.info("wrote %s and %s", csv_path, json_path)
    return EXIT_OK


COMMANDS = {
    "solve": _cmd_solve,
    "certify": _cmd_certify,
    "dominance": _cmd_dominance,
    "simulate": _cmd_simulate,
    "backtest": _cmd_backtest,
}


def dispatch(args: argparse.Namespace) -> int:
    try:
        return COMMANDS[args.command](args)
    except (InvalidInputError, OSError) as exc:
        print(f"freqkelly {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except KellyError as exc:
        print(f"freqkelly {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
