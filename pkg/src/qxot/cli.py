"""Command-line entry point: ``qxot verify | sweep | simulate | tradeoff``."""

from __future__ import annotations

import argparse
import sys

from . import __version__, reports
from .protocol import PartyStrategy, StrategyError, testing_subprotocol

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

# Rounds used to exercise the testing subprotocol alongside a simulation.
TEST_ROUNDS_CAP = 10_000


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror or exc}") from exc


def _positive_int(minimum: int):
    def parse(s: str) -> int:
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
        if v < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {v}")
        return v

    return parse


def _fraction(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {s!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("test fraction must lie strictly between 0 and 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(prog="qxot", description="XOR oblivious transfer cheating analysis and simulation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("verify", parents=[common], help="run the invariant suite")

    sw = sub.add_parser("sweep", parents=[common], help="cheating probabilities over an overlap grid")
    sw.add_argument("--plane", choices=reports.PLANES, default="reF-g")
    sw.add_argument("--grid", type=_positive_int(2), default=None, help="points per axis (201 for planes, 51 for 3d)")

    sim = sub.add_parser("simulate", parents=[common], help="Monte-Carlo frequency table")
    sim.add_argument("--protocol", choices=("direct", "reversed"), default="direct")
    sim.add_argument("--alice", choices=("honest", "cheat"), default="honest")
    sim.add_argument("--bob", choices=("honest", "cheat"), default="honest")
    sim.add_argument("--rounds", type=_positive_int(1), default=600_000)
    sim.add_argument("--test-fraction", type=_fraction, default=None)

    tr = sub.add_parser("tradeoff", parents=[common], help="classical line against the quantum point")
    tr.add_argument("--s-points", type=_positive_int(2), default=11)
    return parser


def scenario_for(protocol: str, alice: str, bob: str, test_fraction: float | None) -> tuple[str, PartyStrategy | None]:
    """Scenario name and, when a sender cheats, the strategy the testing subprotocol should face."""
    if alice == "cheat" and bob == "cheat":
        raise UsageError("at most one party may cheat")
    testing = test_fraction is not None
    if protocol == "direct":
        if alice == "cheat":
            sub = "entangled" if testing else "injection"
            return ("direct-alice-entangled" if testing else "direct-alice-cheat"), PartyStrategy("alice", "cheat", sub)
        if bob == "cheat":
            return "direct-bob-cheat", None
        return "direct-honest", None
    if alice == "cheat":
        return "reversed-alice-cheat", None
    if bob == "cheat":
        sub = "entangled" if testing else "eigenvector"
        name = "reversed-bob-cheat" if testing else "reversed-bob-eigenvector"
        return name, PartyStrategy("bob", "cheat", sub)
    return "reversed-honest", None


def cmd_verify(args) -> int:
    results = reports.verify_checks(seed=args.seed)
    text = reports.verify_text(results)
    if args.format == "json":
        _emit(reports.verify_json(results, args.seed), args.out)
        sys.stderr.write(text)
    else:
        _emit(text, args.out)
    return EXIT_OK if reports.verify_passed(results) else EXIT_FAILURE


def cmd_sweep(args) -> int:
    grid = args.grid or reports.DEFAULT_GRID[args.plane]
    rows = reports.sweep(args.plane, grid)
    text = reports.sweep_csv(rows) if args.format == "csv" else reports.sweep_json(rows, args.seed)
    _emit(text, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario, sender = scenario_for(args.protocol, args.alice, args.bob, args.test_fraction)
    table = reports.simulate_table(scenario, args.rounds, args.seed)
    flags = {"protocol": args.protocol, "alice": args.alice, "bob": args.bob, "test_fraction": args.test_fraction}
    summary = table.summary()
    if args.test_fraction is not None:
        n = min(args.rounds, TEST_ROUNDS_CAP)
        rep = testing_subprotocol(
            n, args.test_fraction, sender, seed=args.seed, direction=args.protocol
        )
        flags["test_aborted"] = rep.aborted
        flags["test_mismatches"] = rep.mismatches
        summary += f"\ntesting: {rep.tested} of {n} positions checked, {rep.mismatches} mismatches, "
        summary += "aborted" if rep.aborted else "not aborted"
    if args.format == "csv":
        _emit(reports.frequency_csv(table), args.out)
    else:
        _emit(reports.frequency_json(table, **flags), args.out)
    sys.stderr.write(summary + "\n")
    return EXIT_OK


def cmd_tradeoff(args) -> int:
    rows = reports.tradeoff_rows(args.s_points)
    text = reports.tradeoff_csv(rows) if args.format == "csv" else reports.tradeoff_json(rows, args.seed)
    _emit(text, args.out)
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "sweep": cmd_sweep, "simulate": cmd_simulate, "tradeoff": cmd_tradeoff}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, StrategyError) as exc:
        sys.stderr.write(f"qxot {args.command}: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
