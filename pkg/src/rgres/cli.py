"""Command-line front end for the experiment harness.

Subcommands: hitting, pm-res, ham-res, sweep, classify, replay.  A JSON
config file can seed any run; explicit flags override it.  Exit codes:
0 completion, 2 configuration error, 3 threshold failure under --assert.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import ConfigError, ExperimentConfig, replay_check, run

_KIND_BY_COMMAND = {
    "hitting": "hitting",
    "pm-res": "pm-resilience",
    "ham-res": "ham-resilience",
    "sweep": "threshold-sweep",
    "classify": "classify",
}


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON config file; flags override it")
    sp.add_argument("--n", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--m-coeff", type=float,
                    help="edge count as coeff * n * ln(n)")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--adversary", choices=["random", "bipartition", "targeted"])
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--budget", choices=["simple", "refined"], dest="budget_mode")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--out", help="output directory for trials.csv/summary.json")
    sp.add_argument("--format", choices=["csv", "json"], dest="fmt")
    sp.add_argument("--assert", type=float, dest="assert_rate", metavar="RATE",
                    help="exit 3 unless the primary success rate is >= RATE")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rgres",
        description="Monte-Carlo experiments on the random graph process: "
                    "hitting times, matchings, Hamilton cycles, resilience.")
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd, kind in _KIND_BY_COMMAND.items():
        sp = sub.add_parser(cmd, help=f"run the {kind} experiment")
        _add_common(sp)
        if cmd == "sweep":
            sp.add_argument("--coeffs", type=float, nargs="+",
                            help="m coefficients to sweep")
    rp = sub.add_parser("replay", help="re-run recorded trials and compare")
    rp.add_argument("--out", required=True, help="directory with a prior run")
    rp.add_argument("--index", type=int, nargs="*",
                    help="trial indices (default: all)")
    return ap


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base: dict = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    base["kind"] = _KIND_BY_COMMAND[args.command]
    for key in ("n", "m", "m_coeff", "trials", "seed", "adversary", "alpha",
                "budget_mode", "eps", "workers", "out", "fmt"):
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    if getattr(args, "coeffs", None):
        base["coeffs"] = list(args.coeffs)
    if "n" not in base:
        raise ConfigError("--n is required (flag or config file)")
    try:
        return ExperimentConfig.from_json(base)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _primary_rate(summary: dict) -> float | None:
    kind = summary["kind"]
    if kind == "hitting":
        return summary["overall"]["rate"]
    if kind == "pm-resilience":
        return summary["pm_exists"]["rate"]
    if kind == "ham-resilience":
        return summary["ham_found"]["rate"]
    if kind == "threshold-sweep":
        rows = summary["rows"]
        return rows[-1]["ham_rate"] if rows else None
    return None


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "replay":
        ok, bad = replay_check(args.out, args.index or None)
        if ok:
            print("replay: all trials match")
            return 0
        print(f"replay: MISMATCH at indices {bad}")
        return 3

    try:
        cfg = _config_from_args(args)
        summary = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(summary, indent=2))
    rate = _primary_rate(summary)
    if args.assert_rate is not None:
        if rate is None or rate < args.assert_rate:
            print(f"assertion failed: rate {rate} < {args.assert_rate}",
                  file=sys.stderr)
            return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
