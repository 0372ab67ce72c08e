"""Command-line front end: ``pspchain <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage or validation error.
Usage errors print exactly one line on stderr, ``error: <kind>: <message>``.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import __version__
from .chain import PLUS, PM, resolve_cap
from .couplings import CouplingFamily, parse_family, validate_reflection_symmetry
from .errors import CapExceededError, CouplingRangeError
from .io import Table, distribution_table, estimate_table
from .partition import brute_force_partition, closed_form_partition, recursive_partition
from .psp import psp_distribution, psp_moments, variance_envelope
from .sampler import default_schedule, estimate_psp_distribution
from .verify import CHECKS, run_checks

CHECK_TOL = 1e-10
ENVELOPE_SLACK = 1.1


class UsageError(Exception):
    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError("usage", message.replace("\n", " "))


def parse_int_grid(text: str) -> list[int]:
    """``a:b`` (inclusive), ``a:b:step`` or a comma list of integers."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                lo, hi = parts
                step = 1
            elif len(parts) == 3:
                lo, hi, step = parts
            else:
                raise ValueError
            if step < 1 or hi < lo:
                raise ValueError
            return list(range(lo, hi + 1, step))
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise UsageError("bad-grid", f"cannot parse integer grid {text!r}") from None


def parse_beta_grid(text: str) -> list[float]:
    """``a:b`` (inclusive integer steps), ``a:b:count`` (geometric) or a comma list."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) == 2:
                lo, hi = float(parts[0]), float(parts[1])
                if hi < lo or lo != int(lo) or hi != int(hi):
                    raise ValueError
                return [float(b) for b in range(int(lo), int(hi) + 1)]
            if len(parts) == 3:
                lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
                if count < 1 or lo <= 0 or hi < lo:
                    raise ValueError
                if count == 1:
                    return [lo]
                return [float(b) for b in np.geomspace(lo, hi, count)]
            raise ValueError
        return [float(p) for p in text.split(",")]
    except ValueError:
        raise UsageError("bad-grid", f"cannot parse beta grid {text!r}") from None


@dataclass
class RunConfig:
    command: str
    family: CouplingFamily | None
    family_spec: str
    betas: list[float]
    ns: list[int]
    out: str | None
    fmt: str
    cap: int
    workers: int
    sweeps: int | None = None
    burn_in: int | None = None
    thin: int | None = None
    seed: int = 0
    check: bool = False
    n_max: int = 4


def build_config(args: argparse.Namespace) -> RunConfig:
    family = None
    spec = getattr(args, "family", None) or ""
    if args.command != "verify":
        if not spec:
            raise UsageError("missing-family", "--family is required")
        try:
            family = parse_family(spec)
        except (ValueError, OSError) as exc:
            raise UsageError("invalid-family", str(exc).replace("\n", " ")) from None

    betas: list[float] = []
    ns: list[int] = []
    if args.command != "verify":
        if args.beta is not None and args.beta_grid is not None:
            raise UsageError("conflict", "give --beta or --beta-grid, not both")
        if args.n is not None and args.n_grid is not None:
            raise UsageError("conflict", "give --n or --n-grid, not both")
        betas = [args.beta] if args.beta is not None else (
            parse_beta_grid(args.beta_grid) if args.beta_grid else [])
        ns = [args.n] if args.n is not None else (parse_int_grid(args.n_grid) if args.n_grid else [])
        if not betas:
            raise UsageError("missing-beta", "--beta or --beta-grid is required")
        if not ns:
            raise UsageError("missing-n", "--n or --n-grid is required")
        bad_beta = [b for b in betas if not (math.isfinite(b) and b > 0)]
        if bad_beta:
            raise UsageError("invalid-beta", f"beta must be positive and finite, got {bad_beta[0]}")
        bad_n = [n for n in ns if n < 0]
        if bad_n:
            raise UsageError("invalid-n", f"n must be non-negative, got {bad_n[0]}")

    try:
        cap = resolve_cap(args.cap)
    except ValueError:
        raise UsageError("invalid-cap", "PSPCHAIN_CAP must be an integer") from None
    if cap < 0:
        raise UsageError("invalid-cap", "cap must be non-negative")
    if args.workers < 1:
        raise UsageError("invalid-workers", "--workers must be >= 1")

    cfg = RunConfig(args.command, family, spec, betas, ns, args.out, args.format, cap, args.workers)
    if args.command in ("psp-dist", "sample"):
        if len(betas) != 1 or len(ns) != 1:
            raise UsageError("grid-not-supported", f"{args.command} takes a single --n and --beta")
    if args.command == "sample":
        cfg.sweeps, cfg.seed = args.sweeps, args.seed
        burn, thin = default_schedule(ns[0])
        cfg.burn_in = burn if args.burn_in is None else args.burn_in
        cfg.thin = thin if args.thin is None else args.thin
        if cfg.sweeps is None or cfg.sweeps <= cfg.burn_in or cfg.burn_in < 0 or cfg.thin < 1:
            raise UsageError("invalid-schedule",
                             f"need sweeps > burn_in >= 0 and thin >= 1 "
                             f"(sweeps={cfg.sweeps}, burn_in={cfg.burn_in}, thin={cfg.thin})")
    if args.command == "partition":
        cfg.check = args.check
    if args.command == "verify":
        cfg.n_max = args.n_max
        if not 0 <= cfg.n_max <= cap:
            raise UsageError("invalid-n", f"--n-max must lie in [0, {cap}]")
    if args.command in ("psp-dist", "variance-sweep"):
        over = [n for n in ns if n > cap]
        if over:
            raise UsageError("cap-exceeded", f"n={over[0]} exceeds enumeration cap {cap}")
    return cfg


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_partition(cfg: RunConfig) -> int:
    table = Table(["n", "beta", "log_Zplus", "log_Zpm", "ratio", "method", "rel_disagreement"],
                  meta={"family": cfg.family_spec})
    worst = 0.0
    for n in cfg.ns:
        symmetric = validate_reflection_symmetry(cfg.family, (1, n + 1)).ok
        if not symmetric and n > cfg.cap:
            raise UsageError("cap-exceeded",
                             f"family breaks the reflection symmetry and n={n} exceeds cap {cfg.cap}")
        for beta in cfg.betas:
            results: dict[str, tuple[float, float]] = {}
            if symmetric:
                pair = closed_form_partition(cfg.family, beta, n)
                results["closed"] = (pair.plus.log_value, pair.mixed.log_value)
                if cfg.check:
                    rec = recursive_partition(cfg.family, beta, n)[-1]
                    results["recursive"] = (rec.plus.log_value, rec.mixed.log_value)
            if (cfg.check or not symmetric) and n <= cfg.cap:
                results["brute"] = (
                    brute_force_partition(cfg.family, beta, n, PLUS, cfg.cap, cfg.workers).log_value,
                    brute_force_partition(cfg.family, beta, n, PM, cfg.cap, cfg.workers).log_value,
                )
            ref = results.get("closed")
            for method, (lp, lm) in results.items():
                if ref is None or len(results) == 1:
                    gap = None
                elif method == "closed":
                    gap = max(max(abs(a - b) for a, b in zip(v, ref))
                              for k, v in results.items() if k != "closed")
                else:
                    gap = max(abs(lp - ref[0]), abs(lm - ref[1]))
                if gap is not None:
                    worst = max(worst, gap)
                ratio = math.exp(lp - lm) if lp - lm < 709 else math.inf
                table.append([n, beta, lp, lm, ratio, method, gap])
    table.write(cfg.out, cfg.fmt)
    return 1 if cfg.check and worst > CHECK_TOL else 0


def cmd_psp_dist(cfg: RunConfig) -> int:
    dist = psp_distribution(cfg.family, cfg.betas[0], cfg.ns[0], cfg.cap, cfg.workers)
    table = distribution_table(dist, cfg.fmt)
    table.meta["family"] = cfg.family_spec
    table.write(cfg.out, cfg.fmt)
    return 0


def cmd_variance_sweep(cfg: RunConfig) -> int:
    table = Table(["n", "beta", "mean", "variance", "lower_bound", "theorem9_upper",
                   "asymptotic", "in_envelope"], meta={"family": cfg.family_spec,
                                                       "envelope_slack": ENVELOPE_SLACK})
    for n in cfg.ns:
        for beta in cfg.betas:
            moments = psp_moments(psp_distribution(cfg.family, beta, n, cfg.cap, cfg.workers))
            env = variance_envelope(beta)
            inside = env.lower - 1e-12 <= moments.variance <= ENVELOPE_SLACK * env.upper
            table.append([n, beta, moments.mean, moments.variance, env.lower, env.upper,
                          env.asymptotic, inside])
    table.write(cfg.out, cfg.fmt)
    return 0


def cmd_sample(cfg: RunConfig) -> int:
    report = estimate_psp_distribution(cfg.family, cfg.betas[0], cfg.ns[0], cfg.sweeps,
                                       cfg.burn_in, cfg.thin, cfg.seed)
    table = estimate_table(report)
    table.meta["family"] = cfg.family_spec
    table.write(cfg.out, cfg.fmt)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    results = run_checks(cfg.n_max)
    width = max(len(r.name) for r in results)
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}" for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed at n <= {cfg.n_max}")
    lines.append("coverage: " + ",".join(name for name, _ in CHECKS))
    sys.stdout.write("\n".join(lines) + "\n")
    if cfg.out:
        table = Table(["check", "passed", "detail"], [[r.name, r.passed, r.detail] for r in results],
                      meta={"n_max": cfg.n_max})
        table.write(cfg.out, cfg.fmt)
    return 0 if passed == len(results) else 1


COMMANDS = {
    "partition": cmd_partition,
    "psp-dist": cmd_psp_dist,
    "variance-sweep": cmd_variance_sweep,
    "sample": cmd_sample,
    "verify": cmd_verify,
}


def make_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--cap", type=int, help="enumeration cap on n (default $PSPCHAIN_CAP or 12)")
    common.add_argument("--workers", type=int, default=1, help="threads for enumeration chunks")

    model = _Parser(add_help=False)
    model.add_argument("--family", help="const:<I> | abs | sullivan25 | table:<csv>[;sym8]")
    model.add_argument("--beta", type=float)
    model.add_argument("--beta-grid", help="a:b, a:b:count (geometric) or a comma list")
    model.add_argument("--n", type=int)
    model.add_argument("--n-grid", help="a:b (inclusive), a:b:step or a comma list")

    parser = _Parser(prog="pspchain", description="Exact and Monte Carlo computations for the "
                     "inhomogeneous Ising chain and its phase separation point.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("partition", parents=[common, model], help="log Z^+ and log Z^+- table")
    p.add_argument("--check", action="store_true", help="add recursive and brute-force rows")
    sub.add_parser("psp-dist", parents=[common, model], help="exact PSP distribution")
    sub.add_parser("variance-sweep", parents=[common, model], help="PSP variance against its bounds")
    p = sub.add_parser("sample", parents=[common, model], help="heat-bath estimate of the PSP law")
    p.add_argument("--sweeps", type=int)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--thin", type=int)
    p.add_argument("--seed", type=int, default=0)
    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--n-max", type=int, default=4)
    return parser


def _one_line_warning(message, category, filename, lineno, line=None) -> str:
    return f"warning: {message}\n"


def main(argv: list[str] | None = None) -> int:
    warnings.formatwarning = _one_line_warning
    try:
        args = make_parser().parse_args(argv)
        cfg = build_config(args)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc.kind}: {exc}\n")
        return 2
    except CapExceededError as exc:
        sys.stderr.write(f"error: cap-exceeded: {exc}\n")
        return 2
    except CouplingRangeError as exc:
        sys.stderr.write(f"error: coupling-range: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: io: {exc}\n".replace("\n", " ").rstrip() + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
