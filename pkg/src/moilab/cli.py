"""Experiment runner CLI: growth sweeps, rank-bound checks, selfcheck.

Configuration comes from defaults, then an optional key=value config file,
then command-line flags, in increasing precedence.  Output is CSV or JSON
with a stable schema and deterministic formatting: two runs with the same
configuration produce byte-identical files.

Exit codes: 0 all checks passed, 1 an asserted identity failed, 2 bad
configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__
from .besov import psi_reference_grid
from .counterexample import (
    DEFAULT_SEED,
    growth_records,
    lipschitz_rank_bound_check,
    quarter_root_rule,
    rank_estimate_check_pairs,
)
from .linalg import validate_schatten_index
from .selfcheck import run_selfcheck

GROWTH_COLUMNS = ("N", "p", "lhs", "perturbation", "ratio", "sqrt_N", "besov_surrogate")
BOUNDS_COLUMNS = ("check", "N", "p", "trial", "ratio", "status")

OUTPUT_DIR_ENV = "MOILAB_OUTPUT_DIR"

RATIO_REL_TOL = 1e-8


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"field '{field}': {message}")
        self.field = field


@dataclass(frozen=True)
class RunConfig:
    N_list: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64)
    p_list: tuple[float, ...] = (1.0, 1.5, 2.0, 3.0, math.inf)
    seed: int = DEFAULT_SEED
    grid_half_width: float = 64.0
    grid_log2_size: int = 16
    output_format: str = "csv"
    output_path: str = "-"
    trials: int = 25
    eps_rule: str = "one"
    strict: bool = True

    def validate(self) -> "RunConfig":
        if not self.N_list:
            raise ConfigError("N", "list must be nonempty")
        for n in self.N_list:
            if n < 1:
                raise ConfigError("N", f"sizes must be positive integers, got {n}")
        if not self.p_list:
            raise ConfigError("p", "list must be nonempty")
        for p in self.p_list:
            try:
                validate_schatten_index(p)
            except ValueError as exc:
                raise ConfigError("p", str(exc)) from exc
        if not (10 <= self.grid_log2_size <= 22):
            raise ConfigError("grid_m", f"must lie in [10, 22], got {self.grid_log2_size}")
        if self.grid_half_width <= 0:
            raise ConfigError("grid_L", "must be positive")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("format", f"must be csv or json, got {self.output_format}")
        if self.trials < 0:
            raise ConfigError("trials", "must be nonnegative")
        _parse_eps_rule(self.eps_rule)
        return self


def _parse_p(token: str) -> float:
    token = token.strip()
    if token.lower() in ("inf", "infinity"):
        return math.inf
    try:
        value = float(token)
    except ValueError as exc:
        raise ConfigError("p", f"cannot parse {token!r} as a Schatten index") from exc
    try:
        return validate_schatten_index(value)
    except ValueError as exc:
        raise ConfigError("p", str(exc)) from exc


def _parse_int_list(text: str, field: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(field, f"cannot parse {text!r} as integers") from exc


def _parse_eps_rule(rule: str):
    if rule == "one":
        return lambda N: 1.0
    if rule == "quarter-root":
        return quarter_root_rule
    try:
        eps = float(rule)
    except ValueError as exc:
        raise ConfigError(
            "eps_rule", f"expected 'one', 'quarter-root' or a float in (0, 1], got {rule!r}"
        ) from exc
    if not 0.0 < eps <= 1.0:
        raise ConfigError("eps_rule", f"constant scaling must lie in (0, 1], got {eps}")
    return lambda N: eps


def _parse_bool(text: str, field: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(field, f"cannot parse {text!r} as a boolean")


def load_config_file(path: str) -> dict[str, str]:
    """Parse a simple key=value file; '#' starts a comment."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


_CONFIG_KEYS = {
    "N",
    "p",
    "seed",
    "grid_L",
    "grid_m",
    "format",
    "out",
    "trials",
    "eps_rule",
    "strict",
}


def build_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        entries = load_config_file(args.config)
        unknown = set(entries) - _CONFIG_KEYS
        if unknown:
            raise ConfigError("config", f"unknown keys {sorted(unknown)}")
        updates = {}
        if "N" in entries:
            updates["N_list"] = _parse_int_list(entries["N"], "N")
        if "p" in entries:
            updates["p_list"] = tuple(_parse_p(tok) for tok in entries["p"].split(","))
        if "seed" in entries:
            updates["seed"] = int(entries["seed"])
        if "grid_L" in entries:
            updates["grid_half_width"] = float(entries["grid_L"])
        if "grid_m" in entries:
            updates["grid_log2_size"] = int(entries["grid_m"])
        if "format" in entries:
            updates["output_format"] = entries["format"]
        if "out" in entries:
            updates["output_path"] = entries["out"]
        if "trials" in entries:
            updates["trials"] = int(entries["trials"])
        if "eps_rule" in entries:
            updates["eps_rule"] = entries["eps_rule"]
        if "strict" in entries:
            updates["strict"] = _parse_bool(entries["strict"], "strict")
        config = replace(config, **updates)

    if getattr(args, "N", None):
        config = replace(config, N_list=_parse_int_list(args.N, "N"))
    if getattr(args, "p", None):
        config = replace(config, p_list=tuple(_parse_p(tok) for tok in args.p.split(",")))
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    if getattr(args, "grid_m", None) is not None:
        config = replace(config, grid_log2_size=args.grid_m)
    if getattr(args, "grid_L", None) is not None:
        config = replace(config, grid_half_width=args.grid_L)
    if getattr(args, "format", None):
        config = replace(config, output_format=args.format)
    if getattr(args, "out", None):
        config = replace(config, output_path=args.out)
    if getattr(args, "trials", None) is not None:
        config = replace(config, trials=args.trials)
    if getattr(args, "eps_rule", None):
        config = replace(config, eps_rule=args.eps_rule)
    if getattr(args, "strict", None) is not None:
        config = replace(config, strict=args.strict)
    return config.validate()


def format_p(p: float) -> str:
    if math.isinf(p):
        return "inf"
    if p == int(p):
        return str(int(p))
    return repr(p)


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_rows(rows: list[dict], columns: tuple[str, ...], config: RunConfig) -> None:
    if config.output_format == "csv":
        lines = [",".join(columns)]
        lines.extend(
            ",".join(_format_cell(row[col]) for col in columns) for row in rows
        )
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(rows, indent=2, allow_nan=True) + "\n"

    if config.output_path == "-":
        sys.stdout.write(text)
        return
    path = Path(config.output_path)
    if not path.is_absolute():
        base = os.environ.get(OUTPUT_DIR_ENV)
        if base:
            path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def cmd_growth(config: RunConfig) -> int:
    eps_rule = _parse_eps_rule(config.eps_rule)
    psi_grid = psi_reference_grid(config.grid_half_width, config.grid_log2_size)
    rows = []
    failures = []
    p_sorted = tuple(sorted(config.p_list))
    for N in sorted(config.N_list):
        eps = float(eps_rule(N))
        for record in growth_records(N, p_sorted, eps=eps, psi_grid=psi_grid):
            sqrt_n = math.sqrt(N)
            rows.append(
                {
                    "N": record.N,
                    "p": format_p(record.p),
                    "lhs": record.lhs,
                    "perturbation": record.perturbation,
                    "ratio": record.ratio,
                    "sqrt_N": sqrt_n,
                    "besov_surrogate": record.besov_surrogate,
                }
            )
            if abs(record.ratio - sqrt_n) > RATIO_REL_TOL * sqrt_n:
                failures.append((record.N, record.p, record.ratio))
            if abs(record.perturbation - eps) > RATIO_REL_TOL:
                failures.append((record.N, record.p, record.perturbation))
    emit_rows(rows, GROWTH_COLUMNS, config)
    if failures:
        for N, p, value in failures:
            print(
                f"growth mismatch at N={N}, p={format_p(p)}: {value!r}",
                file=sys.stderr,
            )
        return 1
    return 0


def cmd_bounds(config: RunConfig) -> int:
    rows = []
    all_ok = True
    p_sorted = tuple(sorted(config.p_list))
    for N in sorted(config.N_list):
        for p in p_sorted:
            if p >= 2.0:
                report = rank_estimate_check_pairs(
                    N, p, trials=config.trials, seed=config.seed
                )
                for trial in report.trials:
                    rows.append(
                        {
                            "check": "pairs_chain",
                            "N": N,
                            "p": format_p(p),
                            "trial": trial.trial,
                            "ratio": trial.ratio,
                            "status": "ok" if trial.chain_ok else "fail",
                        }
                    )
                    all_ok = all_ok and trial.chain_ok
            else:
                rows.append(
                    {
                        "check": "pairs_chain",
                        "N": N,
                        "p": format_p(p),
                        "trial": "",
                        "ratio": "",
                        "status": "skipped: requires p >= 2",
                    }
                )
            report = lipschitz_rank_bound_check(
                N, p, trials=config.trials, seed=config.seed
            )
            for trial in report.trials:
                ok = trial.total_ok and trial.steps_ok
                rows.append(
                    {
                        "check": "lipschitz_bound",
                        "N": N,
                        "p": format_p(p),
                        "trial": trial.trial,
                        "ratio": trial.ratio,
                        "status": "ok" if ok else "fail",
                    }
                )
                all_ok = all_ok and ok
    emit_rows(rows, BOUNDS_COLUMNS, config)
    return 0 if all_ok else 1


def cmd_selfcheck(config: RunConfig) -> int:
    results = run_selfcheck(
        N_list=config.N_list,
        p_list=config.p_list,
        seed=config.seed,
        grid_half_width=config.grid_half_width,
        grid_log2_size=config.grid_log2_size,
        trials=config.trials,
    )
    failed = False
    for result in results:
        if result.passed:
            status = "PASS"
        elif result.category == "grid-stability" and not config.strict:
            status = "WARN"
        else:
            status = "FAIL"
            failed = True
        print(f"{status} {result.name}: {result.detail}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moilab",
        description="Growth experiments and invariant checks for operator "
        "functional calculus in Schatten norms.",
    )
    parser.add_argument("--version", action="version", version=f"moilab {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(sub):
        sub.add_argument("--config", help="key=value configuration file")
        sub.add_argument("--N", help="comma-separated sizes, e.g. 1,2,4,8")
        sub.add_argument("--p", help="comma-separated Schatten indices; 'inf' allowed")
        sub.add_argument("--seed", type=int, help="seed for randomized checks")
        sub.add_argument("--grid-m", dest="grid_m", type=int, help="log2 grid size (10..22)")
        sub.add_argument("--grid-L", dest="grid_L", type=float, help="grid half width")
        sub.add_argument("--format", choices=("csv", "json"), help="output format")
        sub.add_argument("--out", help="output path, or - for stdout")

    growth = subparsers.add_parser(
        "growth", help="sweep the growth family and report Schatten ratios"
    )
    add_common(growth)
    growth.add_argument(
        "--eps-rule",
        dest="eps_rule",
        help="third-slot scaling: 'one', 'quarter-root', or a float in (0, 1]",
    )

    bounds = subparsers.add_parser(
        "bounds", help="run the rank-based estimate checks over the sweep"
    )
    add_common(bounds)
    bounds.add_argument("--trials", type=int, help="random trials per sweep cell")

    selfcheck = subparsers.add_parser(
        "selfcheck", help="run every module's invariant suite"
    )
    add_common(selfcheck)
    selfcheck.add_argument("--trials", type=int, help="random trials for bound checks")
    strictness = selfcheck.add_mutually_exclusive_group()
    strictness.add_argument(
        "--strict", dest="strict", action="store_true", default=None,
        help="grid-stability failures are errors (default)",
    )
    strictness.add_argument(
        "--no-strict", dest="strict", action="store_false", default=None,
        help="downgrade grid-stability failures to warnings",
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
    except ConfigError as exc:
        print(f"moilab: configuration error: {exc}", file=sys.stderr)
        return 2
    if args.command == "growth":
        return cmd_growth(config)
    if args.command == "bounds":
        return cmd_bounds(config)
    return cmd_selfcheck(config)


def run() -> None:
    raise SystemExit(main())
