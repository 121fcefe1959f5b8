"""Command line front end.

Subcommands: simulate, grid, coupled, bounds, scan, renewal.
Exit codes: 0 success, 1 configuration error, 2 property violation,
3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Optional

from .auxiliary import DominanceViolation, run_coupled
from .bounds import (
    UnsupportedClosedFormError,
    latency_upper_bound,
    mg1_expected_workload,
    mg1_params,
    renewal_function,
    renewal_function_mc,
    sufficient_condition,
    sync_fraction_bound,
    waiting_time_upper_bound,
)
from .config import ConfigurationError, ScenarioConfig, x_spec_from_kind
from .experiments import (
    SCAN_COLUMNS,
    export_coupled_trace,
    grid_from_toml,
    run_grid,
    scenario_from_toml,
    stability_scan,
)
from .simulate import run_simulation

__all__ = ["main"]


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad arguments; that slot is
    # reserved for property violations here, so re-route to 1.
    def error(self, message):
        raise _CliError(message)


def _add_common(p, seed=True, horizon=True, warmup=False, out=True):
    if seed:
        p.add_argument("--seed", type=int, default=None)
    if horizon:
        p.add_argument("--horizon", type=float, default=None)
    if warmup:
        p.add_argument("--warmup", type=float, default=None)
    if out:
        p.add_argument("--out", default=None, help="output file (default: stdout)")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="redsim")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario, print metrics as JSON")
    p.add_argument("config", help="TOML file with a [scenario] table")
    _add_common(p, warmup=True)

    p = sub.add_parser("grid", help="run a sweep grid, write results CSV")
    p.add_argument("config", help="TOML file with [scenario] and [grid] tables")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--deterministic", action="store_true",
                   help="suppress the timestamp header line")
    p.add_argument("--out", default=None, help="CSV path (overrides the TOML)")

    p = sub.add_parser("coupled", help="run the coupled construction, check dominance")
    p.add_argument("config", help="TOML file with a [scenario] table")
    p.add_argument("--deterministic", action="store_true")
    _add_common(p)

    p = sub.add_parser("bounds", help="print analytical bounds as JSON")
    p.add_argument("config", help="TOML file with a [scenario] table")
    _add_common(p, horizon=False, out=True)

    p = sub.add_parser("scan", help="scan arrival rates for stability")
    p.add_argument("config", help="TOML file with a [scenario] table")
    p.add_argument("--lambdas", default=None,
                   help="comma separated arrival rates to test")
    p.add_argument("--bracket", type=float, nargs=2, default=None,
                   metavar=("LO", "HI"), help="stable/unstable bracket to bisect")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--deterministic", action="store_true")
    _add_common(p, seed=False)

    p = sub.add_parser("renewal", help="evaluate the renewal function m(t)")
    p.add_argument("x_kind", choices=["det1", "exp1", "unif02"])
    p.add_argument("t", type=float)
    p.add_argument("--mc", type=int, default=None, metavar="N",
                   help="also print a Monte Carlo estimate from N paths")
    p.add_argument("--seed", type=int, default=None)

    return parser


def _one_seed(config: ScenarioConfig, seed: Optional[int]):
    return seed if seed is not None else config.seeds[0]


def _emit(text: str, out: Optional[str]):
    if out is None:
        print(text)
    else:
        try:
            with open(out, "w") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            raise IOError(f"cannot write {out}: {exc}") from exc


def _metrics_dict(m) -> dict:
    return {
        "total_time": m.total_time,
        "n_events": m.n_events,
        "n_jobs": m.n_jobs,
        "count_a": m.count_a,
        "count_b": m.count_b + m.count_b1,
        "count_c": m.count_c,
        "sync_fraction": m.sync_fraction,
        "mean_waiting": m.mean_waiting,
        "mean_latency": m.mean_latency,
        "mean_latency_minus_waiting": m.mean_latency_minus_waiting,
        "mean_max_workload": m.mean_max_workload,
        "final_max_workload": m.final_max,
    }


def _cmd_simulate(args) -> int:
    config = scenario_from_toml(args.config)
    metrics = run_simulation(
        config, _one_seed(config, args.seed),
        horizon=args.horizon, warmup=args.warmup,
    )
    _emit(json.dumps(_metrics_dict(metrics), indent=2, sort_keys=True), args.out)
    return 0


def _cmd_grid(args) -> int:
    grid = grid_from_toml(args.config)
    out = args.out or grid.output_path
    if out is None:
        raise ConfigurationError("grid needs --out or an output path in the TOML")
    run_grid(grid, workers=args.workers, out=out, deterministic=args.deterministic)
    print(f"wrote {out}")
    return 0


def _cmd_coupled(args) -> int:
    config = scenario_from_toml(args.config)
    seed = _one_seed(config, args.seed)
    if args.out:
        result = export_coupled_trace(
            config, seed, args.horizon, args.out, deterministic=args.deterministic,
        )
    else:
        result = run_coupled(
            config, seed, horizon=args.horizon, raise_on_violation=False,
        )
    summary = {
        "passed": result.passed,
        "n_events": result.n_events,
        "max_violations": result.max_violations,
        "gap_violations": result.gap_violations,
        "first_violation": result.first_violation,
        "mg1_final": result.mg1_final,
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0 if result.passed else 2


def _cmd_bounds(args) -> int:
    config = scenario_from_toml(args.config)
    import numpy as np
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    stab = sufficient_condition(config, rng=rng)
    payload = {
        "rho": stab.rho,
        "reduced_load": stab.reduced_load,
        "sufficient_stable": stab.sufficient_stable,
        "capacity_estimate": stab.capacity_estimate,
        "waiting_time_upper_bound": None,
        "latency_upper_bound": None,
    }
    if stab.sufficient_stable:
        payload["waiting_time_upper_bound"] = waiting_time_upper_bound(config, rng=rng)
        payload["latency_upper_bound"] = latency_upper_bound(config, rng=rng)
        params = mg1_params(config, rng=rng)
        payload["mg1"] = {
            "lambda": params.lambda_mg1,
            "mean_b": params.mean_b,
            "mean_b2": params.mean_b2,
            "expected_workload": mg1_expected_workload(params),
        }
    rep = sync_fraction_bound(config, rng=rng)
    payload["sync"] = {
        "assumption_ok": rep.assumption_ok,
        "sync_fraction_lower": rep.sync_fraction_lower,
        "e_tau1": rep.e_tau1,
        "e_tau2_upper": rep.e_tau2_upper,
        "e_jumps_upper": rep.e_jumps_upper,
        "e_upward_jumps": rep.e_upward_jumps,
        "surplus_used": rep.surplus_used,
    }
    _emit(json.dumps(payload, indent=2, sort_keys=True), args.out)
    return 0


def _cmd_scan(args) -> int:
    config = scenario_from_toml(args.config)
    lambdas = None
    if args.lambdas:
        try:
            lambdas = [float(v) for v in args.lambdas.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigurationError(f"bad --lambdas: {exc}") from exc
    bracket = tuple(args.bracket) if args.bracket else None
    result = stability_scan(
        config, lambdas=lambdas, bracket=bracket,
        horizon=args.horizon, workers=args.workers,
    )
    lines = []
    for v in result.verdicts:
        lines.append({
            "lambda_tested": v.lambda_tested,
            "verdict": v.verdict,
            "first_half_mean_max": v.first_half_mean_max,
            "second_half_mean_max": v.second_half_mean_max,
            "final_max": v.final_max,
        })
    if args.out:
        try:
            with open(args.out, "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=SCAN_COLUMNS)
                writer.writeheader()
                writer.writerows(lines)
        except OSError as exc:
            raise IOError(f"cannot write {args.out}: {exc}") from exc
    else:
        for row in lines:
            print("{lambda_tested:g}: {verdict} (halves {first_half_mean_max:.4g}"
                  " -> {second_half_mean_max:.4g}, final {final_max:.4g})".format(**row))
    print(f"capacity_estimate: {result.capacity_estimate}")
    print(f"analytical_capacity: {result.analytical_capacity}")
    if result.all_inconclusive:
        print("warning: every verdict was inconclusive; widen the rate range")
    return 0


def _cmd_renewal(args) -> int:
    x = x_spec_from_kind(args.x_kind)
    value = renewal_function(x, args.t)
    print(f"m({args.t:g}) = {value!r}")
    if args.mc:
        import numpy as np
        rng = np.random.default_rng(args.seed if args.seed is not None else 0)
        est, se = renewal_function_mc(x, args.t, n_samples=args.mc, rng=rng)
        print(f"mc({args.mc} paths) = {est!r} +- {se:.3g}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "grid": _cmd_grid,
    "coupled": _cmd_coupled,
    "bounds": _cmd_bounds,
    "scan": _cmd_scan,
    "renewal": _cmd_renewal,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigurationError, UnsupportedClosedFormError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DominanceViolation as exc:
        print(f"property violation: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
