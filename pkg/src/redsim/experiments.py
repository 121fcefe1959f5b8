"""Experiment orchestration: grids, stability scans, trace export.

Scenario and grid files are TOML; results are CSV with a fixed column
order so downstream plotting never guesses.  Every (cell, seed) pair
derives its own sub-seed from (seed, cell_index), which makes grid
output independent of execution order and worker count.
"""

from __future__ import annotations

import csv
import datetime
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .auxiliary import run_coupled
from .bounds import (
    mg1_expected_workload,
    mg1_params,
    sufficient_condition,
    sync_fraction_bound,
    waiting_time_upper_bound,
    latency_upper_bound,
)
from .config import ConfigurationError, ScenarioConfig, config_from_mapping
from .simulate import SimMetrics, run_simulation

__all__ = [
    "GridSpec",
    "StabilityVerdict",
    "ScanResult",
    "run_grid",
    "stability_scan",
    "verdict",
    "export_coupled_trace",
    "preset",
    "PRESET_NAMES",
    "load_toml",
    "scenario_from_toml",
    "grid_from_toml",
    "GRID_COLUMNS",
    "TRACE_COLUMNS",
]

GRID_COLUMNS = [
    "cell_index", "kind", "seed",
    "num_servers", "replicas", "scale", "arrival_rate",
    "arrival_rate_over_scale", "x_kind", "horizon", "warmup",
    "n_events", "n_jobs", "count_a", "count_b", "count_c",
    "sync_fraction", "mean_w", "mean_t", "mean_t_minus_w",
    "mean_max_workload", "final_max_workload",
    "rho", "sufficient_stable", "waiting_bound", "latency_bound",
    "sync_fraction_lower",
    "ci_sync_fraction", "ci_mean_w", "ci_mean_t", "ci_mean_t_minus_w",
]

TRACE_COLUMNS = [
    "time", "surplus_original", "surplus_auxiliary",
    "max_workload", "mg1_workload", "max_ok", "gap_ok",
]

SCAN_COLUMNS = [
    "lambda_tested", "verdict", "first_half_mean_max",
    "second_half_mean_max", "final_max",
]


@dataclass(frozen=True)
class GridSpec:
    """A base scenario plus sweep lists; the cells are their product.

    Sweepable: num_servers, scale, arrival_rate_over_scale (the load
    form, so swept rates track the scale instead of staying absolute).
    """

    base: ScenarioConfig
    num_servers: Optional[Sequence[int]] = None
    scale: Optional[Sequence[float]] = None
    arrival_rate_over_scale: Optional[Sequence[float]] = None
    output_path: Optional[str] = None
    preset_tag: str = ""

    def cells(self):
        ns = list(self.num_servers) if self.num_servers else [self.base.num_servers]
        ks = list(self.scale) if self.scale else [self.base.scale]
        if self.arrival_rate_over_scale:
            loads = list(self.arrival_rate_over_scale)
        elif self.base.arrival_rate_over_scale is not None:
            loads = [self.base.arrival_rate_over_scale]
        else:
            loads = [None]
        out = []
        for n in ns:
            for k in ks:
                for load in loads:
                    cfg = self.base.with_(num_servers=int(n), scale=float(k))
                    if load is not None:
                        cfg = cfg.with_(arrival_rate_over_scale=float(load))
                    out.append(cfg)
        return out


@dataclass(frozen=True)
class StabilityVerdict:
    """Drift-detector outcome for one tested arrival rate."""

    lambda_tested: float
    verdict: str  # "stable" | "unstable" | "inconclusive"
    first_half_mean_max: float
    second_half_mean_max: float
    final_max: float


@dataclass
class ScanResult:
    """Verdicts over a rate grid plus the implied capacity estimate."""

    verdicts: list
    capacity_estimate: Optional[float]
    analytical_capacity: float
    all_inconclusive: bool


def _auto_stride(config: ScenarioConfig, horizon: float, cap: int = 200_000) -> int:
    expected = config.rate * horizon
    return max(1, int(expected // cap))


def _cell_seed(seed: int, cell_index: int) -> tuple:
    return (seed, cell_index)


def _x_kind(config: ScenarioConfig) -> str:
    return config.x.kind


def _bound_columns(config: ScenarioConfig) -> dict:
    # Custom requirement laws have no closed-form min moments; a fixed
    # generator keeps the Monte Carlo bound columns reproducible.
    rng = np.random.default_rng(0) if config.x.kind == "custom" else None
    stab = sufficient_condition(config, rng=rng)
    cols = {
        "rho": stab.rho,
        "sufficient_stable": stab.sufficient_stable,
        "waiting_bound": "",
        "latency_bound": "",
        "sync_fraction_lower": "",
    }
    if stab.sufficient_stable:
        cols["waiting_bound"] = waiting_time_upper_bound(config, rng=rng)
        cols["latency_bound"] = latency_upper_bound(config, rng=rng)
    rep = sync_fraction_bound(config, rng=rng)
    if rep.assumption_ok:
        cols["sync_fraction_lower"] = rep.sync_fraction_lower
    return cols


def _grid_task(args):
    config, cell_index, seed = args
    stride = _auto_stride(config, config.horizon)
    metrics = run_simulation(config, _cell_seed(seed, cell_index), sample_stride=stride)
    return cell_index, seed, metrics


def _seed_row(config: ScenarioConfig, cell_index, seed, metrics: SimMetrics, bound_cols) -> dict:
    return {
        "cell_index": cell_index,
        "kind": "seed",
        "seed": seed,
        "num_servers": config.num_servers,
        "replicas": config.replicas,
        "scale": config.scale,
        "arrival_rate": config.rate,
        "arrival_rate_over_scale": (
            "" if config.arrival_rate_over_scale is None else config.arrival_rate_over_scale
        ),
        "x_kind": _x_kind(config),
        "horizon": config.horizon,
        "warmup": config.warmup_time,
        "n_events": metrics.n_events,
        "n_jobs": metrics.n_jobs,
        "count_a": metrics.count_a,
        "count_b": metrics.count_b + metrics.count_b1,
        "count_c": metrics.count_c,
        "sync_fraction": metrics.sync_fraction,
        "mean_w": metrics.mean_waiting,
        "mean_t": metrics.mean_latency,
        "mean_t_minus_w": metrics.mean_latency_minus_waiting,
        "mean_max_workload": metrics.mean_max_workload,
        "final_max_workload": metrics.final_max,
        **bound_cols,
        "ci_sync_fraction": "",
        "ci_mean_w": "",
        "ci_mean_t": "",
        "ci_mean_t_minus_w": "",
    }


def _ci95(values) -> float:
    if len(values) < 2:
        return float("nan")
    arr = np.asarray(values, dtype=float)
    return float(1.96 * arr.std(ddof=1) / math.sqrt(len(arr)))


def _aggregate_row(config, cell_index, seed_rows, bound_cols) -> dict:
    def mean_of(key):
        return float(np.mean([r[key] for r in seed_rows]))

    def ci_of(key):
        c = _ci95([r[key] for r in seed_rows])
        return "" if math.isnan(c) else c

    row = dict(seed_rows[0])
    row.update({
        "kind": "aggregate",
        "seed": "",
        "n_events": sum(r["n_events"] for r in seed_rows),
        "n_jobs": sum(r["n_jobs"] for r in seed_rows),
        "count_a": sum(r["count_a"] for r in seed_rows),
        "count_b": sum(r["count_b"] for r in seed_rows),
        "count_c": sum(r["count_c"] for r in seed_rows),
        "sync_fraction": mean_of("sync_fraction"),
        "mean_w": mean_of("mean_w"),
        "mean_t": mean_of("mean_t"),
        "mean_t_minus_w": mean_of("mean_t_minus_w"),
        "mean_max_workload": mean_of("mean_max_workload"),
        "final_max_workload": max(r["final_max_workload"] for r in seed_rows),
        "ci_sync_fraction": ci_of("sync_fraction"),
        "ci_mean_w": ci_of("mean_w"),
        "ci_mean_t": ci_of("mean_t"),
        "ci_mean_t_minus_w": ci_of("mean_t_minus_w"),
        **bound_cols,
    })
    return row


def run_grid(
    grid: GridSpec,
    workers: int = 1,
    out: Optional[str] = None,
    deterministic: bool = False,
) -> list:
    """Run every (cell, seed) pair and return the CSV rows as dicts.

    One row per (cell, seed) plus one aggregate row per cell carrying
    seed means and 95% confidence half-widths.  Rows come back sorted by
    (cell_index, kind, seed), so output is reproducible regardless of
    worker scheduling.  Writes CSV when an output path is given here or
    on the grid.
    """
    cells = grid.cells()
    seeds = list(grid.base.seeds)
    tasks = [
        (cfg, ci, seed)
        for ci, cfg in enumerate(cells)
        for seed in seeds
    ]
    if workers > 1:
        for cfg in cells:
            if cfg.x.kind == "custom":
                raise ConfigurationError(
                    "custom samplers are not picklable; run grids with workers=1"
                )
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_grid_task, tasks, chunksize=1))
    else:
        results = [_grid_task(t) for t in tasks]

    by_cell = {}
    for cell_index, seed, metrics in results:
        by_cell.setdefault(cell_index, []).append((seed, metrics))

    rows = []
    for cell_index, cfg in enumerate(cells):
        bound_cols = _bound_columns(cfg)
        pairs = sorted(by_cell.get(cell_index, ()), key=lambda p: seeds.index(p[0]))
        seed_rows = [
            _seed_row(cfg, cell_index, seed, metrics, bound_cols)
            for seed, metrics in pairs
        ]
        rows.extend(seed_rows)
        rows.append(_aggregate_row(cfg, cell_index, seed_rows, bound_cols))

    path = out or grid.output_path
    if path:
        _write_csv(path, GRID_COLUMNS, rows, deterministic)
    return rows


def _write_csv(path, columns, rows, deterministic):
    try:
        with open(path, "w", newline="") as fh:
            if not deterministic:
                fh.write(f"# generated {datetime.datetime.now().isoformat()}\n")
            writer = csv.DictWriter(fh, fieldnames=columns)
            writer.writeheader()
            for row in rows:
                writer.writerow({c: row.get(c, "") for c in columns})
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def verdict(
    max_samples,
    scale: float,
    lambda_tested: float = float("nan"),
    expected_mg1_mean: Optional[float] = None,
) -> StabilityVerdict:
    """Drift detector over post-warmup max-workload samples.

    Stable: second-half mean at most 1.2x the first-half mean AND the
    final sample below 10*scale*max(1, expected stationary mean).
    Unstable: second-half mean at least 1.5x the first AND the final
    sample above 10*scale.  Everything else is inconclusive, which is
    the expected answer near the boundary.
    """
    samples = np.asarray(max_samples, dtype=float)
    if len(samples) < 10_000:
        raise ValueError(f"need at least 10^4 samples, got {len(samples)}")
    half = len(samples) // 2
    m1 = float(samples[:half].mean())
    m2 = float(samples[half:].mean())
    final = float(samples[-1])
    cap = 10.0 * scale * max(1.0, expected_mg1_mean if expected_mg1_mean else 1.0)
    if m2 <= 1.2 * m1 and final <= cap:
        tag = "stable"
    elif m2 >= 1.5 * m1 and final > 10.0 * scale:
        tag = "unstable"
    else:
        tag = "inconclusive"
    return StabilityVerdict(
        lambda_tested=lambda_tested,
        verdict=tag,
        first_half_mean_max=m1,
        second_half_mean_max=m2,
        final_max=final,
    )


def _scan_task(args):
    config, lam, index, horizon = args
    cfg = config.with_(arrival_rate=float(lam))
    if horizon is not None:
        cfg = cfg.with_(horizon=float(horizon))
    stride = _auto_stride(cfg, cfg.horizon)
    metrics = run_simulation(cfg, (cfg.seeds[0], index), sample_stride=stride)
    rng = np.random.default_rng(0) if cfg.x.kind == "custom" else None
    stab = sufficient_condition(cfg, rng=rng)
    expected = None
    if stab.sufficient_stable:
        expected = mg1_expected_workload(mg1_params(cfg, rng=rng))
    return verdict(metrics.max_samples, cfg.scale, lam, expected)


def stability_scan(
    config: ScenarioConfig,
    lambdas: Optional[Sequence[float]] = None,
    bracket: Optional[tuple] = None,
    horizon: Optional[float] = None,
    workers: int = 1,
) -> ScanResult:
    """Test arrival rates for stability and estimate the capacity.

    Give either an explicit rate grid or a (low, high) bracket that is
    refined by bisection.  The capacity estimate is the midpoint of the
    tightest (stable, unstable) pair; all-inconclusive scans report no
    estimate.  The analytical capacity K^(d-1)/E[min X] rides along for
    comparison.
    """
    if (lambdas is None) == (bracket is None):
        raise ConfigurationError("give exactly one of lambdas and bracket")
    rng = np.random.default_rng(0) if config.x.kind == "custom" else None
    analytical = sufficient_condition(
        config.with_(arrival_rate=1.0), rng=rng
    ).capacity_estimate

    verdicts = []
    if lambdas is not None:
        lams = sorted(float(v) for v in lambdas)
        tasks = [(config, lam, i, horizon) for i, lam in enumerate(lams)]
        if workers > 1 and config.x.kind != "custom":
            with ProcessPoolExecutor(max_workers=workers) as pool:
                verdicts = list(pool.map(_scan_task, tasks, chunksize=1))
        else:
            verdicts = [_scan_task(t) for t in tasks]
    else:
        lo, hi = float(bracket[0]), float(bracket[1])
        if not 0 < lo < hi:
            raise ConfigurationError(f"bad bracket ({lo}, {hi})")
        index = 0
        cache = {}

        def probe(lam):
            nonlocal index
            if lam not in cache:
                cache[lam] = _scan_task((config, lam, index, horizon))
                index += 1
            return cache[lam]

        v_lo, v_hi = probe(lo), probe(hi)
        if v_lo.verdict != "stable" or v_hi.verdict != "unstable":
            raise ConfigurationError(
                "bracket must run from a stable rate to an unstable one; got "
                f"{v_lo.verdict} at {lo} and {v_hi.verdict} at {hi}"
            )
        while hi / lo > 1.15:
            mid = math.sqrt(lo * hi)
            v = probe(mid)
            if v.verdict == "stable":
                lo = mid
            elif v.verdict == "unstable":
                hi = mid
            else:
                break
        verdicts = [cache[k] for k in sorted(cache)]

    stables = [v.lambda_tested for v in verdicts if v.verdict == "stable"]
    unstables = [v.lambda_tested for v in verdicts if v.verdict == "unstable"]
    capacity = None
    best = None
    for s in stables:
        ups = [u for u in unstables if u > s]
        if ups:
            u = min(ups)
            if best is None or u - s < best:
                best = u - s
                capacity = (s + u) / 2.0
    return ScanResult(
        verdicts=verdicts,
        capacity_estimate=capacity,
        analytical_capacity=analytical,
        all_inconclusive=all(v.verdict == "inconclusive" for v in verdicts),
    )


def export_coupled_trace(
    config: ScenarioConfig,
    seed,
    horizon: Optional[float],
    path: str,
    deterministic: bool = False,
):
    """Run a coupled execution and write its per-event trace as CSV.

    Columns: time, both surpluses, the original maximum, the bound
    workload, and the two dominance flags.  Violations are recorded in
    the flags rather than raised, and the returned result summarizes
    them for the caller's exit code.
    """
    result = run_coupled(
        config, seed, horizon=horizon, warmup=0.0,
        record_trace=True, raise_on_violation=False,
    )
    trace = result.trace
    rows = [
        {
            "time": trace.times[i],
            "surplus_original": trace.surplus_original[i],
            "surplus_auxiliary": trace.surplus_auxiliary[i],
            "max_workload": trace.original[i][0] if trace.original.size else "",
            "mg1_workload": trace.mg1[i],
            "max_ok": bool(trace.max_ok[i]),
            "gap_ok": bool(trace.gap_ok[i]),
        }
        for i in range(len(trace.times))
    ]
    _write_csv(path, TRACE_COLUMNS, rows, deterministic)
    return result


PRESET_NAMES = ("fig2", "fig3", "fig4", "fig5")


def preset(name: str, seeds: Sequence[int] = tuple(range(1, 9))) -> GridSpec:
    """Canned experiment setups, addressable by name from grid TOML files.

    fig2: one coupled-trace scenario (N=8, d=2, K=100, rate 50).
    fig3: sync fraction vs K for N in {2,4,8}, loads 0.5 and 0.9.
    fig4: the same sweep, read for mean waiting time vs its bound.
    fig5: latency-minus-waiting gap vs K in {20,50,100} at load 0.5.
    """
    seeds = tuple(int(s) for s in seeds)
    if name == "fig2":
        base = ScenarioConfig(
            num_servers=8, replicas=2, scale=100.0, arrival_rate=50.0,
            horizon=200.0, warmup=0.0, seeds=seeds,
        )
        return GridSpec(base=base, preset_tag="fig2")
    if name in ("fig3", "fig4"):
        base = ScenarioConfig(
            num_servers=2, replicas=2, scale=10.0, arrival_rate_over_scale=0.5,
            horizon=2_000.0, seeds=seeds,
        )
        return GridSpec(
            base=base,
            num_servers=[2, 4, 8],
            scale=[10.0, 20.0, 50.0, 100.0, 200.0],
            arrival_rate_over_scale=[0.5, 0.9],
            preset_tag=name,
        )
    if name == "fig5":
        base = ScenarioConfig(
            num_servers=2, replicas=2, scale=20.0, arrival_rate_over_scale=0.5,
            horizon=2_000.0, seeds=seeds,
        )
        return GridSpec(
            base=base,
            num_servers=[2, 4, 8],
            scale=[20.0, 50.0, 100.0],
            arrival_rate_over_scale=[0.5],
            preset_tag="fig5",
        )
    raise ConfigurationError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")


def load_toml(path: str) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"bad TOML in {path}: {exc}") from exc


def scenario_from_toml(path: str) -> ScenarioConfig:
    """Load the [scenario] table of a TOML file."""
    data = load_toml(path)
    if "scenario" not in data:
        raise ConfigurationError(f"{path} has no [scenario] table")
    return config_from_mapping(data["scenario"])


def grid_from_toml(path: str) -> GridSpec:
    """Load [scenario] plus optional [grid] sweeps, or a grid preset."""
    data = load_toml(path)
    grid_data = dict(data.get("grid", {}))
    preset_name = grid_data.pop("preset", None)
    if preset_name:
        spec = preset(preset_name)
        if "output" in grid_data:
            spec = GridSpec(
                base=spec.base,
                num_servers=spec.num_servers,
                scale=spec.scale,
                arrival_rate_over_scale=spec.arrival_rate_over_scale,
                output_path=grid_data["output"],
                preset_tag=spec.preset_tag,
            )
        return spec
    base = scenario_from_toml(path)
    known = {"num_servers", "scale", "arrival_rate_over_scale", "output"}
    unknown = set(grid_data) - known
    if unknown:
        raise ConfigurationError(f"unknown grid fields: {sorted(unknown)}")
    return GridSpec(
        base=base,
        num_servers=grid_data.get("num_servers"),
        scale=grid_data.get("scale"),
        arrival_rate_over_scale=grid_data.get("arrival_rate_over_scale"),
        output_path=grid_data.get("output"),
    )
