"""Event-driven simulation of the original redundancy system.

Between arrivals every server drains at unit rate (closed form, no time
grid); at each arrival the cancel-on-completion recursion updates the
sampled servers.  Time in synchronicity is integrated exactly per
interval: gaps between positive workloads are drain-invariant, so a
desynchronized interval contributes only the part after the maximum
workload hits zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import ConfigurationError, ScenarioConfig
from .streams import SeedLike, generate_stream

__all__ = ["SimMetrics", "run_simulation", "time_to_first_sync"]


@dataclass
class SimMetrics:
    """Aggregated outputs of one run (or a merge of runs).

    Time averages cover [warmup, horizon) only; job statistics cover
    jobs arriving at or after the warmup cutoff.  max_samples holds the
    post-arrival maximum workload at (possibly strided) arrival epochs.
    """

    total_time: float = 0.0
    time_in_sync: float = 0.0
    n_events: int = 0
    n_jobs: int = 0
    count_a: int = 0
    count_b: int = 0
    count_b1: int = 0
    count_c: int = 0
    sum_waiting: float = 0.0
    sum_latency: float = 0.0
    sum_min_req: float = 0.0
    max_samples: np.ndarray = field(default_factory=lambda: np.empty(0))
    final_max: float = 0.0

    @property
    def sync_fraction(self) -> float:
        return self.time_in_sync / self.total_time if self.total_time > 0 else float("nan")

    @property
    def mean_waiting(self) -> float:
        return self.sum_waiting / self.n_jobs if self.n_jobs else float("nan")

    @property
    def mean_latency(self) -> float:
        return self.sum_latency / self.n_jobs if self.n_jobs else float("nan")

    @property
    def mean_latency_minus_waiting(self) -> float:
        return self.sum_min_req / self.n_jobs if self.n_jobs else float("nan")

    @property
    def mean_max_workload(self) -> float:
        return float(self.max_samples.mean()) if len(self.max_samples) else float("nan")

    @staticmethod
    def merge(parts: Sequence["SimMetrics"]) -> "SimMetrics":
        """Combine runs; counts and times add, so means stay weighted.

        Associative and order-insensitive for every mean; final_max
        becomes the worst final state across the parts.
        """
        out = SimMetrics()
        arrays = []
        for m in parts:
            out.total_time += m.total_time
            out.time_in_sync += m.time_in_sync
            out.n_events += m.n_events
            out.n_jobs += m.n_jobs
            out.count_a += m.count_a
            out.count_b += m.count_b
            out.count_b1 += m.count_b1
            out.count_c += m.count_c
            out.sum_waiting += m.sum_waiting
            out.sum_latency += m.sum_latency
            out.sum_min_req += m.sum_min_req
            out.final_max = max(out.final_max, m.final_max)
            arrays.append(m.max_samples)
        out.max_samples = np.concatenate(arrays) if arrays else np.empty(0)
        return out


def _resolve_windows(config: ScenarioConfig, horizon, warmup):
    h = config.horizon if horizon is None else float(horizon)
    if warmup is not None:
        w = float(warmup)
    elif horizon is None and config.warmup is not None:
        w = config.warmup
    else:
        w = 0.1 * h
    if not 0 <= w < h:
        raise ConfigurationError(f"warmup {w} must lie in [0, horizon {h})")
    return h, w


def run_simulation(
    config: ScenarioConfig,
    seed: SeedLike,
    horizon: Optional[float] = None,
    warmup: Optional[float] = None,
    sample_stride: int = 1,
    initial: Optional[Sequence[float]] = None,
) -> SimMetrics:
    """Simulate one seed of the original system and aggregate metrics.

    Deterministic in (config, seed, horizon): the event stream is
    regenerated from the seed, and the loop itself draws nothing.
    sample_stride keeps every k-th max-workload sample to bound memory
    on long runs.
    """
    h, warm = _resolve_windows(config, horizon, warmup)
    if sample_stride < 1:
        raise ConfigurationError("sample_stride must be >= 1")
    n = config.num_servers
    start = initial if initial is not None else config.initial_state
    omega = [float(w) for w in start] if start is not None else [0.0] * n
    if len(omega) != n:
        raise ConfigurationError(f"initial state has {len(omega)} entries for {n} servers")

    stream = generate_stream(config, seed, h)
    rng_idx = range(n)
    clock = 0.0
    in_sync = 0.0
    n_events = n_jobs = 0
    counts = [0, 0, 0, 0]  # A, B1, B, C per stream type codes
    sum_w = sum_t = sum_minb = 0.0
    samples = []

    for times, codes, servers, reqs in stream.blocks():
        tl = times.tolist()
        cl = codes.tolist()
        sl = servers.tolist()
        rl = reqs.tolist()
        for i in range(len(tl)):
            t = tl[i]
            if t > warm:
                if clock < warm:
                    adv = warm - clock
                    for j in rng_idx:
                        w = omega[j] - adv
                        omega[j] = w if w > 0.0 else 0.0
                    clock = warm
                delta = t - clock
                mx = max(omega)
                if mx == min(omega):
                    in_sync += delta
                elif delta > mx:
                    in_sync += delta - mx
                for j in rng_idx:
                    w = omega[j] - delta
                    omega[j] = w if w > 0.0 else 0.0
            else:
                delta = t - clock
                for j in rng_idx:
                    w = omega[j] - delta
                    omega[j] = w if w > 0.0 else 0.0
            clock = t

            srv = sl[i]
            req = rl[i]
            best = omega[srv[0]] + req[0]
            minb = req[0]
            for k in range(1, len(srv)):
                v = omega[srv[k]] + req[k]
                if v < best:
                    best = v
                b = req[k]
                if b < minb:
                    minb = b
            for s in srv:
                if best > omega[s]:
                    omega[s] = best
            n_events += 1
            if t >= warm:
                counts[cl[i]] += 1
                n_jobs += 1
                sum_t += best
                sum_w += best - minb
                sum_minb += minb
                if n_jobs % sample_stride == 0:
                    samples.append(max(omega))

    # tail segment [clock, horizon)
    if clock < warm:
        adv = warm - clock
        for j in rng_idx:
            w = omega[j] - adv
            omega[j] = w if w > 0.0 else 0.0
        clock = warm
    delta = h - clock
    if delta > 0:
        mx = max(omega)
        if mx == min(omega):
            in_sync += delta
        elif delta > mx:
            in_sync += delta - mx
        for j in rng_idx:
            w = omega[j] - delta
            omega[j] = w if w > 0.0 else 0.0

    return SimMetrics(
        total_time=h - warm,
        time_in_sync=in_sync,
        n_events=n_events,
        n_jobs=n_jobs,
        count_a=counts[0],
        count_b1=counts[1],
        count_b=counts[2],
        count_c=counts[3],
        sum_waiting=sum_w,
        sum_latency=sum_t,
        sum_min_req=sum_minb,
        max_samples=np.array(samples),
        final_max=max(omega),
    )


def time_to_first_sync(
    config: ScenarioConfig,
    seed: SeedLike,
    horizon: Optional[float] = None,
    initial: Optional[Sequence[float]] = None,
) -> Optional[float]:
    """First instant all workloads are equal, or None within the horizon.

    Supports arbitrary (not necessarily truncated-space) starting
    states; useful for measuring the settle time before a measurement
    window begins.
    """
    h = config.horizon if horizon is None else float(horizon)
    start = initial if initial is not None else config.initial_state
    omega = [float(w) for w in start] if start is not None else [0.0] * config.num_servers
    clock = 0.0
    stream = generate_stream(config, seed, h)
    for event in stream:
        mx = max(omega)
        if mx == min(omega):
            return clock
        delta = event.time - clock
        if mx < delta:
            return clock + mx
        omega = [max(w - delta, 0.0) for w in omega]
        clock = event.time
        best = min(omega[s] + b for s, b in zip(event.servers, event.requirements))
        for s in event.servers:
            if best > omega[s]:
                omega[s] = best
    mx = max(omega)
    if mx == min(omega):
        return clock
    if mx < h - clock:
        return clock + mx
    return None
