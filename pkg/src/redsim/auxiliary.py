"""Auxiliary (frozen-drain) system and the coupled tri-system run.

The auxiliary system modifies the original three ways: servers drain
only while synchronized; every all-nonzero job lands on the d
highest-workload servers; and among mixed jobs only the bridge variant
(zeros on the top d-1 ordered servers, one nonzero requirement on the
lowest-workload server) is processed, the rest are ignored.  Its
workload gaps dominate the original's pathwise, and the maximum
original workload is dominated by a single-server queue fed with the
winning-replica requirement of every arrival.  run_coupled drives all
three processes off one marked stream and asserts both dominances at
every event.

The auxiliary state is kept sorted descending; its dynamics depend only
on ordered values, never on server identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import ConfigurationError, ScenarioConfig
from .simulate import SimMetrics, _resolve_windows
from .streams import (
    CODE_A,
    CODE_B1,
    CODE_B,
    EventStream,
    SeedLike,
    generate_coupled_stream,
)
from .workload import in_truncated_space, surplus

__all__ = [
    "AuxState",
    "CoupledTrace",
    "CoupledResult",
    "DominanceViolation",
    "aux_drain",
    "aux_apply_type_a",
    "aux_apply_type_b1",
    "run_auxiliary",
    "run_coupled",
]

# Allowance for the ordered-gap comparison only: both sides are sums and
# differences of identically generated quantities, and a representable
# ~1-ulp mismatch can appear when the two systems synchronize at
# different levels.  The max-vs-single-server comparison needs no slack
# (monotone rounding keeps it exact), so it gets none.
GAP_TOL_SCALE = 1e-9


class DominanceViolation(RuntimeError):
    """A pathwise dominance check failed; carries the offending event."""

    def __init__(self, message: str, event_index: int, time: float, detail: dict):
        super().__init__(message)
        self.event_index = event_index
        self.time = time
        self.detail = detail


@dataclass(frozen=True)
class AuxState:
    """Auxiliary workloads, sorted descending, plus the clock."""

    values: tuple
    clock: float = 0.0

    def __post_init__(self):
        vals = self.values
        if len(vals) == 0:
            raise ValueError("need at least one server")
        for i, w in enumerate(vals):
            if not w >= 0.0:
                raise ValueError(f"workloads must be nonnegative, got {w}")
            if i and vals[i - 1] < w:
                raise ValueError("values must be sorted descending")

    @classmethod
    def from_workloads(cls, workloads: Sequence[float], clock: float = 0.0) -> "AuxState":
        return cls(values=tuple(sorted(workloads, reverse=True)), clock=clock)

    @property
    def synchronized(self) -> bool:
        return self.values[0] == self.values[-1]


def aux_drain(state: AuxState, delta: float) -> AuxState:
    """Drain at unit rate if synchronized, else freeze; clock advances."""
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    if state.synchronized:
        new = tuple(w - delta if w > delta else 0.0 for w in state.values)
    else:
        new = state.values
    return AuxState(values=new, clock=state.clock + delta)


def aux_apply_type_a(state: AuxState, x_values: Sequence[float], scale: float) -> AuxState:
    """All-nonzero job forced onto the d = len(x_values) top servers.

    Each gains min(x)*scale, so the surplus rises by exactly
    (N - d) * min(x) * scale.  Requires the top d values equal, which
    holds whenever the initial state was in the truncated space; a
    violation means the caller broke the dynamics, not bad input.
    """
    d = len(x_values)
    if not 1 <= d <= len(state.values):
        raise ValueError(f"need 1 <= d <= {len(state.values)}, got {d}")
    if any(not x > 0 for x in x_values):
        raise ValueError(f"x values must be strictly positive, got {x_values}")
    vals = state.values
    if vals[0] != vals[d - 1]:
        raise RuntimeError(
            f"top-{d} values diverged ({vals}); truncated-space closure was broken"
        )
    jump = min(x_values) * scale
    return AuxState(values=tuple(w + jump for w in vals[:d]) + vals[d:], clock=state.clock)


def aux_apply_type_b1(state: AuxState, x_d: float, scale: float) -> AuxState:
    """Bridge job: the lowest server rises to min(max, its value + x_d*scale).

    The surplus drops by exactly min(max - min, x_d*scale).  The raised
    server can overtake middle servers, so the value is re-inserted to
    keep the descending order.
    """
    if not x_d > 0:
        raise ValueError(f"x_d must be strictly positive, got {x_d}")
    vals = list(state.values)
    bottom = vals.pop()
    v = bottom + x_d * scale
    if v > state.values[0]:
        v = state.values[0]
    i = len(vals)
    while i > 0 and vals[i - 1] < v:
        i -= 1
    vals.insert(i, v)
    return AuxState(values=tuple(vals), clock=state.clock)


def _initial_vector(config: ScenarioConfig, initial) -> list:
    if initial is None:
        initial = config.initial_state
    if initial is None:
        return [0.0] * config.num_servers
    if isinstance(initial, AuxState):
        initial = initial.values
    vec = [float(w) for w in initial]
    if len(vec) != config.num_servers:
        raise ConfigurationError(
            f"initial state has {len(vec)} entries for {config.num_servers} servers"
        )
    if any(w < 0 for w in vec):
        raise ConfigurationError("initial workloads must be nonnegative")
    if not in_truncated_space(vec, config.replicas):
        raise ConfigurationError(
            "initial state must have its top `replicas` order statistics equal"
        )
    return vec


def run_auxiliary(
    config: ScenarioConfig,
    stream: EventStream,
    initial=None,
    warmup: Optional[float] = None,
    sample_stride: int = 1,
) -> SimMetrics:
    """Run the auxiliary system alone over a coupled (marked) stream.

    Consumes only the A and B1 marks.  Time in synchronicity per
    interval is delta when synchronized at the interval start and zero
    otherwise; this is exact because a frozen state cannot change
    between events.
    """
    if not stream.coupled:
        raise ConfigurationError("run_auxiliary requires a coupled (marked) stream")
    h = stream.horizon
    _, warm = _resolve_windows(config, h, warmup)
    d = config.replicas
    vals = sorted(_initial_vector(config, initial), reverse=True)
    clock = 0.0
    in_sync = 0.0
    n_events = n_jobs = count_a = count_b1 = 0
    samples = []

    for times, codes, _, reqs in stream.blocks():
        tl = times.tolist()
        cl = codes.tolist()
        rl = reqs.tolist()
        for i in range(len(tl)):
            t = tl[i]
            delta = t - clock
            if vals[0] == vals[-1]:
                seg = t - (clock if clock > warm else warm)
                if seg > 0:
                    in_sync += seg
                vals = [w - delta if w > delta else 0.0 for w in vals]
            clock = t
            code = cl[i]
            n_events += 1
            if code == CODE_A:
                if vals[0] != vals[d - 1]:
                    raise RuntimeError("truncated-space closure broken in auxiliary run")
                req = rl[i]
                jump = min(req)
                for j in range(d):
                    vals[j] += jump
            elif code == CODE_B1:
                xk = rl[i][d - 1]
                bottom = vals.pop()
                v = bottom + xk
                if v > vals[0]:
                    v = vals[0]
                # re-insert keeping descending order
                j = len(vals)
                while j > 0 and vals[j - 1] < v:
                    j -= 1
                vals.insert(j, v)
            else:
                continue
            if t >= warm:
                n_jobs += 1
                if code == CODE_A:
                    count_a += 1
                else:
                    count_b1 += 1
                if n_jobs % sample_stride == 0:
                    samples.append(vals[0])

    if vals[0] == vals[-1]:
        seg = h - (clock if clock > warm else warm)
        if seg > 0:
            in_sync += seg
        delta = h - clock
        vals = [w - delta if w > delta else 0.0 for w in vals]

    return SimMetrics(
        total_time=h - warm,
        time_in_sync=in_sync,
        n_events=n_events,
        n_jobs=n_jobs,
        count_a=count_a,
        count_b1=count_b1,
        sum_waiting=0.0,
        sum_latency=0.0,
        sum_min_req=0.0,
        max_samples=np.array(samples),
        final_max=vals[0],
    )


@dataclass
class CoupledTrace:
    """Per-event snapshots of the three coupled processes.

    original holds the original system's workloads sorted descending,
    auxiliary the auxiliary values (already ordered); mg1 is the
    single-server bound workload.  Flags are True where the dominance
    checks passed.
    """

    times: np.ndarray
    original: np.ndarray
    auxiliary: np.ndarray
    mg1: np.ndarray
    surplus_original: np.ndarray
    surplus_auxiliary: np.ndarray
    max_ok: np.ndarray
    gap_ok: np.ndarray


@dataclass
class CoupledResult:
    """Outcome of a coupled run: pass/fail summary plus both systems' metrics."""

    passed: bool
    n_events: int
    max_violations: int
    gap_violations: int
    first_violation: Optional[dict]
    original: SimMetrics
    auxiliary: SimMetrics
    mg1_final: float
    trace: Optional[CoupledTrace] = None


def run_coupled(
    config: ScenarioConfig,
    seed: SeedLike,
    horizon: Optional[float] = None,
    initial=None,
    warmup: Optional[float] = None,
    record_trace: bool = False,
    raise_on_violation: bool = True,
    sample_stride: int = 1,
) -> CoupledResult:
    """Drive original, auxiliary, and single-server bound off one stream.

    Placement: all-nonzero jobs go to the event's uniformly sampled
    servers in the original and to the auxiliary's top-d servers; bridge
    events are mapped through each system's own current ordering (zeros
    on its top d-1 servers, the nonzero requirement on its bottom one);
    other mixed and all-zero jobs touch only the original.  The bound
    workload gains the job's minimum requirement at every arrival and
    drains at unit rate.

    After every event application: max(original) must not exceed the
    bound workload (exact comparison), and every auxiliary ordered gap
    must dominate the original's (up to GAP_TOL_SCALE rounding slack).
    A violation raises DominanceViolation unless raise_on_violation is
    False, in which case violations are counted and flagged in the
    trace.
    """
    h, warm = _resolve_windows(config, horizon, warmup)
    n = config.num_servers
    d = config.replicas
    start = _initial_vector(config, initial)
    omega = list(start)
    aux = sorted(start, reverse=True)
    v_mg1 = max(start)

    stream = generate_coupled_stream(config, seed, h)
    clock = 0.0
    orig_sync = aux_sync = 0.0
    n_events = 0
    orig_jobs = 0
    counts = [0, 0, 0, 0]
    sum_w = sum_t = sum_minb = 0.0
    orig_samples = []
    aux_samples = []
    aux_jobs = aux_count_a = aux_count_b1 = 0
    max_violations = gap_violations = 0
    first_violation = None
    rows_t, rows_o, rows_a, rows_v = [], [], [], []
    rows_so, rows_sa, rows_mok, rows_gok = [], [], [], []

    for times, codes, servers, reqs in stream.blocks():
        tl = times.tolist()
        cl = codes.tolist()
        sl = servers.tolist()
        rl = reqs.tolist()
        for i in range(len(tl)):
            t = tl[i]
            # --- interval [clock, t): accounting, then drains
            lo = clock if clock > warm else warm
            measured = t - lo
            delta = t - clock
            mx = max(omega)
            if mx == min(omega):
                if measured > 0:
                    orig_sync += measured
            else:
                # synchronizes only when fully drained, mx time units in
                sync_at = clock + mx
                if sync_at < lo:
                    sync_at = lo
                if t > sync_at:
                    orig_sync += t - sync_at
            for j in range(n):
                w = omega[j] - delta
                omega[j] = w if w > 0.0 else 0.0
            if aux[0] == aux[-1]:
                if measured > 0:
                    aux_sync += measured
                aux = [w - delta if w > delta else 0.0 for w in aux]
            v_mg1 = v_mg1 - delta if v_mg1 > delta else 0.0
            clock = t

            # --- event application
            code = cl[i]
            req = rl[i]
            if code == CODE_B1:
                order = sorted(range(n), key=lambda j: (-omega[j], j))
                srv = order[: d - 1] + [order[-1]]
            else:
                srv = sl[i]
            best = omega[srv[0]] + req[0]
            minb = req[0]
            for k in range(1, d):
                val = omega[srv[k]] + req[k]
                if val < best:
                    best = val
                b = req[k]
                if b < minb:
                    minb = b
            for s in srv:
                if best > omega[s]:
                    omega[s] = best
            if code == CODE_A:
                v_mg1 += minb
                if aux[0] != aux[d - 1]:
                    raise RuntimeError("truncated-space closure broken in auxiliary state")
                for j in range(d):
                    aux[j] += minb
            elif code == CODE_B1:
                xk = req[d - 1]
                bottom = aux.pop()
                val = bottom + xk
                if val > aux[0]:
                    val = aux[0]
                j = len(aux)
                while j > 0 and aux[j - 1] < val:
                    j -= 1
                aux.insert(j, val)

            n_events += 1
            if t >= warm:
                counts[code] += 1
                orig_jobs += 1
                sum_t += best
                sum_w += best - minb
                sum_minb += minb
                if orig_jobs % sample_stride == 0:
                    orig_samples.append(max(omega))
                if code == CODE_A or code == CODE_B1:
                    aux_jobs += 1
                    if code == CODE_A:
                        aux_count_a += 1
                    else:
                        aux_count_b1 += 1
                    if aux_jobs % sample_stride == 0:
                        aux_samples.append(aux[0])

            # --- dominance checks on the post-event snapshot
            ordered = sorted(omega, reverse=True)
            mx = ordered[0]
            ok_max = mx <= v_mg1
            tol = GAP_TOL_SCALE * (aux[0] if aux[0] > 1.0 else 1.0)
            ok_gap = True
            a0 = aux[0]
            for j in range(1, n):
                if a0 - aux[j] + tol < mx - ordered[j]:
                    ok_gap = False
                    break
            if not (ok_max and ok_gap):
                if not ok_max:
                    max_violations += 1
                if not ok_gap:
                    gap_violations += 1
                if first_violation is None:
                    first_violation = {
                        "event_index": n_events - 1,
                        "time": t,
                        "original": list(omega),
                        "auxiliary": list(aux),
                        "mg1": v_mg1,
                        "max_ok": ok_max,
                        "gap_ok": ok_gap,
                    }
                if raise_on_violation:
                    kind = "max-workload" if not ok_max else "ordered-gap"
                    raise DominanceViolation(
                        f"{kind} dominance violated at event {n_events - 1} (t={t:.6f})",
                        event_index=n_events - 1,
                        time=t,
                        detail=first_violation,
                    )
            if record_trace:
                rows_t.append(t)
                rows_o.append(ordered)
                rows_a.append(list(aux))
                rows_v.append(v_mg1)
                rows_so.append(surplus(omega))
                rows_sa.append(surplus(aux))
                rows_mok.append(ok_max)
                rows_gok.append(ok_gap)

    # tail segment [clock, horizon)
    delta = h - clock
    if delta > 0:
        lo = clock if clock > warm else warm
        measured = h - lo
        mx = max(omega)
        if mx == min(omega):
            if measured > 0:
                orig_sync += measured
        else:
            sync_at = clock + mx
            if sync_at < lo:
                sync_at = lo
            if h > sync_at:
                orig_sync += h - sync_at
        for j in range(n):
            w = omega[j] - delta
            omega[j] = w if w > 0.0 else 0.0
        if aux[0] == aux[-1]:
            if measured > 0:
                aux_sync += measured
            aux = [w - delta if w > delta else 0.0 for w in aux]
        v_mg1 = v_mg1 - delta if v_mg1 > delta else 0.0

    original = SimMetrics(
        total_time=h - warm,
        time_in_sync=orig_sync,
        n_events=n_events,
        n_jobs=orig_jobs,
        count_a=counts[0],
        count_b1=counts[1],
        count_b=counts[2],
        count_c=counts[3],
        sum_waiting=sum_w,
        sum_latency=sum_t,
        sum_min_req=sum_minb,
        max_samples=np.array(orig_samples),
        final_max=max(omega),
    )
    auxiliary = SimMetrics(
        total_time=h - warm,
        time_in_sync=aux_sync,
        n_events=n_events,
        n_jobs=aux_jobs,
        count_a=aux_count_a,
        count_b1=aux_count_b1,
        max_samples=np.array(aux_samples),
        final_max=aux[0],
    )
    trace = None
    if record_trace:
        trace = CoupledTrace(
            times=np.array(rows_t),
            original=np.array(rows_o) if rows_o else np.empty((0, n)),
            auxiliary=np.array(rows_a) if rows_a else np.empty((0, n)),
            mg1=np.array(rows_v),
            surplus_original=np.array(rows_so),
            surplus_auxiliary=np.array(rows_sa),
            max_ok=np.array(rows_mok, dtype=bool),
            gap_ok=np.array(rows_gok, dtype=bool),
        )
    return CoupledResult(
        passed=max_violations == 0 and gap_violations == 0,
        n_events=n_events,
        max_violations=max_violations,
        gap_violations=gap_violations,
        first_violation=first_violation,
        original=original,
        auxiliary=auxiliary,
        mg1_final=v_mg1,
        trace=trace,
    )
