"""Workload vector state and the cancel-on-completion arrival recursion.

A state is the vector of per-server workloads: the time each FCFS server
needs to clear its backlog if no further work arrives.  Servers drain at
unit rate.  An arriving job places one replica on each of d sampled
servers; the replica on the server with the smallest workload-plus-
requirement finishes first and the others are cancelled, so every
sampled server's workload rises to that common completion time (never
beyond it, never below its own backlog).

Synchronicity means all workloads are equal; the empty state counts.
The surplus is the total distance below the maximum, zero exactly when
synchronized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .service import classify_job

__all__ = [
    "WorkloadState",
    "JobOutcome",
    "drain",
    "apply_arrival",
    "surplus",
    "is_synchronized",
    "sync_time_in_interval",
    "in_truncated_space",
    "ordered_indices",
]


@dataclass(frozen=True)
class WorkloadState:
    """Per-server workloads plus the simulation clock."""

    omega: tuple
    clock: float = 0.0

    def __post_init__(self):
        if len(self.omega) == 0:
            raise ValueError("need at least one server")
        for w in self.omega:
            if not (w >= 0.0 and w < float("inf")):
                raise ValueError(f"workloads must be nonnegative and finite, got {w}")

    @classmethod
    def empty(cls, num_servers: int) -> "WorkloadState":
        return cls(omega=(0.0,) * num_servers)


@dataclass(frozen=True)
class JobOutcome:
    """Completion record for one job.

    latency is the sojourn time T (from arrival to first replica
    completion), waiting is W = T minus the winning replica's
    requirement, so T = W + min requirement holds exactly.
    """

    latency: float
    waiting: float
    completing_server: int
    job_type: str


StateLike = Union[WorkloadState, Sequence[float]]


def _values(state: StateLike):
    if isinstance(state, WorkloadState):
        return state.omega
    return state


def drain(state: WorkloadState, delta: float) -> WorkloadState:
    """Advance time by delta with all servers working at unit rate."""
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    new = tuple(w - delta if w > delta else 0.0 for w in state.omega)
    return WorkloadState(omega=new, clock=state.clock + delta)


def apply_arrival(state: WorkloadState, servers, reqs) -> tuple:
    """Place one job's d replicas and resolve the winning replica.

    servers: d distinct 0-based indices; reqs: d nonnegative requirements
    aligned with servers.  The completion time is
    T = min_j(omega[s_j] + b_j); every sampled server's workload becomes
    max(T, current), unsampled servers are untouched.  Returns the new
    state and the JobOutcome with W = T - min_j b_j.

    Ties for the winning replica go to the lowest server index.
    """
    omega = state.omega
    n = len(omega)
    if len(servers) != len(reqs):
        raise ValueError(
            f"{len(servers)} servers for {len(reqs)} requirements")
    if len(set(servers)) != len(servers):
        raise ValueError(f"duplicate server indices: {servers}")
    best_t = None
    best_server = -1
    min_req = None
    for s, b in zip(servers, reqs):
        if s < 0 or s >= n:
            raise ValueError(f"server index {s} out of range 0..{n - 1}")
        if b < 0:
            raise ValueError(f"negative requirement {b}")
        t = omega[s] + b
        if best_t is None or t < best_t or (t == best_t and s < best_server):
            best_t = t
            best_server = s
        if min_req is None or b < min_req:
            min_req = b
    new = list(omega)
    for s in servers:
        if best_t > new[s]:
            new[s] = best_t
    outcome = JobOutcome(
        latency=best_t,
        waiting=best_t - min_req,
        completing_server=best_server,
        job_type=classify_job(reqs),
    )
    return WorkloadState(omega=tuple(new), clock=state.clock), outcome


def surplus(state: StateLike) -> float:
    """Total workload gap below the maximum: sum_i (max - omega_i)."""
    omega = _values(state)
    mx = max(omega)
    return sum(mx - w for w in omega)


def is_synchronized(state: StateLike) -> bool:
    """True iff all workloads are exactly equal (the empty state counts).

    Equality is exact: equal values only arise by assignment of the same
    completion time or by clamping at zero, and uniform drain preserves
    them, so no tolerance is needed or wanted.
    """
    omega = _values(state)
    return max(omega) == min(omega)


def sync_time_in_interval(state: StateLike, delta: float) -> float:
    """Time spent synchronized during [0, delta) of pure draining.

    The state argument is the configuration at the interval start.  Gaps
    between positive workloads are drain-invariant, so a desynchronized
    state synchronizes mid-interval only by draining empty: that happens
    max-workload time units in, hence max(0, delta - max).
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    omega = _values(state)
    mx = max(omega)
    if mx == min(omega):
        return delta
    left = delta - mx
    return left if left > 0.0 else 0.0


def in_truncated_space(state: StateLike, d: int) -> bool:
    """True iff the top d order statistics are exactly equal.

    This region is absorbing: once the d largest workloads coincide they
    stay coincident under every drain and arrival.
    """
    omega = _values(state)
    if not 1 <= d <= len(omega):
        raise ValueError(f"d must be in 1..{len(omega)}, got {d}")
    top = sorted(omega, reverse=True)
    return top[0] == top[d - 1]


def ordered_indices(state: StateLike):
    """Server indices sorted by descending workload, ties by ascending index.

    Position 0 is (a) maximum-workload server, position N-1 the minimum;
    this is the ordering used to materialize "ordered server" placements.
    """
    omega = _values(state)
    return sorted(range(len(omega)), key=lambda i: (-omega[i], i))
