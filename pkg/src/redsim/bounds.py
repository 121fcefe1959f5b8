"""Closed-form analysis: stability, single-server workload bounds,
renewal functions, and the synchronicity-fraction lower bound.

Everything here is a pure function of the scenario parameters.  The
single-server comparison queue has arrival rate lambda/K^d (the
all-nonzero jobs) and service requirement min{X_1..X_d}*K; its
Pollaczek-Khinchine mean workload upper-bounds the mean waiting time of
the redundancy system.  The synchronicity bound combines the expected
synchronized spell K^d/lambda with a renewal-theoretic bound on the
expected desynchronized spell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .config import ScenarioConfig
from .service import XSpec, expected_min_sq_x, expected_min_x, sample_x_array

__all__ = [
    "StabilityReport",
    "Mg1Params",
    "BoundReport",
    "UnsupportedClosedFormError",
    "SearchBoundExceeded",
    "sufficient_condition",
    "mg1_params",
    "mg1_expected_workload",
    "waiting_time_upper_bound",
    "latency_upper_bound",
    "latency_upper_bound_loose",
    "renewal_function",
    "renewal_function_mc",
    "expected_jumps_bound",
    "sync_fraction_bound",
    "find_k_epsilon",
]


class UnsupportedClosedFormError(ValueError):
    """No closed form exists for this distribution; use the MC estimator."""


class SearchBoundExceeded(RuntimeError):
    """A bounded parameter search ran out of room."""


@dataclass(frozen=True)
class StabilityReport:
    """Sufficient stability condition in both of its equivalent forms.

    rho is lambda * E[min requirement]; reduced_load is the same number
    computed as lambda * E[min X] / K^(d-1).  They agree to machine
    precision for every scaled Bernoulli configuration.
    """

    rho: float
    reduced_load: float
    sufficient_stable: bool
    capacity_estimate: float


@dataclass(frozen=True)
class Mg1Params:
    """Arrival rate and first two service moments of the bound queue."""

    lambda_mg1: float
    mean_b: float
    mean_b2: float

    def __post_init__(self):
        if self.lambda_mg1 < 0:
            raise ValueError(f"lambda_mg1 must be >= 0, got {self.lambda_mg1}")
        if self.mean_b2 < self.mean_b**2:
            raise ValueError(
                f"mean_b2 {self.mean_b2} below mean_b^2 {self.mean_b**2}; not a distribution"
            )


@dataclass(frozen=True)
class BoundReport:
    """Synchronicity-fraction lower bound and its ingredients.

    e_tau1 is the expected synchronized spell K^d/lambda.  e_tau2_upper
    bounds the desynchronized spell started from surplus_used; it and
    the fraction are None when assumption_ok is False, since the chain
    then proves nothing.  surplus_used defaults to the mean post-jump
    surplus (N-d)*E[min X]*K, a reporting convention: the underlying
    inequality is valid for any starting surplus the caller passes.
    e_jumps_upper bounds the bridge jobs needed to absorb surplus_used;
    e_upward_jumps is the implied mean number of upward jumps during the
    desynchronized spell.
    """

    e_tau1: float
    e_tau2_upper: Optional[float]
    assumption_ok: bool
    sync_fraction_lower: Optional[float]
    e_jumps_upper: float
    e_upward_jumps: Optional[float]
    surplus_used: float


def sufficient_condition(config: ScenarioConfig,
                         rng: Optional[np.random.Generator] = None) -> StabilityReport:
    """Load under the winning-replica service law; stable when below 1."""
    lam = config.rate
    d = config.replicas
    k = config.scale
    e_min_x = expected_min_x(config.x, d, rng=rng)
    e_min_b = e_min_x * k ** (1 - d)
    rho = lam * e_min_b
    reduced = lam * e_min_x / k ** (d - 1)
    return StabilityReport(
        rho=rho,
        reduced_load=reduced,
        sufficient_stable=rho < 1.0,
        capacity_estimate=k ** (d - 1) / e_min_x,
    )


def mg1_params(config: ScenarioConfig, rng: Optional[np.random.Generator] = None) -> Mg1Params:
    """Bound-queue parameters: thinned arrivals, winning-replica service."""
    d = config.replicas
    k = config.scale
    return Mg1Params(
        lambda_mg1=config.rate / k**d,
        mean_b=expected_min_x(config.x, d, rng=rng) * k,
        mean_b2=expected_min_sq_x(config.x, d, rng=rng) * k**2,
    )


def mg1_expected_workload(params: Mg1Params) -> float:
    """Pollaczek-Khinchine mean stationary workload."""
    rho = params.lambda_mg1 * params.mean_b
    if rho >= 1.0:
        raise ValueError(f"unstable parameters: utilization {rho} >= 1")
    return params.lambda_mg1 * params.mean_b2 / (2.0 * (1.0 - rho))


def waiting_time_upper_bound(config: ScenarioConfig,
                             rng: Optional[np.random.Generator] = None) -> float:
    """Mean-waiting-time upper bound: the bound queue's P-K workload."""
    return mg1_expected_workload(mg1_params(config, rng=rng))


def latency_upper_bound(config: ScenarioConfig,
                        rng: Optional[np.random.Generator] = None) -> float:
    """Waiting bound plus the exact mean winning-replica requirement."""
    gap = expected_min_x(config.x, config.replicas, rng=rng) * config.scale ** (1 - config.replicas)
    return waiting_time_upper_bound(config, rng=rng) + gap


def latency_upper_bound_loose(config: ScenarioConfig,
                              rng: Optional[np.random.Generator] = None) -> float:
    """Looser variant using E[min requirement] <= 1."""
    return waiting_time_upper_bound(config, rng=rng) + 1.0


def renewal_function(xspec: XSpec, t: float) -> float:
    """Expected renewal count m(t) = E[max{n: X_1 + ... + X_n <= t}].

    Closed forms: point mass at 1 gives floor(t); unit exponential gives
    t; uniform on (0,2] gives the alternating series
    m(t) + 1 = sum_{i=0}^{floor(t/2)} (-1)^i (t/2-i)^i / i! * e^(t/2-i),
    summed in compensated arithmetic.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if xspec.kind == "det1":
        return float(math.floor(t))
    if xspec.kind == "exp1":
        return float(t)
    if xspec.kind == "unif02":
        half = t / 2.0
        terms = []
        for i in range(math.floor(half) + 1):
            base = half - i
            terms.append((-1.0) ** i * base**i / math.factorial(i) * math.exp(base))
        return math.fsum(terms) - 1.0
    raise UnsupportedClosedFormError(
        "no closed-form renewal function for custom distributions; "
        "use renewal_function_mc"
    )


def renewal_function_mc(xspec: XSpec, t: float, n_samples: int,
                        rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo (estimate, standard error) of the renewal count at t.

    Simulates n_samples independent partial-sum paths, drawing in rounds
    until every path exceeds t.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    counts = np.zeros(n_samples)
    sums = np.zeros(n_samples)
    active = np.ones(n_samples, dtype=bool)
    while active.any():
        idx = np.flatnonzero(active)
        sums[idx] += sample_x_array(xspec, rng, len(idx))
        still = sums[idx] <= t
        counts[idx[still]] += 1
        active[idx[~still]] = False
    if n_samples == 1:
        return float(counts[0]), 0.0
    return float(counts.mean()), float(counts.std(ddof=1) / math.sqrt(n_samples))


def _renewal_value(xspec: XSpec, t: float, rng, n_samples: int = 100_000) -> float:
    if xspec.kind != "custom":
        return renewal_function(xspec, t)
    if rng is None:
        raise UnsupportedClosedFormError(
            "custom distribution: pass an rng for Monte-Carlo renewal estimation"
        )
    return renewal_function_mc(xspec, t, n_samples, rng)[0]


def expected_jumps_bound(config: ScenarioConfig, surplus_value: float,
                         rng: Optional[np.random.Generator] = None) -> float:
    """Upper bound (N-d)(m(surplus/K) + 1) on bridge jobs to resynchronize.

    Holds with equality when surplus/K is not an integer; for integer
    ratios it can overcount by at most one renewal per server.
    """
    if surplus_value < 0:
        raise ValueError(f"surplus must be >= 0, got {surplus_value}")
    n, d = config.num_servers, config.replicas
    if n == d:
        return 0.0
    m = _renewal_value(config.x, surplus_value / config.scale, rng)
    return (n - d) * (m + 1.0)


def sync_fraction_bound(config: ScenarioConfig,
                        surplus_value: Optional[float] = None,
                        rng: Optional[np.random.Generator] = None) -> BoundReport:
    """Lower bound on the long-run fraction of time in synchronicity.

    The synchronized spell has mean exactly K^d/lambda.  The
    desynchronized spell is bounded through the bridge-job renewal
    argument, which needs the assumption
    (N-d-1)!/N! (1-1/K)^(d-1) > (m(E[min X]) + 1)/K^(d-1); when it
    fails the report says so instead of raising.  surplus_value sets the
    starting surplus for the spell bound and defaults to the mean
    post-jump surplus (N-d)*E[min X]*K.  With N = d the system never
    leaves synchronicity and the fraction is exactly 1.
    """
    n, d = config.num_servers, config.replicas
    k = config.scale
    lam = config.rate
    e_tau1 = k**d / lam
    if n == d:
        return BoundReport(
            e_tau1=e_tau1,
            e_tau2_upper=0.0,
            assumption_ok=True,
            sync_fraction_lower=1.0,
            e_jumps_upper=0.0,
            e_upward_jumps=0.0,
            surplus_used=0.0,
        )
    e_min_x = expected_min_x(config.x, d, rng=rng)
    if surplus_value is None:
        surplus_value = (n - d) * e_min_x * k
    e_jumps = expected_jumps_bound(config, surplus_value, rng=rng)
    m_mean = _renewal_value(config.x, e_min_x, rng)
    lhs = math.factorial(n - d - 1) / math.factorial(n) * (1.0 - 1.0 / k) ** (d - 1)
    rhs = (m_mean + 1.0) / k ** (d - 1)
    if not lhs > rhs:
        return BoundReport(
            e_tau1=e_tau1,
            e_tau2_upper=None,
            assumption_ok=False,
            sync_fraction_lower=None,
            e_jumps_upper=e_jumps,
            e_upward_jumps=None,
            surplus_used=surplus_value,
        )
    denom = (
        math.factorial(n - d) / math.factorial(n) * (lam / k) * (1.0 - 1.0 / k) ** (d - 1)
        - (n - d) * (m_mean + 1.0) * lam / k**d
    )
    e_tau2 = e_jumps / denom
    return BoundReport(
        e_tau1=e_tau1,
        e_tau2_upper=e_tau2,
        assumption_ok=True,
        sync_fraction_lower=e_tau1 / (e_tau1 + e_tau2),
        e_jumps_upper=e_jumps,
        e_upward_jumps=e_tau2 * lam / k**d,
        surplus_used=surplus_value,
    )


def find_k_epsilon(
    num_servers: int,
    replicas: int,
    x: XSpec,
    epsilon: float,
    lambda_rule: Optional[Callable[[float], float]] = None,
    k_max: float = 1e9,
) -> float:
    """Smallest scale K at which the synchronicity bound reaches 1 - epsilon.

    Searches integers geometrically, then bisects down to 3 significant
    digits, returning a K whose bound is valid (assumption holds) and at
    least 1 - epsilon.  The fraction's monotonicity in K is checked over
    every evaluated point rather than assumed.  lambda_rule gives the
    arrival rate as a function of K; the fraction is scale-free in the
    rate (it cancels), so the rule only needs to be positive.

    With N = d the fraction is identically 1 and K = 1 works.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if num_servers == replicas:
        return 1.0
    if lambda_rule is None:
        lambda_rule = lambda k: k

    seen = {}

    def fraction(k: float) -> Optional[float]:
        if k not in seen:
            cfg = ScenarioConfig(
                num_servers=num_servers,
                replicas=replicas,
                scale=k,
                arrival_rate=float(lambda_rule(k)),
                x=x,
            )
            rep = sync_fraction_bound(cfg)
            seen[k] = rep.sync_fraction_lower if rep.assumption_ok else None
        return seen[k]

    def good(k: float) -> bool:
        f = fraction(k)
        return f is not None and f >= 1.0 - epsilon

    hi = 1.0
    while not good(hi):
        hi *= 2.0
        if hi > k_max:
            raise SearchBoundExceeded(
                f"no scale K <= {k_max:g} reaches a bound of {1 - epsilon}"
            )
    lo = hi / 2.0
    # integer narrowing, then real bisection to 3 significant digits
    ilo, ihi = math.floor(lo), math.ceil(hi)
    while ihi - ilo > 1:
        mid = (ilo + ihi) // 2
        if good(float(mid)):
            ihi = mid
        else:
            ilo = mid
    lo, hi = float(ilo), float(ihi)
    while hi > 1.0 and (hi - max(lo, 1.0)) / hi > 1e-3:
        mid = (max(lo, 1.0) + hi) / 2.0
        if good(mid):
            hi = mid
        else:
            lo = mid
    # verify monotonicity over everything we evaluated
    pts = sorted(k for k, f in seen.items() if f is not None)
    for a, b in zip(pts, pts[1:]):
        if seen[b] < seen[a] - 1e-12:
            raise RuntimeError(
                f"bound not monotone over searched range: f({a})={seen[a]} > f({b})={seen[b]}"
            )
    return hi
