"""Service-requirement distributions and job-type classification.

Replica service requirements follow a scaled Bernoulli law: a replica
needs X*K units of work with probability 1/K and zero work otherwise.
X is a strictly positive random variable with unit mean, K >= 1 is the
scale.  The zero probability p = 1 - 1/K makes every replica's mean
requirement equal to 1 regardless of scale, so K acts as a pure
variability knob.

Jobs replicate to d servers.  A job is type A when all d replicas have
nonzero requirements, type C when all are zero, and type B otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

X_KINDS = ("det1", "exp1", "unif02", "custom")


class DistributionContractError(ValueError):
    """A custom sampler broke its contract (non-positive draw or wrong mean)."""


@dataclass(frozen=True)
class XSpec:
    """The unit-mean, strictly positive X component of a service requirement.

    kind is one of "det1" (X == 1), "exp1" (unit-mean exponential),
    "unif02" (uniform on (0, 2]), or "custom".  Custom specs carry a
    sampler callable taking a numpy Generator and must declare mean 1;
    the declaration is checked statistically by validate_unit_mean.
    """

    kind: str
    sampler: Optional[Callable] = None
    declared_mean: float = 1.0

    def __post_init__(self):
        if self.kind not in X_KINDS:
            raise DistributionContractError(
                f"unknown X kind {self.kind!r}, expected one of {X_KINDS}")
        if self.kind == "custom" and self.sampler is None:
            raise DistributionContractError("custom XSpec requires a sampler")
        if self.kind != "custom" and self.sampler is not None:
            raise DistributionContractError(
                f"sampler only allowed for custom kind, not {self.kind!r}")
        if self.declared_mean != 1.0:
            raise DistributionContractError(
                "X must have unit mean (declared_mean must be 1.0)")

    @classmethod
    def deterministic1(cls) -> "XSpec":
        return cls("det1")

    @classmethod
    def exponential1(cls) -> "XSpec":
        return cls("exp1")

    @classmethod
    def uniform02(cls) -> "XSpec":
        return cls("unif02")

    @classmethod
    def custom(cls, sampler: Callable) -> "XSpec":
        return cls("custom", sampler=sampler)


@dataclass(frozen=True)
class ServiceSpec:
    """Scaled Bernoulli service requirement: X*scale w.p. 1/scale, else 0."""

    x: XSpec
    scale: float

    def __post_init__(self):
        if not self.scale >= 1.0:
            raise DistributionContractError(f"scale must be >= 1, got {self.scale}")

    @property
    def p_zero(self) -> float:
        """Probability of a zero requirement; derived, never stored."""
        return 1.0 - 1.0 / self.scale


def sample_x(xspec: XSpec, rng: np.random.Generator) -> float:
    """Draw one X value; strictly positive by construction."""
    if xspec.kind == "det1":
        return 1.0
    if xspec.kind == "exp1":
        x = rng.standard_exponential()
        while x == 0.0:
            x = rng.standard_exponential()
        return x
    if xspec.kind == "unif02":
        # 2*(1-u) with u in [0,1) lands in (0,2], never exactly 0
        return 2.0 * (1.0 - rng.random())
    x = float(xspec.sampler(rng))
    if not x > 0.0:
        raise DistributionContractError(
            f"custom sampler returned non-positive value {x}"
        )
    return x


def sample_x_array(xspec: XSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    """Vectorized sample_x; same distribution, bulk draws."""
    if xspec.kind == "det1":
        return np.ones(n)
    if xspec.kind == "exp1":
        xs = rng.standard_exponential(n)
        bad = xs == 0.0
        while bad.any():
            xs[bad] = rng.standard_exponential(int(bad.sum()))
            bad = xs == 0.0
        return xs
    if xspec.kind == "unif02":
        return 2.0 * (1.0 - rng.random(n))
    xs = np.array([float(xspec.sampler(rng)) for _ in range(n)])
    if not (xs > 0.0).all():
        raise DistributionContractError("custom sampler returned non-positive values")
    return xs


def validate_unit_mean(xspec: XSpec, rng: np.random.Generator, n: int = 100_000) -> None:
    """Statistically check that a custom sampler really has mean 1.

    Draws n samples and requires the sample mean to lie within 3 standard
    errors of 1.  Raises DistributionContractError otherwise.  Named kinds
    are analytically unit-mean and pass without sampling.
    """
    if xspec.kind != "custom":
        return
    xs = sample_x_array(xspec, rng, n)
    se = xs.std(ddof=1) / math.sqrt(n)
    if abs(xs.mean() - 1.0) > 3.0 * max(se, 1e-12):
        raise DistributionContractError(
            f"custom sampler mean {xs.mean():.6f} is not 1 within 3 SE ({se:.2e})"
        )


def sample_service(spec: ServiceSpec, rng: np.random.Generator) -> float:
    """Draw one scaled Bernoulli requirement: 0 w.p. 1-1/K, else X*K."""
    if rng.random() < spec.p_zero:
        return 0.0
    return sample_x(spec.x, rng) * spec.scale


def classify_job(requirements) -> str:
    """Tag a requirement vector: "A" all nonzero, "C" all zero, "B" mixed."""
    zeros = sum(1 for b in requirements if b == 0.0)
    if zeros == 0:
        return "A"
    if zeros == len(requirements):
        return "C"
    return "B"


def job_type_probabilities(spec: ServiceSpec, d: int) -> tuple[float, float, float]:
    """Exact (pA, pB, pC) for d replicas with i.i.d. scaled Bernoulli sizes.

    pA = (1-p)^d, pC = p^d, and pB is computed as the exact complement
    so the three always sum to 1.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    p = spec.p_zero
    p_a = (1.0 - p) ** d
    p_c = p**d
    p_b = 1.0 - (p_a + p_c)
    return p_a, p_b, p_c


def b1_rate_factor(spec: ServiceSpec, d: int, num_servers: int) -> float:
    """Probability that an arrival is a bridge job on ordered positions.

    A bridge job carries zero requirements on the d-1 highest-workload
    servers and one nonzero requirement on the lowest-workload server,
    in one specific ordered placement: probability
    (N-d)!/N! * (1-p) * p^(d-1).  Multiplied by the arrival rate this is
    the rate of surplus-reducing marked events.  Zero for d = 1, where no
    mixed jobs exist.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if num_servers < d:
        raise ValueError(f"need num_servers >= d, got {num_servers} < {d}")
    if d == 1:
        return 0.0
    p = spec.p_zero
    return (1.0 - p) * p ** (d - 1) / math.perm(num_servers, d)


def expected_min_x(xspec: XSpec, d: int, rng: Optional[np.random.Generator] = None,
                   n_samples: int = 1_000_000) -> float:
    """E[min of d i.i.d. X draws]; closed form for named kinds, MC for custom."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if xspec.kind == "det1":
        return 1.0
    if xspec.kind == "exp1":
        return 1.0 / d
    if xspec.kind == "unif02":
        return 2.0 / (d + 1)
    if rng is None:
        raise ValueError("custom XSpec needs an rng for Monte-Carlo estimation")
    est, _ = expected_min_x_mc(xspec, d, n_samples, rng)
    return est


def expected_min_sq_x(xspec: XSpec, d: int, rng: Optional[np.random.Generator] = None,
                      n_samples: int = 1_000_000) -> float:
    """E[(min of d i.i.d. X draws)^2]; closed form for named kinds."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if xspec.kind == "det1":
        return 1.0
    if xspec.kind == "exp1":
        # min of d unit exponentials is Exp(d): second moment 2/d^2
        return 2.0 / d**2
    if xspec.kind == "unif02":
        # min of d Unif(0,2): density (d/2)(1-x/2)^(d-1), second moment
        # 8/((d+1)(d+2))
        return 8.0 / ((d + 1) * (d + 2))
    if rng is None:
        raise ValueError("custom XSpec needs an rng for Monte-Carlo estimation")
    mins = sample_x_array(xspec, rng, n_samples * d).reshape(n_samples, d).min(axis=1)
    return float((mins**2).mean())


def expected_min_x_mc(xspec: XSpec, d: int, n_samples: int,
                      rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo (estimate, standard error) of E[min of d X draws]."""
    mins = sample_x_array(xspec, rng, n_samples * d).reshape(n_samples, d).min(axis=1)
    return float(mins.mean()), float(mins.std(ddof=1) / math.sqrt(n_samples))


def expected_min_service(spec: ServiceSpec, d: int,
                         rng: Optional[np.random.Generator] = None) -> float:
    """E[min of d replica requirements] = E[min X] * K^(1-d).

    Only all-nonzero jobs contribute: probability K^-d, conditional mean
    E[min X]*K.
    """
    return expected_min_x(spec.x, d, rng=rng) * spec.scale ** (1 - d)
