"""Poisson arrival streams, plain and coupled.

A plain stream drives the original system: each event carries d distinct
uniformly sampled servers and d independent scaled Bernoulli
requirements.  A coupled stream additionally marks every event with a
job-type tag drawn by exact thinning (A / B1 / other-B / C at their
closed-form rates); B1 events carry an ordered-position placement
instead of concrete server indices, which each consuming system maps
through its own current workload ordering.

Streams are lazy and deterministic: regenerating from the same seed,
parameters, and horizon reproduces the exact same draws, because
generation follows a fixed chunking pattern.  Seeds may be plain 64-bit
integers or tuples (master, index, ...) for derived per-instance
sub-seeding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Union

import numpy as np

from .config import ConfigurationError, ScenarioConfig
from .service import ServiceSpec, b1_rate_factor, sample_x_array

__all__ = ["ArrivalEvent", "EventStream", "generate_stream", "generate_coupled_stream"]

# Type codes used in array blocks; tags index this tuple.
TYPE_TAGS = ("A", "B1", "B", "C")
CODE_A, CODE_B1, CODE_B, CODE_C = 0, 1, 2, 3

_TIME_CHUNK = 1 << 16
_BLOCK = 1 << 18

SeedLike = Union[int, tuple, np.random.SeedSequence]


def seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    """SeedSequence from an int or a (master, index, ...) derivation tuple."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, tuple):
        return np.random.SeedSequence(list(seed))
    return np.random.SeedSequence(seed)


@dataclass(frozen=True)
class ArrivalEvent:
    """One arrival: absolute time, type tag, placement, requirements.

    servers holds d distinct 0-based indices for uniform placement, or
    None for B1 events, whose requirements are given in ordered-position
    order (zeros for positions 1..d-1, the nonzero entry for position N).
    """

    time: float
    job_type: str
    servers: Optional[tuple]
    requirements: tuple


@dataclass(frozen=True)
class EventStream:
    """Lazily generated arrival sequence on [0, horizon).

    blocks() yields (times, type_codes, servers, requirements) numpy
    chunks for fast consumption; iterating yields ArrivalEvent objects.
    Both views are regenerated on demand and are bit-identical across
    regenerations.
    """

    rate: float
    num_servers: int
    replicas: int
    service: ServiceSpec
    seed: SeedLike
    horizon: float
    coupled: bool = False

    def _arrival_times(self, rng: np.random.Generator) -> np.ndarray:
        chunks = []
        t = 0.0
        while t < self.horizon:
            gaps = rng.standard_exponential(_TIME_CHUNK) / self.rate
            times = t + np.cumsum(gaps)
            chunks.append(times)
            t = times[-1]
        times = np.concatenate(chunks)
        return times[times < self.horizon]

    def blocks(self):
        """Yield (times, type_codes, servers, requirements) array chunks.

        times: float64[n]; type_codes: int8[n] indexing TYPE_TAGS;
        servers: int64[n, d] with -1 rows for B1 events; requirements:
        float64[n, d].  Chunking is fixed, so the concatenation of all
        chunks is deterministic in the seed.
        """
        rng = np.random.default_rng(seed_sequence(self.seed))
        times = self._arrival_times(rng)
        gen = self._coupled_block if self.coupled else self._plain_block
        for start in range(0, len(times), _BLOCK):
            tb = times[start:start + _BLOCK]
            codes, servers, reqs = gen(rng, len(tb))
            yield tb, codes, servers, reqs

    def _sample_servers(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # argsort of i.i.d. uniforms is a uniform random permutation;
        # its first d entries are a uniform ordered d-tuple without
        # replacement
        keys = rng.random((n, self.num_servers))
        return np.argsort(keys, axis=1)[:, : self.replicas]

    def _plain_block(self, rng, n):
        d = self.replicas
        spec = self.service
        servers = self._sample_servers(rng, n)
        zero = rng.random((n, d)) < spec.p_zero
        xs = sample_x_array(spec.x, rng, n * d).reshape(n, d)
        reqs = np.where(zero, 0.0, xs * spec.scale)
        nz = zero.sum(axis=1)
        codes = np.full(n, CODE_B, dtype=np.int8)
        codes[nz == 0] = CODE_A
        codes[nz == d] = CODE_C
        return codes, servers, reqs

    def _coupled_block(self, rng, n):
        d = self.replicas
        spec = self.service
        p = spec.p_zero
        p_a = (1.0 - p) ** d
        p_b1 = b1_rate_factor(spec, d, self.num_servers)
        p_c = p**d
        # thinning by cumulative boundaries: [A | B1 | other B | C]
        bounds_ = np.array([p_a, p_a + p_b1, 1.0 - p_c])
        codes = np.searchsorted(bounds_, rng.random(n), side="right").astype(np.int8)
        servers = self._sample_servers(rng, n)
        xs = sample_x_array(spec.x, rng, n * d).reshape(n, d)
        reqs = np.zeros((n, d))
        is_a = codes == CODE_A
        reqs[is_a] = xs[is_a] * spec.scale
        is_b1 = codes == CODE_B1
        servers[is_b1] = -1
        reqs[is_b1, d - 1] = xs[is_b1, d - 1] * spec.scale
        is_b = codes == CODE_B
        nb = int(is_b.sum())
        if nb:
            reqs[is_b] = self._other_b_requirements(rng, nb, xs[is_b])
        return codes, servers, reqs

    def _other_b_requirements(self, rng, nb, xs):
        """Mixed-pattern requirements: 1..d-1 zeros, binomial-conditional."""
        d = self.replicas
        p = self.service.p_zero
        # zero count z ~ Binomial(d, p) conditioned on 1 <= z <= d-1,
        # sampled by inverting the conditional CDF
        ks = range(1, d)
        pmf = np.array([math.comb(d, k) * p**k * (1.0 - p) ** (d - k) for k in ks])
        cdf = np.cumsum(pmf / pmf.sum())
        z = 1 + np.searchsorted(cdf, rng.random(nb), side="right")
        z = np.minimum(z, d - 1)
        # uniform choice of which z replicas are zero, via random ranks
        keys = rng.random((nb, d))
        order = np.argsort(keys, axis=1)
        ranks = np.empty_like(order)
        ranks[np.arange(nb)[:, None], order] = np.arange(d)[None, :]
        zero = ranks < z[:, None]
        return np.where(zero, 0.0, xs * self.service.scale)

    def __iter__(self) -> Iterator[ArrivalEvent]:
        for times, codes, servers, reqs in self.blocks():
            for i in range(len(times)):
                code = int(codes[i])
                yield ArrivalEvent(
                    time=float(times[i]),
                    job_type=TYPE_TAGS[code],
                    servers=None if code == CODE_B1 else tuple(int(s) for s in servers[i]),
                    requirements=tuple(float(b) for b in reqs[i]),
                )


def _stream(config: ScenarioConfig, seed: SeedLike, horizon, coupled: bool) -> EventStream:
    if config.num_servers < config.replicas:
        raise ConfigurationError("need num_servers >= replicas")
    return EventStream(
        rate=config.rate,
        num_servers=config.num_servers,
        replicas=config.replicas,
        service=config.service,
        seed=seed,
        horizon=config.horizon if horizon is None else float(horizon),
        coupled=coupled,
    )


def generate_stream(config: ScenarioConfig, seed: SeedLike, horizon=None) -> EventStream:
    """Arrival stream with uniform server samples and raw requirements."""
    return _stream(config, seed, horizon, coupled=False)


def generate_coupled_stream(config: ScenarioConfig, seed: SeedLike, horizon=None) -> EventStream:
    """Type-marked stream shared by the original and auxiliary systems."""
    return _stream(config, seed, horizon, coupled=True)
