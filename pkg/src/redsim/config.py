"""Scenario configuration shared by the simulators, bounds, and CLI."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .service import ServiceSpec, X_KINDS, XSpec
from .workload import in_truncated_space


class ConfigurationError(ValueError):
    """Invalid or inconsistent scenario parameters."""


_X_BY_KIND = {
    "det1": XSpec.deterministic1,
    "exp1": XSpec.exponential1,
    "unif02": XSpec.uniform02,
}


def x_spec_from_kind(kind: str) -> XSpec:
    """Build a named XSpec; custom kinds need an explicit XSpec instead."""
    if kind not in _X_BY_KIND:
        raise ConfigurationError(
            f"unknown x kind {kind!r}; expected one of {sorted(_X_BY_KIND)} "
            "(custom distributions must be passed as an XSpec object)"
        )
    return _X_BY_KIND[kind]()


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulation scenario.

    Exactly one of arrival_rate and arrival_rate_over_scale must be set;
    the latter expresses the load convention where the rate scales with
    K.  warmup defaults to 10% of the horizon and is excluded from every
    time average.  initial_state, when given, must have the top
    `replicas` order statistics equal (the truncated state space), which
    the coupled dominance run requires; None means start empty.
    """

    num_servers: int
    replicas: int
    scale: float
    arrival_rate: Optional[float] = None
    arrival_rate_over_scale: Optional[float] = None
    x: XSpec = field(default_factory=XSpec.deterministic1)
    horizon: float = 10_000.0
    warmup: Optional[float] = None
    seeds: Sequence[int] = (12345,)
    initial_state: Optional[Sequence[float]] = None

    def __post_init__(self):
        if not (isinstance(self.num_servers, int) and self.num_servers >= 1):
            raise ConfigurationError(f"num_servers must be an integer >= 1, got {self.num_servers}")
        if not (isinstance(self.replicas, int) and 1 <= self.replicas <= self.num_servers):
            raise ConfigurationError(
                f"replicas must be an integer in 1..num_servers, got {self.replicas}"
            )
        if not self.scale >= 1.0:
            raise ConfigurationError(f"scale must be >= 1, got {self.scale}")
        if (self.arrival_rate is None) == (self.arrival_rate_over_scale is None):
            raise ConfigurationError(
                "set exactly one of arrival_rate and arrival_rate_over_scale"
            )
        if self.arrival_rate is not None and not self.arrival_rate > 0:
            raise ConfigurationError(f"arrival_rate must be > 0, got {self.arrival_rate}")
        if self.arrival_rate_over_scale is not None and not self.arrival_rate_over_scale > 0:
            raise ConfigurationError(
                f"arrival_rate_over_scale must be > 0, got {self.arrival_rate_over_scale}"
            )
        if not isinstance(self.x, XSpec):
            raise ConfigurationError(f"x must be an XSpec, got {type(self.x).__name__}")
        if not self.horizon > 0:
            raise ConfigurationError(f"horizon must be > 0, got {self.horizon}")
        if self.warmup is not None and not (0 <= self.warmup < self.horizon):
            raise ConfigurationError(
                f"warmup must lie in [0, horizon), got {self.warmup}"
            )
        if len(self.seeds) == 0:
            raise ConfigurationError("seeds must be non-empty")
        for s in self.seeds:
            if not isinstance(s, int) or not 0 <= s < 2**64:
                raise ConfigurationError(f"seeds must be 64-bit integers, got {s!r}")
        if self.initial_state is not None:
            st = tuple(float(w) for w in self.initial_state)
            if len(st) != self.num_servers:
                raise ConfigurationError(
                    f"initial_state has {len(st)} entries for {self.num_servers} servers"
                )
            if any(w < 0 for w in st):
                raise ConfigurationError("initial_state entries must be nonnegative")
            if not in_truncated_space(st, self.replicas):
                raise ConfigurationError(
                    "initial_state must have its top `replicas` order statistics equal"
                )
            object.__setattr__(self, "initial_state", st)

    @property
    def rate(self) -> float:
        """The effective arrival rate, whichever way it was specified."""
        if self.arrival_rate is not None:
            return self.arrival_rate
        return self.arrival_rate_over_scale * self.scale

    @property
    def service(self) -> ServiceSpec:
        return ServiceSpec(x=self.x, scale=self.scale)

    @property
    def warmup_time(self) -> float:
        return 0.1 * self.horizon if self.warmup is None else self.warmup

    def with_(self, **kwargs) -> "ScenarioConfig":
        """Copy with fields replaced (arrival specification swaps cleanly)."""
        if "arrival_rate" in kwargs and "arrival_rate_over_scale" not in kwargs:
            kwargs.setdefault("arrival_rate_over_scale", None)
        if "arrival_rate_over_scale" in kwargs and "arrival_rate" not in kwargs:
            kwargs.setdefault("arrival_rate", None)
        return replace(self, **kwargs)


def config_from_mapping(data: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed TOML/JSON scenario table."""
    known = {
        "num_servers", "replicas", "scale", "arrival_rate",
        "arrival_rate_over_scale", "x_kind", "horizon", "warmup",
        "seeds", "initial_state",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"unknown scenario fields: {sorted(unknown)}")
    kwargs = dict(data)
    kind = kwargs.pop("x_kind", "det1")
    kwargs["x"] = x_spec_from_kind(kind)
    if "seeds" in kwargs:
        kwargs["seeds"] = tuple(int(s) for s in kwargs["seeds"])
    for key in ("scale", "arrival_rate", "arrival_rate_over_scale", "horizon", "warmup"):
        if kwargs.get(key) is not None:
            kwargs[key] = float(kwargs[key])
    try:
        return ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc
