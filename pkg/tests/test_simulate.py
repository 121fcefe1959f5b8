"""End-to-end behaviour of the event-driven original-system simulator."""

import math

import numpy as np
import pytest

from redsim.config import ConfigurationError, ScenarioConfig
from redsim.service import XSpec
from redsim.simulate import SimMetrics, run_simulation, time_to_first_sync


def cfg(**kw):
    args = dict(num_servers=4, replicas=2, scale=10.0, arrival_rate=5.0, horizon=200.0)
    args.update(kw)
    return ScenarioConfig(**args)


class TestDeterminism:
    def test_same_seed_same_metrics(self):
        a = run_simulation(cfg(), 5)
        b = run_simulation(cfg(), 5)
        assert a.sum_waiting == b.sum_waiting
        assert a.n_events == b.n_events
        assert a.time_in_sync == b.time_in_sync
        assert np.array_equal(a.max_samples, b.max_samples)

    def test_different_seeds_differ(self):
        a = run_simulation(cfg(), 5)
        b = run_simulation(cfg(), 6)
        assert a.sum_waiting != b.sum_waiting


class TestAccounting:
    def test_latency_splits_into_waiting_plus_service(self):
        m = run_simulation(cfg(), 7)
        assert m.sum_latency == pytest.approx(m.sum_waiting + m.sum_min_req, rel=1e-12)

    def test_counts_partition_jobs(self):
        m = run_simulation(cfg(), 8)
        assert m.count_a + m.count_b + m.count_b1 + m.count_c == m.n_jobs
        assert m.n_jobs <= m.n_events

    def test_warmup_drops_early_jobs(self):
        full = run_simulation(cfg(), 9, warmup=0.0)
        cut = run_simulation(cfg(), 9, warmup=100.0)
        assert cut.n_jobs < full.n_jobs
        assert cut.n_events == full.n_events
        assert cut.total_time == 100.0

    def test_sample_stride_thins_samples(self):
        m1 = run_simulation(cfg(), 10, sample_stride=1)
        m4 = run_simulation(cfg(), 10, sample_stride=4)
        assert len(m1.max_samples) == m1.n_jobs
        assert len(m4.max_samples) == m1.n_jobs // 4
        assert np.array_equal(m1.max_samples[3::4], m4.max_samples)


class TestSynchronicity:
    def test_n_equals_d_always_synchronized(self):
        m = run_simulation(cfg(num_servers=2, replicas=2), 11)
        assert m.sync_fraction == 1.0

    def test_drain_only_sync_split(self):
        # two servers, no arrivals in the window: (3,1) drains to (0,0)
        # at t=3, so exactly 2 of 5 time units are synchronized
        c = cfg(num_servers=2, replicas=1, arrival_rate=1e-9, horizon=5.0, warmup=0.0)
        m = run_simulation(c, 12, initial=(3.0, 1.0))
        assert m.n_events == 0
        assert m.time_in_sync == 2.0
        assert m.final_max == 0.0

    def test_synchronized_initial_state_drains_in_sync(self):
        c = cfg(arrival_rate=1e-9, horizon=4.0, warmup=0.0,
                initial_state=(5.0, 5.0, 5.0, 5.0))
        m = run_simulation(c, 13)
        assert m.time_in_sync == 4.0
        assert m.final_max == 1.0


class TestStability:
    def test_overloaded_single_server_grows(self):
        # d=1, N=1 is a plain M/G/1; at load 1.5 the workload ramps
        c = cfg(num_servers=1, replicas=1, arrival_rate=1.5, horizon=20_000.0)
        m = run_simulation(c, 14)
        half = len(m.max_samples) // 2
        first = m.max_samples[:half].mean()
        second = m.max_samples[half:].mean()
        assert second > 2.0 * first
        assert m.final_max > 10.0 * c.scale

    def test_underloaded_single_server_settles(self):
        c = cfg(num_servers=1, replicas=1, arrival_rate=0.5, horizon=20_000.0)
        m = run_simulation(c, 15)
        half = len(m.max_samples) // 2
        first = m.max_samples[:half].mean()
        second = m.max_samples[half:].mean()
        assert second < 1.5 * first
        assert m.final_max < 10.0 * c.scale


class TestInitialState:
    def test_bad_initial_rejected(self):
        with pytest.raises(ConfigurationError):
            run_simulation(cfg(), 16, initial=(1.0, 2.0))

    def test_config_initial_state_used(self):
        c = cfg(arrival_rate=1e-9, horizon=1.0, warmup=0.0,
                initial_state=(9.0, 9.0, 2.0, 0.0))
        m = run_simulation(c, 17)
        assert m.final_max == 8.0


class TestMerge:
    def test_merge_pools_jobs_and_time(self):
        parts = [run_simulation(cfg(), s) for s in (20, 21, 22)]
        merged = SimMetrics.merge(parts)
        assert merged.n_jobs == sum(p.n_jobs for p in parts)
        assert merged.total_time == pytest.approx(sum(p.total_time for p in parts))
        assert merged.sum_waiting == pytest.approx(sum(p.sum_waiting for p in parts))
        lo = min(p.mean_waiting for p in parts)
        hi = max(p.mean_waiting for p in parts)
        assert lo <= merged.mean_waiting <= hi
        assert merged.final_max == max(p.final_max for p in parts)


class TestTimeToFirstSync:
    def test_starts_synchronized(self):
        assert time_to_first_sync(cfg(), 30) == 0.0

    def test_pure_drain_hits_zero_together(self):
        c = cfg(num_servers=2, replicas=1, arrival_rate=1e-9, horizon=10.0)
        assert time_to_first_sync(c, 31, initial=(3.0, 1.0)) == 3.0

    def test_none_when_horizon_too_short(self):
        c = cfg(num_servers=2, replicas=1, arrival_rate=1e-9, horizon=2.0)
        assert time_to_first_sync(c, 32, initial=(3.0, 1.0)) is None

    def test_accepts_non_truncated_start(self):
        # settle-time measurement allows starts outside the plateau space
        c = cfg(num_servers=3, replicas=2, arrival_rate=5.0, horizon=500.0)
        t = time_to_first_sync(c, 33, initial=(4.0, 2.0, 1.0))
        assert t is not None and t > 0.0
