#!/usr/bin/env python3
"""
Drift-detector stability scan around the analytical capacity
K^(d-1)/E[min X].  A geometric bracket search narrows the stable and
unstable sides; verdicts near the boundary come back inconclusive by
design rather than being forced.
"""
from redsim import ScenarioConfig, stability_scan

cfg = ScenarioConfig(num_servers=4, replicas=2, scale=50.0,
                     arrival_rate=1.0, horizon=1.0, seeds=(11,))

print("=" * 68)
print("STABILITY SCAN, N=4, d=2, K=50, X=1")
print("=" * 68)
print()

res = stability_scan(cfg, bracket=(20.0, 90.0), horizon=60_000.0)

print(f"{'lambda':>9} {'verdict':>14} {'1st half':>11} {'2nd half':>11} {'final':>10}")
print("-" * 68)
for v in sorted(res.verdicts, key=lambda v: v.lambda_tested):
    print(f"{v.lambda_tested:>9.2f} {v.verdict:>14} {v.first_half_mean_max:>11.1f} "
          f"{v.second_half_mean_max:>11.1f} {v.final_max:>10.1f}")

print()
print(f"capacity estimate:    {res.capacity_estimate}")
print(f"analytical capacity:  {res.analytical_capacity:g}")
print()
print("The halves are compared on the post-warmup max-workload samples:")
print("a second half at most 1.2x the first reads stable, at least 1.5x")
print("with a high final value reads unstable, anything else is left")
print("inconclusive.  The estimate is the midpoint of the tightest")
print("(stable, unstable) pair found.")
