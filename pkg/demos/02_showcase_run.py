"""One layered showcase run, end to end.

Six RSU regions on a 2x3 road grid, 1200 vehicles, tasks placed by each
vehicle's local twin (serve on-device, hand off to a neighbor, or offload to
the covering edge), edges fusing reports every 5 s and the cloud evolving
policy blueprints every 30 s epoch.
"""
import sys
from collections import Counter

from twinsim import ScenarioConfig, run_showcase
from twinsim.metrics import summarize

cfg = ScenarioConfig(seed=0, duration_s=120.0)
out = sys.argv[1] if len(sys.argv) > 1 else None
res = run_showcase(cfg, outdir=out)

print(f"simulated {cfg.duration_s:.0f} s in {res.wall_time_s:.1f} s wall time")
print(f"tasks: generated={res.generated} completed={res.completed} "
      f"dropped={res.dropped} in_flight={res.in_flight}")

stats = summarize(res.records)
print(f"\nresponse time: median {stats['median_us'] / 1000:.2f} ms, "
      f"p95 {stats['p95_us'] / 1000:.2f} ms, IQR {stats['iqr_us'] / 1000:.2f} ms")
print("served per tier:")
for tier, count in stats["tier_counts"].items():
    share = count / max(1, stats["n_completed"])
    print(f"  {tier:<12} {count:>7}  ({share:6.1%})")

print("\nautonomy index per 10 s window (fraction completed below the cloud):")
print("  " + " ".join(f"{a:.2f}" for a in res.series.autonomy))

decisions = Counter(rec.decision for rec in res.epoch_records)
print(f"\nepoch decisions across {len(res.epoch_records)} region-epochs: "
      f"{dict(decisions)}")
if out:
    print(f"\nartifacts written to {out}/ (tasks.csv, indices.csv, epochs.jsonl)")
