"""The adversarial wait chain, hop by hop.

A chain where the initiating head runs at +bound and everyone else at
-bound. Start-up reaches one more hop per send period, building the
worst-case gradient: each node sits a full threshold ahead of its
successor. The head then has to slow itself to 1/diameter of its hardware
rate until the tail catches up. The run reproduces both analytic bounds
and reports the slowdown episodes.
"""

from gradsync import build_wait_chain_scenario, compute_report, reduced_rate_stats, run

DIAMETER = 8
config = build_wait_chain_scenario(
    diameter=DIAMETER, drift_bound=0.1, max_gap=1.0, skew_threshold=1.0
)
trace = run(config)
report = compute_report(trace)

print(f"chain of {DIAMETER + 1} nodes, head fast (+0.1), tail slow (-0.1)")
print(f"start times per hop: {[float(t) for t in trace.start_times]}")
print()
print("skew profile by hop distance (max over the whole run):")
for distance, skew in sorted(report.gradient_profile.items()):
    bar = "#" * int(round(skew * 20))
    print(f"  distance {distance:>2}: {skew:7.4f}  {bar}")
print()
print(f"global skew {report.max_global_skew:.4f} between {report.attaining_pair} "
      f"at t={report.attaining_time}")
print(f"slowest observed logical rate: {report.min_rate:.4f} "
      f"(floor (1-bound)/D = {0.9 / DIAMETER:.4f})")
stats = reduced_rate_stats(trace)
print(f"slowdown episodes: {stats.count}, total {stats.total:.1f} time units, "
      f"longest {stats.longest:.1f}")
print()
for verdict in report.bound_verdicts:
    print(
        f"bound {verdict.name}: observed {verdict.observed:.4f} "
        f"<= {verdict.threshold:.4f} -> {'pass' if verdict.passed else 'FAIL'} "
        f"[{verdict.scope}]"
    )
