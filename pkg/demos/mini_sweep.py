"""Miniature sweep through the experiment runner, plus aggregation.

Exercises the same machinery as the shipped presets at a desk-friendly size
(2 sweep points, 2 seeds, 2 schemes) and prints the aggregate table.

Run:  python demos/mini_sweep.py
"""

from risbeam.cli import ExperimentConfig, run_sweep, summarize

config = ExperimentConfig(
    sweep="delta_c",
    grid=(0.01, 0.02),
    schemes=("Proposed", "NonrobustBoth"),
    seeds=(1, 2),
    n_samples=500,
    n_elements=8,
)

rows = run_sweep(config)
print(f"{'value':>6} {'scheme':14} {'seed':>4} {'power_dbm':>10} {'p_hat':>6} {'status':>8}")
for row in rows:
    print(
        f"{row['value']:>6} {row['scheme']:14} {row['seed']:>4} "
        f"{row['power_dbm']:>10.2f} {row['p_hat']:>6.3f} {row['status']:>8}"
    )

print("\naggregates (power averaged in watts, reported in dBm):")
for agg in summarize(rows):
    print(
        f"  {agg['sweep']}={agg['value']}: {agg['scheme']:14} "
        f"power {agg['power_dbm_mean']:.2f} dBm, outage {agg['p_hat_mean']:.3f} "
        f"(std {agg['p_hat_std']:.3f}, n={agg['n']})"
    )
