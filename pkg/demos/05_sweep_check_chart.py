"""
A small sweep, its trend verdicts, and charts
=============================================

The harness runs the attack x ratio x seed grid, averages per cell, then
asks the shipped trend rules whether the averages show the expected
ordering. The grid below is cut down (shorter runs, fewer seeds, a compact
area) so it finishes in a few minutes on one core; the full grid is
``fanetsim sweep`` with the defaults.
"""

from fanetsim.harness import ScenarioConfig
from fanetsim.harness.charts import emit_charts
from fanetsim.harness.sweep import DEFAULT_CELLS, run_sweep, summary_table
from fanetsim.harness.trends import (MissingCellsError, ReferenceTable, check_trends,
                                     default_rules, report_text)

# First the rules against the published numbers themselves.
print(report_text(check_trends(ReferenceTable.load())))

base = ScenarioConfig(area_x=1000, area_y=1000, sim_time=150.0, seeds=(1, 2),
                      ratios=(0.1, 0.25), densities=(25, 50))
result = run_sweep(base, attacks=DEFAULT_CELLS, out_dir="demo_results")
print()
print(summary_table(result.aggregates))
print("\nconservation held in every run:", result.all_conserved())

# With only two ratios some rules lack the cells they read; those are skipped.
print()
for rule in default_rules():
    try:
        print(rule.check(result.aggregates).line())
    except MissingCellsError as exc:
        print(f"[SKIP] {rule.name}: {len(exc.missing)} cells not in this grid")

for path in emit_charts(result.aggregates, "demo_results"):
    print("wrote", path)
