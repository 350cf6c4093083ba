"""Run the 20-scenario desk braking suite end to end.

Simulates all three system variants, writes the episode traces, and
aggregates them into the three monitor metrics.  The suite is engineered
so the bare system crashes in 3 of 20 scenarios and the monitor averts 2,
which pins SG = 0.10 and RH = 0.05 by construction.

Usage: python3 scripts/run_desk_suite.py [out_dir]
"""

import sys
from pathlib import Path

from monitoreval.core_metrics import compute_report, decomposition_residual
from monitoreval.schemes import SchemeParams, triples_for_scheme
from monitoreval.simulator import desk_suite, run_suite
from monitoreval.traces import load_traces


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/desk_suite")
    configs, detector, monitor = desk_suite()
    summary = run_suite(configs, detector, monitor, out_dir)

    print(f"simulated {summary.n_scenarios} scenarios x 3 variants -> {out_dir}")
    for variant in ("f", "f_with_monitor", "f_star"):
        print(
            f"  {variant:16s} collisions={summary.collisions[variant]} "
            f"brakes={summary.brakes[variant]}"
        )

    records = []
    for path in summary.trace_paths.values():
        records.extend(load_traces(path, "episodic"))
    report = compute_report(triples_for_scheme("episodic", records, SchemeParams()), "episodic")
    print(f"\nSG={report.sg:.3f} RH={report.rh:.3f} AC={report.ac:.3f} "
          f"hazard_f={report.hazard_f:.3f} residual={decomposition_residual(report):.1e}")


if __name__ == "__main__":
    main()
