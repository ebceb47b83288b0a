"""Inefficiency across perception levels and budgets on a distributed-energy model.

Two operators (solar and EV charging) share a control network.  The sweep
gives both the same alpha, splits each total budget evenly, and records how
far the worst equilibrium found is from the planner's optimum.  The table is
also written as CSV.

    python demos/05_der1_sweep.py [out.csv] [restarts]
"""

import sys

from bsgames import DynamicsConfig, emit_sweep_csv, sweep
from bsgames.instances import der1

out = sys.argv[1] if len(sys.argv) > 1 else "der1_sweep.csv"
restarts = int(sys.argv[2]) if len(sys.argv) > 2 else 4
alphas = [round(0.2 + 0.1 * i, 2) for i in range(9)]
budgets = [5.0, 10.0, 20.0]

rows = sweep(der1(), alphas, budgets, DynamicsConfig(n_starts=restarts),
             progress=lambda r: print(f"  alpha {r.alpha:.1f} budget {r.budget:>4g}: "
                                      f"{r.error or f'{r.inefficiency:.4f}'}", flush=True))
emit_sweep_csv(rows, out)

table = {(r.budget, r.alpha): r.inefficiency for r in rows}
print("\n" + "budget".rjust(7) + "".join(f"{a:>9.1f}" for a in alphas))
for B in budgets:
    print(f"{B:>7g}" + "".join(f"{table[B, a]:>9.3f}" for a in alphas))
print(f"\nwrote {out}")
