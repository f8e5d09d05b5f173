"""Measured convergence orders and the march/PC cross-check.

The march is second order in dx; the PC pipeline integrates ODEs with RK4
and is fourth order in its step. Both reconstruct the same cylinder, so on
the region they share their graphs must agree within the sum of their own
error estimates.
"""
from curverecon.studies import cross_validate_cylinder
from curverecon.verification import convergence_study

for problem, grids in (("cylinder-march", [1 / 32, 1 / 64, 1 / 128, 1 / 256]),
                       ("sphere-march", [1 / 16, 1 / 32, 1 / 64]),
                       ("cylinder-pc", [1 / 4, 1 / 8, 1 / 16]),
                       ("zero-march", [1 / 16, 1 / 32, 1 / 64])):
    rep = convergence_study(problem, grids, workers=4)
    orders = ", ".join(f"{o['order']:.2f}" for o in rep.convergence_orders) or "-"
    print(f"{problem:15} errors {', '.join(f'{e:.2e}' for e in rep.errors)}  orders {orders}"
          + (f"  ({rep.notes[0]})" if rep.notes else ""))

res = cross_validate_cylinder()
print(f"cross-check on {res['n_points']} nodes: max gap {res['max_gap']:.2e},"
      f" march estimate {res['march_err_est']:.2e}, PC estimate {res['pc_err_est']:.2e},"
      f" agree = {res['agree']}")
