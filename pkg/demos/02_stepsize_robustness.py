"""How sensitive is each method to the initial stepsize?

Sweeps lambda_1 = alpha * lambda_pol(x0) for alpha in {0.01, 1, 100} and
compares the adaptive solver against the constant-stepsize one.  The
adaptive variant recovers from a bad initial stepsize by halving it inside
cycles; the constant-stepsize method has no such mechanism and a 100x
overestimate effectively stalls it (rendered */* like a timed-out cell).
"""

import adbundle as ab
from adbundle.harness import format_cell, run_single

ALPHAS = [0.01, 1.0, 100.0]
inst = ab.gen_dense(m=100, n=300, seed=7)
print(f"instance: dense 100x300, seed 7, eps_bar = 1e-5\n")

rows = []
base_rec, _ = run_single(inst, ab.AD_GPB_STAR, 1.0, 1e-5)
cap = 20 * base_rec.iterations  # generous budget pegged to the adaptive run

for solver in (ab.AD_GPB_STAR, ab.AD_GPB_STAR2, ab.GPB):
    cells = []
    for alpha in ALPHAS:
        rec, _ = run_single(inst, solver, alpha, 1e-5, iteration_cap=cap)
        cells.append(format_cell(rec))
    rows.append((solver, cells))

width = 14
print("solver".ljust(18) + "".join(f"a={a:<12g}" for a in ALPHAS))
for solver, cells in rows:
    print(solver.ljust(18) + "".join(c.ljust(width) for c in cells))

print(
    "\nCells are iterations/seconds as in the benchmark tables; */* marks a\n"
    "run that exhausted its iteration budget (20x the adaptive baseline)."
)
