"""Running the solver without knowing the optimal value.

On a bounded (box) domain the solver can replace the unknown optimal value
with a certified lower bound: at the end of each cycle it averages the
aggregate affine minorants of the recent cycles, minimizes that affine
function over the box exactly, and keeps the best bound seen.  The gap
between the best objective value and this bound certifies the solution
quality, and the relaxation factor beta is halved whenever the recent
cycles' progress stalls relative to the certified gap.
"""

import adbundle as ab

inst = ab.gen_dense(m=40, n=120, seed=5)
boxed = ab.boxed_variant(inst, radius=float(inst.x_star.max()) * 2.0)
obj = ab.make_objective(boxed, known_optimum=False)  # phi* hidden

phi0 = ab.eval_phi(obj, boxed.x0)
fo = obj.oracle(boxed.x0)
lam1 = ab.polyak_stepsize(phi0, 0.0, fo.subgradient)  # seed only
eps = 1e-4 * phi0

config = ab.SolverConfig(variant=ab.AD_GPB, epsilon=eps, lambda1=lam1,
                         beta0=0.5)
report = ab.run(obj, config, boxed.x0)

print(f"terminated  = {report.terminated_by} after {report.iterations} "
      f"iterations / {report.cycles} cycles")
print(f"phi(y)      = {report.phi_y:.6g}")
print(f"lower bound = {report.nhat:.6g} (true phi* = 0)")
print(f"certified gap = {report.gap_bound:.6g} <= eps = {eps:.6g}\n")

stride = max(1, len(report.cycle_records) // 10)
print(f"lower-bound march (every {stride}th cycle):")
print(f"{'k':>6s} {'ell_hat':>14s} {'phi(y_hat)':>14s} {'beta':>10s}")
for c in report.cycle_records[::stride] + [report.cycle_records[-1]]:
    print(f"{c.k:6d} {c.ellhat:14.6g} {c.phi_yhat:14.6g} {c.beta_new:10.6g}")
