"""Measured work versus the worst-case ceilings.

Every run of the known-optimum adaptive solver obeys provable ceilings on
its cycle count, its total iterations, the number of stepsize halvings, and
each cycle's length.  This script evaluates those ceilings from the
instance constants and puts them next to the measured counts; the
worst-case guarantees are loose by design, while the per-cycle quantities
are tight enough to be interesting.
"""

import adbundle as ab
from adbundle.harness import run_single, verify_trace

inst = ab.gen_dense(m=60, n=180, seed=2)
consts = ab.compute_constants(inst)
record, report = run_single(inst, ab.AD_GPB_STAR, 1.0, 1e-5)

print(f"instance constants: M = {consts.M:.4g}, L = {consts.L:g}, "
      f"d0 = {consts.d0:.4g}")
print(f"epsilon = {report.epsilon:.4g}, lambda_1 = {report.lambda1:.4g}\n")

inputs = ab.BoundInputs(
    epsilon=report.epsilon, tau=0.95, lambda1=report.lambda1,
    M=consts.M, L=consts.L, d0=consts.d0,
    t_start_max=max(c.t_first for c in report.cycle_records),
)
lam_lo = ab.lambda_lower(0.95, report.epsilon, consts.M, consts.L)

rows = [
    ("cycles", report.cycles, ab.k_hat(inputs)),
    ("iterations", report.iterations, ab.total_iter_bound_known(inputs)),
    ("stepsize halvings", report.bad,
     ab.bad_iter_bound(report.lambda1, lam_lo)),
    ("longest cycle", max(c.length for c in report.cycle_records),
     max(ab.cycle_len_bound(c.t_first, report.epsilon, 0.95, c.bad)
         for c in report.cycle_records)),
]
print(f"{'quantity':20s} {'measured':>12s} {'ceiling':>16s}")
for name, measured, ceiling in rows:
    print(f"{name:20s} {measured:12d} {ceiling:16.6g}")

print("\nper-trace invariant checks:")
for r in verify_trace(report.trace, report.variant, report.epsilon, 0.95,
                      report.lambda1, consts.M, consts.L, consts.D):
    print(f"  [{r.status:>4}] {r.name}: {r.detail}")
