"""Polyak-seeded bundle methods versus the plain Polyak subgradient method.

When the optimal value is known, the Polyak ratio (phi(x) - phi*)/||g||^2
is a natural stepsize.  Using it directly gives the classical subgradient
method; re-seeding each bundle cycle at 40x that ratio gives the Polyak
variants, which combine the cheap stepsize guess with the bundle model's
stability.
"""

import adbundle as ab
from adbundle.harness import run_single

inst = ab.gen_dense(m=100, n=300, seed=3)
print("instance: dense 100x300, seed 3, eps_bar = 1e-5\n")
print(f"{'method':20s} {'iterations':>10s} {'cycles':>8s} {'seconds':>8s}")

for solver in (ab.POL_SUBGRAD, ab.POL_GPB, ab.POL_AD_GPB_STAR,
               ab.AD_GPB_STAR, ab.AD_GPB_STAR2):
    rec, _ = run_single(inst, solver, 1.0, 1e-5, iteration_cap=3_000_000)
    print(f"{solver:20s} {rec.iterations:10d} {rec.cycles:8d} "
          f"{rec.seconds:8.2f}")

print(
    "\nThe bundle variants need far fewer oracle calls than the subgradient\n"
    "baseline; the Polyak-seeded adaptive variant is usually the fastest."
)
