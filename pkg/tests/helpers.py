"""Shared test utilities: brute-force oracles and small problem builders."""

import numpy as np

from adbundle.objective import (
    BOX,
    NONNEG,
    CompositeObjective,
    Cut,
    FirstOrderResult,
    SimpleTerm,
)


class AbsOracle:
    """f(x) = |x| in one dimension."""

    def value(self, x):
        return float(abs(x[0]))

    def __call__(self, x):
        return FirstOrderResult(value=float(abs(x[0])), subgradient=np.sign(x))


def abs_objective(h=None, known=0.0):
    h = h if h is not None else SimpleTerm.zero(1)
    return CompositeObjective(f_oracle=AbsOracle(), h=h, known_optimum=known)


def subproblem_value(cuts, h, xc, lam, U):
    """max-of-cuts + prox evaluated at the rows of U (all assumed feasible)."""
    vals = np.max(np.stack([c.value_many(U) for c in cuts]), axis=0)
    prox = np.sum((U - xc) ** 2, axis=1) / (2.0 * lam)
    return vals + prox


def grid_min_value(cuts, h, xc, lam, step=1e-3, pad=0.05):
    """Brute-force minimum of max-of-cuts + h + prox on a grid (n <= 2).

    The minimizer is the projection of xc - lam*s for some s in the convex
    hull of the cut slopes, so a componentwise interval around that set
    (clamped to dom h, padded within it) is guaranteed to contain it.
    """
    slopes = np.stack([c.slope for c in cuts])
    n = xc.shape[0]
    axes = []
    for i in range(n):
        lo = xc[i] - lam * slopes[:, i].max() - pad
        hi = xc[i] - lam * slopes[:, i].min() + pad
        if h.kind == NONNEG:
            lo, hi = max(lo, 0.0), max(hi, 0.0)
        elif h.kind == BOX:
            lo, hi = max(lo, h.lower[i]), min(hi, h.upper[i])
        axes.append(np.arange(lo, hi + step, step))
    if n == 1:
        U = axes[0][:, None]
    else:
        g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
        U = np.column_stack([g0.ravel(), g1.ravel()])
    return float(subproblem_value(cuts, h, xc, lam, U).min())


def random_simple_term(rng, n):
    kind = rng.choice(["nonneg", "box", "zero"])
    if kind == "nonneg":
        return SimpleTerm.nonneg(n)
    if kind == "box":
        lower = rng.uniform(-1.0, -0.2, n)
        upper = rng.uniform(0.2, 1.0, n)
        return SimpleTerm.box(lower, upper)
    return SimpleTerm.zero(n)


def random_cut(rng, n, scale=0.05):
    return Cut(slope=rng.uniform(-scale, scale, n),
               intercept=float(rng.uniform(-scale, scale)))


def random_prox_problem(rng, n=None, n_cuts=2, scale=0.05):
    """A small random subproblem whose local growth rate is low enough for
    the 1e-3 grid to pin the optimal value within 1e-4."""
    n = n or int(rng.integers(1, 3))
    h = random_simple_term(rng, n)
    if h.kind == NONNEG:
        xc = rng.uniform(0.0, 1.0, n)
    elif h.kind == BOX:
        xc = rng.uniform(h.lower, h.upper)
    else:
        xc = rng.uniform(-1.0, 1.0, n)
    lam = float(rng.uniform(0.5, 2.0))
    cuts = [random_cut(rng, n, scale) for _ in range(n_cuts)]
    return h, cuts, xc, lam


def stationarity_residual(h, x, xc, lam, combined_slope):
    """Distance of -(x - xc)/lam - slope to the subdifferential of h at x;
    a componentwise sign condition for the supported simple terms."""
    v = -(x - xc) / lam - combined_slope
    if h.kind == "zero":
        return float(np.max(np.abs(v))) if v.size else 0.0
    res = np.abs(v.copy())
    if h.kind == NONNEG:
        at_lower = x == 0.0
        res[at_lower] = np.maximum(v[at_lower], 0.0)
    else:
        at_lower = x == h.lower
        at_upper = x == h.upper
        res[at_lower] = np.maximum(v[at_lower], 0.0)
        res[at_upper] = np.maximum(-v[at_upper], 0.0)
        res[at_lower & at_upper] = 0.0
    return float(res.max()) if res.size else 0.0


def rel_violation(lhs, rhs):
    """Relative amount by which lhs exceeds rhs (0 when lhs <= rhs)."""
    excess = np.asarray(lhs) - np.asarray(rhs)
    denom = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return float(np.max(excess / denom, initial=0.0))
