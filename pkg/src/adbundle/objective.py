"""Problem abstractions: simple terms, first-order oracles, composite objectives, cuts.

The problems handled here have the form  minimize f(x) + h(x)  where f is a
finite convex function available through a subgradient oracle and h is a
"simple" term: the indicator of the nonnegative orthant, the indicator of a
box, or identically zero.  Affine minorants of f ("cuts") are stored in
slope/intercept form so evaluating one is a single inner product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasiblePointError, UnboundedDomainError

NONNEG = "nonneg-orthant"
BOX = "box"
ZERO = "zero"


@dataclass(frozen=True)
class FirstOrderResult:
    """Value and one subgradient of f at a query point."""

    value: float
    subgradient: np.ndarray


@dataclass(frozen=True)
class SimpleTerm:
    """The simple component h: orthant indicator, box indicator, or zero.

    Indicator kinds contribute value 0 on their domain; evaluating them off
    the domain raises InfeasiblePointError rather than returning a sentinel,
    so algorithmic bugs surface immediately.
    """

    kind: str
    dimension: int
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in (NONNEG, BOX, ZERO):
            raise ValueError(f"unknown simple-term kind {self.kind!r}")
        if self.kind == BOX:
            if self.lower is None or self.upper is None:
                raise ValueError("box term needs lower and upper bounds")
            if self.lower.shape != (self.dimension,) or self.upper.shape != (self.dimension,):
                raise ValueError("box bounds must match the dimension")
            if np.any(self.lower > self.upper):
                raise ValueError("box requires lower <= upper componentwise")

    @staticmethod
    def nonneg(dimension: int) -> "SimpleTerm":
        return SimpleTerm(NONNEG, dimension)

    @staticmethod
    def box(lower, upper) -> "SimpleTerm":
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        return SimpleTerm(BOX, lower.shape[0], lower, upper)

    @staticmethod
    def zero(dimension: int) -> "SimpleTerm":
        return SimpleTerm(ZERO, dimension)

    def contains(self, x: np.ndarray) -> bool:
        if x.shape != (self.dimension,):
            return False
        if self.kind == NONNEG:
            return bool(np.all(x >= 0))
        if self.kind == BOX:
            return bool(np.all(x >= self.lower) and np.all(x <= self.upper))
        return True

    def value(self, x: np.ndarray) -> float:
        if not self.contains(x):
            raise InfeasiblePointError(f"point outside dom h ({self.kind})")
        return 0.0

    def project(self, z: np.ndarray) -> np.ndarray:
        """Euclidean projection onto dom h (identity for the zero term)."""
        if self.kind == NONNEG:
            return np.maximum(z, 0.0)
        if self.kind == BOX:
            return np.clip(z, self.lower, self.upper)
        return z

    @property
    def is_bounded(self) -> bool:
        return self.kind == BOX

    def diameter(self) -> float:
        """sup ||y - x|| over dom h; finite exactly for the box kind."""
        if self.kind == BOX:
            return float(np.linalg.norm(self.upper - self.lower))
        return np.inf

    def sample(self, rng: np.random.Generator, count: int, scale: float = 1.0) -> np.ndarray:
        """Draw `count` points from dom h (uniform over a scale-sized region
        for unbounded kinds); used by sampled minorant/validity checks."""
        if self.kind == BOX:
            w = rng.random((count, self.dimension))
            return self.lower + w * (self.upper - self.lower)
        if self.kind == NONNEG:
            return scale * rng.random((count, self.dimension))
        return scale * (2.0 * rng.random((count, self.dimension)) - 1.0)


@dataclass(frozen=True)
class Cut:
    """An affine minorant of f: u -> intercept + <slope, u>.

    For a linearization taken at x the intercept is f(x) - <f'(x), x>.
    `origin` optionally tags the iterate the cut came from.
    """

    slope: np.ndarray
    intercept: float
    origin: object = field(default=None, compare=False)

    def value(self, u: np.ndarray) -> float:
        if u.shape != self.slope.shape:
            raise ValueError(
                f"cut dimension {self.slope.shape[0]} does not match point {u.shape}"
            )
        return self.intercept + float(self.slope @ u)

    def value_many(self, U: np.ndarray) -> np.ndarray:
        """Evaluate at the rows of U."""
        return self.intercept + U @ self.slope


def sign(v: np.ndarray) -> np.ndarray:
    """Componentwise -1/0/+1 with the 0-at-ties convention."""
    return np.sign(np.asarray(v, dtype=float))


def linearization_value(cut: Cut, u: np.ndarray) -> float:
    """Evaluate the stored linearization at u."""
    return cut.value(np.asarray(u, dtype=float))


def cut_at(result: FirstOrderResult, x: np.ndarray, origin=None) -> Cut:
    """Build the cut for the linearization of f at x from an oracle result."""
    g = result.subgradient
    return Cut(slope=g, intercept=result.value - float(g @ x), origin=origin)


def combine_cuts(cuts, weights) -> Cut:
    """Convex (or any nonnegative) combination of cuts; still minorizes f
    when the weights lie on the unit simplex."""
    slopes = np.stack([c.slope for c in cuts])
    intercepts = np.array([c.intercept for c in cuts])
    w = np.asarray(weights, dtype=float)
    return Cut(slope=w @ slopes, intercept=float(w @ intercepts))


def blend_two_cuts(c1: Cut, c2: Cut, theta: float) -> Cut:
    """theta*c1 + (1-theta)*c2 without the stacking overhead of
    combine_cuts; this runs once per solver iteration."""
    return Cut(
        slope=theta * c1.slope + (1.0 - theta) * c2.slope,
        intercept=theta * c1.intercept + (1.0 - theta) * c2.intercept,
    )


class L1ResidualOracle:
    """First-order oracle for f(x) = ||A x - b||_1.

    The subgradient is A^T sign(A x - b) with sign(0) = 0; any selection is
    valid, this one is deterministic.  A may be a dense ndarray or a scipy
    sparse matrix.  Immutable after construction; safe for concurrent reads.
    """

    def __init__(self, A, b: np.ndarray):
        self.A = A
        self.b = np.asarray(b, dtype=float)
        self.n = A.shape[1]
        # Pre-transposed copy: for sparse A the per-call transpose plus the
        # CSC matvec would otherwise dominate the oracle cost.
        self.AT = A.T.tocsr() if hasattr(A, "tocsr") else A.T

    def residual(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x - self.b

    def value(self, x: np.ndarray) -> float:
        return float(np.abs(self.residual(x)).sum())

    def __call__(self, x: np.ndarray) -> FirstOrderResult:
        r = self.residual(x)
        s = np.sign(r)
        g = np.asarray(self.AT @ s, dtype=float).ravel()
        return FirstOrderResult(value=float(np.abs(r).sum()), subgradient=g)


@dataclass(frozen=True)
class CompositeObjective:
    """The composite objective f + h with an optional known optimal value."""

    f_oracle: object
    h: SimpleTerm
    known_optimum: float | None = None

    def oracle(self, x: np.ndarray) -> FirstOrderResult:
        """f-value and subgradient at x (x must be feasible for h)."""
        self.h.value(x)
        return self.f_oracle(x)

    def f_value(self, x: np.ndarray) -> float:
        if hasattr(self.f_oracle, "value"):
            return float(self.f_oracle.value(x))
        return float(self.f_oracle(x).value)


def eval_phi(obj: CompositeObjective, x) -> float:
    """phi(x) = f(x) + h(x); raises InfeasiblePointError outside dom h."""
    x = np.asarray(x, dtype=float)
    hval = obj.h.value(x)
    return obj.f_value(x) + hval
