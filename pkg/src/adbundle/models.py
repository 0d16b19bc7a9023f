"""Bundle model representations and their update step.

Two concrete schemes are provided.  The two-cut scheme keeps an aggregate
affine cut plus the newest linearization; after each subproblem solve the
aggregate is replaced by the dual-weighted convex combination of the two
cuts and the newest slot receives the linearization at the new iterate.
The multi-cut scheme keeps a managed finite set of cuts and retains, at
each update, the cuts active at the new iterate plus its linearization.

Both updates guarantee, for the model before (Gamma), after (Gamma+), and
the aggregate form (Gamma_bar), that Gamma+ >= max(Gamma_bar, new cut + h)
everywhere while all three stay below f + h.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, InfeasiblePointError
from .objective import Cut, SimpleTerm, blend_two_cuts, combine_cuts
from .subproblems import (
    SubproblemSolution,
    solve_multi_cut,
    solve_two_cut,
)

# Absolute activity tolerance on model values; below inner-product roundoff
# at double precision for desk-scale dimensions.
ACTIVE_TOL = 1e-10
DEFAULT_MAX_CUTS = 100


@dataclass(frozen=True)
class TwoCutModel:
    """max(aggregate, newest) + h."""

    aggregate: Cut
    newest: Cut
    h: SimpleTerm

    @property
    def cuts(self) -> list[Cut]:
        return [self.aggregate, self.newest]


@dataclass(frozen=True)
class MultiCutModel:
    """max over a finite cut set + h, capped at max_size cuts."""

    cuts: tuple[Cut, ...]
    h: SimpleTerm
    max_size: int = DEFAULT_MAX_CUTS

    def __post_init__(self):
        if not 1 <= len(self.cuts) <= self.max_size:
            raise ConfigurationError(
                f"bundle size {len(self.cuts)} outside [1, {self.max_size}]"
            )


@dataclass(frozen=True)
class AggregateCut:
    """Per-cycle record: the aggregate affine minorant of f that agreed with
    the final model at the serious iterate, and that cycle's stepsize."""

    cut: Cut
    cycle_stepsize: float


def model_value(model, u: np.ndarray) -> float:
    """Exact max-of-cuts plus h(u); u must lie in dom h."""
    hval = model.h.value(u)
    return max(c.value(u) for c in model.cuts) + hval


def model_value_many(model, U: np.ndarray) -> np.ndarray:
    vals = np.stack([c.value_many(U) for c in model.cuts])
    return vals.max(axis=0)


def two_cut_update(model: TwoCutModel, x: np.ndarray, theta: float, new_cut: Cut) -> TwoCutModel:
    """Aggregate with weight theta on the old aggregate, then install new_cut."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0,1], got {theta}")
    merged = blend_two_cuts(model.aggregate, model.newest, theta)
    return TwoCutModel(aggregate=merged, newest=new_cut, h=model.h)


def active_cuts(model: MultiCutModel, x: np.ndarray, model_value_at_x: float,
                active_tol: float = ACTIVE_TOL) -> list[Cut]:
    hval = model.h.value(x)
    return [
        c for c in model.cuts
        if c.value(x) + hval >= model_value_at_x - active_tol
    ]


def multi_cut_update(
    model: MultiCutModel,
    x: np.ndarray,
    new_cut: Cut,
    model_value_at_x: float,
    active_tol: float = ACTIVE_TOL,
) -> MultiCutModel:
    """Keep the cuts active at x (the caller supplies Gamma(x)) plus new_cut."""
    retained = active_cuts(model, x, model_value_at_x, active_tol)
    if len(retained) + 1 > model.max_size:
        raise ConfigurationError(
            f"max_size {model.max_size} cannot hold {len(retained)} active cuts "
            "plus the new one"
        )
    return replace(model, cuts=tuple(retained) + (new_cut,))


def window_aggregate(records: list[AggregateCut], k: int) -> Cut:
    """Stepsize-weighted convex combination of the per-cycle aggregate cuts
    over cycles ceil(k/2)..k (1-based records)."""
    if not records or k < 1 or k > len(records):
        raise ValueError("records must cover cycles 1..k")
    start = (k + 1) // 2
    window = records[start - 1 : k]
    weights = np.array([r.cycle_stepsize for r in window])
    total = weights.sum()
    if total <= 0:
        raise ValueError("cycle stepsizes must be positive")
    return combine_cuts([r.cut for r in window], weights / total)


# --- scheme-generic helpers used by the solver driver ---


def initial_model(scheme: str, h: SimpleTerm, cut: Cut, max_size: int = DEFAULT_MAX_CUTS):
    """Model equal to cut + h (the linearization of phi at the start point)."""
    if scheme == "two-cut":
        return TwoCutModel(aggregate=cut, newest=cut, h=h)
    if scheme == "multi-cut":
        return MultiCutModel(cuts=(cut,), h=h, max_size=max_size)
    raise ConfigurationError(f"unknown bundle scheme {scheme!r}")


def solve_model(model, xc: np.ndarray, lam: float, tol=None) -> SubproblemSolution:
    """Dispatch the prox subproblem to the matching solver."""
    if isinstance(model, TwoCutModel):
        kw = {} if tol is None else {"tol": tol}
        return solve_two_cut(model.h, model.aggregate, model.newest, xc, lam, **kw)
    kw = {} if tol is None else {"tol": tol}
    return solve_multi_cut(model.h, list(model.cuts), xc, lam, **kw)


def aggregate_from_theta(model, theta) -> Cut:
    """The dual-weighted affine cut; minorizes f and matches the model at
    the subproblem minimizer up to the solver residual."""
    if isinstance(model, TwoCutModel):
        return blend_two_cuts(model.aggregate, model.newest, theta)
    return combine_cuts(list(model.cuts), theta)


def bundle_update(model, x: np.ndarray, solution: SubproblemSolution, new_cut: Cut):
    """One bundle update from the subproblem solution at x."""
    if isinstance(model, TwoCutModel):
        return two_cut_update(model, x, solution.theta, new_cut)
    gamma_x = model_value(model, x)
    return multi_cut_update(model, x, new_cut, gamma_x)


def aggregate_model_pair(model, solution: SubproblemSolution, x: np.ndarray):
    """Cuts describing Gamma_bar for validity checks: the updated aggregate
    for two-cut, the active subset for multi-cut."""
    if isinstance(model, TwoCutModel):
        return [aggregate_from_theta(model, solution.theta)]
    return active_cuts(model, x, model_value(model, x))
