"""Proximal bundle drivers with adaptive stepsizes and cycle tests.

All bundle variants share one state machine.  Each iteration solves the
prox bundle subproblem at the current center, updates the best iterate,
and forms the gap surrogate t_j between the best objective value seen and
the subproblem optimum.  A cycle of null steps ends (serious step) once

    t_j <= beta * [phi(y_j) - nhat] + epsilon/4,

where nhat is a running lower bound on the optimal value (the known value
when available) and beta relaxes the test; the constant-stepsize variant
instead ends a cycle at t_j <= epsilon/2.  Within a cycle the stepsize is
halved whenever t_j fails to decrease geometrically, and across cycles the
variants differ only in how the next cycle's stepsize is seeded (keep,
double-while-clean, or re-seed from the current Polyak ratio).

Variants:

    ad-gpb            adaptive test with an estimated lower bound (needs a
                      bounded domain, not the optimal value)
    ad-gpb-star       adaptive test anchored at the known optimal value
    ad-gpb-star-star  ad-gpb-star, doubling the seed stepsize while every
                      completed cycle kept its stepsize
    gpb               constant stepsize, epsilon/2 cycle test
    pol-gpb           gpb re-seeded each cycle at 40x the Polyak stepsize
    pol-ad-gpb-star   ad-gpb-star re-seeded the same way
    pol-subgrad       the Polyak-stepsize prox-linear subgradient baseline
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateOracleError,
    InfeasiblePointError,
    UnboundedDomainError,
)
from .models import (
    AggregateCut,
    aggregate_from_theta,
    bundle_update,
    initial_model,
    solve_model,
)
from .objective import CompositeObjective, Cut, cut_at, eval_phi
from .subproblems import min_affine_plus_h, solve_affine

AD_GPB = "ad-gpb"
AD_GPB_STAR = "ad-gpb-star"
AD_GPB_STAR2 = "ad-gpb-star-star"
GPB = "gpb"
POL_GPB = "pol-gpb"
POL_AD_GPB_STAR = "pol-ad-gpb-star"
POL_SUBGRAD = "pol-subgrad"

VARIANTS = (AD_GPB, AD_GPB_STAR, AD_GPB_STAR2, GPB, POL_GPB, POL_AD_GPB_STAR, POL_SUBGRAD)
KNOWN_OPT_VARIANTS = frozenset(
    {AD_GPB_STAR, AD_GPB_STAR2, GPB, POL_GPB, POL_AD_GPB_STAR, POL_SUBGRAD}
)
CONSTANT_STEP_VARIANTS = frozenset({GPB, POL_GPB})
POLYAK_SEEDED = frozenset({POL_GPB, POL_AD_GPB_STAR})

EVENT_NULL_KEEP = "null-keep"
EVENT_NULL_HALVE = "null-halve"
EVENT_SERIOUS = "serious"
EVENT_STOP = "stop"


@dataclass
class SolverConfig:
    variant: str
    epsilon: float
    lambda1: float | None = None
    tau: float = 0.95
    beta0: float = 0.5
    bundle_scheme: str = "two-cut"
    warm_start_after_serious: bool = True
    iteration_cap: int = 10_000_000
    time_cap: float | None = None
    max_bundle_size: int = 100
    subproblem_tol: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}")
        if not 0.0 < self.tau < 1.0:
            raise ConfigurationError("tau must lie in (0, 1)")
        if not 0.0 <= self.beta0 <= 0.5:
            raise ConfigurationError("beta0 must lie in [0, 1/2]")
        if self.epsilon <= 0.0:
            raise ConfigurationError("epsilon must be positive")
        if self.variant not in POLYAK_SEEDED and self.variant != POL_SUBGRAD:
            if self.lambda1 is None or self.lambda1 <= 0.0:
                raise ConfigurationError("lambda1 must be positive")


@dataclass
class TraceRecord:
    j: int
    k: int
    lam: float
    t: float
    phi_best: float
    event: str
    residual: float = 0.0


@dataclass
class CycleRecord:
    k: int
    lambda_hat: float
    t_first: float
    t_hat: float
    bad: int
    length: int
    phi_yhat: float
    beta_prev: float
    nhat_prev: float
    ellhat: float | None
    nhat: float
    beta_new: float


@dataclass
class SolverState:
    j: int
    k: int
    lam: float
    lambda_cycle_start: float
    xhat: np.ndarray
    y: np.ndarray
    phi_y: float
    t_prev: float
    beta: float
    ellhat: float | None
    nhat: float
    model: object
    cycle_start_j: int
    cycle_bad: int = 0
    cycle_t_first: float = np.nan
    all_cycles_good: bool = True
    serious: int = 0
    null: int = 0
    bad: int = 0
    aggregate_records: list = field(default_factory=list)
    # Prefix sums over completed cycles (index l holds cycles 1..l), so the
    # moving half-window sums cost O(1) per serious step instead of O(k).
    prefix_lam: list = field(default_factory=lambda: [0.0])
    prefix_lam_phi: list = field(default_factory=lambda: [0.0])
    prefix_gap: list = field(default_factory=lambda: [0.0])
    prefix_slope: list = field(default_factory=list)
    prefix_icpt: list = field(default_factory=lambda: [0.0])
    trace: list = field(default_factory=list)
    cycle_records: list = field(default_factory=list)
    stopped: bool = False


@dataclass
class RunReport:
    variant: str
    x_final: np.ndarray
    y_final: np.ndarray
    phi_y: float
    gap_bound: float
    nhat: float
    iterations: int
    serious: int
    null: int
    bad: int
    cycles: int
    wall_time: float
    terminated_by: str
    epsilon: float
    lambda1: float
    trace: list
    cycle_records: list


@dataclass
class AuditEvent:
    """Snapshot handed to an audit callback after each iteration."""

    j: int
    k: int
    lam: float
    xhat: np.ndarray
    x: np.ndarray
    model_prev: object
    model_next: object
    solution: object
    new_cut: object
    event: str


def cycle_stop_test(t_j: float, beta_prev: float, phi_yj: float,
                    nhat_prev: float, epsilon: float) -> bool:
    """True when the cycle may end with a serious step."""
    return t_j <= beta_prev * (phi_yj - nhat_prev) + epsilon / 4.0


def stepsize_rule(t_j: float, t_prev: float, beta_prev: float, phi_yj: float,
                  nhat_prev: float, epsilon: float, tau: float,
                  is_first_of_cycle: bool) -> str:
    """'keep' or 'halve' for a null step."""
    if is_first_of_cycle:
        return "keep"
    rhs = (1.0 - tau) * (beta_prev * (phi_yj - nhat_prev) / 2.0 + epsilon / 8.0)
    return "keep" if t_j - tau * t_prev <= rhs else "halve"


def polyak_stepsize(phi_x: float, phi_star: float, g: np.ndarray) -> float:
    """(phi(x) - phi*) / ||g||^2; zero exactly at the optimum."""
    gap = phi_x - phi_star
    if gap <= 0.0:
        return 0.0
    gsq = float(g @ g)
    if gsq == 0.0:
        raise DegenerateOracleError("zero subgradient above the optimal value")
    return gap / gsq


def variant_seed(variant: str, k: int, lambda_hat_prev: float,
                 all_cycles_good_so_far: bool,
                 polyak_lambda: float | None = None) -> float:
    """Initial stepsize for cycle k+1 given cycle k's final stepsize."""
    if variant in POLYAK_SEEDED:
        if polyak_lambda is None:
            raise ConfigurationError("Polyak-seeded variants need polyak_lambda")
        return 40.0 * polyak_lambda
    if variant == AD_GPB_STAR2 and all_cycles_good_so_far:
        return 2.0 * lambda_hat_prev
    return lambda_hat_prev


def _cycle_done(variant: str, t_j: float, beta: float, phi_y: float,
                nhat: float, epsilon: float) -> bool:
    if variant in CONSTANT_STEP_VARIANTS:
        return t_j <= epsilon / 2.0
    return cycle_stop_test(t_j, beta, phi_y, nhat, epsilon)


def serious_update(state: SolverState, obj: CompositeObjective, config: SolverConfig,
                   solution, x_j: np.ndarray, fo, t_j: float) -> str:
    """Close cycle k: record it, refresh the lower bound and beta, seed the
    next cycle's stepsize and model, move the prox center."""
    k = state.k
    lam_hat = state.lam
    beta_prev = state.beta
    nhat_prev = state.nhat

    if config.variant == AD_GPB:
        agg = aggregate_from_theta(state.model, solution.theta)
        state.aggregate_records.append(AggregateCut(cut=agg, cycle_stepsize=lam_hat))
        if not state.prefix_slope:
            state.prefix_slope.append(np.zeros_like(agg.slope))
        state.prefix_lam.append(state.prefix_lam[-1] + lam_hat)
        state.prefix_lam_phi.append(state.prefix_lam_phi[-1] + lam_hat * state.phi_y)
        state.prefix_gap.append(
            state.prefix_gap[-1] + beta_prev * lam_hat * (state.phi_y - nhat_prev)
        )
        state.prefix_slope.append(state.prefix_slope[-1] + lam_hat * agg.slope)
        state.prefix_icpt.append(state.prefix_icpt[-1] + lam_hat * agg.intercept)

        start = (k + 1) // 2
        w_lam = state.prefix_lam[k] - state.prefix_lam[start - 1]
        w_cut = Cut(
            slope=(state.prefix_slope[k] - state.prefix_slope[start - 1]) / w_lam,
            intercept=(state.prefix_icpt[k] - state.prefix_icpt[start - 1]) / w_lam,
        )
        candidate = min_affine_plus_h(obj.h, w_cut)
        ellhat_k = max(state.ellhat, candidate)
        nhat_k = ellhat_k
    else:
        # With the optimal value known there is no need for the aggregate
        # lower-bound machinery at all.
        ellhat_k = None
        nhat_k = obj.known_optimum

    stop = state.phi_y - nhat_k <= config.epsilon

    beta_new = beta_prev
    if not stop and config.variant == AD_GPB:
        start = (k + 1) // 2
        w_lam = state.prefix_lam[k] - state.prefix_lam[start - 1]
        phi_avg = (state.prefix_lam_phi[k] - state.prefix_lam_phi[start - 1]) / w_lam
        g_hat = (state.prefix_gap[k] - state.prefix_gap[start - 1]) / w_lam
        if g_hat > (phi_avg - nhat_k) / 2.0:
            beta_new = beta_prev / 2.0

    all_good = state.all_cycles_good and state.cycle_bad == 0
    if stop:
        lam_next = lam_hat
        model_next = state.model
    else:
        pol_lam = None
        if config.variant in POLYAK_SEEDED:
            pol_lam = polyak_stepsize(fo.value, obj.known_optimum, fo.subgradient)
        lam_next = variant_seed(config.variant, k, lam_hat, all_good, pol_lam)
        new_cut = cut_at(fo, x_j, origin=state.j)
        if config.warm_start_after_serious:
            model_next = bundle_update(state.model, x_j, solution, new_cut)
        else:
            model_next = initial_model(
                config.bundle_scheme, obj.h, new_cut, config.max_bundle_size
            )

    state.cycle_records.append(
        CycleRecord(
            k=k, lambda_hat=lam_hat, t_first=state.cycle_t_first, t_hat=t_j,
            bad=state.cycle_bad, length=state.j - state.cycle_start_j + 1,
            phi_yhat=state.phi_y, beta_prev=beta_prev, nhat_prev=nhat_prev,
            ellhat=ellhat_k, nhat=nhat_k, beta_new=beta_new,
        )
    )

    state.xhat = x_j
    state.model = model_next
    state.lam = lam_next
    state.lambda_cycle_start = lam_next
    state.beta = beta_new
    state.ellhat = ellhat_k
    state.nhat = nhat_k
    state.k = k + 1
    state.serious += 1
    state.cycle_start_j = state.j + 1
    state.all_cycles_good = all_good
    state.cycle_bad = 0
    state.stopped = stop
    return EVENT_STOP if stop else EVENT_SERIOUS


def iterate_once(state: SolverState, obj: CompositeObjective, config: SolverConfig,
                 audit=None) -> str:
    """One subproblem solve plus the null/serious branch; returns the event."""
    model_prev = state.model
    xhat_used = state.xhat
    solution = solve_model(state.model, state.xhat, state.lam, config.subproblem_tol)
    x_j = solution.x
    fo = obj.oracle(x_j)
    if fo.value < state.phi_y:  # ties keep the previous best iterate
        state.y = x_j
        state.phi_y = fo.value
    t_j = state.phi_y - solution.m
    is_first = state.j == state.cycle_start_j
    if is_first:
        state.cycle_t_first = t_j

    if _cycle_done(config.variant, t_j, state.beta, state.phi_y, state.nhat,
                   config.epsilon):
        event = serious_update(state, obj, config, solution, x_j, fo, t_j)
        new_cut = state.model.cuts[-1] if hasattr(state.model, "cuts") else None
    else:
        if config.variant in CONSTANT_STEP_VARIANTS:
            decision = "keep"
        else:
            decision = stepsize_rule(
                t_j, state.t_prev, state.beta, state.phi_y, state.nhat,
                config.epsilon, config.tau, is_first,
            )
        new_cut = cut_at(fo, x_j, origin=state.j)
        state.model = bundle_update(state.model, x_j, solution, new_cut)
        if decision == "halve":
            state.lam = state.lam / 2.0
            state.bad += 1
            state.cycle_bad += 1
            event = EVENT_NULL_HALVE
        else:
            event = EVENT_NULL_KEEP
        state.null += 1

    if event in (EVENT_SERIOUS, EVENT_STOP):
        k_used = state.cycle_records[-1].k
    else:
        k_used = state.k
    state.trace.append(
        TraceRecord(j=state.j, k=k_used, lam=_lam_used(state, event), t=t_j,
                    phi_best=state.phi_y, event=event, residual=solution.residual)
    )
    if audit is not None:
        audit(AuditEvent(
            j=state.j, k=state.trace[-1].k, lam=state.trace[-1].lam,
            xhat=xhat_used, x=x_j, model_prev=model_prev,
            model_next=state.model, solution=solution, new_cut=new_cut,
            event=event,
        ))
    state.t_prev = t_j
    state.j += 1
    return event


def _lam_used(state: SolverState, event: str) -> float:
    """Stepsize used by the iteration just performed (before any halving or
    re-seeding took effect)."""
    if event == EVENT_NULL_HALVE:
        return state.lam * 2.0
    if event in (EVENT_SERIOUS, EVENT_STOP):
        return state.cycle_records[-1].lambda_hat
    return state.lam


def _zero_iteration_report(config: SolverConfig, x0: np.ndarray, phi0: float,
                           nhat: float, lam1: float, t0: float) -> RunReport:
    return RunReport(
        variant=config.variant, x_final=x0, y_final=x0, phi_y=phi0,
        gap_bound=phi0 - nhat, nhat=nhat, iterations=0, serious=0, null=0,
        bad=0, cycles=0, wall_time=time.perf_counter() - t0,
        terminated_by="tolerance", epsilon=config.epsilon, lambda1=lam1,
        trace=[], cycle_records=[],
    )


def run(obj: CompositeObjective, config: SolverConfig, x0,
        audit=None) -> RunReport:
    """Run a bundle variant (or the subgradient baseline) from x0.

    On a normal stop phi(y) - nhat <= epsilon, hence phi(y) - phi* <=
    epsilon.  Hitting the iteration or time cap returns a capped report
    rather than raising.
    """
    x0 = np.asarray(x0, dtype=float)
    if not obj.h.contains(x0):
        raise InfeasiblePointError("x0 outside dom h")
    if config.variant == POL_SUBGRAD:
        return _polyak_subgrad_absolute(obj, x0, config)
    if config.variant in KNOWN_OPT_VARIANTS and obj.known_optimum is None:
        raise ConfigurationError(f"{config.variant} needs the optimal value")
    if config.variant == AD_GPB and not obj.h.is_bounded:
        raise UnboundedDomainError(
            "the lower-bound-estimating variant needs a box domain"
        )

    t0 = time.perf_counter()
    fo0 = obj.oracle(x0)
    phi0 = fo0.value

    if obj.known_optimum is not None and phi0 - obj.known_optimum <= config.epsilon:
        nhat0 = obj.known_optimum
        lam1 = config.lambda1 if config.lambda1 is not None else 0.0
        return _zero_iteration_report(config, x0, phi0, nhat0, lam1, t0)

    cut0 = cut_at(fo0, x0, origin=0)
    model = initial_model(config.bundle_scheme, obj.h, cut0, config.max_bundle_size)

    if config.variant == AD_GPB:
        ellhat0 = min_affine_plus_h(obj.h, cut0)
        nhat0 = ellhat0
    else:
        ellhat0 = None
        nhat0 = obj.known_optimum

    if config.variant in POLYAK_SEEDED:
        lam1 = 40.0 * polyak_stepsize(phi0, obj.known_optimum, fo0.subgradient)
    else:
        lam1 = config.lambda1

    state = SolverState(
        j=1, k=1, lam=lam1, lambda_cycle_start=lam1, xhat=x0, y=x0,
        phi_y=phi0, t_prev=np.inf, beta=config.beta0, ellhat=ellhat0,
        nhat=nhat0, model=model, cycle_start_j=1,
    )

    terminated_by = "tolerance"
    while True:
        if state.j > config.iteration_cap:
            terminated_by = "iteration-cap"
            break
        if config.time_cap is not None and time.perf_counter() - t0 > config.time_cap:
            terminated_by = "time-cap"
            break
        event = iterate_once(state, obj, config, audit=audit)
        if event == EVENT_STOP:
            break

    return RunReport(
        variant=config.variant, x_final=state.xhat, y_final=state.y,
        phi_y=state.phi_y, gap_bound=state.phi_y - state.nhat, nhat=state.nhat,
        iterations=len(state.trace), serious=state.serious, null=state.null,
        bad=state.bad, cycles=state.serious,
        wall_time=time.perf_counter() - t0, terminated_by=terminated_by,
        epsilon=config.epsilon, lambda1=lam1, trace=state.trace,
        cycle_records=state.cycle_records,
    )


def polyak_subgrad_run(obj: CompositeObjective, x0, rel_tol: float,
                       iteration_cap: int = 10_000_000,
                       time_cap: float | None = None) -> RunReport:
    """Prox-linear subgradient steps with the Polyak stepsize until
    phi(x_k) - phi* <= rel_tol * (phi(x0) - phi*) or a cap fires."""
    if obj.known_optimum is None:
        raise ConfigurationError("the Polyak baseline needs the optimal value")
    x0 = np.asarray(x0, dtype=float)
    if not obj.h.contains(x0):
        raise InfeasiblePointError("x0 outside dom h")
    t0 = time.perf_counter()
    phi_star = obj.known_optimum
    fo = obj.oracle(x0)
    phi0 = fo.value
    target = rel_tol * (phi0 - phi_star)

    x = x0
    phi = phi0
    best_x, best_phi = x0, phi0
    trace: list[TraceRecord] = []
    terminated_by = "tolerance"
    j = 0
    while phi - phi_star > target:
        if j >= iteration_cap:
            terminated_by = "iteration-cap"
            break
        if time_cap is not None and time.perf_counter() - t0 > time_cap:
            terminated_by = "time-cap"
            break
        lam = polyak_stepsize(phi, phi_star, fo.subgradient)
        if lam == 0.0:
            break
        x = solve_affine(obj.h, cut_at(fo, x), x, lam).x
        fo = obj.oracle(x)
        phi = fo.value
        j += 1
        if phi < best_phi:
            best_x, best_phi = x, phi
        trace.append(TraceRecord(j=j, k=j, lam=lam, t=phi - phi_star,
                                 phi_best=best_phi, event="subgrad"))

    return RunReport(
        variant=POL_SUBGRAD, x_final=x, y_final=best_x, phi_y=best_phi,
        gap_bound=best_phi - phi_star, nhat=phi_star, iterations=j,
        serious=j, null=0, bad=0, cycles=j,
        wall_time=time.perf_counter() - t0, terminated_by=terminated_by,
        epsilon=target, lambda1=np.nan, trace=trace, cycle_records=[],
    )


def _polyak_subgrad_absolute(obj: CompositeObjective, x0: np.ndarray,
                             config: SolverConfig) -> RunReport:
    """Adapter so run() drives the baseline from an absolute epsilon."""
    fo = obj.oracle(x0)
    gap0 = fo.value - obj.known_optimum
    rel = 1.0 if gap0 <= 0 else config.epsilon / gap0
    report = polyak_subgrad_run(obj, x0, rel, config.iteration_cap,
                                config.time_cap)
    report.epsilon = config.epsilon
    return report
