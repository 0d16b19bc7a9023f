"""Executable evaluators for the solver's worst-case complexity ceilings.

Each function turns one of the guarantees (cycle counts, total iterations,
per-cycle lengths, bad-iteration budget, stepsize floor) into a number that
measured runs can be checked against.  log is natural except where log2 is
written, and log+ means max(log(.), 0) applied before any ceiling.

Integer ceilings are computed exactly: purely rational expressions go
through fractions.Fraction, and expressions containing logarithms are
evaluated with 60-digit mpmath arithmetic (an irrational log term never
lands exactly on an integer, so 60 digits decide the ceiling correctly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .errors import UnboundedDomainError

_DPS = 60


@dataclass
class BoundInputs:
    """Inputs shared by the bound evaluators.

    t_start_max is the largest measured cycle-start gap; it stands in for
    the diameter-based ceiling t_bar when the domain is unbounded.
    phi_gap0 is phi(x0) minus the initial lower bound (general case only).
    """

    epsilon: float
    tau: float
    lambda1: float
    M: float
    L: float = 0.0
    D: float = math.inf
    d0: float = math.inf
    beta0: float = 0.5
    phi_gap0: float | None = None
    t_start_max: float | None = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")
        if self.lambda1 <= 0:
            raise ValueError("lambda1 must be positive")


def lambda_lower(tau: float, epsilon: float, M: float, L: float) -> float:
    """Floor under which the driver never needs to halve the stepsize;
    +inf when both curvature terms vanish."""
    terms = []
    if M > 0:
        terms.append(tau * epsilon / (128.0 * (1.0 - tau) * M * M))
    if L > 0:
        terms.append(tau / (8.0 * (1.0 - tau) * L))
    return min(terms) if terms else math.inf


def q_bar(tau: float) -> float:
    return 128.0 * (1.0 - tau) / tau


def t_bar(M: float, L: float, D: float) -> float:
    """Uniform ceiling on the cycle-start gap over a bounded domain."""
    if not math.isfinite(D):
        raise UnboundedDomainError("t_bar needs a finite domain diameter")
    return 2.0 * M * D + 0.5 * L * D * D


def _frac_ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _rational_core(D_or_d0: float, inputs: BoundInputs) -> Fraction:
    """2 r^2 Qbar / eps * (M^2/eps + L/16 + 1/(lambda1 Qbar)) exactly."""
    eps = Fraction(inputs.epsilon)
    tau = Fraction(inputs.tau)
    qb = 128 * (1 - tau) / tau
    r2 = Fraction(D_or_d0) ** 2
    inner = Fraction(inputs.M) ** 2 / eps + Fraction(inputs.L) / 16 + 1 / (
        Fraction(inputs.lambda1) * qb
    )
    return 2 * r2 * qb / eps * inner


def k_hat(inputs: BoundInputs) -> int:
    """Cycle ceiling when the optimal value is known (needs d0)."""
    if not math.isfinite(inputs.d0):
        raise ValueError("k_hat needs a finite d0")
    return _frac_ceil(_rational_core(inputs.d0, inputs))


def k_bar(inputs: BoundInputs) -> int:
    """Half the cycle ceiling of the general (estimated lower bound) case;
    the run may use at most 4 * k_bar cycles."""
    if not math.isfinite(inputs.D):
        raise UnboundedDomainError("k_bar needs a finite domain diameter")
    if inputs.phi_gap0 is None:
        raise ValueError("k_bar needs phi_gap0")
    core = _rational_core(inputs.D, inputs) + 1
    log_arg = inputs.beta0 * inputs.phi_gap0 / inputs.epsilon
    if log_arg <= 1.0:
        return 2 * _frac_ceil(core)
    with mp.workdps(_DPS):
        total = mp.mpf(core.numerator) / mp.mpf(core.denominator) + mp.log(log_arg)
        return 2 * int(mp.ceil(total))


def _per_cycle_term(tau: float, t_top: float, epsilon: float):
    """(1+tau)/(1-tau) * log+[8 t / eps] + 2 as an mpf."""
    arg = 8.0 * t_top / epsilon
    lead = (1 + mp.mpf(tau)) / (1 - mp.mpf(tau))
    logp = mp.log(arg) if arg > 1.0 else mp.mpf(0)
    return lead * logp + 2


def _log2_plus_term(inputs: BoundInputs):
    arg = q_bar(inputs.tau) * inputs.lambda1 * (
        inputs.M ** 2 / inputs.epsilon + inputs.L / 16.0
    )
    return mp.log(arg, 2) if arg > 1.0 else mp.mpf(0)


def _effective_t_top(inputs: BoundInputs) -> float:
    if math.isfinite(inputs.D):
        return t_bar(inputs.M, inputs.L, inputs.D)
    if inputs.t_start_max is not None:
        return inputs.t_start_max
    return math.inf


def total_iter_bound_general(inputs: BoundInputs) -> int:
    """Total-iteration ceiling for the general case."""
    kb = k_bar(inputs)
    with mp.workdps(_DPS):
        tt = _effective_t_top(inputs)
        total = 4 * kb * _per_cycle_term(inputs.tau, tt, inputs.epsilon)
        total += _log2_plus_term(inputs)
        return int(mp.floor(total))


def total_iter_bound_known(inputs: BoundInputs):
    """Total-iteration ceiling for the known-optimum case; +inf when the
    domain is unbounded and no measured cycle-start gap was supplied."""
    kh = k_hat(inputs)
    tt = _effective_t_top(inputs)
    if not math.isfinite(tt):
        return math.inf
    with mp.workdps(_DPS):
        total = _log2_plus_term(inputs)
        total += _per_cycle_term(inputs.tau, tt, inputs.epsilon) * kh
        return int(mp.floor(total))


def cycle_len_bound(t_ik: float, epsilon: float, tau: float, s_k: int) -> int:
    """Ceiling on one cycle's length from its measured starting gap and its
    bad-iteration count."""
    arg = 8.0 * t_ik / epsilon
    if arg <= 1.0:
        nbar = 0
    else:
        with mp.workdps(_DPS):
            lead = (1 + mp.mpf(tau)) / (1 - mp.mpf(tau))
            nbar = int(mp.ceil(lead * mp.log(arg)))
    return s_k + nbar + 1


def bad_iter_bound(lambda1: float, lam_lower: float) -> int:
    """ceil(log2+(lambda1 / lam_lower)), exactly."""
    if not math.isfinite(lam_lower) or lambda1 <= lam_lower:
        return 0
    ratio = Fraction(lambda1) / Fraction(lam_lower)
    p = max(0, ratio.numerator.bit_length() - ratio.denominator.bit_length() - 1)
    while Fraction(2) ** p < ratio:
        p += 1
    while p > 0 and Fraction(2) ** (p - 1) >= ratio:
        p -= 1
    return p
