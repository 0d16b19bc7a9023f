import math

import numpy as np
import pytest

from adbundle import (
    BoundInputs,
    bad_iter_bound,
    cycle_len_bound,
    k_bar,
    k_hat,
    lambda_lower,
    q_bar,
    t_bar,
    total_iter_bound_general,
    total_iter_bound_known,
)
from adbundle.errors import UnboundedDomainError


# Independent plain-float evaluators, written separately from the module
# implementations, used both for spot values and the randomized cross-check.

def _log_plus(x):
    return max(math.log(x), 0.0) if x > 0 else 0.0


def _log2_plus(x):
    return max(math.log2(x), 0.0) if x > 0 else 0.0


def naive_lambda_lower(tau, eps, M, L):
    a = tau * eps / (128 * (1 - tau) * M * M) if M > 0 else math.inf
    b = tau / (8 * (1 - tau) * L) if L > 0 else math.inf
    return min(a, b)


def naive_k_hat(i):
    qb = 128 * (1 - i.tau) / i.tau
    return math.ceil(2 * i.d0 ** 2 * qb / i.epsilon
                     * (i.M ** 2 / i.epsilon + i.L / 16 + 1 / (i.lambda1 * qb)))


def naive_k_bar(i):
    qb = 128 * (1 - i.tau) / i.tau
    core = (2 * i.D ** 2 * qb / i.epsilon
            * (i.M ** 2 / i.epsilon + i.L / 16 + 1 / (i.lambda1 * qb)))
    return 2 * math.ceil(core + _log_plus(i.beta0 * i.phi_gap0 / i.epsilon) + 1)


def naive_total_known(i):
    qb = 128 * (1 - i.tau) / i.tau
    tb = 2 * i.M * i.D + 0.5 * i.L * i.D ** 2
    per = (1 + i.tau) / (1 - i.tau) * _log_plus(8 * tb / i.epsilon) + 2
    head = _log2_plus(qb * i.lambda1 * (i.M ** 2 / i.epsilon + i.L / 16))
    return math.floor(head + per * naive_k_hat(i))


def naive_total_general(i):
    qb = 128 * (1 - i.tau) / i.tau
    tb = 2 * i.M * i.D + 0.5 * i.L * i.D ** 2
    per = (1 + i.tau) / (1 - i.tau) * _log_plus(8 * tb / i.epsilon) + 2
    head = _log2_plus(qb * i.lambda1 * (i.M ** 2 / i.epsilon + i.L / 16))
    return math.floor(4 * naive_k_bar(i) * per + head)


class TestLambdaLower:
    def test_both_terms(self):
        assert lambda_lower(0.5, 1.0, 1.0, 1.0) == pytest.approx(
            min(1 / 128, 1 / 8))
        assert lambda_lower(0.5, 1.0, 1.0, 1.0) == 0.0078125

    def test_l_zero_keeps_first_term(self):
        assert lambda_lower(0.5, 1.0, 1.0, 0.0) == pytest.approx(1 / 128)

    def test_hand_value(self):
        # 0.95*0.01 / (128*0.05) = 1.484375e-3
        assert lambda_lower(0.95, 1e-2, 1.0, 0.0) == pytest.approx(
            1.484375e-3, rel=1e-12)

    def test_both_zero_is_infinite(self):
        assert lambda_lower(0.5, 1.0, 0.0, 0.0) == math.inf


class TestScalars:
    def test_q_bar(self):
        assert q_bar(0.95) == pytest.approx(6.4 / 0.95)

    def test_t_bar_values(self):
        assert t_bar(1.0, 0.0, 2.0) == 4.0
        assert t_bar(0.0, 2.0, 1.0) == 1.0

    def test_t_bar_unbounded(self):
        with pytest.raises(UnboundedDomainError):
            t_bar(1.0, 0.0, math.inf)


class TestGeneralBounds:
    def hand_inputs(self):
        return BoundInputs(epsilon=1.0, tau=0.5, lambda1=1.0, M=1.0, L=0.0,
                           D=1.0, beta0=0.5, phi_gap0=1.0)

    def test_k_bar_hand_value(self):
        # core = 256*(1 + 1/128) = 258, log+(0.5) = 0, +1 -> ceil(259) = 259
        assert k_bar(self.hand_inputs()) == 518

    def test_total_general_hand_value(self):
        # 4*518*(3*ln(16) + 2) + log2(128) = 21378.41... + 7 -> 21385
        assert total_iter_bound_general(self.hand_inputs()) == 21385

    def test_log_plus_terms_vanish(self):
        i = BoundInputs(epsilon=10.0, tau=0.5, lambda1=1e-3, M=1e-3, L=0.0,
                        D=1.0, beta0=0.5, phi_gap0=1.0)
        # every log argument <= 1: the bound is the pure rational core
        assert k_bar(i) == naive_k_bar(i)

    def test_monotone_in_epsilon(self):
        base = self.hand_inputs()
        tighter = BoundInputs(epsilon=0.5, tau=0.5, lambda1=1.0, M=1.0,
                              L=0.0, D=1.0, beta0=0.5, phi_gap0=1.0)
        assert k_bar(tighter) >= k_bar(base)

    def test_needs_finite_diameter(self):
        i = BoundInputs(epsilon=1.0, tau=0.5, lambda1=1.0, M=1.0,
                        beta0=0.5, phi_gap0=1.0)
        with pytest.raises(UnboundedDomainError):
            k_bar(i)


class TestKnownBounds:
    def test_k_hat_hand_value(self):
        # 20*Qbar*(10 + 1/Qbar) = 200*Qbar + 20 = 1367.368... -> 1368
        i = BoundInputs(epsilon=0.1, tau=0.95, lambda1=1.0, M=1.0, L=0.0,
                        d0=1.0)
        assert k_hat(i) == 1368

    def test_d0_zero(self):
        i = BoundInputs(epsilon=0.1, tau=0.95, lambda1=1.0, M=1.0, d0=0.0)
        assert k_hat(i) == 0

    def test_quadratic_scaling_in_inverse_epsilon(self):
        a = BoundInputs(epsilon=1e-3, tau=0.95, lambda1=1.0, M=1.0, d0=1.0)
        b = BoundInputs(epsilon=5e-4, tau=0.95, lambda1=1.0, M=1.0, d0=1.0)
        assert 3.5 <= k_hat(b) / k_hat(a) <= 4.5

    def test_total_known_matches_naive(self):
        i = BoundInputs(epsilon=0.1, tau=0.95, lambda1=1.0, M=1.0, L=0.0,
                        D=1.0, d0=1.0)
        assert total_iter_bound_known(i) == naive_total_known(i)

    def test_total_known_unbounded_without_measurement(self):
        i = BoundInputs(epsilon=0.1, tau=0.95, lambda1=1.0, M=1.0, d0=1.0)
        assert total_iter_bound_known(i) == math.inf

    def test_total_known_with_measured_gap(self):
        i = BoundInputs(epsilon=0.1, tau=0.95, lambda1=1.0, M=1.0, d0=1.0,
                        t_start_max=2.0)
        j = BoundInputs(epsilon=0.1, tau=0.95, lambda1=1.0, M=1.0, d0=1.0,
                        D=1.0)
        # measured gap 2.0 equals t_bar(M=1, L=0, D=1): identical ceilings
        assert total_iter_bound_known(i) == total_iter_bound_known(j)


class TestCycleLenBound:
    def test_small_gap_collapses(self):
        assert cycle_len_bound(0.01, 0.1, 0.95, 2) == 3  # 8t <= eps

    def test_monotone_in_tau(self):
        assert cycle_len_bound(1.0, 0.1, 0.9, 0) <= cycle_len_bound(
            1.0, 0.1, 0.95, 0)

    def test_hand_value(self):
        # s + ceil(3 * ln(80)) + 1 = 2 + 14 + 1
        assert cycle_len_bound(1.0, 0.1, 0.5, 2) == 17

    def test_nonpositive_gap(self):
        assert cycle_len_bound(-0.5, 0.1, 0.95, 0) == 1


class TestBadIterBound:
    def test_equal(self):
        assert bad_iter_bound(1.0, 1.0) == 0

    def test_power_of_eight(self):
        assert bad_iter_bound(8.0, 1.0) == 3

    def test_infinite_floor(self):
        assert bad_iter_bound(5.0, math.inf) == 0

    def test_non_power_ratio(self):
        assert bad_iter_bound(9.0, 1.0) == 4  # 2^3 < 9 <= 2^4
        assert bad_iter_bound(7.9, 1.0) == 3


class TestCrossCheck:
    """20 random tuples against the independently written evaluators."""

    def test_random_tuples(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            i = BoundInputs(
                epsilon=float(10 ** rng.uniform(-6, 1)),
                tau=float(rng.uniform(0.3, 0.99)),
                lambda1=float(10 ** rng.uniform(-4, 3)),
                M=float(10 ** rng.uniform(-2, 5)),
                L=float(rng.choice([0.0, 10 ** rng.uniform(-2, 2)])),
                D=float(10 ** rng.uniform(-1, 3)),
                d0=float(10 ** rng.uniform(-1, 3)),
                beta0=float(rng.uniform(0.01, 0.5)),
                phi_gap0=float(10 ** rng.uniform(-2, 6)),
            )
            assert lambda_lower(i.tau, i.epsilon, i.M, i.L) == pytest.approx(
                naive_lambda_lower(i.tau, i.epsilon, i.M, i.L), rel=1e-12)

            def close(a, b):
                # ceilings may sit on either side of a float-rounded
                # expression: allow one count plus float drift
                return abs(a - b) <= 1 + 1e-9 * max(abs(a), abs(b))

            assert close(k_hat(i), naive_k_hat(i))
            assert close(k_bar(i), naive_k_bar(i))
            assert close(total_iter_bound_known(i), naive_total_known(i))
            assert close(total_iter_bound_general(i), naive_total_general(i))
            lam_lo = lambda_lower(i.tau, i.epsilon, i.M, i.L)
            if math.isfinite(lam_lo) and i.lambda1 > lam_lo:
                naive_bad = math.ceil(_log2_plus(i.lambda1 / lam_lo))
                assert abs(bad_iter_bound(i.lambda1, lam_lo) - naive_bad) <= 1
