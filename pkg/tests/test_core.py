import numpy as np
import pytest

from adbundle import (
    CompositeObjective,
    Cut,
    InfeasiblePointError,
    L1ResidualOracle,
    SimpleTerm,
    compute_constants,
    cut_at,
    eval_phi,
    gen_dense,
    linearization_value,
    make_objective,
    sign,
)


def l1_objective(A, b, h):
    return CompositeObjective(f_oracle=L1ResidualOracle(np.asarray(A, float),
                                                        np.asarray(b, float)),
                              h=h, known_optimum=None)


class TestEvalPhi:
    def test_identity_on_orthant(self):
        obj = l1_objective(np.eye(2), [0.0, 0.0], SimpleTerm.nonneg(2))
        assert eval_phi(obj, [1.0, 2.0]) == 3.0

    def test_orthant_membership_error(self):
        obj = l1_objective(np.eye(2), [0.0, 0.0], SimpleTerm.nonneg(2))
        with pytest.raises(InfeasiblePointError):
            eval_phi(obj, [-1.0, 0.0])

    def test_zero_term_residual(self):
        obj = l1_objective(np.eye(2), [1.0, -1.0], SimpleTerm.zero(2))
        assert eval_phi(obj, [0.0, 0.0]) == 2.0

    def test_deterministic(self):
        inst = gen_dense(5, 8, seed=11)
        obj = make_objective(inst)
        x = np.abs(inst.x0) + 0.5
        assert eval_phi(obj, x) == eval_phi(obj, x)


class TestSign:
    def test_mixed(self):
        assert np.array_equal(sign(np.array([-2.0, 0.0, 3.0])), [-1, 0, 1])

    def test_zero(self):
        assert np.array_equal(sign(np.array([0.0])), [0.0])

    def test_fractional(self):
        assert np.array_equal(sign(np.array([5.5, -0.1])), [1, -1])


class TestLinearization:
    def test_abs_at_two(self):
        cut = Cut(slope=np.array([1.0]), intercept=0.0)
        assert linearization_value(cut, np.array([5.0])) == 5.0

    def test_constant_cut(self):
        cut = Cut(slope=np.array([0.0]), intercept=7.0)
        assert linearization_value(cut, np.array([3.0])) == 7.0

    def test_l1_cut_by_hand(self):
        # f = ||x||_1 at [1,-1]: f = 2, g = [1,-1],
        # value at 0 = f + <g, 0 - x> = 2 - 2 = 0
        cut = Cut(slope=np.array([1.0, -1.0]), intercept=0.0)
        assert linearization_value(cut, np.array([0.0, 0.0])) == 0.0

    def test_dimension_mismatch(self):
        cut = Cut(slope=np.array([1.0, 2.0]), intercept=0.0)
        with pytest.raises(ValueError):
            linearization_value(cut, np.array([1.0]))

    def test_cut_at_is_tight(self):
        inst = gen_dense(6, 9, seed=3)
        obj = make_objective(inst)
        x = inst.x0
        cut = cut_at(obj.oracle(x), x)
        assert linearization_value(cut, x) == pytest.approx(
            obj.f_value(x), rel=1e-12)


class TestMinorant:
    def test_cuts_below_f_at_samples(self):
        inst = gen_dense(8, 12, seed=5)
        obj = make_objective(inst)
        rng = np.random.default_rng(0)
        scale = 2.0 * (inst.x0.max() + inst.x_star.max())
        for _ in range(20):
            x = inst.domain.sample(rng, 1, scale)[0]
            cut = cut_at(obj.oracle(x), x)
            for u in inst.domain.sample(rng, 10, scale):
                fu = obj.f_value(u)
                assert linearization_value(cut, u) <= fu + 1e-9 * max(1.0, abs(fu))

    def test_subgradient_variation_bound(self):
        # f(x) - lin(x; y) <= 2M||x - y||  (L = 0 for piecewise-linear f)
        inst = gen_dense(8, 12, seed=6)
        obj = make_objective(inst)
        M = compute_constants(inst).M
        rng = np.random.default_rng(1)
        scale = 2.0 * (inst.x0.max() + inst.x_star.max())
        for _ in range(50):
            x, y = inst.domain.sample(rng, 2, scale)
            cut = cut_at(obj.oracle(y), y)
            lhs = obj.f_value(x) - linearization_value(cut, x)
            assert lhs <= 2.0 * M * np.linalg.norm(x - y) + 1e-9


class TestSimpleTerm:
    def test_box_ordering_enforced(self):
        with pytest.raises(ValueError):
            SimpleTerm.box([1.0], [0.0])

    def test_diameter_finite_only_for_box(self):
        assert SimpleTerm.box([0.0, 0.0], [3.0, 4.0]).diameter() == 5.0
        assert np.isinf(SimpleTerm.nonneg(2).diameter())
        assert np.isinf(SimpleTerm.zero(2).diameter())

    def test_projection_lands_inside(self):
        rng = np.random.default_rng(2)
        box = SimpleTerm.box([-1.0, 0.0], [1.0, 2.0])
        for term in (SimpleTerm.nonneg(2), box, SimpleTerm.zero(2)):
            for _ in range(10):
                z = rng.normal(size=2) * 3
                assert term.contains(term.project(z))
