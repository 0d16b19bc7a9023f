import numpy as np
import pytest

from adbundle import (
    Cut,
    SimpleTerm,
    min_affine_plus_h,
    simplex_project,
    solve_affine,
    solve_multi_cut,
    solve_two_cut,
)
from adbundle.errors import UnboundedDomainError

from helpers import (
    grid_min_value,
    random_cut,
    random_prox_problem,
    stationarity_residual,
    subproblem_value,
)


def cut1d(slope, intercept=0.0):
    return Cut(slope=np.array([float(slope)]), intercept=float(intercept))


class TestSolveAffine:
    def test_orthant_clamp(self):
        out = solve_affine(SimpleTerm.nonneg(1), cut1d(1.0), np.zeros(1), 1.0)
        assert out.x[0] == 0.0 and out.m == 0.0

    def test_free_minimum_by_calculus(self):
        # min 2u + u^2  ->  u = -1, value -1; grid-checked below
        out = solve_affine(SimpleTerm.zero(1), cut1d(2.0), np.zeros(1), 0.5)
        assert out.x[0] == pytest.approx(-1.0)
        assert out.m == pytest.approx(-1.0)
        grid = grid_min_value([cut1d(2.0)], SimpleTerm.zero(1),
                              np.zeros(1), 0.5, step=1e-4)
        assert out.m == pytest.approx(grid, abs=1e-6)

    def test_box_clamp_upper(self):
        box = SimpleTerm.box([0.0], [1.0])
        out = solve_affine(box, cut1d(-3.0), np.zeros(1), 1.0)
        assert out.x[0] == 1.0


class TestSolveTwoCut:
    def test_symmetric_kink_on_orthant(self):
        out = solve_two_cut(SimpleTerm.nonneg(1), cut1d(1.0), cut1d(-1.0),
                            np.zeros(1), 1.0)
        assert out.x[0] == 0.0
        assert out.m == 0.0
        assert out.theta == pytest.approx(0.5)

    def test_piecewise_calculus_case(self):
        # cuts u-1 and -u, free domain: kink optimum at u=0.5, theta=0.25
        out = solve_two_cut(SimpleTerm.zero(1), cut1d(1.0, -1.0), cut1d(-1.0),
                            np.zeros(1), 1.0)
        assert out.x[0] == pytest.approx(0.5, abs=1e-9)
        assert out.m == pytest.approx(-0.375, abs=1e-9)
        assert out.theta == pytest.approx(0.25, abs=1e-9)

    def test_identical_cuts_convention(self):
        out = solve_two_cut(SimpleTerm.zero(1), cut1d(2.0), cut1d(2.0),
                            np.zeros(1), 1.0)
        assert out.theta == 0.5
        affine = solve_affine(SimpleTerm.zero(1), cut1d(2.0), np.zeros(1), 1.0)
        assert out.x[0] == affine.x[0] and out.m == affine.m

    def test_random_against_grid(self):
        rng = np.random.default_rng(100)
        for _ in range(30):
            h, cuts, xc, lam = random_prox_problem(rng, n_cuts=2)
            out = solve_two_cut(h, cuts[0], cuts[1], xc, lam)
            grid = grid_min_value(cuts, h, xc, lam)
            assert out.m == pytest.approx(grid, abs=1e-4)
            assert out.residual <= 1e-9

    def test_dual_weight_conditions(self):
        rng = np.random.default_rng(101)
        tol = 1e-12
        for _ in range(30):
            h, cuts, xc, lam = random_prox_problem(rng, n_cuts=2)
            out = solve_two_cut(h, cuts[0], cuts[1], xc, lam, tol=tol)
            c1, c2 = cuts[0].value(out.x), cuts[1].value(out.x)
            blend = out.theta * c1 + (1 - out.theta) * c2
            assert abs(blend - max(c1, c2)) <= 10 * tol + out.residual
            slope = out.theta * cuts[0].slope + (1 - out.theta) * cuts[1].slope
            assert stationarity_residual(h, out.x, xc, lam, slope) <= 10 * tol


class TestSolveMultiCut:
    def test_single_cut_reduces_to_affine(self):
        out = solve_multi_cut(SimpleTerm.zero(1), [cut1d(2.0)], np.zeros(1), 0.5)
        assert np.array_equal(out.theta, [1.0])
        assert out.m == pytest.approx(-1.0)

    def test_two_cuts_match_bisection(self):
        rng = np.random.default_rng(102)
        tol = 1e-12
        for _ in range(20):
            h, cuts, xc, lam = random_prox_problem(rng, n_cuts=2)
            two = solve_two_cut(h, cuts[0], cuts[1], xc, lam, tol=tol)
            multi = solve_multi_cut(h, cuts, xc, lam, tol=tol)
            assert multi.m == pytest.approx(two.m, abs=10 * tol)
            assert np.linalg.norm(multi.x - two.x) <= 10 * tol

    def test_three_cut_kink(self):
        cuts = [cut1d(1.0), cut1d(-1.0), cut1d(0.0)]
        out = solve_multi_cut(SimpleTerm.zero(1), cuts, np.zeros(1), 1.0)
        assert out.x[0] == pytest.approx(0.0, abs=1e-7)
        assert out.m == pytest.approx(0.0, abs=1e-9)
        grid = grid_min_value(cuts, SimpleTerm.zero(1), np.zeros(1), 1.0)
        assert out.m == pytest.approx(grid, abs=1e-4)

    def test_ascent_path_against_grid(self):
        rng = np.random.default_rng(103)
        for _ in range(20):
            n_cuts = int(rng.integers(3, 6))
            h, cuts, xc, lam = random_prox_problem(rng, n_cuts=n_cuts)
            out = solve_multi_cut(h, cuts, xc, lam)
            grid = grid_min_value(cuts, h, xc, lam)
            assert out.m == pytest.approx(grid, abs=1e-4)
            assert out.residual <= 1e-9
            theta = np.asarray(out.theta)
            assert np.all(theta >= -1e-12)
            assert theta.sum() == pytest.approx(1.0, abs=1e-9)


class TestSimplexProject:
    def test_already_feasible(self):
        assert np.allclose(simplex_project(np.array([0.5, 0.5])), [0.5, 0.5])

    def test_vertex(self):
        assert np.allclose(simplex_project(np.array([2.0, 0.0])), [1.0, 0.0])

    def test_symmetry(self):
        assert np.allclose(simplex_project(np.array([1.0, 1.0])), [0.5, 0.5])

    def test_kkt_conditions(self):
        rng = np.random.default_rng(104)
        for _ in range(50):
            v = rng.normal(size=int(rng.integers(1, 6))) * 3
            p = simplex_project(v)
            assert np.all(p >= 0)
            assert p.sum() == pytest.approx(1.0, abs=1e-12)
            # multipliers: v - p constant on the support, smaller off it
            support = p > 1e-12
            mults = v - p
            if support.any():
                mu = mults[support].mean()
                assert np.allclose(mults[support], mu, atol=1e-9)
                assert np.all(mults[~support] <= mu + 1e-9)


class TestMinAffinePlusH:
    def test_componentwise_box(self):
        box = SimpleTerm.box([0.0, 0.0], [1.0, 1.0])
        cut = Cut(slope=np.array([1.0, -1.0]), intercept=0.0)
        assert min_affine_plus_h(box, cut) == -1.0

    def test_constant(self):
        box = SimpleTerm.box([0.0], [2.0])
        assert min_affine_plus_h(box, cut1d(0.0, 5.0)) == 5.0

    def test_negative_slope_by_hand(self):
        box = SimpleTerm.box([-1.0], [1.0])
        assert min_affine_plus_h(box, cut1d(3.0, 1.0)) == -2.0

    def test_unbounded_domain_errors(self):
        with pytest.raises(UnboundedDomainError):
            min_affine_plus_h(SimpleTerm.nonneg(1), cut1d(1.0))
        with pytest.raises(UnboundedDomainError):
            min_affine_plus_h(SimpleTerm.zero(1), cut1d(1.0))


class TestSolutionProperties:
    def test_strong_convexity_certificate(self):
        rng = np.random.default_rng(105)
        for _ in range(10):
            h, cuts, xc, lam = random_prox_problem(rng, n_cuts=3)
            out = solve_multi_cut(h, cuts, xc, lam)
            U = h.sample(rng, 100, scale=1.5)
            vals = subproblem_value(cuts, h, xc, lam, U)
            lower = out.m + np.sum((U - out.x) ** 2, axis=1) / (2 * lam)
            slack = 10 * 1e-10 + out.residual
            assert np.all(vals >= lower - slack)

    def test_prox_monotonicity_in_lambda(self):
        rng = np.random.default_rng(106)
        for _ in range(20):
            h, cuts, xc, _ = random_prox_problem(rng, n_cuts=2)
            lam_big = float(rng.uniform(1.0, 3.0))
            lam_small = lam_big * float(rng.uniform(0.1, 0.9))
            big = solve_two_cut(h, cuts[0], cuts[1], xc, lam_big)
            small = solve_two_cut(h, cuts[0], cuts[1], xc, lam_small)
            dist_small = np.linalg.norm(small.x - xc)
            dist_big = np.linalg.norm(big.x - xc)
            assert dist_small <= dist_big + 1e-9
