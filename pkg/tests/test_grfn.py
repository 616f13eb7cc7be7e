"""Belief calculus tests.

Expected values marked "quadrature" were computed once with
scipy.integrate.quad over the mode distribution (necessity and possibility
of the interval under the conditional fuzzy set) and frozen here.
"""

import math

import numpy as np
import pytest
from scipy.stats import norm

from evsurv.grfn import (GFN, GRFN, Interval, LognormalRFN,
                         UnreachableBeliefError, bel_interval,
                         bel_pl_time_interval, belief_prediction_interval,
                         combine_all, combine_unnormalized, contour,
                         gfn_product, mc_oracle_bel_pl, pl_interval)

STANDARD = GRFN(0.0, 1.0, 1.0)


def random_grfns(n, seed=0, h_max=8.0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        mu = float(rng.uniform(-3.0, 3.0))
        sigma2 = float(rng.uniform(0.0, 4.0))
        h = float(rng.uniform(0.05, h_max))
        out.append(GRFN(mu, sigma2, h))
    return out


class TestValidation:
    def test_interval_rejects_nan_and_empty(self):
        with pytest.raises(ValueError):
            Interval(math.nan, 1.0)
        with pytest.raises(ValueError):
            Interval(2.0, 1.0)

    def test_interval_allows_infinite_endpoints(self):
        iv = Interval(-math.inf, math.inf)
        assert iv.is_full_line
        assert not Interval(0.0, math.inf).is_full_line

    def test_grfn_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            GRFN(math.inf, 1.0, 1.0)
        with pytest.raises(ValueError):
            GRFN(0.0, -1.0, 1.0)
        with pytest.raises(ValueError):
            GRFN(0.0, 1.0, -0.5)

    def test_gfn_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            GFN(math.nan, 1.0)
        with pytest.raises(ValueError):
            GFN(0.0, -1.0)


class TestContour:
    def test_standard_values(self):
        # pl(x) = exp(-x^2/4) / sqrt(2) for GRFN(0, 1, 1)
        assert contour(STANDARD, 0.0) == pytest.approx(1.0 / math.sqrt(2.0),
                                                       abs=1e-15)
        assert contour(STANDARD, 1.0) == pytest.approx(
            math.exp(-0.25) / math.sqrt(2.0), abs=1e-15)

    def test_possibilistic_contour_is_membership(self):
        g = GRFN(0.0, 0.0, 2.0)
        assert contour(g, 1.0) == pytest.approx(math.exp(-1.0), abs=1e-15)
        assert contour(g, 0.0) == 1.0

    def test_vacuous_contour_is_one(self):
        g = GRFN(0.5, 2.0, 0.0)
        for x in (-10.0, 0.0, 7.0):
            assert contour(g, x) == 1.0

    def test_point_interval_matches_contour(self):
        for g in random_grfns(10, seed=3):
            x = g.mu + 0.7
            iv = Interval(x, x)
            assert bel_interval(g, iv) == pytest.approx(0.0, abs=1e-12)
            assert pl_interval(g, iv) == pytest.approx(contour(g, x),
                                                       abs=1e-12)


class TestBoundedIntervals:
    def test_quadrature_case(self):
        g = GRFN(0.3, 0.8, 2.5)
        iv = Interval(-1.0, 1.0)
        assert bel_interval(g, iv) == pytest.approx(0.235691659947107,
                                                    abs=1e-8)
        assert pl_interval(g, iv) == pytest.approx(0.920637418319085,
                                                   abs=1e-8)

    def test_second_quadrature_case(self):
        g = GRFN(1.0, 0.5, 3.0)
        iv = Interval(0.2, 2.5)
        assert bel_interval(g, iv) == pytest.approx(0.407850581822, abs=1e-8)
        assert pl_interval(g, iv) == pytest.approx(0.970990919071, abs=1e-8)

    def test_bel_not_above_pl(self):
        rng = np.random.default_rng(11)
        for g in random_grfns(40, seed=12):
            a = float(rng.uniform(-4.0, 4.0))
            b = a + float(rng.uniform(0.0, 5.0))
            assert bel_interval(g, Interval(a, b)) <= \
                pl_interval(g, Interval(a, b)) + 1e-12

    def test_containment_monotonicity(self):
        rng = np.random.default_rng(21)
        for g in random_grfns(25, seed=22):
            a = float(rng.uniform(-3.0, 0.0))
            b = a + float(rng.uniform(0.5, 3.0))
            grow = float(rng.uniform(0.1, 2.0))
            small = Interval(a, b)
            big = Interval(a - grow, b + grow)
            assert bel_interval(g, big) >= bel_interval(g, small) - 1e-12
            assert pl_interval(g, big) >= pl_interval(g, small) - 1e-12

    def test_full_line_is_certain(self):
        for g in random_grfns(5, seed=31):
            iv = Interval(-math.inf, math.inf)
            assert bel_interval(g, iv) == 1.0
            assert pl_interval(g, iv) == 1.0

    def test_narrow_interval_stays_stable(self):
        # the plain difference of normal cdfs would cancel here
        g = GRFN(0.0, 1.0, 1.0)
        width = 1e-9
        iv = Interval(1.0, 1.0 + width)
        pl = pl_interval(g, iv)
        assert pl == pytest.approx(contour(g, 1.0), rel=1e-6)
        assert bel_interval(g, iv) >= 0.0


class TestHalfLines:
    def test_standard_upper_ray(self):
        g = STANDARD
        iv = Interval(0.0, math.inf)
        assert bel_interval(g, iv) == pytest.approx(0.5 - 0.5 / math.sqrt(2),
                                                    abs=1e-12)
        assert pl_interval(g, iv) == pytest.approx(0.5 + 0.5 / math.sqrt(2),
                                                   abs=1e-12)

    def test_ray_duality(self):
        # bel of a ray and pl of its closed complement sum to one
        rng = np.random.default_rng(41)
        for g in random_grfns(30, seed=42):
            x = float(rng.uniform(-4.0, 4.0))
            up = Interval(x, math.inf)
            down = Interval(-math.inf, x)
            assert bel_interval(g, up) + pl_interval(g, down) == \
                pytest.approx(1.0, abs=1e-12)
            assert pl_interval(g, up) + bel_interval(g, down) == \
                pytest.approx(1.0, abs=1e-12)

    def test_ray_against_mc_oracle(self):
        g = GRFN(0.8, 1.5, 2.0)
        iv = Interval(0.3, math.inf)
        bel, pl, se_b, se_p = mc_oracle_bel_pl(g, iv, 200000, seed=7,
                                               with_stderr=True)
        assert abs(bel_interval(g, iv) - bel) <= 4.0 * se_b
        assert abs(pl_interval(g, iv) - pl) <= 4.0 * se_p


class TestLimits:
    def test_high_precision_recovers_probability(self):
        # h -> inf: bel and pl converge to the N(mu, sigma2) probability
        g = GRFN(0.5, 1.2, 1e8)
        cases = [Interval(-0.5, 1.5), Interval(0.0, math.inf),
                 Interval(-math.inf, 1.0)]
        for iv in cases:
            p = norm.cdf(min(iv.hi, 50.0), loc=0.5, scale=math.sqrt(1.2)) - \
                norm.cdf(max(iv.lo, -50.0), loc=0.5, scale=math.sqrt(1.2))
            assert bel_interval(g, iv) == pytest.approx(p, abs=1e-3)
            assert pl_interval(g, iv) == pytest.approx(p, abs=1e-3)

    def test_vacuous_number(self):
        g = GRFN(0.0, 1.0, 0.0)
        iv = Interval(-1.0, 1.0)
        assert g.is_vacuous
        assert bel_interval(g, iv) == 0.0
        assert pl_interval(g, iv) == 1.0

    def test_possibilistic_bounded(self):
        # sigma2 = 0: necessity / possibility of the fuzzy set GFN(mu, h)
        g = GRFN(0.0, 0.0, 2.0)
        iv = Interval(-1.0, 1.0)
        assert bel_interval(g, iv) == pytest.approx(1.0 - math.exp(-1.0),
                                                    abs=1e-12)
        assert pl_interval(g, iv) == 1.0

    def test_possibilistic_mode_outside(self):
        g = GRFN(0.0, 0.0, 2.0)
        iv = Interval(1.0, 2.0)
        assert bel_interval(g, iv) == 0.0
        assert pl_interval(g, iv) == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_possibilistic_rays(self):
        g = GRFN(0.0, 0.0, 2.0)
        assert bel_interval(g, Interval(-1.0, math.inf)) == \
            pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)
        assert pl_interval(g, Interval(1.0, math.inf)) == \
            pytest.approx(math.exp(-1.0), abs=1e-12)


class TestMCOracle:
    def test_exact_when_mode_deterministic(self):
        g = GRFN(0.0, 0.0, 2.0)
        iv = Interval(-1.0, 1.0)
        bel, pl = mc_oracle_bel_pl(g, iv, 100, seed=0)
        assert bel == pytest.approx(1.0 - math.exp(-1.0), abs=1e-15)
        assert pl == 1.0

    def test_exact_when_vacuous(self):
        g = GRFN(0.0, 4.0, 0.0)
        bel, pl = mc_oracle_bel_pl(g, Interval(0.0, 1.0), 100, seed=0)
        assert bel == 0.0
        assert pl == 1.0

    def test_agrees_on_bounded_interval(self):
        g = GRFN(0.3, 0.8, 2.5)
        iv = Interval(-1.0, 1.0)
        bel, pl, se_b, se_p = mc_oracle_bel_pl(g, iv, 200000, seed=5,
                                               with_stderr=True)
        assert abs(bel_interval(g, iv) - bel) <= 4.0 * se_b
        assert abs(pl_interval(g, iv) - pl) <= 4.0 * se_p

    def test_rejects_nonpositive_n(self):
        with pytest.raises(ValueError):
            mc_oracle_bel_pl(STANDARD, Interval(0.0, 1.0), 0, seed=0)


class TestCombination:
    def test_hand_example(self):
        c = combine_unnormalized(GRFN(0.0, 4.0, 1.0), GRFN(4.0, 0.0, 3.0))
        assert c.mu == pytest.approx(3.0, abs=1e-15)
        assert c.sigma2 == pytest.approx(0.25, abs=1e-15)
        assert c.h == pytest.approx(4.0, abs=1e-15)

    def test_commutative(self):
        for g1, g2 in zip(random_grfns(10, seed=51), random_grfns(10, seed=52)):
            a = combine_unnormalized(g1, g2)
            b = combine_unnormalized(g2, g1)
            assert a.mu == b.mu and a.sigma2 == b.sigma2 and a.h == b.h

    def test_associative(self):
        trips = zip(random_grfns(10, seed=61), random_grfns(10, seed=62),
                    random_grfns(10, seed=63))
        for g1, g2, g3 in trips:
            a = combine_unnormalized(combine_unnormalized(g1, g2), g3)
            b = combine_unnormalized(g1, combine_unnormalized(g2, g3))
            assert a.mu == pytest.approx(b.mu, abs=1e-12)
            assert a.sigma2 == pytest.approx(b.sigma2, rel=1e-12, abs=1e-12)
            assert a.h == pytest.approx(b.h, rel=1e-12)

    def test_vacuous_pair_averages_modes(self):
        c = combine_unnormalized(GRFN(1.0, 2.0, 0.0), GRFN(3.0, 5.0, 0.0))
        assert c.mu == 2.0
        assert c.sigma2 == 0.0
        assert c.h == 0.0

    def test_vacuous_is_neutral_for_h(self):
        g = GRFN(1.0, 2.0, 3.0)
        c = combine_unnormalized(g, GRFN(-5.0, 9.0, 0.0))
        assert c.mu == pytest.approx(g.mu, abs=1e-15)
        assert c.h == pytest.approx(g.h, abs=1e-15)

    def test_combine_all_matches_fold_and_closed_form(self):
        gs = random_grfns(6, seed=71)
        folded = combine_all(gs)
        hs = np.array([g.h for g in gs])
        mus = np.array([g.mu for g in gs])
        s2s = np.array([g.sigma2 for g in gs])
        mu = float((hs * mus).sum() / hs.sum())
        s2 = float((hs ** 2 * s2s).sum() / hs.sum() ** 2)
        assert folded.mu == pytest.approx(mu, abs=1e-12)
        assert folded.sigma2 == pytest.approx(s2, rel=1e-10)
        assert folded.h == pytest.approx(float(hs.sum()), rel=1e-12)

    def test_combine_all_rejects_empty(self):
        with pytest.raises(ValueError):
            combine_all([])

    def test_gfn_product(self):
        p = gfn_product(GFN(0.0, 1.0), GFN(4.0, 3.0))
        assert p.m == pytest.approx(3.0, abs=1e-15)
        assert p.h == pytest.approx(4.0, abs=1e-15)


class TestPredictionIntervals:
    def test_alpha_zero_is_the_mode(self):
        iv = belief_prediction_interval(GRFN(0.7, 1.0, 2.0), 0.0)
        assert iv.lo == iv.hi == 0.7

    def test_high_precision_matches_normal_quantile(self):
        g = GRFN(0.0, 1.0, 1e6)
        iv = belief_prediction_interval(g, 0.95)
        assert iv.hi == pytest.approx(1.959963984540054, abs=0.01)

    def test_reaches_requested_level(self):
        for g in random_grfns(15, seed=81):
            for alpha in (0.3, 0.9):
                iv = belief_prediction_interval(g, alpha)
                assert bel_interval(g, iv) == pytest.approx(alpha, abs=1e-9)
                assert iv.lo == pytest.approx(2 * g.mu - iv.hi, abs=1e-9)

    def test_width_grows_with_alpha(self):
        g = GRFN(0.2, 0.5, 1.5)
        widths = [belief_prediction_interval(g, a).hi - g.mu
                  for a in (0.1, 0.5, 0.9, 0.99)]
        assert all(b > a for a, b in zip(widths, widths[1:]))

    def test_vacuous_raises(self):
        with pytest.raises(UnreachableBeliefError):
            belief_prediction_interval(GRFN(0.0, 1.0, 0.0), 0.5)

    def test_alpha_one_rejected(self):
        with pytest.raises(ValueError):
            belief_prediction_interval(STANDARD, 1.0)


class TestTimeIntervals:
    def test_matches_log_scale_interval(self):
        l = LognormalRFN(GRFN(0.3, 0.8, 2.5))
        bel, pl = bel_pl_time_interval(l, math.exp(-1.0), math.exp(1.0))
        assert bel == pytest.approx(0.235691659947107, abs=1e-8)
        assert pl == pytest.approx(0.920637418319085, abs=1e-8)

    def test_open_upper_end(self):
        l = LognormalRFN(STANDARD)
        bel, pl = bel_pl_time_interval(l, 1.0, math.inf)
        assert bel == pytest.approx(0.5 - 0.5 / math.sqrt(2), abs=1e-12)
        assert pl == pytest.approx(0.5 + 0.5 / math.sqrt(2), abs=1e-12)

    def test_rejects_bad_endpoints(self):
        l = LognormalRFN(STANDARD)
        with pytest.raises(ValueError):
            bel_pl_time_interval(l, 0.0, 1.0)
        with pytest.raises(ValueError):
            bel_pl_time_interval(l, 2.0, 1.0)
