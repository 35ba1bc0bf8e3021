import numpy as np
import pytest

from sociolex.analysis import (HOURS_PER_WEEK, binned_regression,
                               multivariate_regression, pearson,
                               similarity_distributions, spatial_aggregate,
                               temporal_profile)
from sociolex.geoloc import GridCell, HomeLocation, RegionMap
from sociolex.lingmark import LinguisticProfile
from sociolex.socionet import CATEGORIES, MentionGraph


class TestBinnedRegression:
    def test_flat_response(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(0, 10, 2000)
        y = np.full(2000, 0.5)
        result, _ = binned_regression(x, y, n_bins=25, seed=1, n_perm=500, n_boot=100)
        assert result.slope == pytest.approx(0.0, abs=1e-12)
        assert result.r2 == 0.0
        assert result.p > 0.9

    def test_exact_linear_recovery(self):
        rng = np.random.default_rng(1)
        for n_bins in (20, 35, 50):
            x = rng.uniform(-3, 7, 3000)
            y = 2.5 * x - 1.0
            result, points = binned_regression(x, y, n_bins=n_bins, seed=2,
                                               n_perm=200, n_boot=50)
            assert result.slope == pytest.approx(2.5, rel=1e-9)
            assert result.r2 == pytest.approx(1.0, abs=1e-12)
            assert result.p == pytest.approx(1 / 201)
            assert points.counts.sum() == 3000

    def test_log_equivalence(self):
        rng = np.random.default_rng(2)
        x = rng.uniform(0.5, 4.0, 1500)
        y = 0.3 * x + rng.normal(0, 0.05, 1500)
        direct, pd_ = binned_regression(x, y, n_bins=20, seed=3, n_perm=100, n_boot=50)
        logged, pl = binned_regression(np.exp(x), y, n_bins=20, log_x=True,
                                       seed=3, n_perm=100, n_boot=50)
        assert np.allclose(pd_.centers, pl.centers, atol=1e-9)
        assert np.allclose(pd_.means, pl.means, atol=1e-9)
        assert direct.slope == pytest.approx(logged.slope, abs=1e-9)

    def test_ci_band_brackets_line(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(0, 1, 5000)
        y = x + rng.normal(0, 0.2, 5000)
        result, points = binned_regression(x, y, n_bins=20, seed=4,
                                           n_perm=100, n_boot=300)
        line = result.intercept + result.slope * points.centers
        assert np.all(result.ci95_low <= line + 1e-9)
        assert np.all(line <= result.ci95_high + 1e-9)

    def test_errors(self):
        x = np.linspace(1, 10, 100)
        with pytest.raises(ValueError):
            binned_regression(x, x, n_bins=19)
        with pytest.raises(ValueError):
            binned_regression(x, x, n_bins=51)
        with pytest.raises(ValueError):
            binned_regression(np.concatenate([[-1.0], x[1:]]), x, n_bins=20, log_x=True)
        with pytest.raises(ValueError):
            binned_regression(np.repeat([1.0, 2.0], 50), x, n_bins=20)

    def test_seeded_reproducible(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(0, 1, 800)
        y = x + rng.normal(0, 0.3, 800)
        a, _ = binned_regression(x, y, n_bins=20, seed=9, n_perm=300, n_boot=100)
        b, _ = binned_regression(x, y, n_bins=20, seed=9, n_perm=300, n_boot=100)
        assert a.p == b.p
        assert np.array_equal(a.ci95_low, b.ci95_low)


class TestPearson:
    def test_perfect_linear(self):
        x = np.arange(50.0)
        r, p = pearson(x, 2 * x + 1, n_perm=200, seed=0)
        assert r == pytest.approx(1.0)
        assert p == pytest.approx(1 / 201)

    def test_perfect_antilinear(self):
        x = np.arange(50.0)
        r, _ = pearson(x, -x, n_perm=100, seed=0)
        assert r == pytest.approx(-1.0)

    def test_scaling_never_flips(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(0, 1, 100)
        for a in (0.001, 3.0, 1e6):
            assert pearson(x, a * x + 5, n_perm=50, seed=0)[0] == pytest.approx(1.0)
            assert pearson(x, -a * x + 5, n_perm=50, seed=0)[0] == pytest.approx(-1.0)

    def test_independent_uniforms(self):
        rng = np.random.default_rng(6)
        x = rng.uniform(0, 1, 1000)
        y = rng.uniform(0, 1, 1000)
        r, p = pearson(x, y, n_perm=2000, seed=7)
        assert abs(r) < 0.1
        assert p > 0.05

    def test_zero_variance_error(self):
        with pytest.raises(ValueError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_too_short(self):
        with pytest.raises(ValueError):
            pearson([1.0, 2.0], [1.0, 2.0])


class TestTemporalProfile:
    def test_all_standard_constant_one(self):
        obs = [(f"u{i}", h, True) for i in range(5) for h in range(0, 168, 7)]
        prof = temporal_profile(obs, [], {})
        defined = prof.values[~np.isnan(prof.values)]
        assert defined.size > 0
        assert np.all(defined == 1.0)

    def test_single_hour_support(self):
        obs = [("u1", 0, True), ("u2", 0, False)]
        prof = temporal_profile(obs, [], {})
        assert prof.values[0] == 0.5
        assert np.isnan(prof.values[1:]).all()

    def test_cyclic_shift_equivariance(self):
        rng = np.random.default_rng(8)
        obs = [(f"u{i}", int(h), bool(s)) for i, (h, s) in enumerate(
            zip(rng.integers(0, 168, 400), rng.random(400) < 0.6))]
        base = temporal_profile(obs, [], {}).values
        shift = 5
        shifted = temporal_profile(
            [(u, (h + shift) % HOURS_PER_WEEK, s) for u, h, s in obs], [], {}).values
        assert np.array_equal(np.isnan(base), np.isnan(np.roll(shifted, -shift)))
        np.testing.assert_allclose(
            base[~np.isnan(base)], np.roll(shifted, -shift)[~np.isnan(base)])

    def test_income_overlay_distinct_users(self):
        # u1 active twice in hour 3 counts once in the overlay
        activity = [("u1", 3), ("u1", 3), ("u2", 3)]
        prof = temporal_profile([], activity, {"u1": 10.0, "u2": 30.0})
        assert prof.income_overlay[3] == 20.0

    def test_member_filter(self):
        obs = [("a", 0, True), ("b", 0, False)]
        prof = temporal_profile(obs, [], {}, members={"a"})
        assert prof.values[0] == 1.0


def home_at(easting, northing):
    return HomeLocation("u", GridCell(easting, northing, 100), 1, 1)


class TestSpatialAggregate:
    def region_map(self):
        rm = RegionMap(cell_size_m=200)
        rm.add(0, 0, "department", "D1")
        rm.add(1000, 0, "department", "D2")
        return rm

    def test_single_unit_equals_global_mean(self):
        homes = {f"u{i}": HomeLocation(f"u{i}", GridCell(0, 0, 100), 1, 1)
                 for i in range(4)}
        profiles = {f"u{i}": LinguisticProfile(0.1 * i, None, None) for i in range(4)}
        rows, unassigned = spatial_aggregate(homes, profiles, self.region_map(),
                                             "department", "cn")
        assert unassigned == 0
        assert rows == [("D1", pytest.approx(0.15), 4)]

    def test_two_separated_units(self):
        homes = {"a": HomeLocation("a", GridCell(0, 0, 100), 1, 1),
                 "b": HomeLocation("b", GridCell(1000, 0, 100), 1, 1)}
        profiles = {"a": LinguisticProfile(0.2, None, None),
                    "b": LinguisticProfile(0.8, None, None)}
        rows, _ = spatial_aggregate(homes, profiles, self.region_map(),
                                    "department", "cn")
        assert rows == [("D1", pytest.approx(0.2), 1), ("D2", pytest.approx(0.8), 1)]

    def test_uncovered_homes_counted(self):
        homes = {"a": HomeLocation("a", GridCell(5000, 5000, 100), 1, 1)}
        profiles = {"a": LinguisticProfile(0.2, None, None)}
        rows, unassigned = spatial_aggregate(homes, profiles, self.region_map(),
                                             "department", "cn")
        assert rows == []
        assert unassigned == 1


class TestSimilarityDistributions:
    def two_class_graph(self):
        nodes = [f"n{i:02d}" for i in range(16)]
        classes = {u: (1 if i < 8 else 2) for i, u in enumerate(nodes)}
        edges = [(nodes[i], nodes[i + 1]) for i in range(7)]
        edges += [(nodes[8], nodes[9]), (nodes[3], nodes[12])]
        return MentionGraph(nodes, edges), classes

    def test_degenerate_point_mass(self):
        g, classes = self.two_class_graph()
        profiles = {u: LinguisticProfile(0.5, 0.5, 1.0) for u in g.node_ids}
        dists = similarity_distributions(g, classes, profiles, "cn",
                                         n=500, seed=0)
        assert set(dists) == set(CATEGORIES)
        for dist in dists.values():
            assert dist.counts.sum() == 500
            assert dist.counts[0] == 500
            assert dist.mean_abs_diff == 0.0

    def test_missing_marker_resampled(self):
        g, classes = self.two_class_graph()
        profiles = {u: LinguisticProfile((0.3 if u != "n15" else None), None, None)
                    for u in g.node_ids}
        dists = similarity_distributions(g, classes, profiles, "cn", n=200, seed=1)
        assert dists["disconnected-random"].n_resampled > 0
        assert dists["disconnected-random"].counts.sum() == 200

    def test_unsatisfiable_category(self):
        g, classes = self.two_class_graph()
        profiles = {u: LinguisticProfile(None, None, None) for u in g.node_ids}
        with pytest.raises(ValueError):
            similarity_distributions(g, classes, profiles, "cn", n=10, seed=2)


class TestMultivariate:
    def test_income_only_effect(self):
        rng = np.random.default_rng(9)
        n = 500
        lat = rng.uniform(41, 51, n)
        lon = rng.uniform(-5, 9, n)
        inc = rng.uniform(10, 50, n)
        y = 3.0 * (inc - inc.mean()) / inc.std()
        res = multivariate_regression(y, {"lat": lat, "lon": lon, "inc": inc})
        assert res.coefficients["inc"] == pytest.approx(3.0, abs=1e-9)
        assert abs(res.coefficients["lat"]) < 1e-9
        assert abs(res.coefficients["lon"]) < 1e-9
        assert res.r2 == pytest.approx(1.0)

    def test_identity_on_standardized_regressor(self):
        rng = np.random.default_rng(10)
        lat = rng.uniform(41, 51, 100)
        others = {"lon": rng.uniform(-5, 9, 100), "inc": rng.uniform(10, 50, 100)}
        zlat = (lat - lat.mean()) / lat.std()
        res = multivariate_regression(zlat, {"lat": lat, **others})
        assert res.coefficients["lat"] == pytest.approx(1.0, abs=1e-9)
        assert abs(res.coefficients["lon"]) < 1e-9

    def test_collinear_named(self):
        rng = np.random.default_rng(11)
        x = rng.uniform(0, 1, 50)
        with pytest.raises(ValueError, match="lat.*lon|lon.*lat"):
            multivariate_regression(x, {"lat": x, "lon": 2 * x + 1,
                                        "inc": rng.uniform(0, 1, 50)})

    def test_minimum_rows(self):
        with pytest.raises(ValueError):
            multivariate_regression([1.0] * 5, {"a": [1, 2, 3, 4, 5]})
