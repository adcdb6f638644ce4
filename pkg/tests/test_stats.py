import itertools
import math

import numpy as np
import pytest
from scipy import stats as sps

from ksikit import events as ev
from ksikit.errors import DataError
from ksikit.stats import (
    EXACT_N_MAX,
    discomfort_score,
    error_rate,
    filter_outliers,
    fit_power_law,
    median_then_mean,
    shapiro_wilk,
    wilcoxon_effect_size,
    wilcoxon_signed_rank,
)


# --- independent oracles (written against the definitions, not the code) ----

def wilcoxon_oracle_exact(x, y):
    """Literal enumeration over every sign assignment of the ranked |diffs|."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    d = d[d != 0]
    ranks = sps.rankdata(np.abs(d))
    w_obs = float(ranks[d > 0].sum())
    count_le = count_ge = 0
    total = 0
    for signs in itertools.product((0.0, 1.0), repeat=len(d)):
        w = float(np.dot(signs, ranks))
        count_le += w <= w_obs
        count_ge += w >= w_obs
        total += 1
    return min(1.0, 2.0 * min(count_le, count_ge) / float(total))


def outlier_oracle(xs):
    xs = list(map(float, xs))
    n = len(xs)
    mean = sum(xs) / n
    var = sum((v - mean) ** 2 for v in xs) / (n - 1)
    sd = math.sqrt(var)
    if sd == 0:
        return xs
    return [v for v in xs if abs(v - mean) <= 3 * sd]


class TestFilterOutliers:
    def test_all_equal_unchanged(self):
        assert list(filter_outliers([5, 5, 5, 5])) == [5, 5, 5, 5]

    def test_mild_extreme_survives(self):
        # sd is inflated by the extreme point itself: 100 is only ~1.79 sd out
        xs = [1, 1, 1, 1, 100]
        assert list(filter_outliers(xs)) == xs
        diffs = np.abs(np.array(xs) - np.mean(xs)) / np.std(xs, ddof=1)
        assert diffs.max() == pytest.approx(1.789, abs=1e-3)

    def test_injected_point_removed(self):
        rng = np.random.default_rng(0)
        xs = np.concatenate([rng.normal(0, 1, 100), [50.0]])
        out = filter_outliers(xs)
        assert 50.0 not in out
        assert len(out) == 100
        assert list(out) == outlier_oracle(xs)

    def test_matches_oracle_randomly(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            xs = rng.normal(0, rng.uniform(0.5, 4), size=rng.integers(2, 40))
            assert list(filter_outliers(xs)) == outlier_oracle(xs)

    def test_survivors_within_three_sd_of_original(self):
        rng = np.random.default_rng(5)
        xs = rng.standard_t(2, size=500)
        out = filter_outliers(xs)
        mean, sd = xs.mean(), xs.std(ddof=1)
        assert np.all(np.abs(out - mean) <= 3 * sd)

    def test_insufficient_data(self):
        with pytest.raises(DataError):
            filter_outliers([1.0])


class TestMedianThenMean:
    def test_single_group(self):
        assert median_then_mean({3: [1, 2, 3]}) == pytest.approx(2.0)

    def test_three_groups(self):
        assert median_then_mean({3: [1, 1, 1], 4: [2, 2, 2], 5: [3, 3, 3]}) == pytest.approx(2.0)

    def test_matches_two_step_oracle(self):
        rng = np.random.default_rng(1)
        groups = {k: rng.uniform(0, 5, size=rng.integers(1, 30)).tolist() for k in (3, 4, 5)}
        expected = np.mean([np.median(groups[k]) for k in (3, 4, 5)])
        assert median_then_mean(groups) == pytest.approx(expected, abs=1e-12)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(2)
        groups = {k: rng.uniform(0, 5, 21).tolist() for k in (3, 4, 5)}
        shuffled = {k: list(np.random.default_rng(k).permutation(v)) for k, v in groups.items()}
        assert median_then_mean(groups) == median_then_mean(shuffled)

    def test_empty_group_error(self):
        with pytest.raises(DataError, match="4"):
            median_then_mean({3: [1.0], 4: []})

    def test_error_rate_example(self):
        assert error_rate({3: [0, 0, 1], 4: [0, 1, 1], 5: [1, 1, 1]}) == pytest.approx(2 / 3)

    def test_error_rate_all_zero(self):
        assert error_rate({3: [0, 0], 4: [0], 5: [0, 0, 0]}) == 0.0


class TestPowerLaw:
    def test_exact_model(self):
        y = [2.0 * n ** -0.5 for n in range(1, 9)]
        fit = fit_power_law(y)
        assert fit.a == pytest.approx(2.0, abs=1e-12)
        assert fit.b == pytest.approx(0.5, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        assert not fit.zero_variance

    def test_constant_series_flagged(self):
        fit = fit_power_law([1.5] * 8)
        assert fit.b == 0.0
        assert fit.r_squared == 0.0
        assert fit.zero_variance

    def test_noisy_recovery(self):
        rng = np.random.default_rng(0)
        y = [1.5 * n ** -0.3 * math.exp(rng.normal(0, 0.05)) for n in range(1, 9)]
        fit = fit_power_law(y)
        assert fit.a == pytest.approx(1.5, rel=0.10)
        assert fit.b == pytest.approx(0.3, rel=0.10)
        assert fit.r_squared >= 0.85
        # the fit must equal an independently computed log-space OLS
        ln, ly = np.log(np.arange(1, 9)), np.log(y)
        sxx = float(((ln - ln.mean()) ** 2).sum())
        slope = float(((ln - ln.mean()) * (ly - ly.mean())).sum()) / sxx
        intercept = float(ly.mean() - slope * ln.mean())
        assert fit.b == pytest.approx(-slope, abs=1e-12)
        assert fit.a == pytest.approx(math.exp(intercept), rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DataError):
            fit_power_law([1.0, 2.0])
        with pytest.raises(DataError):
            fit_power_law([1.0, -2.0, 3.0])


# Published validation data for the W test: the statistic's original
# 1965 worked examples plus an R-verified vector from scipy's test suite.
SHAPIRO_REFERENCE = [
    # (data, expected W, expected p)
    (
        [0.139, 0.157, 0.175, 0.256, 0.344, 0.413, 0.503, 0.577, 0.614,
         0.655, 0.954, 1.392, 1.557, 1.648, 1.690, 1.994, 2.174, 2.206,
         3.245, 3.510, 3.571, 4.354, 4.980, 6.084, 8.351],
        0.83467, 0.000914,
    ),
    (
        [148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236],
        0.79, 0.0067,
    ),
    (
        [0.11, 7.87, 4.61, 10.14, 7.95, 3.14, 0.46, 4.43, 0.21, 4.75,
         0.71, 1.52, 3.24, 0.93, 0.42, 4.97, 9.53, 4.55, 0.47, 6.66],
        0.900473, 0.042089,
    ),
]


class TestShapiroWilk:
    @pytest.mark.parametrize("data,w_ref,p_ref", SHAPIRO_REFERENCE)
    def test_published_datasets(self, data, w_ref, p_ref):
        r = shapiro_wilk(data)
        assert r.statistic == pytest.approx(w_ref, abs=1e-2)
        assert r.p_value == pytest.approx(p_ref, abs=1e-2)

    def test_three_point_linear_is_one(self):
        r = shapiro_wilk([1, 2, 3])
        assert r.statistic == 1.0
        assert r.p_value == pytest.approx(1.0)

    def test_scale_shift_invariance(self):
        rng = np.random.default_rng(4)
        x = rng.normal(2, 3, 40)
        base = shapiro_wilk(x).statistic
        for a, c in ((2.0, 0.0), (0.25, 10.0), (1e3, -5.0)):
            assert shapiro_wilk(a * x + c).statistic == pytest.approx(base, abs=1e-12)

    def test_matches_scipy_reference_port(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            n = int(rng.integers(3, 120))
            x = rng.normal(size=n) * rng.uniform(0.5, 5)
            mine = shapiro_wilk(x)
            ref = sps.shapiro(x)
            assert mine.statistic == pytest.approx(ref.statistic, abs=1e-6)
            assert mine.p_value == pytest.approx(ref.pvalue, abs=1e-6)

    def test_skewed_data_rejected(self):
        rng = np.random.default_rng(99)
        rejected = 0
        for i in range(100):
            x = rng.lognormal(0.0, 1.0, size=500)
            if shapiro_wilk(x).p_value < 0.01:
                rejected += 1
        assert rejected >= 95

    def test_domain_errors(self):
        with pytest.raises(DataError):
            shapiro_wilk([1.0, 2.0])
        with pytest.raises(DataError):
            shapiro_wilk([3.0] * 10)
        with pytest.raises(DataError):
            shapiro_wilk(np.zeros(5001) + np.arange(5001))


class TestWilcoxon:
    def test_identical_pairs_degenerate(self):
        with pytest.raises(DataError):
            wilcoxon_signed_rank([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])

    def test_effect_size_arithmetic(self):
        assert wilcoxon_effect_size(3.05, 12) == pytest.approx(0.88, abs=5e-3)

    def test_all_positive_differences_n12(self):
        # every difference positive over 12 pairs
        r = wilcoxon_signed_rank(np.arange(1.0, 13.0), np.zeros(12))
        assert r.p_value == pytest.approx(2.0 / 4096.0)
        assert abs(r.statistic) == pytest.approx(3.06, abs=5e-3)
        assert r.effect_size == pytest.approx(0.88, abs=5e-3)

    def test_exact_matches_oracle_bitwise(self):
        rng = np.random.default_rng(21)
        for _ in range(300):
            n = int(rng.integers(2, EXACT_N_MAX + 1))
            x = rng.normal(size=n)
            y = rng.normal(size=n)
            p = wilcoxon_signed_rank(x, y).p_value
            assert p == wilcoxon_oracle_exact(x, y)  # bit-for-bit

    def test_exact_matches_oracle_with_ties(self):
        rng = np.random.default_rng(22)
        for _ in range(100):
            n = int(rng.integers(3, 11))
            x = rng.integers(0, 4, size=n).astype(float)
            y = rng.integers(0, 4, size=n).astype(float)
            if np.all(x == y):
                continue
            p = wilcoxon_signed_rank(x, y).p_value
            assert p == wilcoxon_oracle_exact(x, y)

    def test_zero_differences_dropped(self):
        x = [1.0, 2.0, 3.0, 4.0, 5.0]
        y = [1.0, 1.0, 1.0, 4.0, 1.0]
        r = wilcoxon_signed_rank(x, y)
        assert r.n == 3

    def test_normal_approximation_large_n(self):
        rng = np.random.default_rng(23)
        x = rng.normal(0.5, 1, 40)
        y = rng.normal(0.0, 1, 40)
        mine = wilcoxon_signed_rank(x, y)
        ref = sps.wilcoxon(x, y, correction=True, alternative="two-sided", method="approx")
        assert mine.p_value == pytest.approx(ref.pvalue, rel=1e-6)

    def test_effect_size_bounds(self):
        rng = np.random.default_rng(24)
        for _ in range(50):
            n = int(rng.integers(2, 30))
            x = rng.normal(size=n)
            y = rng.normal(size=n)
            try:
                r = wilcoxon_signed_rank(x, y)
            except DataError:
                continue
            assert 0.0 <= r.effect_size <= 1.0
            assert 0.0 <= r.p_value <= 1.0


class TestDiscomfortScore:
    def test_example(self):
        post = ev.DiscomfortSurvey((1, 0, 2, 0, 1, 2), "post_device")
        base = ev.DiscomfortSurvey((0.5,) * 6, "baseline")
        assert discomfort_score(post, base) == pytest.approx(0.5)

    def test_identical_surveys_zero(self):
        s1 = ev.DiscomfortSurvey((1, 2, 3, 1, 2, 3), "post_device")
        s2 = ev.DiscomfortSurvey((1, 2, 3, 1, 2, 3), "baseline")
        assert discomfort_score(s1, s2) == 0.0

    def test_negative_allowed(self):
        post = ev.DiscomfortSurvey((0,) * 6, "post_device")
        base = ev.DiscomfortSurvey((1,) * 6, "baseline")
        assert discomfort_score(post, base) == pytest.approx(-1.0)
