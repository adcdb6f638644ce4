"""Statistical machinery for the analysis pipeline.

Everything here is a pure function over immutable inputs: the 3-SD outlier
filter, median-then-mean aggregation, the power law of practice, the
Shapiro-Wilk W test (Royston's approximation, AS R94), and the Wilcoxon
signed-rank test with exact small-sample p-values by sign enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .errors import DataError

_STD_NORMAL = NormalDist()


@dataclass(frozen=True)
class TestResult:
    statistic: float            # W for Shapiro-Wilk, z for Wilcoxon
    p_value: float
    effect_size: float | None
    n: int


@dataclass(frozen=True)
class PowerLawFit:
    a: float                    # y = a * n^-b
    b: float
    r_squared: float
    zero_variance: bool = False


def filter_outliers(xs) -> np.ndarray:
    """Single pass removing points more than 3 sample standard deviations
    from the mean. With fewer than 2 points the spread is undefined."""
    x = np.asarray(xs, dtype=float)
    if x.size < 2:
        raise DataError(f"need at least 2 values to filter outliers, got {x.size}")
    mean = x.mean()
    sd = x.std(ddof=1)
    if sd == 0.0:
        return x.copy()
    return x[np.abs(x - mean) <= 3.0 * sd]


def median_then_mean(groups: dict) -> float:
    """Median within each difficulty index, arithmetic mean across indexes."""
    if not groups:
        raise DataError("no groups to aggregate")
    medians = []
    for key in sorted(groups):
        values = np.asarray(groups[key], dtype=float)
        if values.size == 0:
            raise DataError(f"empty group for index {key!r}")
        medians.append(float(np.median(values)))
    return float(np.mean(medians))


def error_rate(groups: dict) -> float:
    """Median error count within each difficulty index, mean across indexes."""
    return median_then_mean(groups)


def fit_power_law(block_means) -> PowerLawFit:
    """Least squares for y = a * n^-b on log-transformed data (n = 1, 2, ...).

    R^2 is reported on the log-space residuals; a constant series has no
    variance to explain and comes back flagged with r_squared = 0.
    """
    y = np.asarray(block_means, dtype=float)
    if y.size < 3:
        raise DataError(f"need at least 3 block values, got {y.size}")
    if np.any(y <= 0):
        raise DataError("block values must be positive for a power-law fit")
    log_n = np.log(np.arange(1, y.size + 1, dtype=float))
    log_y = np.log(y)
    if np.allclose(log_y, log_y[0], rtol=0.0, atol=1e-15):
        return PowerLawFit(a=float(y[0]), b=0.0, r_squared=0.0, zero_variance=True)
    slope, intercept = np.polyfit(log_n, log_y, 1)
    resid = log_y - (slope * log_n + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((log_y - log_y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return PowerLawFit(a=float(math.exp(intercept)), b=float(-slope), r_squared=float(r2))


# --- Shapiro-Wilk (Royston's approximation) ---------------------------------

_SW_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_SW_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_SW_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_SW_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_SW_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_SW_C6 = (-0.4803, -0.082676, 0.0030302)
_SW_G = (-2.273, 0.459)


def _poly(coeffs, x: float) -> float:
    """Polynomial with ascending coefficients: c0 + c1*x + c2*x^2 + ..."""
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _shapiro_weights(n: int) -> np.ndarray:
    m = np.array([_STD_NORMAL.inv_cdf((i - 0.375) / (n + 0.25)) for i in range(1, n + 1)])
    ssq_m = float(m @ m)
    a = m / math.sqrt(ssq_m)
    if n == 3:
        s = math.sqrt(0.5)
        return np.array([-s, 0.0, s])
    rsn = 1.0 / math.sqrt(n)
    a_n = a[-1] + _poly(_SW_C1, rsn)
    if n > 5:
        a_n1 = a[-2] + _poly(_SW_C2, rsn)
        phi = (ssq_m - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2) / (
            1.0 - 2.0 * a_n ** 2 - 2.0 * a_n1 ** 2
        )
        tail = 2
    else:
        phi = (ssq_m - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * a_n ** 2)
        tail = 1
    w = m / math.sqrt(phi)
    w[-1] = a_n
    w[0] = -a_n
    if tail == 2:
        w[-2] = a_n1
        w[1] = -a_n1
    return w


def shapiro_wilk(xs) -> TestResult:
    """Shapiro-Wilk normality test via the standard polynomial approximation.

    Valid for 3 <= n <= 5000. W is scale- and shift-invariant; the p-value
    uses the exact arcsine law at n = 3 and normalizing transforms above.
    """
    x = np.sort(np.asarray(xs, dtype=float))
    n = x.size
    if n < 3 or n > 5000:
        raise DataError(f"Shapiro-Wilk needs 3 <= n <= 5000, got {n}")
    if x[0] == x[-1]:
        raise DataError("Shapiro-Wilk is undefined for zero-variance data")
    a = _shapiro_weights(n)
    num = float(a @ x) ** 2
    den = float(((x - x.mean()) ** 2).sum())
    w = min(num / den, 1.0)

    if n == 3:
        p = (6.0 / math.pi) * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        p = min(max(p, 0.0), 1.0)
        return TestResult(statistic=w, p_value=p, effect_size=None, n=n)

    one_minus = 1.0 - w
    if one_minus <= 0.0:
        return TestResult(statistic=w, p_value=1.0, effect_size=None, n=n)
    y = math.log(one_minus)
    if n <= 11:
        gamma = _poly(_SW_G, float(n))
        if y >= gamma:
            return TestResult(statistic=w, p_value=1e-99, effect_size=None, n=n)
        y = -math.log(gamma - y)
        mu = _poly(_SW_C3, float(n))
        sigma = math.exp(_poly(_SW_C4, float(n)))
    else:
        log_n = math.log(float(n))
        mu = _poly(_SW_C5, log_n)
        sigma = math.exp(_poly(_SW_C6, log_n))
    z = (y - mu) / sigma
    p = 1.0 - _STD_NORMAL.cdf(z)
    return TestResult(statistic=w, p_value=min(max(p, 0.0), 1.0), effect_size=None, n=n)


# --- Wilcoxon signed rank ----------------------------------------------------

EXACT_N_MAX = 12


def _rank_abs(values: np.ndarray) -> np.ndarray:
    """Average ranks of |values| (ties share the mean of their rank range)."""
    a = np.abs(values)
    order = np.argsort(a, kind="stable")
    ranks = np.empty(a.size, dtype=float)
    sorted_a = a[order]
    i = 0
    while i < a.size:
        j = i
        while j + 1 < a.size and sorted_a[j + 1] == sorted_a[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _exact_p_two_sided(ranks: np.ndarray, signs: np.ndarray) -> float:
    """Enumerate all 2^n sign assignments of the observed ranks.

    Average ranks are integers or half-integers, so the rank sums are exact
    in floating point and the comparisons below are safe.
    """
    n = ranks.size
    w_obs = float(ranks[signs > 0].sum())
    count = 1 << n
    assignments = np.zeros((count, n), dtype=np.float64)
    for bit in range(n):
        assignments[:, bit] = (np.arange(count) >> bit) & 1
    sums = assignments @ ranks
    c_le = int((sums <= w_obs).sum())
    c_ge = int((sums >= w_obs).sum())
    return min(1.0, 2.0 * min(c_le, c_ge) / float(count))


def wilcoxon_signed_rank(xs, ys, method: str = "auto") -> TestResult:
    """Paired Wilcoxon signed-rank test.

    Zero differences are dropped; tied magnitudes receive average ranks.
    With method="auto", n <= 12 remaining pairs get an exact p-value (full
    sign enumeration) and larger samples a normal approximation with
    continuity and tie corrections; "exact"/"normal" force one path. The
    reported statistic is the uncorrected normal score z = (W+ - mu)/sigma
    and the effect size is r = |z|/sqrt(n).
    """
    if method not in ("auto", "exact", "normal"):
        raise DataError(f"unknown method {method!r}")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError("paired samples must be 1-D and equally long")
    d = x - y
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        raise DataError("all paired differences are zero")
    ranks = _rank_abs(d)
    w_plus = float(ranks[d > 0].sum())
    mu = n * (n + 1) / 4.0
    ties = np.unique(ranks, return_counts=True)[1]
    tie_term = float(((ties ** 3 - ties) / 48.0).sum())
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    sigma = math.sqrt(var)
    z = (w_plus - mu) / sigma if sigma > 0 else 0.0

    exact = method == "exact" or (method == "auto" and n <= EXACT_N_MAX)
    if exact:
        if n > 24:
            raise DataError(f"exact enumeration over 2^{n} assignments is not practical")
        p = _exact_p_two_sided(ranks, np.sign(d))
    else:
        diff = w_plus - mu
        if diff > 0.5:
            zc = (diff - 0.5) / sigma
        elif diff < -0.5:
            zc = (diff + 0.5) / sigma
        else:
            zc = 0.0
        p = min(1.0, 2.0 * _STD_NORMAL.cdf(-abs(zc))) if sigma > 0 else 1.0

    r = abs(z) / math.sqrt(n)
    return TestResult(statistic=float(z), p_value=float(p), effect_size=float(r), n=n)


def wilcoxon_effect_size(z: float, n_pairs: int) -> float:
    """r = |z| / sqrt(n); e.g. |z| = 3.05 over 12 pairs gives 0.88."""
    if n_pairs <= 0:
        raise DataError("need at least one pair")
    return abs(z) / math.sqrt(n_pairs)


def discomfort_score(post, baseline) -> float:
    """Mean of the six post ratings minus the mean of the six baseline ratings."""
    if len(post.ratings) != 6 or len(baseline.ratings) != 6:
        raise DataError("discomfort surveys carry exactly 6 ratings")
    return float(np.mean(post.ratings) - np.mean(baseline.ratings))
