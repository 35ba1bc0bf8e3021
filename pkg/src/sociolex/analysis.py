"""Statistical battery: binned regressions, permutation tests, weekly
profiles, spatial aggregation, pair-similarity distributions.

Significance is always resampling-based (permutation p-values, percentile
bootstrap bands); nothing relies on closed-form null distributions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .geoloc import HomeLocation, RegionMap
from .lingmark import (STANDARD, LinguisticProfile, PluralLexicon,
                       detect_negation, detect_plural, group_average)
from .socionet import CATEGORIES, MentionGraph, PairSampler

HOURS_PER_WEEK = 168


@dataclass
class BinnedPoints:
    centers: np.ndarray  # geometric bin centers (kept bins)
    xs: np.ndarray       # per-bin mean of x; the regression abscissa
    means: np.ndarray    # per-bin mean of y
    counts: np.ndarray


@dataclass
class StatResult:
    slope: float
    intercept: float
    r: float
    r2: float
    p: float
    ci95_low: np.ndarray   # per kept binned point
    ci95_high: np.ndarray
    n: int
    n_bins: int
    log_x: bool


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least squares line; returns (slope, intercept, r).  r is 0 when y
    has no variance (a flat response carries no correlation signal)."""
    mx, my = x.mean(), y.mean()
    sxx = float(np.sum((x - mx) ** 2))
    syy = float(np.sum((y - my) ** 2))
    sxy = float(np.sum((x - mx) * (y - my)))
    slope = sxy / sxx
    r = sxy / np.sqrt(sxx * syy) if syy > 0 else 0.0
    return slope, my - slope * mx, r


def binned_regression(x: Sequence[float], y: Sequence[float],
                      n_bins: int = 30, log_x: bool = False, seed: int = 0,
                      n_perm: int = 10_000, n_boot: int = 1_000
                      ) -> tuple[StatResult, BinnedPoints]:
    """Equal-width binning of x, OLS of per-bin mean y on per-bin mean x.

    Regressing on the in-bin mean of x (not the geometric center) makes a
    noiseless linear input recover its slope exactly.  The permutation p
    shuffles y against x at the observation level and re-derives the
    binned slope; the 95% band is a percentile bootstrap over
    observations, evaluated at the observed per-bin abscissas.
    """
    if not 20 <= n_bins <= 50:
        raise ValueError("n_bins must lie in [20, 50]")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    if log_x:
        if np.any(x <= 0):
            raise ValueError("log_x requires all x > 0")
        x = np.log(x)
    if np.unique(x).size < n_bins:
        raise ValueError(f"need at least {n_bins} distinct x values")
    lo, hi = float(x.min()), float(x.max())
    width = (hi - lo) / n_bins
    idx = np.clip(((x - lo) / width).astype(np.int64), 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    keep = counts > 0
    if int(keep.sum()) < 3:
        raise ValueError("fewer than 3 non-empty bins")
    centers = lo + (np.arange(n_bins) + 0.5) * width
    safe = np.maximum(counts, 1)
    x_means = np.bincount(idx, weights=x, minlength=n_bins) / safe
    means = np.where(keep, np.bincount(idx, weights=y, minlength=n_bins) / safe, np.nan)

    kc = centers[keep]
    kx = x_means[keep]
    km = means[keep]
    slope, intercept, r = _ols(kx, km)

    # Binned slope as a fixed linear functional of the observation vector:
    # slope = sum_b w_b * mean_b = y . a, with a_u = w_{bin(u)} / n_{bin(u)}.
    mkx = kx.mean()
    w_full = np.zeros(n_bins)
    w_full[keep] = (kx - mkx) / float(np.sum((kx - mkx) ** 2))
    a = w_full[idx] / counts[idx]
    slope_obs = float(a @ y)

    rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    hits = 0
    y_perm = y.copy()
    for _ in range(n_perm):
        rng.shuffle(y_perm)
        if abs(float(a @ y_perm)) >= abs(slope_obs):
            hits += 1
    p = (hits + 1) / (n_perm + 1)

    rng_b = np.random.default_rng(np.random.SeedSequence((seed, 2)))
    n = x.size
    lines = np.full((n_boot, kx.size), np.nan)
    for b in range(n_boot):
        take = rng_b.integers(0, n, size=n)
        ib = idx[take]
        cb = np.bincount(ib, minlength=n_bins)
        kb = cb > 0
        if int(kb.sum()) < 2:
            continue
        cbs = np.maximum(cb, 1)
        xb = (np.bincount(ib, weights=x[take], minlength=n_bins) / cbs)[kb]
        mb = (np.bincount(ib, weights=y[take], minlength=n_bins) / cbs)[kb]
        sl, ic, _ = _ols(xb, mb)
        lines[b] = ic + sl * kx
    ok = ~np.isnan(lines[:, 0])
    if np.any(ok):
        ci_low = np.nanpercentile(lines[ok], 2.5, axis=0)
        ci_high = np.nanpercentile(lines[ok], 97.5, axis=0)
    else:
        ci_low = np.full(kx.size, np.nan)
        ci_high = np.full(kx.size, np.nan)

    result = StatResult(
        slope=slope, intercept=intercept, r=r, r2=r * r, p=p,
        ci95_low=ci_low, ci95_high=ci_high,
        n=int(n), n_bins=n_bins, log_x=log_x,
    )
    return result, BinnedPoints(centers=kc, xs=kx, means=km, counts=counts[keep])


def pearson(x: Sequence[float], y: Sequence[float],
            n_perm: int = 10_000, seed: int = 0) -> tuple[float, float]:
    """Sample Pearson r with a two-sided permutation p-value."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    if x.size < 3:
        raise ValueError("need at least 3 observations")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.sqrt(np.sum(xc ** 2)))
    sy = float(np.sqrt(np.sum(yc ** 2)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("zero variance input")
    r = float(xc @ yc) / (sx * sy)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 3)))
    hits = 0
    y_perm = yc.copy()
    for _ in range(n_perm):
        rng.shuffle(y_perm)
        if abs(float(xc @ y_perm)) / (sx * sy) >= abs(r):
            hits += 1
    return r, (hits + 1) / (n_perm + 1)


@dataclass
class TemporalProfile:
    values: np.ndarray          # 168 hourly means, NaN where no observation
    income_overlay: np.ndarray  # 168 mean incomes of distinct active users
    n_obs: np.ndarray
    population: str


def temporal_profile(marker_obs: Iterable[tuple[str, int, bool]],
                     activity: Iterable[tuple[str, int]],
                     incomes: Mapping[str, float],
                     members: Optional[set] = None,
                     population: str = "all") -> TemporalProfile:
    """Weekly folding of marker standardness, one-hour resolution.

    marker_obs are (user, hour_of_week, is_standard) tuples pooled over the
    whole span; the income overlay averages over the distinct users active
    in each folded hour (users without income are left out of the overlay).
    """
    n_std = np.zeros(HOURS_PER_WEEK)
    n_tot = np.zeros(HOURS_PER_WEEK)
    for user, how, standard in marker_obs:
        if members is not None and user not in members:
            continue
        n_tot[how] += 1
        if standard:
            n_std[how] += 1
    with np.errstate(invalid="ignore"):
        values = np.where(n_tot > 0, n_std / np.maximum(n_tot, 1), np.nan)

    active: list[set] = [set() for _ in range(HOURS_PER_WEEK)]
    for user, how in activity:
        if members is not None and user not in members:
            continue
        active[how].add(user)
    overlay = np.full(HOURS_PER_WEEK, np.nan)
    for h in range(HOURS_PER_WEEK):
        vals = [incomes[u] for u in active[h] if u in incomes]
        if vals:
            overlay[h] = float(np.mean(vals))
    return TemporalProfile(values=values, income_overlay=overlay,
                           n_obs=n_tot.astype(np.int64), population=population)


def iter_marker_observations(posts: Iterable, lexicon: PluralLexicon, marker: str
                             ) -> Iterable[tuple[str, int, bool]]:
    """Per-post marker observations as (user, hour_of_week, is_standard)."""
    if marker not in ("cn", "cp"):
        raise ValueError("temporal profiles exist for rate markers only (cn, cp)")
    for post in posts:
        if marker == "cn":
            res = detect_negation(post.text_marker)
            if res is not None:
                yield post.author_id, post.local_hour_of_week, res == STANDARD
        else:
            for obs in detect_plural(post.tokens, lexicon):
                yield post.author_id, post.local_hour_of_week, obs == STANDARD


def spatial_aggregate(homes: Mapping[str, HomeLocation],
                      profiles: Mapping[str, LinguisticProfile],
                      region_map: RegionMap, level: str, marker: str
                      ) -> tuple[list[tuple[str, Optional[float], int]], int]:
    """Per-administrative-unit mean of one marker, plus unassigned count."""
    members: dict[str, list[str]] = {}
    unassigned = 0
    for user, home in homes.items():
        ce, cn = home.cell.center
        unit = region_map.lookup(ce, cn, level)
        if unit is None:
            unassigned += 1
            continue
        members.setdefault(unit, []).append(user)
    rows = []
    for unit in sorted(members):
        mean, n = group_average(profiles, members[unit], marker)
        rows.append((unit, mean, n))
    return rows, unassigned


@dataclass
class SimilarityDistribution:
    category: str
    bin_edges: np.ndarray
    counts: np.ndarray
    n_pairs: int
    mean_abs_diff: float
    n_resampled: int


def similarity_distributions(graph: MentionGraph, classes: Mapping[str, int],
                             profiles: Mapping[str, LinguisticProfile],
                             marker: str, n: int = 10_000,
                             bin_width: float = 0.05, seed: int = 0
                             ) -> dict[str, SimilarityDistribution]:
    """|L_u - L_v| histograms over the four pair categories.

    Pairs where either member lacks the marker are drawn again; the number
    of redraws is reported per category.
    """
    diffs: dict[str, np.ndarray] = {}
    resampled: dict[str, int] = {}
    for category in CATEGORIES:
        sampler = PairSampler(graph, classes, category, seed)
        out = np.empty(n)
        got = 0
        redraws = 0
        budget = 1000 * n
        while got < n:
            u, v = sampler.draw()
            lu = profiles[u].get(marker) if u in profiles else None
            lv = profiles[v].get(marker) if v in profiles else None
            if lu is None or lv is None:
                redraws += 1
                budget -= 1
                if budget <= 0:
                    raise ValueError(
                        f"category {category!r}: cannot find {n} pairs with marker {marker!r}")
                continue
            out[got] = abs(lu - lv)
            got += 1
        diffs[category] = out
        resampled[category] = redraws

    top = max(float(d.max()) for d in diffs.values())
    n_edges = max(1, int(np.ceil(top / bin_width + 1e-9)))
    edges = np.arange(n_edges + 1, dtype=np.float64) * bin_width
    result = {}
    for category, d in diffs.items():
        counts, _ = np.histogram(d, bins=edges)
        result[category] = SimilarityDistribution(
            category=category, bin_edges=edges, counts=counts,
            n_pairs=n, mean_abs_diff=float(d.mean()),
            n_resampled=resampled[category],
        )
    return result


@dataclass
class MultivariateResult:
    coefficients: dict[str, float]  # standardized betas
    intercept: float
    r2: float
    n: int


def multivariate_regression(y: Sequence[float],
                            regressors: Mapping[str, Sequence[float]]
                            ) -> MultivariateResult:
    """OLS of y on z-scored regressors via the normal equations."""
    y = np.asarray(y, dtype=np.float64)
    names = list(regressors)
    cols = [np.asarray(regressors[name], dtype=np.float64) for name in names]
    n = y.size
    if n < 10:
        raise ValueError("need at least 10 observations")
    for name, c in zip(names, cols):
        if c.size != n:
            raise ValueError(f"regressor {name!r} length mismatch")
        if float(np.std(c)) == 0.0:
            raise ValueError(f"regressor {name!r} has zero variance")
    Z = np.column_stack([(c - c.mean()) / c.std() for c in cols])
    G = Z.T @ Z
    eig = np.linalg.eigvalsh(G)
    if eig[0] < 1e-10 * max(eig[-1], 1.0):
        corr = np.corrcoef(Z, rowvar=False)
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                if abs(corr[i, j]) > 1.0 - 1e-9:
                    raise ValueError(
                        f"collinear regressors: {names[i]!r} and {names[j]!r}")
        raise ValueError("singular design matrix")
    yc = y - y.mean()
    beta = np.linalg.solve(G, Z.T @ yc)
    resid = yc - Z @ beta
    sst = float(np.sum(yc ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / sst if sst > 0 else 0.0
    return MultivariateResult(
        coefficients={name: float(b) for name, b in zip(names, beta)},
        intercept=float(y.mean()),
        r2=r2,
        n=int(n),
    )
