"""Socioeconomic indicators per census patch and user-level class partition.

Patch indicators: income per capita, owner fraction, population density
over a 200 m x 200 m cell.  Users inherit the indicators of their assigned
patch and are split into k classes holding equal shares of total income.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .geoloc import GridCell

PATCH_AREA_M2 = 200.0 * 200.0


def compute_indicators(S_hh: float, N_hh: int, N_own: int, N: int
                       ) -> tuple[Optional[float], Optional[float], float]:
    """(income per capita, owner fraction, density /m^2); None on zero denominators."""
    s_inc = S_hh / N_hh if N_hh > 0 else None
    s_own = N_own / N if N > 0 else None
    s_den = N / PATCH_AREA_M2
    return s_inc, s_own, s_den


@dataclass(frozen=True)
class Patch:
    patch_id: str
    cell: GridCell  # 200 m
    S_hh: float
    N_hh: int
    N_own: int
    N: int
    S_inc: Optional[float]
    S_own: Optional[float]
    S_den: float

    @classmethod
    def from_raw(cls, patch_id: str, cell: GridCell,
                 S_hh: float, N_hh: int, N_own: int, N: int) -> "Patch":
        if N_own > N:
            raise ValueError(f"patch {patch_id}: owners exceed individuals")
        s_inc, s_own, s_den = compute_indicators(S_hh, N_hh, N_own, N)
        return cls(patch_id, cell, S_hh, N_hh, N_own, N, s_inc, s_own, s_den)


def load_patches(path: str | Path) -> dict[str, Patch]:
    """Read the patch CSV (patch_id,easting_m,northing_m,S_hh,N_hh,N_own,N)."""
    patches: dict[str, Patch] = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            cell = GridCell(int(row["easting_m"]), int(row["northing_m"]), 200)
            p = Patch.from_raw(
                row["patch_id"], cell,
                S_hh=float(row["S_hh"]), N_hh=int(row["N_hh"]),
                N_own=int(row["N_own"]), N=int(row["N"]),
            )
            patches[p.patch_id] = p
    return patches


@dataclass
class UserSES:
    author_id: str
    patch_id: str
    S_inc: Optional[float]
    S_own: Optional[float]
    S_den: float
    socio_class: Optional[int] = None


def attach_users(user_patches: Mapping[str, str], patches: Mapping[str, Patch]) -> list[UserSES]:
    """Users inherit their patch's indicators (no within-patch variance)."""
    out = []
    for user in sorted(user_patches):
        patch = patches[user_patches[user]]
        out.append(UserSES(user, patch.patch_id, patch.S_inc, patch.S_own, patch.S_den))
    return out


@dataclass
class ClassPartition:
    k: int
    boundaries: list[Optional[float]]  # income threshold entering class c+1
    assignment: dict[str, int]         # author_id -> class in 1..k

    def members(self, c: int) -> list[str]:
        return [u for u, cls in self.assignment.items() if cls == c]

    def sizes(self) -> list[int]:
        out = [0] * self.k
        for cls in self.assignment.values():
            out[cls - 1] += 1
        return out


def partition_classes(incomes: Mapping[str, float], k: int = 9) -> ClassPartition:
    """Split users into k classes with (near-)equal cumulative income.

    Users are walked in ascending (income, author_id) order.  Each class
    absorbs users while that brings its sum strictly closer to an equal
    share of the income still left for the remaining classes, so class
    sums stay within one individual income of each other and assignment
    is monotone in income.
    """
    if k < 2:
        raise ValueError("need at least 2 classes")
    if len(incomes) < k:
        raise ValueError(f"need at least {k} users, got {len(incomes)}")
    total = float(sum(incomes.values()))
    if total <= 0.0:
        raise ValueError("total income is zero")
    order = sorted(incomes.items(), key=lambda kv: (kv[1], kv[0]))
    n = len(order)
    prefix = [0.0]
    for _, inc in order:
        prefix.append(prefix[-1] + inc)

    # forward walk: close each class at the prefix nearest an equal share of
    # what remains for the classes left
    cuts = [0]
    pos = 0
    for c in range(1, k):
        remaining = total - prefix[pos]
        target = remaining / (k - c + 1)
        s = 0.0
        while pos < n:
            inc = order[pos][1]
            if abs(s + inc - target) < abs(s - target):
                s += inc
                pos += 1
            else:
                break
        cuts.append(pos)
    cuts.append(n)

    # repair sweeps: move one boundary at a time to the position that
    # minimizes the overall spread of class sums; strictly decreasing
    # objective, so this terminates
    def sums_for(cs: list[int]) -> list[float]:
        return [prefix[b] - prefix[a] for a, b in zip(cs, cs[1:])]

    improved = True
    while improved:
        improved = False
        for j in range(1, k):
            sums = sums_for(cuts)
            best_obj = max(sums) - min(sums)
            best_p = cuts[j]
            others = sums[: j - 1] + sums[j + 1:]
            for p in range(cuts[j - 1], cuts[j + 1] + 1):
                left = prefix[p] - prefix[cuts[j - 1]]
                right = prefix[cuts[j + 1]] - prefix[p]
                cand = others + [left, right]
                obj = max(cand) - min(cand)
                if obj < best_obj - 1e-12 * total:
                    best_obj = obj
                    best_p = p
            if best_p != cuts[j]:
                cuts[j] = best_p
                improved = True

    assignment: dict[str, int] = {}
    for c, (a, b) in enumerate(zip(cuts, cuts[1:]), start=1):
        for user, _ in order[a:b]:
            assignment[user] = c
    boundaries: list[Optional[float]] = []
    for c in range(1, k):
        above = [inc for user, inc in order if assignment[user] > c]
        boundaries.append(min(above) if above else None)
    return ClassPartition(k=k, boundaries=boundaries, assignment=assignment)


def ses_cross_correlations(rows: Iterable[tuple[Optional[float], Optional[float], Optional[float]]],
                           n_perm: int = 10_000, seed: int = 0
                           ) -> dict[tuple[str, str], tuple[float, float]]:
    """Pairwise Pearson r and permutation p over the three indicators.

    Rows missing any indicator are dropped; at least 10 complete rows
    required.  Works on patch rows or user rows alike.
    """
    from .analysis import pearson  # deferred: analysis never imports ses

    complete = [r for r in rows if all(v is not None for v in r)]
    if len(complete) < 10:
        raise ValueError(f"need at least 10 complete observations, got {len(complete)}")
    names = ("inc", "own", "den")
    cols = list(zip(*complete))
    out: dict[tuple[str, str], tuple[float, float]] = {}
    for i in range(3):
        for j in range(i + 1, 3):
            r, p = pearson(cols[i], cols[j], n_perm=n_perm, seed=seed)
            out[(names[i], names[j])] = (r, p)
    return out
