"""Home-location inference and census-grid joining.

Projects GPS points with a single-reference-latitude equirectangular map,
filters coordinates repeated suspiciously often, snaps posts to a 100 m
grid, picks the modal cell as a user's home, and joins homes to 200 m
census patches within 1 km.
"""
from __future__ import annotations

import csv
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

EARTH_RADIUS_M = 6_371_000.0
DEFAULT_REF_LAT = 46.5  # mid-France
# (lat_min, lat_max, lon_min, lon_max)
FRANCE_BBOX = (41.0, 51.5, -5.5, 10.0)


@dataclass(frozen=True)
class GridCell:
    easting_m: int   # SW corner
    northing_m: int
    cell_size_m: int = 100

    @property
    def center(self) -> tuple[float, float]:
        h = self.cell_size_m / 2.0
        return (self.easting_m + h, self.northing_m + h)


@dataclass(frozen=True)
class HomeLocation:
    author_id: str
    cell: GridCell
    support: int
    total_geoposts: int


def project(lat: float, lon: float, ref_lat: float = DEFAULT_REF_LAT) -> tuple[float, float]:
    """Equirectangular (lat, lon) degrees -> (easting, northing) meters."""
    easting = EARTH_RADIUS_M * math.cos(math.radians(ref_lat)) * math.radians(lon)
    northing = EARTH_RADIUS_M * math.radians(lat)
    return easting, northing


def unproject(easting: float, northing: float, ref_lat: float = DEFAULT_REF_LAT) -> tuple[float, float]:
    lat = math.degrees(northing / EARTH_RADIUS_M)
    lon = math.degrees(easting / (EARTH_RADIUS_M * math.cos(math.radians(ref_lat))))
    return lat, lon


def in_bbox(lat: float, lon: float, bbox: tuple[float, float, float, float] = FRANCE_BBOX) -> bool:
    lat_min, lat_max, lon_min, lon_max = bbox
    return lat_min <= lat <= lat_max and lon_min <= lon <= lon_max


def snap_to_cell(easting: float, northing: float, cell_size_m: int = 100) -> GridCell:
    """Floor a projected point to its grid cell's SW corner."""
    return GridCell(
        easting_m=int(math.floor(easting / cell_size_m)) * cell_size_m,
        northing_m=int(math.floor(northing / cell_size_m)) * cell_size_m,
        cell_size_m=cell_size_m,
    )


def filter_overused_coords(posts: Sequence, threshold: int = 500) -> list:
    """Drop posts whose exact (lat, lon) pair occurs more than `threshold`
    times corpus-wide.  Two passes: count, then filter."""
    counts: Counter = Counter(p.coords for p in posts if p.coords is not None)
    return [p for p in posts if p.coords is not None and counts[p.coords] <= threshold]


def infer_home(user_geoposts: Sequence[tuple[float, float]],
               ref_lat: float = DEFAULT_REF_LAT,
               author_id: str = "") -> Optional[HomeLocation]:
    """Modal 100 m cell of a user's (time-ordered) geotagged posts.

    Ties go to the cell seen earliest; None when there are no posts.
    """
    if not user_geoposts:
        return None
    counts: dict[GridCell, int] = {}
    first_seen: dict[GridCell, int] = {}
    for i, (lat, lon) in enumerate(user_geoposts):
        cell = snap_to_cell(*project(lat, lon, ref_lat), cell_size_m=100)
        counts[cell] = counts.get(cell, 0) + 1
        if cell not in first_seen:
            first_seen[cell] = i
    best = min(counts, key=lambda c: (-counts[c], first_seen[c]))
    return HomeLocation(author_id=author_id, cell=best,
                        support=counts[best], total_geoposts=len(user_geoposts))


class PatchIndex:
    """Bucketed planar index over patch centers for nearest-patch queries."""

    BUCKET_M = 1000

    def __init__(self, patches: Iterable[tuple[str, float, float]]):
        # patches: (patch_id, center_easting, center_northing)
        self._buckets: dict[tuple[int, int], list[tuple[str, float, float]]] = defaultdict(list)
        self._n = 0
        for pid, ce, cn in patches:
            key = (int(math.floor(ce / self.BUCKET_M)), int(math.floor(cn / self.BUCKET_M)))
            self._buckets[key].append((pid, ce, cn))
            self._n += 1

    def __len__(self) -> int:
        return self._n

    def nearest(self, easting: float, northing: float,
                max_dist_m: float = 1000.0) -> Optional[tuple[str, float]]:
        """Closest patch center within max_dist_m; ties -> smallest patch_id."""
        bx = int(math.floor(easting / self.BUCKET_M))
        by = int(math.floor(northing / self.BUCKET_M))
        reach = int(math.ceil(max_dist_m / self.BUCKET_M))
        best: Optional[tuple[float, str]] = None
        for dx in range(-reach, reach + 1):
            for dy in range(-reach, reach + 1):
                for pid, ce, cn in self._buckets.get((bx + dx, by + dy), ()):
                    d = math.hypot(ce - easting, cn - northing)
                    if d > max_dist_m:
                        continue
                    cand = (d, pid)
                    if best is None or cand < best:
                        best = cand
        if best is None:
            return None
        return best[1], best[0]


def assign_patch(home: HomeLocation, index: PatchIndex,
                 max_dist_m: float = 1000.0) -> Optional[str]:
    """Patch whose center is nearest the home cell center, within 1 km."""
    ce, cn = home.cell.center
    hit = index.nearest(ce, cn, max_dist_m)
    return hit[0] if hit else None


class RegionMap:
    """Grid-cell -> administrative-unit lookup at one or more levels."""

    def __init__(self, cell_size_m: int = 200):
        self.cell_size_m = cell_size_m
        self._levels: dict[str, dict[tuple[int, int], str]] = defaultdict(dict)

    def add(self, easting_m: float, northing_m: float, level: str, unit_id: str) -> None:
        key = (int(math.floor(easting_m / self.cell_size_m)),
               int(math.floor(northing_m / self.cell_size_m)))
        self._levels[level][key] = unit_id

    @property
    def levels(self) -> list[str]:
        return sorted(self._levels)

    def units(self, level: str) -> set[str]:
        return set(self._levels[level].values())

    def lookup(self, easting: float, northing: float, level: str) -> Optional[str]:
        key = (int(math.floor(easting / self.cell_size_m)),
               int(math.floor(northing / self.cell_size_m)))
        return self._levels.get(level, {}).get(key)

    @classmethod
    def from_csv(cls, path: str | Path, cell_size_m: int = 200) -> "RegionMap":
        rm = cls(cell_size_m)
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            for row in reader:
                rm.add(float(row["easting_m"]), float(row["northing_m"]),
                       row["level"], row["unit_id"])
        return rm


def count_users_per_unit(homes: Iterable[HomeLocation], region_map: RegionMap,
                         level: str) -> tuple[Counter, int]:
    """User counts keyed by unit id, plus how many homes fell off the map."""
    counts: Counter = Counter()
    unassigned = 0
    for home in homes:
        ce, cn = home.cell.center
        unit = region_map.lookup(ce, cn, level)
        if unit is None:
            unassigned += 1
        else:
            counts[unit] += 1
    return counts, unassigned


def representativeness_r2(user_counts: Mapping[str, int],
                          reference: Mapping[str, float]) -> float:
    """R-squared of the OLS fit of per-unit user counts against reference
    populations.  Units missing from user_counts count as zero."""
    units = sorted(reference)
    if len(units) < 3:
        raise ValueError(f"need at least 3 units, got {len(units)}")
    x = [float(reference[u]) for u in units]
    y = [float(user_counts.get(u, 0)) for u in units]
    n = len(units)
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((xi - mx) ** 2 for xi in x)
    sst = sum((yi - my) ** 2 for yi in y)
    if sst == 0.0:
        return 0.0
    if sxx == 0.0:
        return 0.0
    b = sum((xi - mx) * (yi - my) for xi, yi in zip(x, y)) / sxx
    ssr = sum((yi - (my + b * (xi - mx))) ** 2 for xi, yi in zip(x, y))
    return 1.0 - ssr / sst


def representativeness(homes: Iterable[HomeLocation], region_map: RegionMap,
                       reference_by_level: Mapping[str, Mapping[str, float]]) -> dict[str, float]:
    """Per-level spatial representativeness of the inferred user homes."""
    homes = list(homes)
    out: dict[str, float] = {}
    for level, reference in reference_by_level.items():
        counts, _ = count_users_per_unit(homes, region_map, level)
        out[level] = representativeness_r2(counts, reference)
    return out
