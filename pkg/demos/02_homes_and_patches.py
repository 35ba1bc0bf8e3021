#!/usr/bin/env python3
"""Home-location inference on synthetic GPS tracks.

A user posts mostly from one spot; the modal 100 m grid cell becomes the
home, over-shared coordinates are filtered out first, and the home joins
the nearest 200 m census patch within 1 km.
"""
import numpy as np

from sociolex.corpus import RawPost
from sociolex.geoloc import (PatchIndex, assign_patch, filter_overused_coords,
                             infer_home, project, snap_to_cell, unproject)
from sociolex.ses import compute_indicators

rng = np.random.default_rng(3)

# --- a user's geotagged posts: 8 from home, 2 from elsewhere ---------------
home_true = (45.7640, 4.8357)
away = (45.7500, 4.8500)
track = [home_true] * 8 + [away] * 2

home = infer_home(track, author_id="demo")
print(f"true home {home_true} -> inferred cell SW corner "
      f"({home.cell.easting_m}, {home.cell.northing_m}) m, "
      f"support {home.support}/{home.total_geoposts}")
back = unproject(*home.cell.center)
print(f"cell center back-projected: ({back[0]:.4f}, {back[1]:.4f})")

# --- the over-shared coordinate filter -------------------------------------
beacon = (45.7578, 4.8320)  # think "city-center default pin"


def geo_post(i, coords):
    return RawPost(post_id=f"g{i}", author_id=f"u{i % 7}", timestamp=i,
                   utc_offset_minutes=0, text="", is_retweet=False,
                   mentioned_ids=(), coords=coords)


posts = [geo_post(i, beacon) for i in range(501)]
posts += [geo_post(1000 + i, home_true) for i in range(10)]
kept = filter_overused_coords(posts, threshold=500)
print(f"\n{len(posts)} geotagged posts, {len(kept)} kept after dropping the "
      f"coordinate shared {posts.__len__() - 10} times")

# --- joining census patches -------------------------------------------------
e, n = project(*home_true)
cell = snap_to_cell(e, n, 200)
patches = []
for dx in range(-3, 4):
    for dy in range(-3, 4):
        pe = cell.easting_m + 200 * dx + 100.0
        pn = cell.northing_m + 200 * dy + 100.0
        patches.append((f"P{dx + 3}{dy + 3}", pe, pn))
index = PatchIndex(patches)
pid = assign_patch(home, index)
print(f"nearest patch within 1 km: {pid}")

s_inc, s_own, s_den = compute_indicators(S_hh=840_000, N_hh=38, N_own=31, N=91)
print(f"example patch indicators: income/capita {s_inc:.0f} EUR, "
      f"owner fraction {s_own:.2f}, density {s_den * 1e6:.0f} persons/km^2")
