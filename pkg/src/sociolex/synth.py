"""Synthetic corpus generator with planted, parameterized couplings.

Emits every pipeline input file (posts, patches, regions, reference
populations) plus a ground-truth JSON, fully deterministic per seed.
Marker constructions are injected as literal token sequences ("je ne fume
pas", "les chevaux") so the real detectors, tokenizer and counters are
exercised end to end rather than bypassed.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .geoloc import DEFAULT_REF_LAT, project, unproject
from .lingmark import PluralLexicon
from .ses import partition_classes

EPOCH_MONDAY = 1_420_416_000  # 2015-01-05 00:00:00 UTC, a Monday
CLASS_DISTANCE_DECAY = 0.05    # geometric falloff of the assortative boost


@dataclass
class SynthConfig:
    seed: int
    n_users: int = 10_000
    posts_per_user: int = 100
    n_patches_side: int = 40
    k_classes: int = 9

    income_mu: float = 9.9     # log euros; exp(9.9) ~ 20k
    income_sigma: float = 0.3

    # logistic links from standardized log-income to P(standard)
    base_cn: float = 0.4
    slope_cn: float = 0.9
    base_cp: float = 0.5
    slope_cp: float = 0.9
    slope_vs: float = 0.85
    vocab_min: int = 40
    vocab_max: int = 140
    idio_sd: float = 1.1      # per-user latent noise around the planted links

    gradient_lat: float = -0.6  # negative: north less standard
    diurnal_strength: float = 0.9

    mean_degree: float = 8.0
    homophily_alpha: float = 0.7
    influence_beta: float = 0.8

    negation_rate: float = 0.8
    plural_rate: float = 0.7
    filler_tokens: int = 3
    n_weeks: int = 8
    utc_offset_minutes: int = 60

    geo_posts_per_user: int = 10
    n_departments: int = 8
    region_pop_noise: float = 0.1
    beacon_users: int = 550    # posts sharing one coordinate, to trip the filter

    base_lat: float = 43.5
    base_lon: float = 1.0


def load_config(path: str | Path, seed: Optional[int] = None) -> SynthConfig:
    """Parse a flat key=value config file; a passed seed overrides the file."""
    values: dict = {}
    with open(path, "r", encoding="utf-8") as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {raw.strip()!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key] = val
    if seed is not None:
        values["seed"] = seed
    if "seed" not in values:
        raise ValueError("config must set a seed")
    kwargs = {}
    for key, val in values.items():
        if key not in SynthConfig.__dataclass_fields__:
            raise ValueError(f"unknown config key {key!r}")
        ftype = SynthConfig.__dataclass_fields__[key].type
        if ftype == "int":
            kwargs[key] = int(val)
        elif ftype == "float":
            kwargs[key] = float(val)
        else:
            kwargs[key] = val
    return SynthConfig(**kwargs)


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


_VERBS = ["fume", "mange", "parle", "joue", "chante", "regarde"]
_NE_ELIDED = ["n'aime", "n'ose", "n'entend"]
_DETERMINERS = ["les", "des", "ces"]


class _Planted:
    """All per-user latent state, derived deterministically from the seed."""

    def __init__(self, cfg: SynthConfig, rng: np.random.Generator,
                 lexicon: PluralLexicon):
        n = cfg.n_users
        side = cfg.n_patches_side
        if cfg.mean_degree >= n:
            raise ValueError("mean degree must be below the number of users")
        if cfg.geo_posts_per_user > cfg.posts_per_user:
            raise ValueError("geo_posts_per_user exceeds posts_per_user")

        # --- patch grid (200 m cells), anchored on round coordinates
        e0, n0 = project(cfg.base_lat, cfg.base_lon, DEFAULT_REF_LAT)
        e0 = math.floor(e0 / 200.0) * 200
        n0 = math.floor(n0 / 200.0) * 200
        self.patch_e = np.array([e0 + 200 * (i % side) for i in range(side * side)])
        self.patch_n = np.array([n0 + 200 * (i // side) for i in range(side * side)])
        self.patch_ids = [f"P{i:05d}" for i in range(side * side)]

        # clipped log-normal: census-style winsorized tails keep regression
        # bins populated out to the extremes
        g = np.clip(rng.standard_normal(side * side), -2.2, 2.2)
        self.patch_income = np.exp(cfg.income_mu + cfg.income_sigma * g)
        self.patch_nhh = rng.integers(10, 60, size=side * side)
        # department-scale population structure so that per-unit user counts
        # vary enough for the representativeness regression to bite
        band_of_patch = np.clip(
            ((np.arange(side * side) // side) * cfg.n_departments) // side,
            0, cfg.n_departments - 1)
        dep_factor = np.exp(rng.uniform(-1.0, 1.0, cfg.n_departments))
        self.patch_n_people = np.round(
            self.patch_nhh * rng.uniform(1.8, 2.6, side * side)
            * dep_factor[band_of_patch]).astype(int)
        own_frac = np.clip(0.45 + 0.12 * g - 0.10 * rng.standard_normal(side * side), 0.05, 0.95)
        self.patch_nown = np.minimum(
            rng.binomial(self.patch_n_people, own_frac), self.patch_n_people)
        self.patch_shh = self.patch_income * self.patch_nhh

        # --- users placed on patches proportionally to population
        w = self.patch_n_people / self.patch_n_people.sum()
        self.user_ids = [f"u{i:06d}" for i in range(n)]
        self.user_patch = rng.choice(side * side, size=n, p=w)
        self.income = self.patch_income[self.user_patch]

        # home coordinate: fixed per user, inside the patch's SW 100 m cell
        ce = self.patch_e[self.user_patch] + 50 + rng.uniform(-30, 30, n)
        cn = self.patch_n[self.user_patch] + 50 + rng.uniform(-30, 30, n)
        lat, lon = zip(*(unproject(e, nn, DEFAULT_REF_LAT) for e, nn in zip(ce, cn)))
        self.home_lat = np.round(np.array(lat), 6)
        self.home_lon = np.round(np.array(lon), 6)

        # --- true socioeconomic classes (same rule the pipeline applies)
        part = partition_classes(
            {u: float(v) for u, v in zip(self.user_ids, self.income)}, k=cfg.k_classes)
        self.classes = np.array([part.assignment[u] for u in self.user_ids])

        # --- latent sociolinguistic propensities
        log_inc = np.log(self.income)
        z_inc = (log_inc - log_inc.mean()) / max(log_inc.std(), 1e-12)
        z_lat = (self.home_lat - self.home_lat.mean()) / max(self.home_lat.std(), 1e-12)
        self.z_inc, self.z_lat = z_inc, z_lat
        idio = rng.standard_normal((3, n)) * cfg.idio_sd
        self.l_cn = cfg.base_cn + cfg.slope_cn * z_inc + cfg.gradient_lat * z_lat + idio[0]
        self.l_cp = cfg.base_cp + cfg.slope_cp * z_inc + cfg.gradient_lat * z_lat + idio[1]
        self.l_vs = cfg.slope_vs * z_inc + 0.5 * cfg.gradient_lat * z_lat + idio[2]

        # --- mutual-mention network: class-assortative pair acceptance.
        # Same-class pairs carry weight 1 + alpha*(k-1); the whole weight
        # then decays geometrically with class distance, so links between
        # far-apart classes become rare.  alpha = 0 keeps the kernel flat.
        m_target = int(round(n * cfg.mean_degree / 2.0))
        boost = cfg.homophily_alpha * (cfg.k_classes - 1)
        w_max = 1.0 + boost
        decay = 1.0 - cfg.homophily_alpha * (1.0 - CLASS_DISTANCE_DECAY)
        edges: set[tuple[int, int]] = set()
        while len(edges) < m_target:
            size = max(1024, 2 * (m_target - len(edges)))
            uu = rng.integers(0, n, size=size)
            vv = rng.integers(0, n, size=size)
            acc = rng.uniform(0, w_max, size=size)
            for u, v, a in zip(uu, vv, acc):
                if u == v:
                    continue
                d = abs(int(self.classes[u]) - int(self.classes[v]))
                wgt = w_max * (decay ** d)
                if a > wgt:
                    continue
                e = (int(u), int(v)) if u < v else (int(v), int(u))
                if e not in edges:
                    edges.add(e)
                    if len(edges) == m_target:
                        break
        self.edges = sorted(edges)

        # --- connected-influence, two mechanisms:
        # mild neighbor averaging (community-level convergence) plus hard
        # latent convergence on a maximal matching of edges (strong ties);
        # the matching is over disjoint pairs, so the update is order-free
        if cfg.influence_beta > 0 and self.edges:
            us = np.array([e[0] for e in self.edges])
            vs = np.array([e[1] for e in self.edges])
            deg = np.bincount(np.concatenate([us, vs]), minlength=n)
            w = min(0.45, 0.25 * cfg.influence_beta)
            rounds = []
            used: set[tuple[int, int]] = set()
            for _ in range(3):
                taken = np.zeros(n, dtype=bool)
                picked = []
                for u, v in self.edges:
                    if not taken[u] and not taken[v] and (u, v) not in used:
                        taken[u] = taken[v] = True
                        picked.append((u, v))
                        used.add((u, v))
                rounds.append((np.array([e[0] for e in picked], dtype=np.int64),
                               np.array([e[1] for e in picked], dtype=np.int64)))
            pull = min(0.95, 1.2 * cfg.influence_beta)
            for lat_vec in (self.l_cn, self.l_cp, self.l_vs):
                for _ in range(2):
                    nbr = np.zeros(n)
                    np.add.at(nbr, us, lat_vec[vs])
                    np.add.at(nbr, vs, lat_vec[us])
                    has = deg > 0
                    lat_vec[has] = ((1.0 - w) * lat_vec[has]
                                    + w * nbr[has] / deg[has])
                for s_u, s_v in rounds:
                    mid = 0.5 * (lat_vec[s_u] + lat_vec[s_v])
                    lat_vec[s_u] = mid + (1.0 - pull) * (lat_vec[s_u] - mid)
                    lat_vec[s_v] = mid + (1.0 - pull) * (lat_vec[s_v] - mid)

        self.p_cn = _sigmoid(self.l_cn)
        self.p_cp = _sigmoid(self.l_cp)
        self.vocab_size = np.round(
            cfg.vocab_min + (cfg.vocab_max - cfg.vocab_min) * _sigmoid(self.l_vs)
        ).astype(int)

        # activity phase: rich users lean to the day profile
        pct = self.income.argsort().argsort() / max(n - 1, 1)
        self.p_day = np.clip(0.5 + cfg.diurnal_strength * (pct - 0.5), 0.0, 1.0)

        # nouns used for plural constructions: a small fixed slice keeps the
        # vocabulary signal clean
        pairs = sorted(lexicon.singular_to_plural.items())[:30]
        self.nouns = pairs

        # --- departments: latitudinal bands over the patch grid
        # integer arithmetic: float division can push band edges off by one
        row = np.rint((self.patch_n - n0) / 200.0).astype(np.int64)
        band = np.clip((row * cfg.n_departments) // side, 0, cfg.n_departments - 1)
        self.patch_department = np.array([f"D{b + 1:02d}" for b in band])
        self.user_department = self.patch_department[self.user_patch]


def _user_posts(cfg: SynthConfig, planted: _Planted, uidx: int,
                rng: np.random.Generator, neighbor_ids: list[str]) -> list[dict]:
    n_posts = cfg.posts_per_user
    user = planted.user_ids[uidx]

    neg_mask = rng.random(n_posts) < cfg.negation_rate
    neg_std = rng.random(n_posts) < planted.p_cn[uidx]
    neg_elide = rng.random(n_posts) < 0.2
    plu_mask = rng.random(n_posts) < cfg.plural_rate
    plu_std = rng.random(n_posts) < planted.p_cp[uidx]
    noun_pick = rng.integers(0, len(planted.nouns), size=n_posts)
    det_pick = rng.integers(0, len(_DETERMINERS), size=n_posts)
    verb_pick = rng.integers(0, len(_VERBS), size=n_posts)
    elide_pick = rng.integers(0, len(_NE_ELIDED), size=n_posts)
    vocab = planted.vocab_size[uidx]
    filler = rng.integers(0, vocab, size=(n_posts, cfg.filler_tokens))
    noise_kind = rng.integers(0, 20, size=n_posts)

    weeks = rng.integers(0, cfg.n_weeks, size=n_posts)
    dows = rng.integers(0, 7, size=n_posts)
    day_profile = rng.random(n_posts) < planted.p_day[uidx]
    hours = np.where(
        day_profile,
        np.round(rng.normal(14, 3, n_posts)).astype(int),
        np.round(rng.normal(2, 4, n_posts)).astype(int),
    ) % 24
    secs = rng.integers(0, 3600, size=n_posts)

    # spread mention targets over the first posts, at most 3 per post
    mention_plan: list[list[str]] = [[] for _ in range(n_posts)]
    for i, target in enumerate(neighbor_ids):
        mention_plan[(i // 3) % n_posts].append(target)

    geo_mask = np.zeros(n_posts, dtype=bool)
    geo_mask[: cfg.geo_posts_per_user] = True

    posts = []
    for i in range(n_posts):
        parts = []
        for target in mention_plan[i]:
            parts.append(f"@{target}")
        if neg_mask[i]:
            if neg_std[i]:
                if neg_elide[i]:
                    parts.append(f"je {_NE_ELIDED[elide_pick[i]]} pas")
                else:
                    parts.append(f"je ne {_VERBS[verb_pick[i]]} pas")
            else:
                parts.append(f"je {_VERBS[verb_pick[i]]} pas")
        if plu_mask[i]:
            sg, pl = planted.nouns[noun_pick[i]]
            parts.append(f"{_DETERMINERS[det_pick[i]]} {pl if plu_std[i] else sg}")
        parts.extend(f"mot{w:04d}" for w in filler[i])
        if noise_kind[i] == 0:
            parts.append("http://t.co/xyz")
        elif noise_kind[i] == 1:
            parts.append(":)")
        elif noise_kind[i] == 2:
            parts.append("#sujet")
        text = " ".join(parts)

        local = ((int(weeks[i]) * 7 + int(dows[i])) * 24 + int(hours[i])) * 3600 + int(secs[i])
        ts = EPOCH_MONDAY + local - 60 * cfg.utc_offset_minutes

        rec = {
            "id": f"{user}-{i:04d}",
            "user": user,
            "ts": ts,
            "utc_offset": cfg.utc_offset_minutes,
            "text": text,
            "retweet": False,
            "mentions": mention_plan[i],
        }
        if geo_mask[i]:
            rec["lat"] = float(planted.home_lat[uidx])
            rec["lon"] = float(planted.home_lon[uidx])
        posts.append(rec)
    return posts


def generate(cfg: SynthConfig, outdir: str | Path) -> dict[str, Path]:
    """Write all pipeline inputs plus ground truth; deterministic per seed."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    master = np.random.SeedSequence(cfg.seed)
    rng = np.random.default_rng(master.spawn(1)[0])
    lexicon = PluralLexicon.bundled()
    planted = _Planted(cfg, rng, lexicon)
    n = cfg.n_users

    neighbor_ids: list[list[str]] = [[] for _ in range(n)]
    for u, v in planted.edges:
        neighbor_ids[u].append(planted.user_ids[v])
        neighbor_ids[v].append(planted.user_ids[u])

    # beacon: one shared, often-repeated coordinate replacing one home tag
    beacon_lat, beacon_lon = None, None
    n_beacon = min(cfg.beacon_users, n)
    if n_beacon > 0 and cfg.geo_posts_per_user >= 2:
        beacon_lat = round(float(planted.home_lat.mean()), 6)
        beacon_lon = round(float(planted.home_lon.mean()), 6)

    user_seeds = master.spawn(n)
    posts_path = outdir / "posts.ndjson"
    with posts_path.open("w", encoding="utf-8") as f:
        for uidx in range(n):
            urng = np.random.default_rng(user_seeds[uidx])
            posts = _user_posts(cfg, planted, uidx, urng, neighbor_ids[uidx])
            if beacon_lat is not None and uidx < n_beacon:
                posts[cfg.geo_posts_per_user - 1]["lat"] = beacon_lat
                posts[cfg.geo_posts_per_user - 1]["lon"] = beacon_lon
            for rec in posts:
                f.write(json.dumps(rec, separators=(",", ":")) + "\n")

    patches_path = outdir / "patches.csv"
    with patches_path.open("w", encoding="utf-8", newline="") as f:
        f.write("patch_id,easting_m,northing_m,S_hh,N_hh,N_own,N\n")
        for i, pid in enumerate(planted.patch_ids):
            f.write(
                f"{pid},{int(planted.patch_e[i])},{int(planted.patch_n[i])},"
                f"{planted.patch_shh[i]:.2f},{planted.patch_nhh[i]},"
                f"{planted.patch_nown[i]},{planted.patch_n_people[i]}\n"
            )

    regions_path = outdir / "regions.csv"
    with regions_path.open("w", encoding="utf-8", newline="") as f:
        f.write("easting_m,northing_m,level,unit_id\n")
        for i in range(len(planted.patch_ids)):
            f.write(
                f"{int(planted.patch_e[i])},{int(planted.patch_n[i])},"
                f"department,{planted.patch_department[i]}\n"
            )

    dep_counts: dict[str, int] = {}
    for d in planted.user_department:
        dep_counts[d] = dep_counts.get(d, 0) + 1
    ref_rng = np.random.default_rng(master.spawn(1)[0].spawn(1)[0])
    reference_path = outdir / "reference_populations.csv"
    with reference_path.open("w", encoding="utf-8", newline="") as f:
        f.write("level,unit_id,population\n")
        for d in sorted(set(planted.patch_department)):
            true = dep_counts.get(d, 0)
            noisy = max(1.0, true * (1.0 + cfg.region_pop_noise * ref_rng.standard_normal()))
            f.write(f"department,{d},{noisy:.2f}\n")

    truth = {
        "config": asdict(cfg),
        "n_edges": len(planted.edges),
        "beacon": {"lat": beacon_lat, "lon": beacon_lon, "n_posts": n_beacon},
        "users": {
            planted.user_ids[i]: {
                "income": float(planted.income[i]),
                "patch_id": planted.patch_ids[planted.user_patch[i]],
                "department": planted.user_department[i],
                "class": int(planted.classes[i]),
                "p_cn": float(planted.p_cn[i]),
                "p_cp": float(planted.p_cp[i]),
                "vocab_size": int(planted.vocab_size[i]),
                "p_day": float(planted.p_day[i]),
                "home_lat": float(planted.home_lat[i]),
                "home_lon": float(planted.home_lon[i]),
            }
            for i in range(n)
        },
    }
    truth_path = outdir / "groundtruth.json"
    truth_path.write_text(json.dumps(truth, indent=1, sort_keys=True), encoding="utf-8")

    return {
        "posts": posts_path,
        "patches": patches_path,
        "regions": regions_path,
        "reference": reference_path,
        "groundtruth": truth_path,
    }
