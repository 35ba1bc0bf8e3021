"""Subcommand front-end wiring the pipeline stages together.

Every run resolves its parameters, hashes its inputs and writes a JSON
manifest next to its primary output.  All randomness flows from --seed;
worker count (--threads / SOCIOLEX_THREADS) never changes any output byte.

Exit codes: 0 success, 1 data error (one-line diagnostic on stderr),
2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import glob
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__, analysis, corpus, geoloc, lingmark, ses, socionet, synth

MARKERS = ("cn", "cp", "vs")
INDICATORS = ("inc", "own", "den")
ANALYZE_WHAT = ("fig2", "fig3", "fig4", "fig5", "table1", "table2", "table3", "multivar")


# ---------------------------------------------------------------- helpers

def _fmt(x: Optional[float]) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return f"{x:.10g}"


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as f:
        while True:
            block = f.read(1 << 20)
            if not block:
                break
            h.update(block)
    return h.hexdigest()


def _write_manifest(anchor: Path, subcommand: str, params: dict,
                    inputs: Sequence[Path], seed: Optional[int], t0: float) -> None:
    manifest = {
        "subcommand": subcommand,
        "parameters": {k: (str(v) if isinstance(v, Path) else v) for k, v in params.items()},
        "inputs": {str(p): _sha256(Path(p)) for p in inputs},
        "seed": seed,
        "version": __version__,
        "wall_time_s": round(time.monotonic() - t0, 3),
    }
    path = anchor.with_name(anchor.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True), encoding="utf-8")


def _expand_inputs(patterns: Sequence[str]) -> list[Path]:
    paths: list[Path] = []
    for pattern in patterns:
        hits = sorted(glob.glob(pattern))
        if hits:
            paths.extend(Path(h) for h in hits)
        else:
            paths.append(Path(pattern))  # existence checked on open
    if not paths:
        raise ValueError("no input files given")
    for p in paths:
        if not p.exists():
            raise FileNotFoundError(f"input file not found: {p}")
    return paths


def _load_lexicon(path: Optional[str]) -> lingmark.PluralLexicon:
    if path:
        return lingmark.PluralLexicon.load(path)
    return lingmark.PluralLexicon.bundled()


def _load_profiles(path: str) -> dict[str, lingmark.LinguisticProfile]:
    out: dict[str, lingmark.LinguisticProfile] = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            out[row["user"]] = lingmark.LinguisticProfile(
                L_cn=float(row["L_cn"]) if row["L_cn"] else None,
                L_cp=float(row["L_cp"]) if row["L_cp"] else None,
                L_vs=float(row["L_vs"]) if row["L_vs"] else None,
            )
    return out


def _load_homes(path: str) -> dict[str, tuple[geoloc.HomeLocation, Optional[str]]]:
    out: dict[str, tuple[geoloc.HomeLocation, Optional[str]]] = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            cell = geoloc.GridCell(int(row["easting_m"]), int(row["northing_m"]),
                                   int(row["cell_size_m"]))
            home = geoloc.HomeLocation(row["user"], cell, int(row["support"]),
                                       int(row["total_geoposts"]))
            out[row["user"]] = (home, row["patch_id"] or None)
    return out


def _load_ses(path: str) -> dict[str, ses.UserSES]:
    out: dict[str, ses.UserSES] = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            out[row["user"]] = ses.UserSES(
                author_id=row["user"],
                patch_id=row["patch_id"],
                S_inc=float(row["S_inc"]) if row["S_inc"] else None,
                S_own=float(row["S_own"]) if row["S_own"] else None,
                S_den=float(row["S_den"]) if row["S_den"] else 0.0,
                socio_class=int(row["class"]) if row["class"] else None,
            )
    return out


def _load_edges(path: str) -> socionet.MentionGraph:
    edges = []
    nodes = set()
    with open(path, "r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            edges.append((row["u"], row["v"]))
            nodes.add(row["u"])
            nodes.add(row["v"])
    return socionet.MentionGraph(nodes, edges)


def _classes_of(ses_users: dict[str, ses.UserSES]) -> dict[str, int]:
    return {u: s.socio_class for u, s in ses_users.items() if s.socio_class is not None}


def _indicator_value(user_ses: ses.UserSES, indicator: str) -> Optional[float]:
    return {"inc": user_ses.S_inc, "own": user_ses.S_own, "den": user_ses.S_den}[indicator]


# ------------------------------------------------------------ subcommands

def cmd_ingest(args) -> int:
    t0 = time.monotonic()
    paths = _expand_inputs(args.input)
    stats = corpus.IngestStats()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as f:
        for post in corpus.ingest(paths, stats):
            clean = corpus.preprocess(post, stats)
            if clean is None:
                continue
            f.write(json.dumps(corpus.to_envelope(clean), separators=(",", ":")) + "\n")
    print(
        f"ingest: {stats.records_read} read, {stats.parsed} parsed, "
        f"{stats.retweets_dropped} retweets dropped, "
        f"{stats.skipped_malformed} malformed skipped",
        file=sys.stderr,
    )
    _write_manifest(out, "ingest",
                    {"input": [str(p) for p in paths], "out": str(out),
                     "stats": vars(stats)},
                    paths, None, t0)
    return 0


def cmd_markers(args) -> int:
    t0 = time.monotonic()
    paths = _expand_inputs([args.infile])
    lexicon = _load_lexicon(args.lexicon)
    counts = lingmark.accumulate_markers(corpus.read_clean(paths), lexicon,
                                         require_ne_before=args.require_ne_before)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="") as f:
        f.write("user,n_cn,n_incn,L_cn,n_cp,n_incp,L_cp,N_vs,N_tw,L_vs\n")
        for user in sorted(counts):
            c = counts[user]
            prof = lingmark.profile_from_counts(c)
            f.write(
                f"{user},{c.n_cn},{c.n_incn},{_fmt(prof.L_cn)},"
                f"{c.n_cp},{c.n_incp},{_fmt(prof.L_cp)},"
                f"{c.n_unique_words},{c.n_tweets},{_fmt(prof.L_vs)}\n"
            )
    _write_manifest(out, "markers",
                    {"in": str(paths[0]), "lexicon": args.lexicon or "bundled",
                     "require_ne_before": args.require_ne_before, "out": str(out),
                     "n_users": len(counts)},
                    paths, None, t0)
    return 0


def cmd_geo(args) -> int:
    t0 = time.monotonic()
    paths = _expand_inputs([args.infile])
    geoposts = []
    for post in corpus.read_clean(paths):
        if post.coords is not None:
            geoposts.append(post)
    geoposts = geoloc.filter_overused_coords(geoposts, threshold=args.coord_threshold)

    by_user: dict[str, list] = {}
    for post in geoposts:
        lat, lon = post.coords
        if not geoloc.in_bbox(lat, lon):
            continue
        by_user.setdefault(post.author_id, []).append((post.timestamp, post.post_id, lat, lon))

    patches = ses.load_patches(args.patches)
    index = geoloc.PatchIndex(
        (p.patch_id, p.cell.center[0], p.cell.center[1]) for p in patches.values())

    homes: dict[str, geoloc.HomeLocation] = {}
    patch_of: dict[str, Optional[str]] = {}
    for user in sorted(by_user):
        recs = sorted(by_user[user])
        home = geoloc.infer_home([(lat, lon) for _, _, lat, lon in recs], author_id=user)
        if home is None:
            continue
        homes[user] = home
        patch_of[user] = geoloc.assign_patch(home, index)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="") as f:
        f.write("user,easting_m,northing_m,cell_size_m,support,total_geoposts,patch_id\n")
        for user in sorted(homes):
            h = homes[user]
            f.write(
                f"{user},{h.cell.easting_m},{h.cell.northing_m},{h.cell.cell_size_m},"
                f"{h.support},{h.total_geoposts},{patch_of[user] or ''}\n"
            )

    extra: dict = {"n_users_with_home": len(homes),
                   "n_users_with_patch": sum(1 for v in patch_of.values() if v)}
    inputs = list(paths) + [Path(args.patches)]
    if args.regions and args.reference:
        region_map = geoloc.RegionMap.from_csv(args.regions)
        reference: dict[str, dict[str, float]] = {}
        with open(args.reference, "r", encoding="utf-8", newline="") as f:
            for row in csv.DictReader(f):
                reference.setdefault(row["level"], {})[row["unit_id"]] = float(row["population"])
        extra["representativeness_r2"] = geoloc.representativeness(
            homes.values(), region_map, reference)
        inputs += [Path(args.regions), Path(args.reference)]
    _write_manifest(out, "geo",
                    {"in": str(paths[0]), "patches": args.patches,
                     "regions": args.regions, "reference": args.reference,
                     "coord_threshold": args.coord_threshold, "out": str(out), **extra},
                    inputs, None, t0)
    if "representativeness_r2" in extra:
        for level, r2 in extra["representativeness_r2"].items():
            print(f"geo: representativeness R2[{level}] = {r2:.4f}", file=sys.stderr)
    return 0


def cmd_ses(args) -> int:
    t0 = time.monotonic()
    patches = ses.load_patches(args.patches)
    homes = _load_homes(args.homes)
    user_patches = {u: pid for u, (_, pid) in homes.items() if pid is not None}
    users = ses.attach_users(user_patches, patches)
    with_income = {u.author_id: u.S_inc for u in users if u.S_inc is not None}
    partition = ses.partition_classes(with_income, k=args.classes)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="") as f:
        f.write("user,patch_id,S_inc,S_own,S_den,class\n")
        for u in users:
            cls = partition.assignment.get(u.author_id)
            f.write(
                f"{u.author_id},{u.patch_id},{_fmt(u.S_inc)},{_fmt(u.S_own)},"
                f"{_fmt(u.S_den)},{cls if cls is not None else ''}\n"
            )
    _write_manifest(out, "ses",
                    {"patches": args.patches, "homes": args.homes,
                     "classes": args.classes, "out": str(out),
                     "n_users": len(users), "class_sizes": partition.sizes()},
                    [Path(args.patches), Path(args.homes)], None, t0)
    return 0


def cmd_network(args) -> int:
    t0 = time.monotonic()
    paths = _expand_inputs([args.infile])
    graph = socionet.build_network(corpus.read_clean(paths))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="") as f:
        f.write("u,v\n")
        for u, v in graph.edges():
            f.write(f"{u},{v}\n")
    _write_manifest(out, "network",
                    {"in": str(paths[0]), "out": str(out),
                     "n_nodes": graph.n_nodes, "n_edges": graph.n_edges},
                    paths, None, t0)
    return 0


def cmd_homophily(args) -> int:
    t0 = time.monotonic()
    graph = _load_edges(args.edges)
    classes = _classes_of(_load_ses(args.ses))
    k = args.classes or (max(classes.values()) if classes else 0)
    if k < 2:
        raise ValueError("need at least 2 socioeconomic classes")
    null = socionet.configuration_null(
        graph, classes, k, n_samples=args.samples,
        swaps_per_edge=args.swaps, seed=args.seed, threads=args.threads)
    hm = socionet.homophily_matrix(graph, classes, null)
    stat, p = socionet.chi_square_test(hm.observed, null)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="") as f:
        f.write(",".join([""] + [f"class_{i + 1}" for i in range(k)]) + "\n")
        for i in range(k):
            cells = [_fmt(hm.ratio[i, j]) for j in range(k)]
            f.write(",".join([f"class_{i + 1}"] + cells) + "\n")
    diag = hm.ratio.diagonal()
    stats = {
        "statistic": stat,
        "p": p,
        "n_samples": null.n_samples,
        "seed": args.seed,
        "swaps_per_edge": args.swaps,
        "k": k,
        "diagonal_mean": float(np.nanmean(diag)),
        "n_dropped_nodes": hm.n_dropped_nodes,
        "n_edges": graph.n_edges,
    }
    json_path = Path(args.json) if args.json else out.with_suffix(".json")
    json_path.write_text(json.dumps(stats, indent=1, sort_keys=True), encoding="utf-8")
    _write_manifest(out, "homophily",
                    {"edges": args.edges, "ses": args.ses, "classes": k,
                     "samples": args.samples, "swaps": args.swaps,
                     "out": str(out), "json": str(json_path), **stats},
                    [Path(args.edges), Path(args.ses)], args.seed, t0)
    return 0


# ---------------------------------------------------------------- analyze

def _analyze_fig2_table2(args, outdir: Path, what: str) -> list[Path]:
    profiles = _load_profiles(args.profiles)
    ses_users = _load_ses(args.ses)
    rows_binned = []
    rows_r2 = []
    stats_json = {}
    for indicator in INDICATORS:
        for marker in MARKERS:
            pairs = [
                (_indicator_value(ses_users[u], indicator), profiles[u].get(marker))
                for u in sorted(profiles.keys() & ses_users.keys())
            ]
            pairs = [(x, y) for x, y in pairs if x is not None and y is not None]
            x = np.array([p[0] for p in pairs])
            y = np.array([p[1] for p in pairs])
            result, points = analysis.binned_regression(
                x, y, n_bins=args.bins, log_x=(indicator == "den"), seed=args.seed)
            for c, bx, m, lo, hi, cnt in zip(points.centers, points.xs,
                                             points.means, result.ci95_low,
                                             result.ci95_high, points.counts):
                rows_binned.append((indicator, marker, _fmt(c), _fmt(bx),
                                    _fmt(m), _fmt(lo), _fmt(hi), int(cnt)))
            rows_r2.append((indicator, marker, _fmt(result.slope), _fmt(result.r2),
                            _fmt(result.p), result.n, int(result.n_bins),
                            int(result.log_x)))
            stats_json[f"{marker}~{indicator}"] = {
                "slope": result.slope, "r2": result.r2, "p": result.p, "n": result.n,
            }
    written = []
    if what == "fig2":
        path = outdir / "fig2_binned.csv"
        with path.open("w", encoding="utf-8", newline="") as f:
            f.write("indicator,marker,bin_center,bin_x_mean,bin_mean,ci_low,ci_high,n\n")
            for row in rows_binned:
                f.write(",".join(str(v) for v in row) + "\n")
        (outdir / "fig2_stats.json").write_text(
            json.dumps(stats_json, indent=1, sort_keys=True), encoding="utf-8")
        written += [path, outdir / "fig2_stats.json"]
    else:
        path = outdir / "table2_r2.csv"
        with path.open("w", encoding="utf-8", newline="") as f:
            f.write("indicator,marker,slope,r2,p,n_users,n_bins,log_x\n")
            for row in rows_r2:
                f.write(",".join(str(v) for v in row) + "\n")
        written.append(path)
    return written


def _analyze_fig3(args, outdir: Path) -> list[Path]:
    profiles = _load_profiles(args.profiles)
    homes = {u: h for u, (h, _) in _load_homes(args.homes).items()}
    region_map = geoloc.RegionMap.from_csv(args.regions)
    path = outdir / "fig3_departments.csv"
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write("level,unit,marker,mean,n_users,unassigned\n")
        for marker in MARKERS:
            rows, unassigned = analysis.spatial_aggregate(
                homes, profiles, region_map, args.level, marker)
            for unit, mean, n in rows:
                f.write(f"{args.level},{unit},{marker},{_fmt(mean)},{n},{unassigned}\n")
    return [path]


def _analyze_fig4_table3(args, outdir: Path, what: str) -> list[Path]:
    paths = _expand_inputs([args.infile])
    lexicon = _load_lexicon(args.lexicon)
    ses_users = _load_ses(args.ses)
    incomes = {u: s.S_inc for u, s in ses_users.items() if s.S_inc is not None}
    geo_users = set(incomes)

    # single pass over the corpus: both markers' observations plus activity
    obs: dict[str, list] = {"cn": [], "cp": []}
    activity: list[tuple[str, int]] = []
    for p in corpus.read_clean(paths):
        activity.append((p.author_id, p.local_hour_of_week))
        res = lingmark.detect_negation(p.text_marker)
        if res is not None:
            obs["cn"].append((p.author_id, p.local_hour_of_week,
                              res == lingmark.STANDARD))
        for pl in lingmark.detect_plural(p.tokens, lexicon):
            obs["cp"].append((p.author_id, p.local_hour_of_week,
                              pl == lingmark.STANDARD))

    profiles: dict[tuple[str, str], analysis.TemporalProfile] = {}
    for marker in ("cn", "cp"):
        profiles[(marker, "all")] = analysis.temporal_profile(
            obs[marker], activity, incomes, members=None, population="all")
        profiles[(marker, "geo")] = analysis.temporal_profile(
            obs[marker], activity, incomes, members=geo_users, population="geo")

    written = []
    if what == "fig4":
        path = outdir / "fig4_profile.csv"
        with path.open("w", encoding="utf-8", newline="") as f:
            f.write("hour,cn_all,cn_geo,cp_all,cp_geo,income_active\n")
            overlay = profiles[("cn", "geo")].income_overlay
            for h in range(analysis.HOURS_PER_WEEK):
                f.write(
                    f"{h},{_fmt(profiles[('cn', 'all')].values[h])},"
                    f"{_fmt(profiles[('cn', 'geo')].values[h])},"
                    f"{_fmt(profiles[('cp', 'all')].values[h])},"
                    f"{_fmt(profiles[('cp', 'geo')].values[h])},"
                    f"{_fmt(overlay[h])}\n"
                )
        written.append(path)
    else:
        path = outdir / "table3.csv"
        with path.open("w", encoding="utf-8", newline="") as f:
            f.write("marker,pair,r,p,n_hours\n")
            for marker in ("cn", "cp"):
                overlay = profiles[(marker, "geo")].income_overlay
                series = {
                    "all~inc": (profiles[(marker, "all")].values, overlay),
                    "geo~inc": (profiles[(marker, "geo")].values, overlay),
                    "geo~all": (profiles[(marker, "geo")].values,
                                profiles[(marker, "all")].values),
                }
                for pair, (a, b) in series.items():
                    mask = ~np.isnan(a) & ~np.isnan(b)
                    r, p = analysis.pearson(a[mask], b[mask], seed=args.seed)
                    f.write(f"{marker},{pair},{_fmt(r)},{_fmt(p)},{int(mask.sum())}\n")
        written.append(path)
    return written


def _analyze_fig5(args, outdir: Path) -> list[Path]:
    graph = _load_edges(args.edges)
    classes = _classes_of(_load_ses(args.ses))
    profiles = _load_profiles(args.profiles)
    path = outdir / "fig5_histograms.csv"
    stats: dict = {}
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write("marker,category,bin_low,bin_high,count\n")
        for marker in MARKERS:
            dists = analysis.similarity_distributions(
                graph, classes, profiles, marker,
                n=args.pairs, bin_width=args.bin_width, seed=args.seed)
            for category, dist in dists.items():
                for lo, hi, c in zip(dist.bin_edges[:-1], dist.bin_edges[1:], dist.counts):
                    f.write(f"{marker},{category},{_fmt(lo)},{_fmt(hi)},{int(c)}\n")
                stats.setdefault(marker, {})[category] = {
                    "mean_abs_diff": dist.mean_abs_diff,
                    "n_pairs": dist.n_pairs,
                    "n_resampled": dist.n_resampled,
                }
    stats_path = outdir / "fig5_stats.json"
    stats_path.write_text(json.dumps(stats, indent=1, sort_keys=True), encoding="utf-8")
    return [path, stats_path]


def _analyze_table1(args, outdir: Path) -> list[Path]:
    patches = ses.load_patches(args.patches)
    ses_users = _load_ses(args.ses)
    path = outdir / "table1.csv"
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write("dataset,pair,r,p,n\n")
        patch_rows = [(p.S_inc, p.S_own, p.S_den) for p in patches.values()]
        user_rows = [(s.S_inc, s.S_own, s.S_den) for s in ses_users.values()]
        for dataset, rows in (("census", patch_rows), ("users", user_rows)):
            n = sum(1 for r in rows if all(v is not None for v in r))
            for pair, (r, p) in ses.ses_cross_correlations(rows, seed=args.seed).items():
                f.write(f"{dataset},{pair[0]}~{pair[1]},{_fmt(r)},{_fmt(p)},{n}\n")
    return [path]


def _analyze_multivar(args, outdir: Path) -> list[Path]:
    profiles = _load_profiles(args.profiles)
    ses_users = _load_ses(args.ses)
    homes = {u: h for u, (h, _) in _load_homes(args.homes).items()}
    path = outdir / "multivar.csv"
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write("marker,beta_lat,beta_lon,beta_inc,intercept,r2,n\n")
        for marker in MARKERS:
            y, lats, lons, incs = [], [], [], []
            for u in sorted(profiles.keys() & ses_users.keys() & homes.keys()):
                val = profiles[u].get(marker)
                inc = ses_users[u].S_inc
                if val is None or inc is None:
                    continue
                ce, cn = homes[u].cell.center
                lat, lon = geoloc.unproject(ce, cn)
                y.append(val)
                lats.append(lat)
                lons.append(lon)
                incs.append(inc)
            res = analysis.multivariate_regression(
                y, {"lat": lats, "lon": lons, "inc": incs})
            f.write(
                f"{marker},{_fmt(res.coefficients['lat'])},"
                f"{_fmt(res.coefficients['lon'])},{_fmt(res.coefficients['inc'])},"
                f"{_fmt(res.intercept)},{_fmt(res.r2)},{res.n}\n"
            )
    return [path]


def cmd_analyze(args) -> int:
    t0 = time.monotonic()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.what == "fig2":
        written = _analyze_fig2_table2(args, outdir, "fig2")
    elif args.what == "table2":
        written = _analyze_fig2_table2(args, outdir, "table2")
    elif args.what == "fig3":
        written = _analyze_fig3(args, outdir)
    elif args.what == "fig4":
        written = _analyze_fig4_table3(args, outdir, "fig4")
    elif args.what == "table3":
        written = _analyze_fig4_table3(args, outdir, "table3")
    elif args.what == "fig5":
        written = _analyze_fig5(args, outdir)
    elif args.what == "table1":
        written = _analyze_table1(args, outdir)
    else:
        written = _analyze_multivar(args, outdir)
    inputs = [Path(v) for v in (args.profiles, args.ses, args.homes, args.regions,
                                args.edges, args.patches, args.infile) if v]
    _write_manifest(written[0], "analyze",
                    {"what": args.what, "outdir": str(outdir),
                     "written": [str(w) for w in written],
                     **{k: v for k, v in vars(args).items()
                        if k not in ("func", "what", "outdir") and v is not None}},
                    [p for p in inputs if p.exists()], args.seed, t0)
    return 0


def cmd_synth(args) -> int:
    t0 = time.monotonic()
    if args.config:
        cfg = synth.load_config(args.config, seed=args.seed)
    else:
        if args.seed is None:
            raise ValueError("synth needs --seed or a config file with a seed")
        cfg = synth.SynthConfig(seed=args.seed)
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ValueError(f"bad --set item {item!r}, expected key=value")
        key, val = item.split("=", 1)
        overrides[key.strip()] = val.strip()
    if overrides:
        fields = synth.SynthConfig.__dataclass_fields__
        kwargs = {}
        for key, val in overrides.items():
            if key not in fields:
                raise ValueError(f"unknown config key {key!r}")
            ftype = fields[key].type
            kwargs[key] = int(val) if ftype == "int" else float(val) if ftype == "float" else val
        from dataclasses import replace
        cfg = replace(cfg, **kwargs)
    outdir = Path(args.outdir)
    paths = synth.generate(cfg, outdir)
    _write_manifest(paths["posts"], "synth",
                    {"config": args.config, "outdir": str(outdir),
                     "resolved": {k: v for k, v in vars(cfg).items()}},
                    [], cfg.seed, t0)
    print(f"synth: wrote {', '.join(str(p) for p in paths.values())}", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    t0 = time.monotonic()
    outdir = Path(args.outdir)
    out = Path(args.out)
    lines = ["# sociolex run report", ""]

    def emit_csv(path: Path, title: str) -> None:
        if not path.exists():
            return
        lines.append(f"## {title}")
        lines.append("")
        with path.open("r", encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
        if not rows:
            return
        lines.append("| " + " | ".join(rows[0]) + " |")
        lines.append("|" + "---|" * len(rows[0]))
        for row in rows[1:]:
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")

    emit_csv(outdir / "table1.csv", "Indicator cross-correlations")
    emit_csv(outdir / "table2_r2.csv", "Marker vs indicator regressions")
    emit_csv(outdir / "fig2_binned.csv", "Binned marker/indicator data")
    emit_csv(outdir / "fig3_departments.csv", "Per-department marker means")
    emit_csv(outdir / "fig4_profile.csv", "Weekly profiles")
    emit_csv(outdir / "table3.csv", "Weekly profile correlations")
    emit_csv(outdir / "fig5_histograms.csv", "Pair similarity histograms")

    hom_path = outdir / "homophily.json"
    if hom_path.exists():
        hom = json.loads(hom_path.read_text(encoding="utf-8"))
        lines += ["## Homophily", "",
                  f"- chi-square statistic: {hom['statistic']:.4g}",
                  f"- Monte Carlo p: {hom['p']:.4g}",
                  f"- diagonal ratio mean: {hom['diagonal_mean']:.4g}",
                  f"- samples: {hom['n_samples']}", ""]

    if args.groundtruth:
        truth = json.loads(Path(args.groundtruth).read_text(encoding="utf-8"))
        checks = _planted_sign_checks(outdir, truth)
        lines += ["## Planted-effect checks", ""]
        for name, ok, detail in checks:
            lines.append(f"- [{'x' if ok else ' '}] {name}: {detail}")
        lines.append("")

    out.write_text("\n".join(lines), encoding="utf-8")
    _write_manifest(out, "report",
                    {"outdir": str(outdir), "out": str(out),
                     "groundtruth": args.groundtruth},
                    [p for p in outdir.glob("*.csv")], None, t0)
    return 0


def _planted_sign_checks(outdir: Path, truth: dict) -> list[tuple[str, bool, str]]:
    """Compare recovered effect signs against the generator's parameters."""
    cfg = truth["config"]
    checks: list[tuple[str, bool, str]] = []

    t2 = outdir / "table2_r2.csv"
    if t2.exists():
        with t2.open("r", encoding="utf-8", newline="") as f:
            for row in csv.DictReader(f):
                if row["indicator"] != "inc":
                    continue
                marker = row["marker"]
                planted = cfg[{"cn": "slope_cn", "cp": "slope_cp", "vs": "slope_vs"}[marker]]
                slope = float(row["slope"])
                ok = planted == 0 or (slope > 0) == (planted > 0)
                checks.append((f"income slope sign ({marker})", ok,
                               f"planted {planted:+.3g}, recovered slope {slope:+.3g}"))

    hom_path = outdir / "homophily.json"
    if hom_path.exists():
        hom = json.loads(hom_path.read_text(encoding="utf-8"))
        if cfg["homophily_alpha"] > 0:
            ok = hom["diagonal_mean"] > 1.0
            checks.append(("homophily diagonal above null", ok,
                           f"alpha={cfg['homophily_alpha']}, diagonal mean {hom['diagonal_mean']:.3g}"))

    t3 = outdir / "table3.csv"
    if t3.exists() and cfg["diurnal_strength"] > 0:
        with t3.open("r", encoding="utf-8", newline="") as f:
            for row in csv.DictReader(f):
                if row["pair"] == "all~inc":
                    ok = float(row["r"]) > 0
                    checks.append((f"hourly rate tracks hourly income ({row['marker']})",
                                   ok, f"r={float(row['r']):.3g}"))

    f3 = outdir / "fig3_departments.csv"
    if f3.exists() and cfg["gradient_lat"] != 0:
        means: dict[str, float] = {}
        with f3.open("r", encoding="utf-8", newline="") as f:
            for row in csv.DictReader(f):
                if row["marker"] == "cn" and row["mean"]:
                    means[row["unit"]] = float(row["mean"])
        if len(means) >= 3:
            units = sorted(means)  # department bands are ordered south to north
            ranks = np.arange(len(units))
            vals = np.array([means[u] for u in units])
            rho = np.corrcoef(ranks, np.argsort(np.argsort(vals)))[0, 1]
            ok = (rho < 0) == (cfg["gradient_lat"] < 0)
            checks.append(("latitude gradient sign (cn)", ok,
                           f"planted {cfg['gradient_lat']:+.3g}, rank corr {rho:+.3g}"))

    f5 = outdir / "fig5_stats.json"
    if f5.exists():
        stats = json.loads(f5.read_text(encoding="utf-8"))
        for marker, cats in stats.items():
            order = ["connected-same-class", "connected",
                     "disconnected-same-class", "disconnected-random"]
            vals = [cats[c]["mean_abs_diff"] for c in order]
            ok = all(a < b for a, b in zip(vals, vals[1:]))
            checks.append((f"similarity ordering ({marker})", ok,
                           " < ".join(f"{v:.4f}" for v in vals)))
    return checks


# -------------------------------------------------------------- dispatcher

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sociolex",
        description="Sociolinguistic marker / socioeconomic status pipeline.",
    )
    parser.add_argument("--version", action="version", version=f"sociolex {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_threads(p):
        p.add_argument("--threads", type=int,
                       default=int(os.environ.get("SOCIOLEX_THREADS", "1")),
                       help="worker count; results never depend on it")

    p = sub.add_parser("ingest", help="normalize raw NDJSON posts")
    p.add_argument("--input", nargs="+", required=True, help="input files or globs")
    p.add_argument("--out", required=True)
    add_threads(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("markers", help="per-user linguistic marker profiles")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--lexicon", default=None, help="singular,plural CSV (default: bundled)")
    p.add_argument("--require-ne-before", action="store_true",
                   help="count a negation standard only when ne/n' precedes the particle")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_markers)

    p = sub.add_parser("geo", help="home inference and census patch join")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--patches", required=True)
    p.add_argument("--regions", default=None)
    p.add_argument("--reference", default=None,
                   help="level,unit_id,population CSV for representativeness")
    p.add_argument("--coord-threshold", type=int, default=500)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_geo)

    p = sub.add_parser("ses", help="socioeconomic indicators and classes per user")
    p.add_argument("--patches", required=True)
    p.add_argument("--homes", required=True)
    p.add_argument("--classes", type=int, default=9)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ses)

    p = sub.add_parser("network", help="mutual-mention edge list")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("homophily", help="configuration-model homophily ratios")
    p.add_argument("--edges", required=True)
    p.add_argument("--ses", required=True)
    p.add_argument("--classes", type=int, default=None)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--swaps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--json", default=None)
    add_threads(p)
    p.set_defaults(func=cmd_homophily)

    p = sub.add_parser("analyze", help="statistical battery outputs")
    p.add_argument("--what", choices=ANALYZE_WHAT, required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="infile", default=None)
    p.add_argument("--profiles", default=None)
    p.add_argument("--ses", default=None)
    p.add_argument("--homes", default=None)
    p.add_argument("--regions", default=None)
    p.add_argument("--edges", default=None)
    p.add_argument("--patches", default=None)
    p.add_argument("--lexicon", default=None)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--level", default="department")
    p.add_argument("--pairs", type=int, default=10_000)
    p.add_argument("--bin-width", type=float, default=0.05)
    add_threads(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="generate a planted-effect corpus")
    p.add_argument("--config", default=None, help="flat key=value file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--set", nargs="*", default=None, metavar="KEY=VALUE",
                   help="override single config keys")
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", help="markdown summary of analysis outputs")
    p.add_argument("--outdir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--groundtruth", default=None)
    p.set_defaults(func=cmd_report)

    return parser


_REQUIRED_BY_WHAT = {
    "fig2": ("profiles", "ses"),
    "table2": ("profiles", "ses"),
    "fig3": ("profiles", "homes", "regions"),
    "fig4": ("infile", "ses"),
    "table3": ("infile", "ses"),
    "fig5": ("edges", "ses", "profiles"),
    "table1": ("patches", "ses"),
    "multivar": ("profiles", "ses", "homes"),
}


def run(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        return int(e.code or 0)
    if getattr(args, "subcommand", None) == "analyze":
        missing = [f"--{name}" if name != "infile" else "--in"
                   for name in _REQUIRED_BY_WHAT[args.what]
                   if getattr(args, name) is None]
        if missing:
            print(f"sociolex analyze --what {args.what}: missing {' '.join(missing)}",
                  file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"sociolex {args.subcommand}: error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
