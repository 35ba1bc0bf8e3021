#!/usr/bin/env python3
"""End-to-end run on a small planted corpus, via the CLI subcommands.

Generates a 1,500-user corpus with known income -> marker links, pushes it
through ingest / markers / geo / ses / network / homophily / analyze, and
prints the markdown report with the planted-sign checklist.
"""
import sys
import tempfile
from pathlib import Path

from sociolex.cli import run

root = Path(tempfile.mkdtemp(prefix="sociolex_demo_"))
data, out = root / "data", root / "out"
out.mkdir(parents=True)
print(f"working under {root}")

steps = [
    ["synth", "--seed", "99", "--outdir", str(data),
     "--set", "n_users=1500", "posts_per_user=60", "n_patches_side=15",
     "mean_degree=8", "beacon_users=0", "geo_posts_per_user=5",
     "n_departments=4"],
    ["ingest", "--input", str(data / "posts.ndjson"), "--out", str(out / "clean.ndjson")],
    ["markers", "--in", str(out / "clean.ndjson"), "--out", str(out / "profiles.csv")],
    ["geo", "--in", str(out / "clean.ndjson"), "--patches", str(data / "patches.csv"),
     "--regions", str(data / "regions.csv"),
     "--reference", str(data / "reference_populations.csv"),
     "--out", str(out / "homes.csv")],
    ["ses", "--patches", str(data / "patches.csv"), "--homes", str(out / "homes.csv"),
     "--classes", "5", "--out", str(out / "users_ses.csv")],
    ["network", "--in", str(out / "clean.ndjson"), "--out", str(out / "edges.csv")],
    ["homophily", "--edges", str(out / "edges.csv"), "--ses", str(out / "users_ses.csv"),
     "--samples", "50", "--seed", "1",
     "--out", str(out / "homophily_ratio.csv"), "--json", str(out / "homophily.json")],
    ["analyze", "--what", "table2", "--bins", "20", "--seed", "2", "--outdir", str(out),
     "--profiles", str(out / "profiles.csv"), "--ses", str(out / "users_ses.csv")],
    ["analyze", "--what", "fig3", "--seed", "3", "--outdir", str(out),
     "--profiles", str(out / "profiles.csv"), "--homes", str(out / "homes.csv"),
     "--regions", str(data / "regions.csv")],
    ["analyze", "--what", "fig5", "--pairs", "4000", "--seed", "4", "--outdir", str(out),
     "--edges", str(out / "edges.csv"), "--ses", str(out / "users_ses.csv"),
     "--profiles", str(out / "profiles.csv")],
    ["report", "--outdir", str(out), "--out", str(out / "report.md"),
     "--groundtruth", str(data / "groundtruth.json")],
]
for argv in steps:
    print(f"\n$ sociolex {' '.join(argv)}")
    code = run(argv)
    if code != 0:
        sys.exit(code)

print("\n" + "=" * 70)
print((out / "report.md").read_text())
