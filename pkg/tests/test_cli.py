import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from sociolex.cli import run

SYNTH_ARGS = ["--set", "n_users=300", "posts_per_user=30", "n_patches_side=10",
              "mean_degree=6", "beacon_users=0", "geo_posts_per_user=5",
              "n_departments=4"]


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Full small pipeline driven through the CLI entry point."""
    root = tmp_path_factory.mktemp("pipe")
    data = root / "data"
    out = root / "out"
    out.mkdir()
    steps = [
        ["synth", "--seed", "4242", "--outdir", str(data)] + SYNTH_ARGS,
        ["ingest", "--input", str(data / "posts.ndjson"),
         "--out", str(out / "clean.ndjson")],
        ["markers", "--in", str(out / "clean.ndjson"),
         "--out", str(out / "profiles.csv")],
        ["geo", "--in", str(out / "clean.ndjson"),
         "--patches", str(data / "patches.csv"),
         "--regions", str(data / "regions.csv"),
         "--reference", str(data / "reference_populations.csv"),
         "--out", str(out / "homes.csv")],
        ["ses", "--patches", str(data / "patches.csv"),
         "--homes", str(out / "homes.csv"), "--classes", "5",
         "--out", str(out / "users_ses.csv")],
        ["network", "--in", str(out / "clean.ndjson"),
         "--out", str(out / "edges.csv")],
        ["homophily", "--edges", str(out / "edges.csv"),
         "--ses", str(out / "users_ses.csv"), "--samples", "30",
         "--seed", "1", "--out", str(out / "homophily_ratio.csv"),
         "--json", str(out / "homophily.json")],
    ]
    for argv in steps:
        assert run(argv) == 0, argv
    return data, out


class TestPipeline:
    def test_clean_envelope(self, pipeline):
        _, out = pipeline
        with (out / "clean.ndjson").open() as f:
            rec = json.loads(f.readline())
        for key in ("id", "user", "ts", "text", "tokens", "how", "mentions"):
            assert key in rec
        assert 0 <= rec["how"] <= 167

    def test_profiles_columns(self, pipeline):
        _, out = pipeline
        with (out / "profiles.csv").open() as f:
            header = f.readline().strip()
        assert header == "user,n_cn,n_incn,L_cn,n_cp,n_incp,L_cp,N_vs,N_tw,L_vs"

    def test_homes_have_patches(self, pipeline):
        _, out = pipeline
        rows = list(csv.DictReader((out / "homes.csv").open()))
        assert len(rows) == 300
        assert all(r["patch_id"] for r in rows)

    def test_ses_classes_assigned(self, pipeline):
        _, out = pipeline
        rows = list(csv.DictReader((out / "users_ses.csv").open()))
        classes = {int(r["class"]) for r in rows if r["class"]}
        assert classes == set(range(1, 6))

    def test_homophily_outputs(self, pipeline):
        _, out = pipeline
        stats = json.loads((out / "homophily.json").read_text())
        for key in ("statistic", "p", "n_samples", "seed"):
            assert key in stats
        rows = list(csv.reader((out / "homophily_ratio.csv").open()))
        assert len(rows) == 6  # header + 5 classes

    def test_manifests_written(self, pipeline):
        data, out = pipeline
        manifest = json.loads((out / "clean.ndjson.manifest.json").read_text())
        assert manifest["subcommand"] == "ingest"
        assert manifest["version"]
        assert str(data / "posts.ndjson") in manifest["inputs"]
        digest = manifest["inputs"][str(data / "posts.ndjson")]
        assert len(digest) == 64

    def test_analyze_and_report(self, pipeline):
        data, out = pipeline
        analyze_common = ["--outdir", str(out), "--seed", "3"]
        assert run(["analyze", "--what", "table2", "--bins", "20",
                    "--profiles", str(out / "profiles.csv"),
                    "--ses", str(out / "users_ses.csv")] + analyze_common) == 0
        assert run(["analyze", "--what", "fig3",
                    "--profiles", str(out / "profiles.csv"),
                    "--homes", str(out / "homes.csv"),
                    "--regions", str(data / "regions.csv")] + analyze_common) == 0
        assert run(["analyze", "--what", "fig5", "--pairs", "500",
                    "--edges", str(out / "edges.csv"),
                    "--ses", str(out / "users_ses.csv"),
                    "--profiles", str(out / "profiles.csv")] + analyze_common) == 0
        assert run(["analyze", "--what", "table1",
                    "--patches", str(data / "patches.csv"),
                    "--ses", str(out / "users_ses.csv")] + analyze_common) == 0
        assert run(["report", "--outdir", str(out),
                    "--out", str(out / "report.md"),
                    "--groundtruth", str(data / "groundtruth.json")]) == 0
        report = (out / "report.md").read_text()
        assert "Planted-effect checks" in report
        assert "| indicator |" in report

    def test_analyze_fig4_and_multivar(self, pipeline):
        data, out = pipeline
        analyze_common = ["--outdir", str(out), "--seed", "8"]
        assert run(["analyze", "--what", "fig4",
                    "--in", str(out / "clean.ndjson"),
                    "--ses", str(out / "users_ses.csv")] + analyze_common) == 0
        rows = list(csv.DictReader((out / "fig4_profile.csv").open()))
        assert len(rows) == 168
        assert set(rows[0]) == {"hour", "cn_all", "cn_geo", "cp_all",
                                "cp_geo", "income_active"}
        assert run(["analyze", "--what", "table3",
                    "--in", str(out / "clean.ndjson"),
                    "--ses", str(out / "users_ses.csv")] + analyze_common) == 0
        t3 = list(csv.DictReader((out / "table3.csv").open()))
        assert {r["pair"] for r in t3} == {"all~inc", "geo~inc", "geo~all"}
        assert run(["analyze", "--what", "multivar",
                    "--profiles", str(out / "profiles.csv"),
                    "--ses", str(out / "users_ses.csv"),
                    "--homes", str(out / "homes.csv")] + analyze_common) == 0
        mv = list(csv.DictReader((out / "multivar.csv").open()))
        assert [r["marker"] for r in mv] == ["cn", "cp", "vs"]

    def test_report_without_groundtruth(self, pipeline):
        _, out = pipeline
        assert run(["report", "--outdir", str(out),
                    "--out", str(out / "plain.md")]) == 0
        assert "Planted-effect checks" not in (out / "plain.md").read_text()


class TestExitCodes:
    def test_unknown_flag_usage_error(self):
        assert run(["ingest", "--nope"]) == 2

    def test_unknown_subcommand(self):
        assert run(["dance"]) == 2

    def test_missing_input_data_error(self, tmp_path, capsys):
        code = run(["ingest", "--input", str(tmp_path / "absent.ndjson"),
                    "--out", str(tmp_path / "out.ndjson")])
        assert code == 1
        assert "absent.ndjson" in capsys.readouterr().err

    def test_analyze_missing_inputs(self, tmp_path):
        assert run(["analyze", "--what", "fig2", "--outdir", str(tmp_path)]) == 2

    def test_synth_needs_seed(self, tmp_path):
        assert run(["synth", "--outdir", str(tmp_path)]) == 1

    def test_help_exits_zero(self):
        assert run(["--help"]) == 0

    def test_console_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "sociolex.cli", "--version"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "sociolex" in proc.stdout


class TestDeterminismAcrossThreads:
    def test_homophily_threads_identical(self, pipeline, tmp_path):
        _, out = pipeline
        digests = []
        for threads in ("1", "3"):
            target = tmp_path / f"ratio_{threads}.csv"
            assert run(["homophily", "--edges", str(out / "edges.csv"),
                        "--ses", str(out / "users_ses.csv"),
                        "--samples", "20", "--seed", "5",
                        "--threads", threads,
                        "--out", str(target)]) == 0
            digests.append(target.read_bytes())
        assert digests[0] == digests[1]
