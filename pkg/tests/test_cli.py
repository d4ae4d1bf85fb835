"""End-to-end tests for the experiment runner: schemas, determinism, exit codes."""

import json
import subprocess
import sys

import pytest

from nlslab.cli import EXPERIMENTS, main

ANNULUS_CSV_GOLDEN = (
    "form,center_x,center_y,r1sq,r2sq,bounds,count,gauss_error\n"
    "hex,0,0,0,400,closed-closed,1459,7.960508612625517\n"
)


def run_cli(tmp_path, args, config=None):
    """Invoke main() with an optional config dict; returns (rc, out_path)."""
    out = tmp_path / "report.out"
    argv = list(args) + ["--out", str(out)]
    if config is not None:
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(config))
        argv += ["--config", str(cfg)]
    return main(argv), out


class TestGoldenFiles:
    def test_annulus_count_csv(self, tmp_path):
        rc, out = run_cli(tmp_path, ["annulus-count", "--format", "csv"])
        assert rc == 0
        assert out.read_text() == ANNULUS_CSV_GOLDEN

    def test_annulus_count_json_round_trip(self, tmp_path):
        rc, out = run_cli(tmp_path, ["annulus-count"])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["experiment"] == "annulus-count"
        # parameter echo preserves declared order
        assert list(doc["params"]) == [p.name for p in EXPERIMENTS["annulus-count"].params]
        assert doc["rows"] == [
            {
                "form": "hex",
                "center_x": "0",
                "center_y": "0",
                "r1sq": "0",
                "r2sq": "400",
                "bounds": "closed-closed",
                "count": 1459,
                "gauss_error": 7.960508612625517,
            }
        ]
        for key in ("seed", "version", "wall_ms"):
            assert key in doc["meta"]

    def test_csv_columns_match_declared_order(self, tmp_path):
        rc, out = run_cli(tmp_path, ["h-spectrum", "--format", "csv"], config={"N": 2})
        assert rc == 0
        header = out.read_text().splitlines()[0]
        assert header.split(",") == list(EXPERIMENTS["h-spectrum"].row_fields)


class TestDeterminism:
    def test_same_config_same_bytes(self, tmp_path):
        cfg = {"N_list": [16, 32], "k_random": 3}
        rc1, out1 = run_cli(
            tmp_path, ["hypothesis-scan", "--seed", "5", "--format", "csv"], config=cfg
        )
        text1 = out1.read_text()
        rc2, out2 = run_cli(
            tmp_path, ["hypothesis-scan", "--seed", "5", "--format", "csv"], config=cfg
        )
        assert rc1 == rc2 == 0
        assert text1 == out2.read_text()

    def test_seed_flag_overrides_config(self, tmp_path):
        rc, out = run_cli(
            tmp_path, ["h-spectrum", "--seed", "9"], config={"seed": 4, "N": 2}
        )
        assert json.loads(out.read_text())["meta"]["seed"] == 9
        rc, out = run_cli(tmp_path, ["h-spectrum"], config={"seed": 4, "N": 2})
        assert json.loads(out.read_text())["meta"]["seed"] == 4

    def test_csv_floats_round_trip_to_json_values(self, tmp_path):
        cfg = {"N_list": [16], "k_random": 2, "include_adversarial": False}
        _, jout = run_cli(tmp_path, ["hypothesis-scan", "--seed", "1"], config=cfg)
        doc = json.loads(jout.read_text())
        _, cout = run_cli(
            tmp_path, ["hypothesis-scan", "--seed", "1", "--format", "csv"], config=cfg
        )
        lines = cout.read_text().splitlines()
        for row, line in zip(doc["rows"], lines[1:]):
            assert float(line.split(",")[-1]) == row["normalized"]

    def test_lf_line_endings(self, tmp_path):
        _, out = run_cli(tmp_path, ["annulus-count", "--format", "csv"])
        raw = out.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")


class TestValidation:
    def test_unknown_experiment_is_parse_error(self):
        with pytest.raises(SystemExit) as ei:
            main(["no-such-experiment"])
        assert ei.value.code == 2

    def test_empty_n_list_rejected(self, tmp_path, capsys):
        rc, _ = run_cli(tmp_path, ["hypothesis-scan"], config={"N_list": []})
        assert rc == 2
        assert "hypothesis-scan.N_list" in capsys.readouterr().err

    def test_unknown_key_reports_field_path(self, tmp_path, capsys):
        rc, _ = run_cli(tmp_path, ["hypothesis-scan"], config={"bogus": 1})
        assert rc == 2
        assert "hypothesis-scan.bogus" in capsys.readouterr().err

    def test_float_rejected_for_rational_field(self, tmp_path, capsys):
        rc, _ = run_cli(tmp_path, ["annulus-count"], config={"center_x": 0.5})
        assert rc == 2
        assert "annulus-count.center_x" in capsys.readouterr().err

    def test_rational_string_accepted(self, tmp_path):
        rc, out = run_cli(
            tmp_path,
            ["annulus-count", "--format", "csv"],
            config={"center_x": "1/2", "center_y": "1/2", "r2sq": 100},
        )
        assert rc == 0
        assert out.read_text().splitlines()[1].startswith("hex,1/2,1/2,")

    def test_cap_refusal_exit_code(self, tmp_path, capsys):
        rc, _ = run_cli(tmp_path, ["h-spectrum"], config={"N": 32})
        assert rc == 3
        assert "cap" in capsys.readouterr().err

    def test_bad_threads(self, tmp_path):
        rc, _ = run_cli(tmp_path, ["annulus-count", "--threads", "0"])
        assert rc == 2

    def test_bad_format_flag(self):
        with pytest.raises(SystemExit) as ei:
            main(["annulus-count", "--format", "xml"])
        assert ei.value.code == 2


class TestExperiments:
    def test_reduction_verify_default_grid_all_pass(self, tmp_path):
        rc, out = run_cli(tmp_path, ["reduction-verify"])
        assert rc == 0
        row = json.loads(out.read_text())["rows"][0]
        assert row["passed"] is True and row["failures"] == 0
        assert row["scale"] == "1/2"

    def test_h_spectrum_rows_sorted(self, tmp_path):
        rc, out = run_cli(
            tmp_path, ["h-spectrum"], config={"N": 4, "profile": "random"}
        )
        assert rc == 0
        doc = json.loads(out.read_text())
        taus = [r["tau"] for r in doc["rows"]]
        assert taus == sorted(taus) and taus[0] == 0
        assert doc["meta"]["h0"] == doc["rows"][0]["h"]

    def test_strichartz_scan_meta(self, tmp_path):
        rc, out = run_cli(
            tmp_path,
            ["strichartz-scan"],
            config={"N_list": [16, 32], "n_random": 1},
        )
        assert rc == 0
        doc = json.loads(out.read_text())
        assert set(doc["meta"]["max_r"]) == {"16", "32"}
        assert len(doc["rows"]) == 4  # (const + 1 random) per N

    def test_energy_track_rows(self, tmp_path):
        rc, out = run_cli(
            tmp_path,
            ["energy-track", "--seed", "9"],
            config={"T": 0.05, "dt": 0.0125, "n_samples": 5},
        )
        assert rc == 0
        doc = json.loads(out.read_text())
        assert len(doc["rows"]) == 5
        masses = [r["mass"] for r in doc["rows"]]
        assert max(masses) - min(masses) <= 1e-8
        assert doc["meta"]["relative"] <= 1e-9

    def test_trilinear_single_geometry(self, tmp_path):
        rc, out = run_cli(
            tmp_path,
            ["trilinear-scan"],
            config={"geometry": "separated", "lam_list": [8, 16]},
        )
        assert rc == 0
        doc = json.loads(out.read_text())
        assert [r["lam"] for r in doc["rows"]] == [8, 16]
        assert "separated" in doc["meta"]["slopes"]

    def test_console_script(self):
        proc = subprocess.run(
            ["nlslab", "annulus-count", "--format", "csv"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout == ANNULUS_CSV_GOLDEN

    def test_module_entry_matches(self):
        proc = subprocess.run(
            [sys.executable, "-m", "nlslab.cli", "annulus-count", "--format", "csv"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0 and proc.stdout == ANNULUS_CSV_GOLDEN
