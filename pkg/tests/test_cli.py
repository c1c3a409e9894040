"""CLI tests driven through main(argv)."""

import json

import pytest

from dropbench.service.cli import main


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSimulate:
    def test_writes_files(self, tmp_path, capsys):
        out = tmp_path / "drop"
        code, stdout, _ = run(
            ["simulate", "--height", "5.0", "--mass", "0.735", "--seed", "7", "--out", str(out)],
            capsys,
        )
        assert code == 0
        assert (out / "force.csv").exists()
        assert (out / "kin.csv").exists()
        truth = json.loads((out / "truth.json").read_text())
        assert truth["broke"] is False

    def test_fixed_seed_identical_files(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            code, _, _ = run(
                ["simulate", "--height", "5", "--mass", "0.735", "--seed", "3", "--out", str(out)],
                capsys,
            )
            assert code == 0
        assert (a / "force.csv").read_bytes() == (b / "force.csv").read_bytes()
        assert (a / "kin.csv").read_bytes() == (b / "kin.csv").read_bytes()
        assert (a / "truth.json").read_bytes() == (b / "truth.json").read_bytes()

    def test_zero_height_static(self, tmp_path, capsys):
        out = tmp_path / "drop"
        code, _, _ = run(
            ["simulate", "--height", "0", "--mass", "0.8", "--out", str(out)], capsys
        )
        assert code == 0
        truth = json.loads((out / "truth.json").read_text())
        assert truth["peak_force_n"] == pytest.approx(0.8 * 9.81)

    def test_break_threshold(self, tmp_path, capsys):
        out = tmp_path / "drop"
        code, _, _ = run(
            [
                "simulate", "--height", "10", "--mass", "0.735",
                "--break-at", "40", "--out", str(out),
            ],
            capsys,
        )
        assert code == 0
        assert json.loads((out / "truth.json").read_text())["broke"] is True

    def test_invalid_config_exit_2(self, tmp_path, capsys):
        code, _, err = run(
            ["simulate", "--height", "-1", "--mass", "0.735", "--out", str(tmp_path)], capsys
        )
        assert code == 2
        assert "error" in err


class TestValidateRig:
    def simulate_pair(self, tmp_path, capsys, eta="1.0", damping="0.0"):
        out = tmp_path / "drop"
        code, _, _ = run(
            [
                "simulate", "--height", "6", "--mass", "0.735", "--eta", eta,
                "--damping", damping, "--noise", "0.0", "--out", str(out),
            ],
            capsys,
        )
        assert code == 0
        return out

    def test_lossless_pair_spring_error_band(self, tmp_path, capsys):
        # For the simulator's linear-spring contact the energy-balance force
        # is the mean contact force, about half the peak, so a lossless pair
        # validates near -50% (real crush-dominated rigs sit much closer to
        # zero). Passes with a bound wide enough for the spring factor.
        out = self.simulate_pair(tmp_path, capsys)
        code, stdout, _ = run(
            [
                "validate-rig", "--force", str(out / "force.csv"),
                "--kin", str(out / "kin.csv"), "--mass", "0.735", "--bound", "60",
            ],
            capsys,
        )
        assert code == 0
        assert "PASS" in stdout
        error_line = next(ln for ln in stdout.splitlines() if ln.startswith("error_pct"))
        assert -56.0 < float(error_line.split()[-1]) < -40.0

    def test_report_files_written(self, tmp_path, capsys):
        out = self.simulate_pair(tmp_path, capsys)
        report_dir = tmp_path / "report"
        code, _, _ = run(
            [
                "validate-rig", "--force", str(out / "force.csv"),
                "--kin", str(out / "kin.csv"), "--mass", "0.735",
                "--bound", "60", "--out", str(report_dir),
            ],
            capsys,
        )
        assert code == 0
        assert (report_dir / "report.csv").read_text().startswith("variable,value\n")
        assert json.loads((report_dir / "analysis.json").read_text())["signature"] == "intact"
        assert (report_dir / "force_trace.png").stat().st_size > 0
        assert (report_dir / "kin_trace.png").stat().st_size > 0

    def test_bound_exceeded_exit_1(self, tmp_path, capsys):
        out = self.simulate_pair(tmp_path, capsys)
        code, stdout, _ = run(
            [
                "validate-rig", "--force", str(out / "force.csv"),
                "--kin", str(out / "kin.csv"), "--mass", "0.735", "--bound", "1",
            ],
            capsys,
        )
        assert code == 1
        assert "FAIL" in stdout

    def test_empty_force_file_exit_2(self, tmp_path, capsys):
        empty = tmp_path / "force.csv"
        empty.write_text("")
        kin = tmp_path / "kin.csv"
        kin.write_text("t_s,z_mm\n0.0,700\n")
        code, _, err = run(
            ["validate-rig", "--force", str(empty), "--kin", str(kin), "--mass", "0.7"], capsys
        )
        assert code == 2
        assert "error" in err

    def test_rig_settings_file(self, tmp_path, capsys):
        out = self.simulate_pair(tmp_path, capsys)
        cfg = tmp_path / "rig.cfg"
        cfg.write_text("# calibration\nscale_n_per_v = 20.0\nerror_bound_pct = 75\n")
        code, stdout, _ = run(
            [
                "validate-rig", "--force", str(out / "force.csv"),
                "--kin", str(out / "kin.csv"), "--mass", "0.735", "--config", str(cfg),
            ],
            capsys,
        )
        assert code == 0
        assert "75" in stdout


class TestCampaignCommands:
    def new_campaign(self, tmp_path, capsys):
        store = str(tmp_path / "store")
        code, _, _ = run(
            [
                "campaign", "new", "--store", store, "--id", "c1",
                "--slot-depth", "1.0", "--wall-loops", "3",
                "--start", "4.0", "--mass", "0.735",
            ],
            capsys,
        )
        assert code == 0
        return store

    def test_new_and_next(self, tmp_path, capsys):
        store = self.new_campaign(tmp_path, capsys)
        code, stdout, _ = run(["campaign", "next", "--store", store, "--id", "c1"], capsys)
        assert code == 0
        assert "drop at 4 cm" in stdout

    def test_record_and_report(self, tmp_path, capsys):
        store = self.new_campaign(tmp_path, capsys)
        script = [
            ("4.0", "intact", "60.0"), ("5.0", "broke", None),
            ("4.8", "broke", None), ("4.8", "broke", None), ("4.8", "broke", None),
            ("4.6", "broke", None), ("4.6", "broke", None), ("4.6", "broke", None),
            ("4.4", "broke", None), ("4.4", "intact", "65.0"), ("4.4", "broke", None),
            ("4.2", "intact", "62.8"), ("4.2", "intact", "63.4"), ("4.2", "intact", "63.4"),
        ]
        for height, outcome, peak in script:
            argv = [
                "campaign", "record", "--store", store, "--id", "c1",
                "--height", height, "--outcome", outcome,
            ]
            if peak:
                argv += ["--peak", peak]
            code, _, _ = run(argv, capsys)
            assert code == 0
        out_dir = tmp_path / "report"
        code, stdout, _ = run(
            ["campaign", "report", "--store", store, "--id", "c1", "--out", str(out_dir)],
            capsys,
        )
        assert code == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["result"] == {"breaking_height_cm": 4.4, "breaking_force_n": 65.0}
        ladder = (out_dir / "ladder.csv").read_text()
        assert "4.4,N/A,65,N/A,65" in ladder
        assert (out_dir / "ladder.png").stat().st_size > 0

    def test_record_wrong_height_exit_2(self, tmp_path, capsys):
        store = self.new_campaign(tmp_path, capsys)
        code, _, err = run(
            [
                "campaign", "record", "--store", store, "--id", "c1",
                "--height", "9.9", "--outcome", "broke",
            ],
            capsys,
        )
        assert code == 2
        assert "pending" in err

    def test_record_with_traces_attaches_analysis(self, tmp_path, capsys):
        drop = tmp_path / "drop"
        code, _, _ = run(
            [
                "simulate", "--height", "4", "--mass", "0.735",
                "--seed", "5", "--out", str(drop),
            ],
            capsys,
        )
        assert code == 0
        truth = json.loads((drop / "truth.json").read_text())
        store = self.new_campaign(tmp_path, capsys)
        code, stdout, _ = run(
            [
                "campaign", "record", "--store", store, "--id", "c1",
                "--height", "4.0", "--outcome", "intact",
                "--peak", str(round(truth["peak_force_n"], 1)),
                "--force", str(drop / "force.csv"), "--kin", str(drop / "kin.csv"),
            ],
            capsys,
        )
        assert code == 0
        code, stdout, _ = run(["campaign", "report", "--store", store, "--id", "c1"], capsys)
        report = json.loads(stdout)
        assert report["disagreements"] == []
        assert report["ladder"][0]["trials"][0]["peak_force_n"] == pytest.approx(
            truth["peak_force_n"], rel=0.02
        )


class TestAdvise:
    def test_target_65(self, capsys):
        code, stdout, _ = run(["advise", "--target", "65"], capsys)
        assert code == 0
        assert "slot depth 1 mm with 3 wall loops" in stdout

    def test_target_20_infeasible(self, capsys):
        code, _, err = run(["advise", "--target", "20"], capsys)
        assert code == 2
        assert "functional floor" in err

    def test_custom_table(self, tmp_path, capsys):
        table = tmp_path / "table.csv"
        table.write_text(
            "slot_depth_mm,wall_loops,mean_breaking_force_n\n1.5,4,58.0\n2.5,2,30.0\n"
        )
        code, stdout, _ = run(["advise", "--target", "60", "--table", str(table)], capsys)
        assert code == 0
        assert "slot depth 1.5 mm" in stdout
