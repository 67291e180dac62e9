import json

import numpy as np
import pytest

from bioright import cli, traj

from conftest import REST_POSE, full_csv_dataset, csv_text


def run(argv):
    return cli.main(argv)


def rest_pose_csv(frame_count=5):
    rows = []
    for f in range(frame_count):
        for kid, p in REST_POSE.items():
            rows.append((f, kid, p[0], p[1], 1))
    return csv_text(rows)


@pytest.fixture
def tracked_csv(tmp_path):
    path = tmp_path / "tracks.csv"
    path.write_text(full_csv_dataset(frame_count=60))
    return path


class TestMetrics:
    def test_report_has_23_rows(self, tmp_path, tracked_csv, capsys):
        out = tmp_path / "report.csv"
        code = run(["metrics", "--input", str(tracked_csv),
                    "--output", str(out), "--frame-rate", "1000"])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 24  # header + one row per keypoint
        assert "wrote 23 rows" in capsys.readouterr().out

    def test_manifest_written(self, tmp_path, tracked_csv):
        out = tmp_path / "report.csv"
        run(["metrics", "--input", str(tracked_csv), "--output", str(out),
             "--frame-rate", "1000"])
        manifest = json.loads((tmp_path / "report.manifest.json").read_text())
        assert manifest["command"] == "metrics"
        assert str(tracked_csv) in manifest["inputs"]
        assert len(manifest["config_digest"]) == 64

    def test_malformed_input_exit_2(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("frame,keypoint_id,keypoint_name,x,y,visible\n"
                       "0,1,Neck,not_a_number,2.0,1\n")
        code = run(["metrics", "--input", str(bad),
                    "--output", str(tmp_path / "r.csv"),
                    "--frame-rate", "1000"])
        assert code == 2

    def test_header_only_exit_3(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("frame,keypoint_id,keypoint_name,x,y,visible\n")
        code = run(["metrics", "--input", str(empty),
                    "--output", str(tmp_path / "r.csv"),
                    "--frame-rate", "1000"])
        assert code == 3

    def test_missing_file_exit_2(self, tmp_path):
        code = run(["metrics", "--input", str(tmp_path / "nope.csv"),
                    "--output", str(tmp_path / "r.csv"),
                    "--frame-rate", "1000"])
        assert code == 2


class TestReconstruct:
    def test_body_series(self, tmp_path, capsys):
        src = tmp_path / "pose.csv"
        src.write_text(rest_pose_csv(5))
        out = tmp_path / "body.csv"
        code = run(["reconstruct", "--input", str(src), "--output", str(out),
                    "--segment", "Body", "--frame-rate", "1000",
                    "--scale", "1.0"])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "t,yaw_deg,pitch_deg,roll_deg,valid"
        assert len(lines) == 6
        assert "5 valid of 5" in capsys.readouterr().out

    def test_window_outside_span_exit_4(self, tmp_path):
        src = tmp_path / "pose.csv"
        src.write_text(rest_pose_csv(5))
        code = run(["reconstruct", "--input", str(src),
                    "--output", str(tmp_path / "w.csv"),
                    "--segment", "Body", "--frame-rate", "1000",
                    "--scale", "1.0", "--window-ms", "5000:6000"])
        assert code == 4


class TestScale:
    def test_scale_and_metrics(self, tmp_path, capsys):
        src = tmp_path / "liz.csv"
        tr = traj.synth_second_order(13.85, 0.043, 0.150, 1e-3)
        with open(src, "w") as f:
            traj.write_trajectory_csv(tr, f)
        out = tmp_path / "sms.csv"
        code = run(["scale", "--input", str(src), "--output", str(out),
                    "--target-duration", "225", "--step-metrics"])
        assert code == 0
        scaled = traj.read_trajectory_csv(open(out))
        assert scaled.duration == pytest.approx(225.0, rel=1e-9)
        captured = capsys.readouterr().out
        assert "rise_time_s=" in captured
        assert (tmp_path / "sms.metrics.json").exists()

    def test_rate_divided_by_factor(self, tmp_path):
        src = tmp_path / "liz.csv"
        tr = traj.synth_second_order(13.85, 0.043, 0.150, 1e-3)
        with open(src, "w") as f:
            traj.write_trajectory_csv(tr, f)
        out = tmp_path / "sms.csv"
        run(["scale", "--input", str(src), "--output", str(out),
             "--target-duration", "225"])
        scaled = traj.read_trajectory_csv(open(out))
        k = 225.0 / 0.150
        assert np.max(np.abs(scaled.rate - tr.rate / k)) < 1e-9


class TestSimulate:
    def test_prescribed_default_reference(self, tmp_path, capsys):
        out = tmp_path / "sim.csv"
        code = run(["simulate", "--mode", "prescribed", "--output", str(out),
                    "--dt", "0.05"])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("t,phi_deg,theta_deg")
        captured = capsys.readouterr().out
        assert "momentum_drift=" in captured
        assert "inertia_ratio=0.0581" in captured
        assert "inertia_ratio_reported=0.056" in captured

    def test_pd_mode(self, tmp_path, capsys):
        out = tmp_path / "pd.csv"
        code = run(["simulate", "--mode", "pd", "--output", str(out),
                    "--dt", "0.05"])
        assert code == 0
        captured = capsys.readouterr().out
        peak = float([ln for ln in captured.splitlines()
                      if ln.startswith("max|phi_rate|")][0].split("=")[1])
        assert peak < 0.15

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("base_inertia = 310  # reduced\ndt = 0.05\n")
        out = tmp_path / "sim.csv"
        code = run(["simulate", "--config", str(cfg), "--mode", "prescribed",
                    "--output", str(out)])
        assert code == 0

    def test_bad_config_exit_2(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("bogus = 1\n")
        code = run(["simulate", "--config", str(cfg),
                    "--output", str(tmp_path / "sim.csv")])
        assert code == 2


class TestSweep:
    def test_resolution_4_gives_15_rows(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code = run(["sweep", "--resolution", "4", "--output", str(out),
                    "--dt", "0.05"])
        assert code == 0
        assert "wrote 15 rows" in capsys.readouterr().out
        data = [ln for ln in out.read_text().splitlines()
                if ln and not ln.startswith("#")]
        assert len(data) == 16  # header + 15 rows

    def test_deterministic_output(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        run(["sweep", "--resolution", "3", "--output", str(a), "--dt", "0.05"])
        run(["sweep", "--resolution", "3", "--output", str(b), "--dt", "0.05"])
        assert a.read_bytes() == b.read_bytes()


class TestDemo:
    def test_chain_outputs(self, tmp_path, capsys):
        out = tmp_path / "demo"
        code = run(["demo", "--output-dir", str(out), "--dt", "0.05",
                    "--resolution", "2"])
        assert code == 0
        for name in ("reference.csv", "prescribed.csv", "pd.csv", "sweep.csv"):
            assert (out / name).exists(), name
        captured = capsys.readouterr().out
        assert "surrogate:" in captured
        assert "closed form -9.878 deg" in captured
        assert "peak base rate=" in captured
        assert (out / "reference.manifest.json").exists()
