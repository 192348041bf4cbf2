import json

import numpy as np
import pytest

from helpers import parse_wav_header

from neurof0.cli import cli_main
from neurof0.eeg import load_recording_csv


def run(*argv):
    return cli_main(list(argv))


@pytest.fixture()
def dataset_csv(tmp_path):
    out = tmp_path / "data"
    assert run("--out", str(out), "--seed", "7", "gen-data", "--n", "200") == 0
    return out / "dataset.csv"


@pytest.fixture()
def movement_csv(tmp_path):
    out = tmp_path / "data"
    assert run("--out", str(out), "--seed", "9", "gen-data",
               "--movement-steps", "150") == 0
    return out / "movement.csv"


class TestUsageErrors:
    def test_help_exits_zero(self, capsys):
        assert run("--help") == 0
        assert "usage" in capsys.readouterr().out

    def test_no_subcommand(self, capsys):
        assert run() == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert run("frobnicate") == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self):
        assert run("gen-data", "--wat") == 1

    def test_bad_flag_value(self):
        assert run("--seed", "xyz", "gen-data") == 1


class TestDataErrors:
    def test_missing_data_file(self, tmp_path):
        assert run("--out", str(tmp_path), "train", "--data",
                   str(tmp_path / "nope.csv")) == 2

    def test_corrupt_model(self, tmp_path, movement_csv):
        bad = tmp_path / "bad.nf0f"
        bad.write_bytes(b"garbage bytes")
        assert run("--out", str(tmp_path), "decode", "--data", str(movement_csv),
                   "--model", str(bad)) == 2

    def test_config_unknown_key(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        assert run("--config", str(cfg), "--out", str(tmp_path), "gen-data") == 2

    def test_train_without_data(self, tmp_path):
        assert run("--out", str(tmp_path), "train") == 2


class TestGenData:
    def test_dataset_file(self, dataset_csv):
        rec = load_recording_csv(dataset_csv)
        assert rec.n_samples == 2000
        assert len(rec.kinematics) == 200

    def test_movement_file(self, movement_csv):
        rec = load_recording_csv(movement_csv)
        assert rec.n_samples == 1500
        assert len(rec.kinematics) == 150

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run("--out", str(a), "--seed", "4", "gen-data", "--n", "50")
        run("--out", str(b), "--seed", "4", "gen-data", "--n", "50")
        assert (a / "dataset.csv").read_bytes() == (b / "dataset.csv").read_bytes()


class TestTrainEval:
    def test_train_then_eval(self, tmp_path, dataset_csv):
        out = tmp_path / "run"
        assert run("--out", str(out), "--seed", "7", "train",
                   "--data", str(dataset_csv)) == 0
        assert (out / "model.nf0f").exists()
        assert run("--out", str(out), "--seed", "7", "eval",
                   "--data", str(dataset_csv)) == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["classifier_accuracy"] >= 0.95
        assert metrics["n_test"] == 60


class TestSimulate:
    def test_constant(self, tmp_path):
        out = tmp_path / "sim"
        assert run("--out", str(out), "simulate", "--constant", "0.5",
                   "--steps", "400") == 0
        lines = (out / "trajectory.csv").read_text().splitlines()
        assert lines[0] == "t_s,activation,angle_deg"
        assert len(lines) == 401
        final_angle = float(lines[-1].split(",")[2])
        assert abs(final_angle - 30.0) < 0.5

    def test_from_csv(self, tmp_path):
        out = tmp_path / "sim"
        src = tmp_path / "act.csv"
        src.write_text("t_s,activation\n" + "\n".join(
            f"{i * 0.01},0.3" for i in range(50)) + "\n")
        assert run("--out", str(out), "simulate", "--activations", str(src)) == 0
        assert (out / "trajectory.csv").exists()

    def test_needs_input(self, tmp_path):
        assert run("--out", str(tmp_path), "simulate") == 2


class TestDecodeSynthPipeline:
    @pytest.fixture()
    def model_file(self, tmp_path, dataset_csv):
        out = tmp_path / "run"
        run("--out", str(out), "--seed", "7", "train", "--data", str(dataset_csv))
        return out / "model.nf0f"

    def test_decode_writes_stage_csvs(self, tmp_path, movement_csv, model_file):
        out = tmp_path / "dec"
        assert run("--out", str(out), "decode", "--data", str(movement_csv),
                   "--model", str(model_file)) == 0
        angles = (out / "angles.csv").read_text().splitlines()
        assert angles[0] == "t_s,activation,angle_deg,true_activation,true_angle_deg"
        assert len(angles) == 151
        f0 = (out / "f0.csv").read_text().splitlines()
        assert f0[0] == "t_s,f0_hz,true_f0_hz"

    def test_synth_from_f0_csv(self, tmp_path):
        src = tmp_path / "f0.csv"
        src.write_text("t_s,f0_hz\n" + "\n".join(
            f"{i * 0.01},2000.0" for i in range(30)) + "\n")
        out = tmp_path / "syn"
        assert run("--out", str(out), "synth", "--f0", str(src)) == 0
        blob = (out / "out.wav").read_bytes()
        header = parse_wav_header(blob)
        assert header["data_size"] == 30 * 441 * 2

    def test_pipeline_writes_all_artifacts(self, tmp_path, movement_csv, model_file):
        out = tmp_path / "pipe"
        assert run("--out", str(out), "pipeline", "--data", str(movement_csv),
                   "--model", str(model_file)) == 0
        for name in ("metrics.json", "angles.csv", "f0.csv", "out.wav"):
            assert (out / name).exists(), name
        metrics = json.loads((out / "metrics.json").read_text())
        assert set(metrics) == {
            "classifier_accuracy", "activation_rmse", "angle_accuracy",
            "angle_rmse_deg", "f0_rmse_hz", "n_test",
        }

    def test_pipeline_self_contained_demo(self, tmp_path, model_file):
        # no --data: a deterministic synthetic movement is decoded
        out = tmp_path / "demo"
        assert run("--out", str(out), "--seed", "7", "pipeline",
                   "--model", str(model_file)) == 0
        assert (out / "out.wav").exists()

    def test_metrics_recomputable_from_csvs(self, tmp_path, movement_csv, model_file):
        from neurof0.arm import ArmModel, equilibrium_angle

        out = tmp_path / "pipe2"
        run("--out", str(out), "pipeline", "--data", str(movement_csv),
            "--model", str(model_file))
        metrics = json.loads((out / "metrics.json").read_text())

        rows = [line.split(",") for line in
                (out / "angles.csv").read_text().splitlines()[1:]]
        act = np.array([float(r[1]) for r in rows])
        ang = np.array([float(r[2]) for r in rows])
        t_act = np.array([float(r[3]) for r in rows])
        t_ang = np.array([float(r[4]) for r in rows])
        f0_rows = [line.split(",") for line in
                   (out / "f0.csv").read_text().splitlines()[1:]]
        f0 = np.array([float(r[1]) for r in f0_rows])
        t_f0 = np.array([float(r[2]) for r in f0_rows])

        assert metrics["n_test"] == len(rows)
        assert metrics["classifier_accuracy"] == pytest.approx(
            np.mean(act == t_act), abs=1e-9)
        assert metrics["activation_rmse"] == pytest.approx(
            np.sqrt(np.mean((act - t_act) ** 2)), abs=1e-9)
        assert metrics["angle_rmse_deg"] == pytest.approx(
            np.sqrt(np.mean((ang - t_ang) ** 2)), abs=1e-9)
        assert metrics["f0_rmse_hz"] == pytest.approx(
            np.sqrt(np.mean((f0 - t_f0) ** 2)), abs=1e-9)

        model = ArmModel()
        eq = np.array([equilibrium_angle(model, k / 10) for k in range(1, 11)])
        snap = lambda a: np.argmin(np.abs(eq[None, :] - a[:, None]), axis=1)
        assert metrics["angle_accuracy"] == pytest.approx(
            np.mean(snap(ang) == snap(t_ang)), abs=1e-9)

    def test_model_path_resolution_via_config(self, tmp_path, movement_csv, model_file):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"paths": {"model": str(model_file),
                                             "data": str(movement_csv)}}))
        out = tmp_path / "cfg_run"
        assert run("--config", str(cfg), "--out", str(out), "pipeline") == 0
        assert (out / "metrics.json").exists()
