"""Command-line interface.

Subcommands: gen-data, train, eval, simulate, decode, synth, pipeline.
Exit codes: 0 success, 1 usage error, 2 data or model error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

from .arm import (
    CONTROL_DT_S,
    ActivationTrajectory,
    AngleTrajectory,
    derive_labels,
    forward_dynamics,
)
from .datagen import SynthConfig, dataset_to_recording, generate_dataset, generate_movement
from .eeg import LabeledDataset, load_recording_csv, split_dataset, window_frames, write_recording_csv
from .errors import DataError
from .forest import load_model, predict_trajectory, save_model, train as train_forest
from .pipeline import (
    PipelineConfig,
    PipelineResult,
    evaluate_static,
    load_config,
    run_pipeline,
)
from .voice import F0Trajectory, map_trajectory, synthesize, write_wav

DEFAULT_MODEL_NAME = "model.nf0f"


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="nf0", description="EEG to pitch decoding pipeline")
    parser.add_argument("--config", metavar="PATH", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="override the split/generator seed")
    parser.add_argument("--out", metavar="DIR", default="out", help="output directory")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("gen-data", help="write a synthetic dataset or movement CSV")
    p.add_argument("--n", type=int, default=500, help="number of labeled frames")
    p.add_argument("--snr-db", type=float, default=40.0, help="per-frame SNR in dB (inf for noiseless)")
    p.add_argument("--carrier-hz", type=float, default=20.0)
    p.add_argument("--amp-per-class", type=float, default=5.0)
    p.add_argument("--movement-steps", type=int, metavar="N",
                   help="write an N-step movement recording instead of a dataset")

    p = sub.add_parser("train", help="train the classifier on the train split")
    p.add_argument("--data", metavar="CSV", help="recording CSV with kinematics")
    p.add_argument("--model", metavar="PATH", help="where to write the model")

    p = sub.add_parser("eval", help="evaluate the classifier on the test split")
    p.add_argument("--data", metavar="CSV", help="recording CSV with kinematics")
    p.add_argument("--model", metavar="PATH", help="trained model file")

    p = sub.add_parser("simulate", help="forward-simulate an activation trajectory")
    p.add_argument("--activations", metavar="CSV", help="trajectory CSV with an activation column")
    p.add_argument("--constant", type=float, metavar="LEVEL", help="constant activation level")
    p.add_argument("--steps", type=int, default=500, help="steps for --constant (0.01 s each)")
    p.add_argument("--theta0", type=float, default=0.0, help="initial angle in degrees")

    p = sub.add_parser("decode", help="decode a recording into activations/angles/F0")
    p.add_argument("--data", metavar="CSV", help="recording CSV")
    p.add_argument("--model", metavar="PATH", help="trained model file")

    p = sub.add_parser("synth", help="render an F0 trajectory CSV to WAV")
    p.add_argument("--f0", metavar="CSV", required=True, help="CSV with t_s,f0_hz columns")

    p = sub.add_parser("pipeline", help="full decode: metrics, CSVs, and audio")
    p.add_argument("--data", metavar="CSV", help="movement recording CSV")
    p.add_argument("--model", metavar="PATH", help="trained model file")

    return parser


def _load_cfg(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, split_seed=args.seed)
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _model_path(args, cfg: PipelineConfig) -> Path:
    if getattr(args, "model", None):
        return Path(args.model)
    if cfg.model_path:
        return Path(cfg.model_path)
    return _out_dir(args) / DEFAULT_MODEL_NAME


def _data_path(args, cfg: PipelineConfig):
    if getattr(args, "data", None):
        return Path(args.data)
    if cfg.data_path:
        return Path(cfg.data_path)
    return None


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value) -> str:
    return repr(float(value))


def _load_labeled_dataset(path, cfg: PipelineConfig) -> LabeledDataset:
    rec = load_recording_csv(path)
    if rec.kinematics is None:
        raise DataError(f"{path}: no angle_deg column; labels cannot be derived")
    frames = window_frames(rec)
    if len(rec.kinematics) != len(frames):
        raise DataError(
            f"{path}: {len(rec.kinematics)} kinematic values for {len(frames)} frames"
        )
    labels = derive_labels(cfg.arm, AngleTrajectory(rec.kinematics))
    return LabeledDataset(frames=frames, labels=labels, metadata={"source": str(path)})


def _cmd_gen_data(args, cfg: PipelineConfig) -> int:
    seed = args.seed if args.seed is not None else cfg.split_seed
    synth_cfg = SynthConfig(
        n_samples=max(args.n, 10) if args.movement_steps else args.n,
        snr_db=args.snr_db, seed=seed,
        carrier_hz=args.carrier_hz, amp_per_class=args.amp_per_class,
    )
    out = _out_dir(args)
    if args.movement_steps:
        rec, _classes = generate_movement(synth_cfg, args.movement_steps, model=cfg.arm)
        path = out / "movement.csv"
    else:
        ds = generate_dataset(synth_cfg)
        rec = dataset_to_recording(ds, model=cfg.arm)
        path = out / "dataset.csv"
    write_recording_csv(rec, path)
    print(f"wrote {path} ({rec.n_samples} samples, "
          f"{len(rec.kinematics) if rec.kinematics is not None else 0} kinematic values)")
    return 0


def _cmd_train(args, cfg: PipelineConfig) -> int:
    data = _data_path(args, cfg)
    if data is None:
        raise DataError("train needs --data (or paths.data in the config)")
    ds = _load_labeled_dataset(data, cfg)
    train_ds, test_ds = split_dataset(ds, cfg.train_fraction, cfg.split_seed)
    model = train_forest(train_ds, cfg.forest)
    path = _model_path(args, cfg)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, path)
    print(f"trained on {len(train_ds)} frames ({len(test_ds)} held out), wrote {path}")
    return 0


def _cmd_eval(args, cfg: PipelineConfig) -> int:
    data = _data_path(args, cfg)
    if data is None:
        raise DataError("eval needs --data (or paths.data in the config)")
    ds = _load_labeled_dataset(data, cfg)
    _train_ds, test_ds = split_dataset(ds, cfg.train_fraction, cfg.split_seed)
    model = load_model(_model_path(args, cfg))
    pred = predict_trajectory(model, test_ds.frames)
    report = evaluate_static(cfg, pred, list(test_ds.labels))
    out = _out_dir(args)
    (out / "metrics.json").write_text(report.to_json())
    print(report.to_json(), end="")
    print(f"wrote {out / 'metrics.json'}")
    return 0


def _cmd_simulate(args, cfg: PipelineConfig) -> int:
    if args.activations:
        levels = _read_column(args.activations, "activation")
    elif args.constant is not None:
        levels = [args.constant] * args.steps
    else:
        raise DataError("simulate needs --activations or --constant")
    act = ActivationTrajectory(levels=levels)
    angles = forward_dynamics(cfg.arm, act, theta0_deg=args.theta0)
    out = _out_dir(args)
    path = out / "trajectory.csv"
    rows = [
        [_fmt(i * CONTROL_DT_S), _fmt(a), _fmt(t)]
        for i, (a, t) in enumerate(zip(act.levels, angles.angles_deg))
    ]
    _write_csv(path, ["t_s", "activation", "angle_deg"], rows)
    print(f"wrote {path} ({len(rows)} steps, final angle {angles.angles_deg[-1]:.3f} deg)")
    return 0


def _read_column(path, column: str) -> list[float]:
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file")
        if column not in header:
            raise DataError(f"{path}: no {column!r} column")
        col = header.index(column)
        values = []
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}")
            try:
                values.append(float(row[col]))
            except ValueError:
                raise DataError(f"{path}: non-numeric cell on row {row_no}") from None
    if not values:
        raise DataError(f"{path}: no data rows")
    return values


def _write_stage_csvs(out: Path, result: PipelineResult, cfg: PipelineConfig, rec) -> None:
    have_truth = rec.kinematics is not None
    angle_header = ["t_s", "activation", "angle_deg"]
    f0_header = ["t_s", "f0_hz"]
    true_classes = None
    true_f0 = None
    if have_truth:
        angle_header += ["true_activation", "true_angle_deg"]
        f0_header.append("true_f0_hz")
        true_angles = AngleTrajectory(rec.kinematics)
        true_classes = derive_labels(cfg.arm, true_angles)
        true_f0 = map_trajectory(cfg.mapping, true_angles)

    angle_rows = []
    f0_rows = []
    for i in range(len(result.activations)):
        t = _fmt(i * CONTROL_DT_S)
        arow = [t, _fmt(result.activations[i].level), _fmt(result.angles.angles_deg[i])]
        frow = [t, _fmt(result.f0.values_hz[i])]
        if have_truth:
            arow += [_fmt(true_classes[i].level), _fmt(rec.kinematics[i])]
            frow.append(_fmt(true_f0.values_hz[i]))
        angle_rows.append(arow)
        f0_rows.append(frow)
    _write_csv(out / "angles.csv", angle_header, angle_rows)
    _write_csv(out / "f0.csv", f0_header, f0_rows)


def _cmd_decode(args, cfg: PipelineConfig) -> int:
    data = _data_path(args, cfg)
    if data is None:
        raise DataError("decode needs --data (or paths.data in the config)")
    rec = load_recording_csv(data)
    model = load_model(_model_path(args, cfg))
    result = run_pipeline(cfg, rec, model)
    out = _out_dir(args)
    _write_stage_csvs(out, result, cfg, rec)
    print(f"wrote {out / 'angles.csv'} and {out / 'f0.csv'} ({len(result.activations)} steps)")
    return 0


def _cmd_synth(args, cfg: PipelineConfig) -> int:
    values = _read_column(args.f0, "f0_hz")
    audio = synthesize(F0Trajectory(values_hz=values),
                       sample_rate_hz=cfg.synth_sample_rate_hz,
                       amplitude=cfg.synth_amplitude)
    out = _out_dir(args)
    path = out / "out.wav"
    write_wav(audio, path)
    print(f"wrote {path} ({len(audio)} samples at {audio.sample_rate_hz} Hz)")
    return 0


def _cmd_pipeline(args, cfg: PipelineConfig) -> int:
    data = _data_path(args, cfg)
    if data is not None:
        rec = load_recording_csv(data)
    else:
        # self-contained demo: deterministic synthetic movement from the seed
        rec, _classes = generate_movement(SynthConfig(seed=cfg.split_seed), 500, model=cfg.arm)
    model = load_model(_model_path(args, cfg))
    result = run_pipeline(cfg, rec, model)
    out = _out_dir(args)
    _write_stage_csvs(out, result, cfg, rec)
    write_wav(result.audio, out / "out.wav")
    if result.metrics is not None:
        (out / "metrics.json").write_text(result.metrics.to_json())
        print(result.metrics.to_json(), end="")
    else:
        print("recording has no kinematics; metrics skipped", file=sys.stderr)
    print(f"wrote angles.csv, f0.csv, out.wav in {out}")
    return 0


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "simulate": _cmd_simulate,
    "decode": _cmd_decode,
    "synth": _cmd_synth,
    "pipeline": _cmd_pipeline,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = _load_cfg(args)
        return _COMMANDS[args.command](args, cfg)
    except (DataError, OSError, ValueError, FloatingPointError) as exc:
        print(f"nf0: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
