"""neurof0: EEG frames to muscle activations to elbow angles to pitch.

A deterministic decoding pipeline: windowed EEG is classified into one of
ten discretized muscle-activation levels by a from-scratch random forest,
driven through a single-muscle elbow model, and the resulting joint angle
is mapped linearly onto a 1500-5150 Hz fundamental frequency rendered as
a sine tone. A synthetic data generator makes every stage testable
against closed-form oracles.
"""

from .arm import (
    CONTROL_DT_S,
    ActivationTrajectory,
    AngleTrajectory,
    ArmModel,
    derive_labels,
    equilibrium_angle,
    forward_dynamics,
    forward_states,
    inverse_quasistatic,
    inverse_tracking,
)
from .datagen import (
    SynthConfig,
    dataset_to_recording,
    generate_dataset,
    generate_movement,
    oracle_classify,
    ramp_classes,
)
from .eeg import (
    DEFAULT_CHANNELS,
    ActivationClass,
    EegFrame,
    EegRecording,
    LabeledDataset,
    load_recording_csv,
    split_dataset,
    window_frames,
    write_recording_csv,
)
from .errors import DataError, ModelFileError, PipelineStageError
from .forest import (
    DecisionTree,
    ForestHyperparams,
    ForestModel,
    load_model,
    predict,
    predict_trajectory,
    save_model,
    train,
)
from .metrics import MetricsReport, accuracy, rmse
from .pipeline import (
    PipelineConfig,
    PipelineResult,
    config_from_dict,
    evaluate_static,
    load_config,
    run_pipeline,
)
from .voice import (
    AudioBuffer,
    F0Mapping,
    F0Trajectory,
    map_angle_to_f0,
    map_trajectory,
    synthesize,
    write_wav,
)
from .cli import cli_main

__version__ = "0.1.0"
