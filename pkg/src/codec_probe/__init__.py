"""Codec-agnostic noise-robustness, linearity, and frequency-response analysis."""

__version__ = "0.1.0"

from .analysis import (
    FrequencyResponseCurve,
    GainLevel,
    LinearityReport,
    ProbeSettings,
    additivity_probe,
    frequency_response,
    goertzel_magnitude,
    homogeneity_probe,
)
from .audio import Waveform, align, detect_lag, read_wav, read_wav_header, resample, rms, write_wav
from .codecs import CodecDescriptor, CodecUnderTest, builtin_catalog, invoke_external
from .harness import (
    ExperimentConfig,
    MetricReport,
    emit_reports,
    load_config,
    load_manifest,
    run_frequency_response,
    run_grid,
    run_linearity,
)
from .metrics import MelConfig, ScoreRecord, TranscriptPair, accuracy, eer, mel_distance, wer
from .perturb import (
    Condition,
    RoomImpulseResponse,
    apply_reverb_at_drr,
    gen_sine,
    gen_white_noise,
    measure_drr,
    mix_at_snr,
)
from .rvq import CodeSequence, RvqModel, bitrate, decode, encode, load_model, save_model, train

__all__ = [
    "CodeSequence",
    "CodecDescriptor",
    "CodecUnderTest",
    "Condition",
    "ExperimentConfig",
    "FrequencyResponseCurve",
    "GainLevel",
    "LinearityReport",
    "MelConfig",
    "MetricReport",
    "ProbeSettings",
    "RoomImpulseResponse",
    "RvqModel",
    "ScoreRecord",
    "TranscriptPair",
    "Waveform",
    "accuracy",
    "additivity_probe",
    "align",
    "apply_reverb_at_drr",
    "bitrate",
    "builtin_catalog",
    "decode",
    "detect_lag",
    "eer",
    "emit_reports",
    "encode",
    "frequency_response",
    "gen_sine",
    "gen_white_noise",
    "goertzel_magnitude",
    "homogeneity_probe",
    "invoke_external",
    "load_config",
    "load_manifest",
    "load_model",
    "measure_drr",
    "mel_distance",
    "mix_at_snr",
    "read_wav",
    "read_wav_header",
    "resample",
    "rms",
    "run_frequency_response",
    "run_grid",
    "run_linearity",
    "save_model",
    "train",
    "wer",
    "write_wav",
    "__version__",
]
