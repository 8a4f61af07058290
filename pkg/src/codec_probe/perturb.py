"""Deterministic signal generation and degradation.

Covers the three degradation families used by the evaluation grid: additive
ambient noise and white noise at a target SNR, and reverberation at a target
direct-to-reverberant ratio. All generators are bit-deterministic given
(parameters, seed); randomness comes from the counter-based Philox 4x64 PRNG
so outputs are reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from .audio import Waveform, rms
from .errors import EmptyTail, FrequencyAboveNyquist, RateMismatch, SilentInput

WHITE_NOISE_RMS = 0.1  # nominal -20 dBFS; mix_at_snr rescales anyway
DEFAULT_DIRECT_WINDOW = 0.0025  # seconds on each side of the RIR peak


@dataclass(frozen=True)
class Condition:
    """One degradation setting in the evaluation grid.

    ``level_db`` is an SNR for ambient/white and a DRR for reverb; it is
    absent for clean. ``noise_source`` names the noise clip or RIR asset.
    """

    family: str
    level_db: Optional[float] = None
    noise_source: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.family not in ("clean", "ambient", "white", "reverb"):
            raise ValueError(f"unknown condition family {self.family!r}")
        if self.family == "clean" and self.level_db is not None:
            raise ValueError("clean condition takes no level_db")
        if self.family != "clean" and self.level_db is None:
            raise ValueError(f"{self.family} condition requires level_db")
        if self.family in ("ambient", "reverb") and not self.noise_source:
            raise ValueError(f"{self.family} condition requires noise_source")

    def label(self) -> str:
        if self.family == "clean":
            return "clean"
        return f"{self.family}@{self.level_db:g}dB"


@dataclass(frozen=True)
class RoomImpulseResponse:
    """RIR taps with the index of the direct path (max |tap|, ties earliest)."""

    taps: np.ndarray
    sample_rate: int

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim != 1 or not np.any(taps != 0.0):
            raise ValueError("RIR needs at least one nonzero tap")
        taps = taps.copy()
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def direct_index(self) -> int:
        return int(np.argmax(np.abs(self.taps)))

    @classmethod
    def from_waveform(cls, w: Waveform) -> "RoomImpulseResponse":
        return cls(w.samples, w.sample_rate)


def gen_white_noise(duration: float, rate: int, seed: int) -> Waveform:
    """Seeded Gaussian white noise scaled by 0.1 (RMS ~0.1).

    Uses numpy's Philox 4x64 counter-based generator with ziggurat
    standard-normal sampling; the same seed always yields the same buffer.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    n = int(round(duration * rate))
    rng = np.random.Generator(np.random.Philox(seed))
    return Waveform(WHITE_NOISE_RMS * rng.standard_normal(n), rate)


def gen_sine(freq: float, duration: float, rate: int,
             amplitude: float = 1.0, fade: float = 0.0) -> Waveform:
    """Sine tone with raised-cosine fade-in/out of ``fade`` seconds each."""
    if not 0.0 < freq < rate / 2:
        raise FrequencyAboveNyquist(f"{freq} Hz not in (0, {rate / 2}) Hz")
    if duration <= 0 or fade < 0 or 2 * fade > duration:
        raise ValueError("need duration > 0 and 2*fade <= duration")
    n = int(round(duration * rate))
    t = np.arange(n) / rate
    x = amplitude * np.sin(2 * np.pi * freq * t)
    n_fade = int(round(fade * rate))
    if n_fade:
        ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(n_fade) / n_fade))
        x[:n_fade] *= ramp
        x[n - n_fade:] *= ramp[::-1]
    return Waveform(x, rate)


def fit_noise_length(noise: np.ndarray, n: int) -> np.ndarray:
    """Loop (wrap-around) or truncate a noise buffer to n samples."""
    if noise.size >= n:
        return noise[:n]
    reps = -(-n // noise.size)
    return np.tile(noise, reps)[:n]


def mix_at_snr(speech: Waveform, noise: Waveform, snr_db: float) -> Waveform:
    """Add noise to speech at an exact signal-to-noise ratio in dB.

    The noise is looped or truncated to the speech length, then scaled so
    that 10*log10(P_speech / P_noise) equals ``snr_db`` by construction.
    No clipping or normalization is applied.
    """
    if speech.sample_rate != noise.sample_rate:
        raise RateMismatch(
            f"speech at {speech.sample_rate} Hz, noise at {noise.sample_rate} Hz"
        )
    speech_rms = rms(speech)
    if speech_rms == 0.0 or rms(noise) == 0.0:
        raise SilentInput("SNR is undefined for silent speech or noise")
    fitted = fit_noise_length(noise.samples, len(speech))
    fitted_rms = float(np.sqrt(np.mean(fitted * fitted)))
    if fitted_rms == 0.0:
        raise SilentInput("noise is silent over the mixed extent")
    gain = (speech_rms / fitted_rms) * 10.0 ** (-snr_db / 20.0)
    return speech.replace_samples(speech.samples + gain * fitted)


def _split_rir(rir: RoomImpulseResponse, direct_window: float):
    if direct_window <= 0:
        raise ValueError("direct_window must be positive")
    half = int(round(direct_window * rir.sample_rate))
    d = rir.direct_index
    lo = max(0, d - half)
    hi = min(rir.taps.size, d + half + 1)
    direct = rir.taps[lo:hi]
    tail = rir.taps[hi:]
    tail_energy = float(np.sum(tail * tail))
    if tail.size == 0 or tail_energy == 0.0:
        raise EmptyTail("no reverberant energy after the direct window")
    return hi, float(np.sum(direct * direct)), tail_energy


def measure_drr(rir: RoomImpulseResponse,
                direct_window: float = DEFAULT_DIRECT_WINDOW) -> float:
    """Direct-to-reverberant ratio in dB.

    Direct part: taps within +-direct_window seconds of the peak tap; tail:
    everything later. Raises EmptyTail when the tail carries no energy.
    """
    _, direct_energy, tail_energy = _split_rir(rir, direct_window)
    return 10.0 * np.log10(direct_energy / tail_energy)


def scale_rir_to_drr(rir: RoomImpulseResponse, drr_db: float,
                     direct_window: float = DEFAULT_DIRECT_WINDOW) -> RoomImpulseResponse:
    """Scale the RIR tail so the modified RIR has exactly the target DRR."""
    split, direct_energy, tail_energy = _split_rir(rir, direct_window)
    measured = 10.0 * np.log10(direct_energy / tail_energy)
    beta = 10.0 ** ((measured - drr_db) / 20.0)
    taps = rir.taps.copy()
    taps[split:] *= beta
    return RoomImpulseResponse(taps, rir.sample_rate)


def apply_reverb_at_drr(speech: Waveform, rir: RoomImpulseResponse, drr_db: float,
                        direct_window: float = DEFAULT_DIRECT_WINDOW,
                        normalize: bool = True) -> Waveform:
    """Convolve speech with the RIR rescaled to an exact target DRR.

    The output is truncated to the input length and, unless ``normalize`` is
    False, RMS-renormalized to the input so loudness changes do not
    masquerade as codec failures.
    """
    if speech.sample_rate != rir.sample_rate:
        raise RateMismatch(
            f"speech at {speech.sample_rate} Hz, RIR at {rir.sample_rate} Hz"
        )
    scaled = scale_rir_to_drr(rir, drr_db, direct_window)
    wet = fftconvolve(speech.samples, scaled.taps)[:len(speech)]
    if normalize:
        wet_rms = float(np.sqrt(np.mean(wet * wet)))
        if wet_rms > 0.0:
            wet = wet * (rms(speech) / wet_rms)
    return speech.replace_samples(wet)


def apply_condition(speech: Waveform, cond: Condition,
                    noise: Optional[Waveform] = None,
                    rir: Optional[RoomImpulseResponse] = None,
                    direct_window: float = DEFAULT_DIRECT_WINDOW) -> Waveform:
    """Degrade a clean utterance according to one grid condition."""
    if cond.family == "clean":
        return speech
    if cond.family == "white":
        noise = gen_white_noise(len(speech) / speech.sample_rate,
                                speech.sample_rate, cond.seed)
        return mix_at_snr(speech, noise, cond.level_db)
    if cond.family == "ambient":
        if noise is None:
            raise ValueError("ambient condition needs a noise waveform")
        return mix_at_snr(speech, noise, cond.level_db)
    if rir is None:
        raise ValueError("reverb condition needs an RIR")
    return apply_reverb_at_drr(speech, rir, cond.level_db, direct_window)
