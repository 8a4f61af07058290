"""Empirical linearity probes and stepped-sine frequency response for
black-box codecs.

Additivity compares f(X+Y) against f(X)+f(Y); homogeneity compares f(aX)
against a*f(X) over a ladder of gains; the frequency response measures
fundamental gain per steady probe tone via the Goertzel recurrence.
Stepped sines are used instead of a continuous sweep because sweep
deconvolution smears distortion products of nonlinear systems across
frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .audio import Waveform, align
from .codecs import CodecUnderTest
from .errors import FrequencyAboveNyquist, RateMismatch
from .metrics import MelConfig, mel_distance
from .perturb import gen_sine

DEFAULT_GAINS_DB = (-40.0, -20.0, -12.0, -6.0, 0.0, 6.0, 12.0)
DEFAULT_PROBE_AMPLITUDES = (1.0, 0.5, 0.1)
SILENT_GAIN_DB = -180.0  # sentinel when the probe vanishes in the output
ALIGN_MAX_LAG = 0.1  # seconds
HEADROOM_PEAK = 0.99


@dataclass(frozen=True)
class GainLevel:
    """A homogeneity gain, stored in dB with its linear factor."""

    gain_db: float

    @property
    def alpha(self) -> float:
        return 10.0 ** (self.gain_db / 20.0)


@dataclass(frozen=True)
class ProbeSettings:
    """Stepped-sine probe parameters."""

    duration: float = 1.0
    amplitude: float = 1.0
    fade: float = 0.010
    edge_discard: float = 0.100  # seconds dropped from each end before measuring


@dataclass(frozen=True)
class FrequencyResponseCurve:
    codec: str
    mode: str
    probe_amplitude: float
    probe_duration: float
    points: tuple  # ((freq_hz, gain_db), ...) strictly increasing in freq

    def gains_db(self) -> np.ndarray:
        return np.array([g for _, g in self.points])

    def freqs(self) -> np.ndarray:
        return np.array([f for f, _ in self.points])


@dataclass(frozen=True)
class LinearityReport:
    codec: str
    mode: str
    additivity_distances: tuple = ()
    homogeneity: tuple = ()  # ((gain_db, mean mel distance), ...)
    pair_count: int = 0
    utterance_count: int = 0

    @property
    def additivity_mean(self) -> float:
        return float(np.mean(self.additivity_distances)) if self.additivity_distances else math.nan

    @property
    def additivity_p05(self) -> float:
        return float(np.percentile(self.additivity_distances, 5)) if self.additivity_distances else math.nan

    @property
    def additivity_p95(self) -> float:
        return float(np.percentile(self.additivity_distances, 95)) if self.additivity_distances else math.nan


def goertzel_magnitude(w: Waveform, freq: float) -> float:
    """Single-frequency DFT magnitude over the whole buffer, via the
    Goertzel recurrence."""
    if not 0.0 < freq < w.sample_rate / 2:
        raise FrequencyAboveNyquist(f"{freq} Hz not in (0, {w.sample_rate / 2}) Hz")
    omega = 2.0 * math.pi * freq / w.sample_rate
    coeff = 2.0 * math.cos(omega)
    s1 = s2 = 0.0
    for x in w.samples.tolist():
        s0 = x + coeff * s1 - s2
        s2 = s1
        s1 = s0
    power = s1 * s1 + s2 * s2 - coeff * s1 * s2
    return math.sqrt(max(power, 0.0))


def default_probe_freqs(native_rate: int, count: int = 64) -> np.ndarray:
    """Log-spaced probe frequencies from 20 Hz to 0.45x the native rate."""
    return np.geomspace(20.0, 0.45 * native_rate, count)


def additivity_probe(codec: CodecUnderTest, mode: str,
                     pairs: Sequence[tuple], cfg: MelConfig = MelConfig(),
                     max_lag: float = ALIGN_MAX_LAG) -> LinearityReport:
    """Mel distance between f(X+Y) and f(X)+f(Y) over utterance pairs.

    Pairs are truncated to their shorter member. If |X+Y| would exceed full
    scale, both X and Y are scaled by the same headroom factor, which cancels
    in the comparison for any homogeneous system.
    """
    rate = codec.descriptor.native_rate
    distances = []
    for x, y in pairs:
        if x.sample_rate != rate or y.sample_rate != rate:
            raise RateMismatch(f"pair not at codec rate {rate}")
        n = min(len(x), len(y))
        xs, ys = x.samples[:n], y.samples[:n]
        peak = np.max(np.abs(xs + ys), initial=0.0)
        if peak > 1.0:
            gamma = HEADROOM_PEAK / peak
            xs, ys = gamma * xs, gamma * ys
        wx = Waveform(xs, rate)
        wy = Waveform(ys, rate)
        w_sum = Waveform(xs + ys, rate)
        a = codec.process(w_sum, mode)
        fx, fy = codec.process(wx, mode), codec.process(wy, mode)
        m = min(len(fx), len(fy))
        b = Waveform(fx.samples[:m] + fy.samples[:m], rate)
        a_al, b_al = align(a, b, max_lag)
        distances.append(mel_distance(a_al, b_al, cfg))
    return LinearityReport(codec=codec.name, mode=mode,
                           additivity_distances=tuple(distances),
                           pair_count=len(distances))


def homogeneity_probe(codec: CodecUnderTest, mode: str,
                      utterances: Sequence[Waveform],
                      gains: Sequence[GainLevel] = None,
                      cfg: MelConfig = MelConfig(),
                      max_lag: float = ALIGN_MAX_LAG) -> LinearityReport:
    """Mel distance between f(a*X) and a*f(X) per gain level."""
    if gains is None:
        gains = [GainLevel(g) for g in DEFAULT_GAINS_DB]
    rate = codec.descriptor.native_rate
    per_gain = []
    for gain in gains:
        distances = []
        for w in utterances:
            if w.sample_rate != rate:
                raise RateMismatch(f"utterance not at codec rate {rate}")
            scaled_in = w.replace_samples(gain.alpha * w.samples)
            a = codec.process(scaled_in, mode)
            fx = codec.process(w, mode)
            b = fx.replace_samples(gain.alpha * fx.samples)
            a_al, b_al = align(a, b, max_lag)
            distances.append(mel_distance(a_al, b_al, cfg))
        per_gain.append((gain.gain_db, float(np.mean(distances))))
    return LinearityReport(codec=codec.name, mode=mode,
                           homogeneity=tuple(per_gain),
                           utterance_count=len(utterances))


def frequency_response(codec: CodecUnderTest, mode: str,
                       freqs: Optional[Sequence[float]] = None,
                       probe: ProbeSettings = ProbeSettings(),
                       max_lag: float = ALIGN_MAX_LAG) -> FrequencyResponseCurve:
    """Fundamental gain in dB per stepped-sine probe.

    Each probe is processed through the codec, aligned, trimmed of its edges,
    and measured at the probe frequency on both sides of the transform.
    Vanishing output magnitude yields the -180 dB sentinel.
    """
    rate = codec.descriptor.native_rate
    if freqs is None:
        freqs = default_probe_freqs(rate)
    points = []
    discard = int(round(probe.edge_discard * rate))
    for freq in sorted(freqs):
        if freq >= rate / 2:
            raise FrequencyAboveNyquist(f"probe {freq} Hz at rate {rate}")
        tone = gen_sine(freq, probe.duration, rate, probe.amplitude, probe.fade)
        out = codec.process(tone, mode)
        in_al, out_al = align(tone, out, max_lag)
        lo, hi = discard, len(in_al) - discard
        if hi - lo < rate // 100:  # keep at least 10 ms of steady tone
            lo, hi = 0, len(in_al)
        in_mag = goertzel_magnitude(in_al.replace_samples(in_al.samples[lo:hi]), freq)
        out_mag = goertzel_magnitude(out_al.replace_samples(out_al.samples[lo:hi]), freq)
        if out_mag < 1e-9 or in_mag == 0.0:
            gain_db = SILENT_GAIN_DB
        else:
            gain_db = 20.0 * math.log10(out_mag / in_mag)
        points.append((float(freq), float(gain_db)))
    return FrequencyResponseCurve(codec=codec.name, mode=mode,
                                  probe_amplitude=probe.amplitude,
                                  probe_duration=probe.duration,
                                  points=tuple(points))
