"""Bundled synthetic smoke corpus so CI and the acceptance suite run with
zero external data.

Ten deterministic speech-like utterances (harmonic stacks with pitch and
syllabic amplitude contours plus breath noise), one ambient-style noise clip,
and one synthetic room impulse response, all derived from a seeded Philox
stream and written as float-32 WAVs with a manifest.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .audio import Waveform, write_wav

DEFAULT_SEED = 20260810
WORDS = ("alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf",
         "hotel", "india", "juliett", "kilo", "lima")


def speech_like(seed: int, duration: float = 2.0, rate: int = 16000) -> Waveform:
    """One deterministic speech-like utterance.

    Voiced harmonic stack with vibrato and a syllabic envelope, plus
    fricative-style high-frequency bursts in anti-phase with the voicing and
    a low-level room floor, so the spectrum carries content across the band
    like real recordings do.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    n = int(round(duration * rate))
    t = np.arange(n) / rate
    f0 = 90.0 + 130.0 * rng.random()
    vibrato = 1.0 + 0.12 * np.sin(2 * np.pi * (0.6 + rng.random()) * t + rng.random() * 6.0)
    phase = 2 * np.pi * np.cumsum(f0 * vibrato) / rate
    formant_gain = 1.0 / (1.0 + ((np.arange(1, 13) * f0 - 700.0) / 900.0) ** 2)
    x = np.zeros(n)
    for h in range(1, 13):
        x += (formant_gain[h - 1] / h) * np.sin(h * phase + rng.random() * 6.0)
    syl_rate = 2.0 + 1.5 * rng.random()
    syl_phase = rng.random() * 6.0
    voiced = np.abs(np.sin(2 * np.pi * syl_rate * t + syl_phase)) ** 0.7
    x *= voiced
    # fricative bursts: first-differenced noise (high-frequency emphasis)
    fricative = np.abs(np.sin(2 * np.pi * syl_rate * t + syl_phase + np.pi / 2)) ** 4
    x += 0.35 * np.diff(rng.standard_normal(n + 1)) * fricative
    x += 0.02 * rng.standard_normal(n) * voiced  # breath noise
    x += 0.004 * rng.standard_normal(n)  # room floor
    return Waveform(0.5 * x / np.max(np.abs(x)), rate)


def ambient_noise(seed: int, duration: float = 3.0, rate: int = 16000) -> Waveform:
    """Recorded-style noise: 1/f-shaped spectrum with slow level drift."""
    rng = np.random.Generator(np.random.Philox(seed))
    n = int(round(duration * rate))
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1.0 / rate)
    shaping = 1.0 / np.sqrt(np.maximum(freqs, 30.0))
    x = np.fft.irfft(spectrum * shaping, n)
    t = np.arange(n) / rate
    drift = 1.0 + 0.4 * np.sin(2 * np.pi * 0.3 * t + rng.random() * 6.0)
    x *= drift
    return Waveform(0.3 * x / np.max(np.abs(x)), rate)


def synthetic_rir(seed: int, rate: int = 16000, decay_time: float = 0.35) -> Waveform:
    """Direct impulse, sparse early reflections, exponentially decaying tail."""
    rng = np.random.Generator(np.random.Philox(seed))
    n = int(round((decay_time + 0.05) * rate))
    taps = np.zeros(n)
    direct = int(0.012 * rate)
    taps[direct] = 1.0
    for _ in range(6):  # early reflections
        pos = direct + int((0.005 + 0.03 * rng.random()) * rate)
        taps[pos] += (0.1 + 0.3 * rng.random()) * (1 if rng.random() < 0.5 else -1)
    tail_start = direct + int(0.005 * rate)
    tail_len = n - tail_start
    tail_t = np.arange(tail_len) / rate
    taps[tail_start:] += (0.25 * rng.standard_normal(tail_len)
                          * np.exp(-3.0 * tail_t / decay_time))
    return Waveform(taps, rate)


def build_smoke_corpus(out_dir, n_utterances: int = 10, seed: int = DEFAULT_SEED,
                       duration: float = 2.0, rate: int = 16000) -> str:
    """Write the corpus into ``out_dir`` and return the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    manifest_path = os.path.join(out_dir, "manifest.csv")
    rows = []
    for i in range(n_utterances):
        utt_id = f"smoke{i:03d}"
        wav_name = f"{utt_id}.wav"
        write_wav(speech_like(seed + i, duration, rate),
                  os.path.join(out_dir, wav_name), "float32")
        transcript = " ".join(
            WORDS[(i + j) % len(WORDS)] for j in range(3 + i % 4))
        rows.append((utt_id, wav_name, transcript))
    write_wav(ambient_noise(seed + 1000, 3.0, rate),
              os.path.join(out_dir, "noise.wav"), "float32")
    write_wav(synthetic_rir(seed + 2000, rate),
              os.path.join(out_dir, "rir.wav"), "float32")
    with open(manifest_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["utterance_id", "wav_path", "transcript"])
        writer.writerows(rows)
    return manifest_path
