"""Objective metric suite: log-mel spectral distance computed natively, plus
word error rate, equal error rate, and label accuracy over externally
produced transcripts, trial scores, and labels.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .audio import Waveform
from .errors import EmptyReference, EmptySignal, IdMismatch, MissingClass, RateMismatch


@dataclass(frozen=True)
class MelConfig:
    """Pinned mel-spectrogram parameterization.

    Slaney-style area-normalized triangular filters on a periodic-Hann
    power STFT; ``floor`` clamps mel power before the log.
    """

    n_mels: int = 80
    fft_size: int = 1024
    hop: int = 256
    floor: float = 1e-5
    fmin: float = 0.0
    fmax: Optional[float] = None  # None: Nyquist

    def __post_init__(self):
        if self.fft_size < self.hop or self.n_mels < 1 or self.floor <= 0:
            raise ValueError("need fft_size >= hop, n_mels >= 1, floor > 0")


def _hz_to_mel(freq):
    """Slaney mel scale: linear below 1 kHz, logarithmic above."""
    freq = np.asarray(freq, dtype=np.float64)
    mel = freq / (200.0 / 3.0)
    log_region = freq >= 1000.0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_mel = 15.0 + np.log(freq / 1000.0) / (np.log(6.4) / 27.0)
    return np.where(log_region, log_mel, mel)


def _mel_to_hz(mel):
    mel = np.asarray(mel, dtype=np.float64)
    freq = mel * (200.0 / 3.0)
    log_region = mel >= 15.0
    return np.where(log_region, 1000.0 * np.exp((mel - 15.0) * np.log(6.4) / 27.0), freq)


def mel_filterbank(cfg: MelConfig, sample_rate: int) -> np.ndarray:
    """(n_mels, fft_size//2 + 1) triangular filters, area-normalized."""
    fmax = cfg.fmax if cfg.fmax is not None else sample_rate / 2.0
    edges = _mel_to_hz(np.linspace(_hz_to_mel(cfg.fmin), _hz_to_mel(fmax), cfg.n_mels + 2))
    bins = np.fft.rfftfreq(cfg.fft_size, d=1.0 / sample_rate)
    lower, center, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    up = (bins[None, :] - lower) / np.maximum(center - lower, 1e-30)
    down = (upper - bins[None, :]) / np.maximum(upper - center, 1e-30)
    fb = np.maximum(0.0, np.minimum(up, down))
    fb *= (2.0 / (upper - lower))  # Slaney area normalization
    return fb


def _power_stft(samples: np.ndarray, cfg: MelConfig) -> np.ndarray:
    """Power spectrogram over non-centered frames; short inputs are
    zero-padded to a single frame."""
    n = samples.size
    if n < cfg.fft_size:
        samples = np.pad(samples, (0, cfg.fft_size - n))
        n = cfg.fft_size
    n_frames = 1 + (n - cfg.fft_size) // cfg.hop
    idx = np.arange(cfg.fft_size)[None, :] + cfg.hop * np.arange(n_frames)[:, None]
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(cfg.fft_size) / cfg.fft_size)
    spec = np.fft.rfft(samples[idx] * window, axis=1)
    return np.abs(spec) ** 2


def log_mel(w: Waveform, cfg: MelConfig) -> np.ndarray:
    """(frames, n_mels) log10 mel power image with the configured floor."""
    power = _power_stft(w.samples, cfg)
    mel = power @ mel_filterbank(cfg, w.sample_rate).T
    return np.log10(np.maximum(mel, cfg.floor))


def mel_distance(ref: Waveform, test: Waveform, cfg: MelConfig = MelConfig()) -> float:
    """Mean absolute log10-mel difference over all time-frequency bins.

    The signals are truncated to common length first; alignment is the
    caller's job.
    """
    if ref.sample_rate != test.sample_rate:
        raise RateMismatch(
            f"sample rates differ: {ref.sample_rate} vs {test.sample_rate}")
    n = min(len(ref), len(test))
    if n == 0:
        raise EmptySignal("mel distance of an empty signal is undefined")
    a = log_mel(ref.replace_samples(ref.samples[:n]), cfg)
    b = log_mel(test.replace_samples(test.samples[:n]), cfg)
    return float(np.mean(np.abs(a - b)))


# --- word error rate ---

@dataclass(frozen=True)
class TranscriptPair:
    utterance_id: str
    reference: tuple
    hypothesis: tuple


def edit_counts(reference: Sequence[str], hypothesis: Sequence[str]) -> tuple[int, int, int]:
    """(substitutions, deletions, insertions) from a minimum edit alignment.

    Uniform costs; ties prefer substitution over insertion over deletion,
    which affects the split but never the total.
    """
    n, m = len(reference), len(hypothesis)
    dist = np.zeros((n + 1, m + 1), dtype=np.int64)
    dist[:, 0] = np.arange(n + 1)
    dist[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        sub = dist[i - 1, :-1] + (np.asarray(hypothesis, dtype=object) != reference[i - 1])
        row = dist[i]
        row[1:] = np.minimum(sub, dist[i - 1, 1:] + 1)  # substitution/match, deletion
        for j in range(1, m + 1):  # insertions need the running row
            if row[j - 1] + 1 < row[j]:
                row[j] = row[j - 1] + 1
    s = d = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i, j] == dist[i - 1, j - 1] + (reference[i - 1] != hypothesis[j - 1]):
            s += reference[i - 1] != hypothesis[j - 1]
            i, j = i - 1, j - 1
        elif j > 0 and dist[i, j] == dist[i, j - 1] + 1:
            ins += 1
            j -= 1
        else:
            d += 1
            i -= 1
    return int(s), int(d), int(ins)


def wer(pairs: Sequence[TranscriptPair]) -> float:
    """Corpus-level word error rate in percent.

    100 * (S + D + I) / total reference tokens, summed over the corpus; may
    exceed 100.
    """
    total_errors = 0
    total_ref = 0
    for pair in pairs:
        if len(pair.reference) == 0:
            raise EmptyReference(f"empty reference for {pair.utterance_id}")
        s, d, ins = edit_counts(pair.reference, pair.hypothesis)
        total_errors += s + d + ins
        total_ref += len(pair.reference)
    if total_ref == 0:
        raise EmptyReference("no reference tokens")
    return 100.0 * total_errors / total_ref


# --- equal error rate ---

@dataclass(frozen=True)
class ScoreRecord:
    trial_id: str
    score: float
    label: str  # "genuine" | "impostor"

    def __post_init__(self):
        if self.label not in ("genuine", "impostor"):
            raise ValueError(f"label must be genuine or impostor, got {self.label!r}")
        if not np.isfinite(self.score):
            raise ValueError(f"non-finite score for trial {self.trial_id}")


def eer(records: Sequence[ScoreRecord]) -> float:
    """Equal error rate in percent from genuine/impostor trial scores.

    Sweeps thresholds over the sorted distinct scores with the exclusive
    convention (false acceptance: impostor scores strictly above the
    threshold; false rejection: genuine scores strictly below), then linearly
    interpolates between adjacent thresholds where the two rates cross.
    """
    genuine = np.sort([r.score for r in records if r.label == "genuine"])
    impostor = np.sort([r.score for r in records if r.label == "impostor"])
    if genuine.size == 0 or impostor.size == 0:
        raise MissingClass("need at least one genuine and one impostor record")
    thresholds = np.unique(np.concatenate([genuine, impostor]))
    far = 1.0 - np.searchsorted(impostor, thresholds, side="right") / impostor.size
    frr = np.searchsorted(genuine, thresholds, side="left") / genuine.size
    diff = far - frr  # non-increasing in the threshold
    i = int(np.argmax(diff <= 0.0))
    if diff[i] == 0.0:
        return 100.0 * far[i]
    # rates crossed between thresholds i-1 and i; diff[0] >= 0 always since
    # no genuine score is below the smallest threshold
    alpha = diff[i - 1] / (diff[i - 1] - diff[i])
    return 100.0 * (far[i - 1] + alpha * (far[i] - far[i - 1]))


# --- label accuracy ---

def accuracy(ref_labels: Sequence[tuple], hyp_labels: Sequence[tuple]) -> float:
    """Percent of ids whose hypothesis label matches the reference label."""
    ref = dict(ref_labels)
    hyp = dict(hyp_labels)
    if len(ref) != len(ref_labels) or len(hyp) != len(hyp_labels):
        raise IdMismatch("duplicate ids in label list")
    if ref.keys() != hyp.keys():
        missing = ref.keys() ^ hyp.keys()
        raise IdMismatch(f"id sets differ on {sorted(missing)[:5]}")
    if not ref:
        raise IdMismatch("empty label lists")
    hits = sum(ref[k] == hyp[k] for k in ref)
    return 100.0 * hits / len(ref)


# --- file interfaces ---

def read_transcripts(path) -> dict:
    """UTF-8 'id<TAB>text' lines to {id: token tuple}."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            utt_id, _, text = line.partition("\t")
            out[utt_id] = tuple(text.split())
    return out


def read_scores(path) -> list:
    """CSV 'trial_id,score,label' (header required) to ScoreRecords."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [ScoreRecord(row["trial_id"], float(row["score"]), row["label"])
                for row in reader]


def read_labels(path) -> list:
    """CSV 'id,label' (header required) to (id, label) tuples."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [(row["id"], row["label"]) for row in reader]
