"""Waveform container, WAV file I/O, resampling, energy, and delay alignment.

Samples are held as 64-bit floats regardless of the on-disk encoding;
quantization happens only at file boundaries.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np
from scipy.signal import correlate

from .errors import (
    EmptyOverlap,
    EmptySignal,
    IoFailure,
    MalformedContainer,
    MissingFile,
    MultichannelInput,
    RateMismatch,
    UnsupportedEncoding,
)

_PCM16_SCALE = 32768.0
_PCM24_SCALE = 8388608.0

# Resampler constants: windowed sinc with a 64-tap Kaiser window (beta 8.6),
# cutoff at 0.45x the lower of the two rates. Gives >60 dB stopband.
_RESAMPLE_TAPS = 64
_KAISER_BETA = 8.6
_CUTOFF_FRACTION = 0.45


@dataclass(frozen=True)
class Waveform:
    """Immutable mono sample buffer with its sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        arr = self.samples
        if not (isinstance(arr, np.ndarray) and arr.dtype == np.float64
                and arr.ndim == 1 and not arr.flags.writeable):
            arr = np.array(arr, dtype=np.float64, copy=True).reshape(-1)
            arr.setflags(write=False)
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValueError("waveform contains non-finite samples")
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return self.samples.size / self.sample_rate

    def replace_samples(self, samples) -> "Waveform":
        """New Waveform at the same rate with different samples."""
        return Waveform(samples, self.sample_rate)


def _read_exact(fh, n, what):
    data = fh.read(n)
    if len(data) != n:
        raise MalformedContainer(f"truncated WAV file while reading {what}")
    return data


def _parse_wav(path):
    """Parse a RIFF/WAVE file into (fmt dict, raw data bytes or None)."""
    if not os.path.isfile(path):
        raise MissingFile(f"no such file: {path}")
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise MissingFile(f"cannot open {path}: {exc}") from exc
    with fh:
        header = fh.read(12)
        if len(header) < 12 or header[:4] != b"RIFF" or header[8:12] != b"WAVE":
            raise MalformedContainer(f"{path} is not a RIFF/WAVE file")
        fmt = None
        data = None
        while True:
            chunk_header = fh.read(8)
            if len(chunk_header) == 0:
                break
            if len(chunk_header) < 8:
                raise MalformedContainer(f"truncated chunk header in {path}")
            chunk_id, size = struct.unpack("<4sI", chunk_header)
            if chunk_id == b"fmt ":
                if size < 16:
                    raise MalformedContainer(f"fmt chunk too small in {path}")
                body = _read_exact(fh, size, "fmt chunk")
                (audio_format, channels, sample_rate, _byte_rate,
                 block_align, bits) = struct.unpack("<HHIIHH", body[:16])
                fmt = {
                    "format": audio_format,
                    "channels": channels,
                    "sample_rate": sample_rate,
                    "block_align": block_align,
                    "bits": bits,
                }
            elif chunk_id == b"data":
                data = _read_exact(fh, size, "data chunk")
            else:
                fh.seek(size, os.SEEK_CUR)
            if size % 2:  # chunks are word-aligned; skip the pad byte
                fh.seek(1, os.SEEK_CUR)
            if fmt is not None and data is not None:
                break
    if fmt is None:
        raise MalformedContainer(f"missing fmt chunk in {path}")
    return fmt, data


def _check_format(fmt, path):
    kind = (fmt["format"], fmt["bits"])
    if kind not in ((1, 16), (1, 24), (3, 32)):
        raise UnsupportedEncoding(
            f"{path}: unsupported encoding (format tag {fmt['format']}, "
            f"{fmt['bits']} bits); expected PCM-16, PCM-24 or float-32"
        )
    if fmt["channels"] != 1:
        raise MultichannelInput(
            f"{path} has {fmt['channels']} channels; downmix explicitly before use"
        )


def read_wav_header(path) -> tuple[int, int]:
    """Validate a WAV header and return (sample_rate, sample_count)."""
    fmt, data = _parse_wav(path)
    _check_format(fmt, path)
    if data is None:
        raise MalformedContainer(f"missing data chunk in {path}")
    bytes_per = fmt["bits"] // 8
    if len(data) % bytes_per:
        raise MalformedContainer(f"data chunk size not a whole number of samples in {path}")
    return fmt["sample_rate"], len(data) // bytes_per


def read_wav(path) -> Waveform:
    """Read a mono PCM-16, PCM-24, or IEEE float-32 WAV file.

    Integer PCM is scaled to [-1, 1) by dividing by 2^(bits-1); float
    samples pass through unchanged.
    """
    fmt, data = _parse_wav(path)
    _check_format(fmt, path)
    if data is None:
        raise MalformedContainer(f"missing data chunk in {path}")
    bytes_per = fmt["bits"] // 8
    if len(data) % bytes_per:
        raise MalformedContainer(f"data chunk size not a whole number of samples in {path}")
    if fmt["format"] == 1 and fmt["bits"] == 16:
        samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / _PCM16_SCALE
    elif fmt["format"] == 1 and fmt["bits"] == 24:
        raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, 3)
        vals = (raw[:, 0].astype(np.int32)
                | (raw[:, 1].astype(np.int32) << 8)
                | (raw[:, 2].astype(np.int32) << 16))
        vals = np.where(vals >= 1 << 23, vals - (1 << 24), vals)
        samples = vals.astype(np.float64) / _PCM24_SCALE
    else:
        samples = np.frombuffer(data, dtype="<f4").astype(np.float64)
    return Waveform(samples, fmt["sample_rate"])


def write_wav(w: Waveform, path, encoding: str = "float32") -> None:
    """Write a mono WAV file.

    ``pcm16`` quantizes with round-half-away-from-zero and saturates beyond
    full scale; ``float32`` is lossless for float-32-representable samples.
    """
    if encoding == "pcm16":
        scaled = w.samples * _PCM16_SCALE
        ints = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
        ints = np.clip(ints, -32768, 32767).astype("<i2")
        payload = ints.tobytes()
        fmt_tag, bits = 1, 16
    elif encoding == "float32":
        payload = w.samples.astype("<f4").tobytes()
        fmt_tag, bits = 3, 32
    else:
        raise ValueError(f"unknown encoding {encoding!r}; use 'pcm16' or 'float32'")

    block_align = bits // 8
    byte_rate = w.sample_rate * block_align
    chunks = [
        b"fmt ", struct.pack("<HHIIHH", fmt_tag, 1, w.sample_rate,
                             byte_rate, block_align, bits),
    ]
    if fmt_tag == 3:  # non-PCM formats carry a fact chunk
        chunks += [b"fact", struct.pack("<I", len(w))]
    chunks += [b"data", payload]

    body = b""
    for i in range(0, len(chunks), 2):
        chunk_id, chunk_body = chunks[i], chunks[i + 1]
        body += chunk_id + struct.pack("<I", len(chunk_body)) + chunk_body
        if len(chunk_body) % 2:
            body += b"\x00"
    try:
        with open(path, "wb") as fh:
            fh.write(b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _kaiser_window(x):
    """Continuous Kaiser window on [-1, 1], zero outside."""
    inside = np.abs(x) <= 1.0
    arg = np.where(inside, 1.0 - np.minimum(np.abs(x), 1.0) ** 2, 0.0)
    return np.where(inside, np.i0(_KAISER_BETA * np.sqrt(arg)) / np.i0(_KAISER_BETA), 0.0)


def resample(w: Waveform, target_rate: int) -> Waveform:
    """Band-limited windowed-sinc resampling to ``target_rate``.

    Output length is round(len * target / source). When decimating, the
    kernel is dilated so the 64 taps span 64 output-sample intervals and the
    cutoff tracks the target Nyquist.
    """
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == w.sample_rate:
        return w
    x = w.samples
    n_in = x.size
    n_out = int(round(n_in * target_rate / w.sample_rate))
    if n_in == 0 or n_out == 0:
        return Waveform(np.zeros(n_out), target_rate)

    ratio = target_rate / w.sample_rate
    scale = min(1.0, ratio)  # kernel dilation factor when decimating
    fc = _CUTOFF_FRACTION * scale  # cutoff in cycles per input sample
    half = (_RESAMPLE_TAPS / 2) / scale  # kernel half-support in input samples
    n_taps = int(2 * half) + 2
    step = w.sample_rate / target_rate

    out = np.empty(n_out)
    tap_offsets = np.arange(n_taps)
    block = max(1, (1 << 22) // n_taps)  # bound the (block, taps) work arrays
    for start in range(0, n_out, block):
        stop = min(start + block, n_out)
        pos = np.arange(start, stop) * step
        first = np.ceil(pos - half).astype(np.int64)
        idx = first[:, None] + tap_offsets[None, :]
        u = idx - pos[:, None]
        taps = 2.0 * fc * np.sinc(2.0 * fc * u) * _kaiser_window(u * scale / (_RESAMPLE_TAPS / 2))
        in_range = (idx >= 0) & (idx < n_in)
        sig = np.where(in_range, x[np.clip(idx, 0, n_in - 1)], 0.0)
        norm = taps.sum(axis=1)
        out[start:stop] = (sig * taps).sum(axis=1) / norm
    return Waveform(out, target_rate)


def rms(w: Waveform) -> float:
    """Root-mean-square amplitude; raises EmptySignal on zero-length input."""
    if len(w) == 0:
        raise EmptySignal("rms of an empty signal is undefined")
    return float(np.sqrt(np.mean(w.samples * w.samples)))


def detect_lag(ref: Waveform, test: Waveform, max_lag: float) -> int:
    """Delay of ``test`` relative to ``ref`` in samples.

    Argmax of normalized cross-correlation over lags within +-max_lag
    seconds; per-lag overlap energies are used in the normalization.
    """
    if ref.sample_rate != test.sample_rate:
        raise RateMismatch(
            f"sample rates differ: {ref.sample_rate} vs {test.sample_rate}"
        )
    if max_lag < 0:
        raise ValueError("max_lag must be non-negative")
    r, t = ref.samples, test.samples
    n, m = r.size, t.size
    if n == 0 or m == 0:
        raise EmptySignal("cannot align empty signals")
    lag_cap = int(round(max_lag * ref.sample_rate))
    lag_cap = min(lag_cap, m - 1, n - 1)

    # full correlation c[k] = sum_i t[i] * r[i - (k - (n-1))]; test delayed by
    # d relative to ref peaks at k = (n-1) + d.
    c = correlate(t, r, mode="full", method="fft")
    lags = np.arange(-lag_cap, lag_cap + 1)
    c = c[(n - 1) + lags]

    # per-lag overlap energies via cumulative sums
    r2 = np.concatenate(([0.0], np.cumsum(r * r)))
    t2 = np.concatenate(([0.0], np.cumsum(t * t)))
    r_lo = np.maximum(0, -lags)
    r_hi = np.minimum(n, m - lags)
    t_lo = r_lo + lags
    t_hi = r_hi + lags
    valid = r_hi > r_lo
    e_r = np.where(valid, r2[np.maximum(r_hi, r_lo)] - r2[r_lo], 0.0)
    e_t = np.where(valid, t2[np.maximum(t_hi, t_lo)] - t2[t_lo], 0.0)
    denom = np.sqrt(e_r * e_t)
    ncc = np.where(denom > 0, c / np.where(denom > 0, denom, 1.0), -np.inf)
    if not np.any(np.isfinite(ncc)):
        if not np.any(valid):
            raise EmptyOverlap("no overlapping support within the lag window")
        return 0  # a silent signal carries no delay information
    return int(lags[int(np.argmax(ncc))])


def align(ref: Waveform, test: Waveform, max_lag: float) -> tuple[Waveform, Waveform]:
    """Shift and truncate a (reference, test) pair to common support.

    The detected lag is the argmax of normalized cross-correlation within
    +-max_lag seconds; equal-length waveforms are returned.
    """
    lag = detect_lag(ref, test, max_lag)
    r, t = ref.samples, test.samples
    if lag >= 0:
        length = min(r.size, t.size - lag)
        if length <= 0:
            raise EmptyOverlap(f"lag {lag} leaves no common support")
        r_out, t_out = r[:length], t[lag:lag + length]
    else:
        length = min(r.size + lag, t.size)
        if length <= 0:
            raise EmptyOverlap(f"lag {lag} leaves no common support")
        r_out, t_out = r[-lag:-lag + length], t[:length]
    return ref.replace_samples(r_out), test.replace_samples(t_out)
