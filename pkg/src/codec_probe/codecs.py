"""Black-box codec abstraction, builtin reference codecs, and the
file-based subprocess protocol for external codecs.

External contract: the command template receives {input} (absolute path of a
float-32 mono WAV at the codec's native rate), {output} (absolute path the
command must create, same format and rate), and {mode}; the environment also
carries CODEC_PROBE_MODE. Exit 0 on success; stderr is captured.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import uuid
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .audio import Waveform, read_wav, write_wav
from .errors import (
    CodecCrashed,
    MalformedOutput,
    NonFiniteOutput,
    RateMismatch,
    SpawnFailure,
    Timeout,
)

TMPDIR_ENV = "CODEC_PROBE_TMPDIR"
MODE_ENV = "CODEC_PROBE_MODE"
DEFAULT_TIMEOUT = 120.0


@dataclass(frozen=True)
class CodecDescriptor:
    """Declared identity of a codec under test.

    ``bitrate_modes`` maps mode ids to bits per second; ``frame_samples`` is
    the allowed output-length drift (one frame) before output is rejected.
    """

    name: str
    kind: str  # "builtin" | "external"
    native_rate: int
    bitrate_modes: tuple = ()
    command_template: Optional[str] = None
    timeout: float = DEFAULT_TIMEOUT
    frame_samples: int = 1

    def __post_init__(self):
        if self.kind not in ("builtin", "external"):
            raise ValueError(f"kind must be builtin or external, got {self.kind!r}")
        if self.native_rate <= 0:
            raise ValueError("native_rate must be positive")
        if not self.bitrate_modes:
            raise ValueError("bitrate_modes must be non-empty")
        if self.kind == "external" and not self.command_template:
            raise ValueError("external codec needs a command_template")

    @property
    def mode_ids(self) -> list:
        return [mode_id for mode_id, _ in self.bitrate_modes]

    def bits_per_second(self, mode: str) -> float:
        for mode_id, bps in self.bitrate_modes:
            if mode_id == mode:
                return bps
        raise KeyError(f"{self.name} has no mode {mode!r}")


class CodecUnderTest:
    """A descriptor plus the transform that realizes it.

    ``fn`` (builtins only) maps (Waveform, mode_id) -> Waveform and must be
    stateless; externals are invoked one process per call.
    """

    def __init__(self, descriptor: CodecDescriptor,
                 fn: Optional[Callable[[Waveform, str], Waveform]] = None):
        if descriptor.kind == "builtin" and fn is None:
            raise ValueError("builtin codec needs an implementation")
        self.descriptor = descriptor
        self._fn = fn

    @property
    def name(self) -> str:
        return self.descriptor.name

    def process(self, w: Waveform, mode: Optional[str] = None) -> Waveform:
        """Run the full encode-decode round trip on one waveform."""
        d = self.descriptor
        if mode is None:
            if len(d.bitrate_modes) != 1:
                raise ValueError(f"{d.name} has multiple modes; pick one of {d.mode_ids}")
            mode = d.bitrate_modes[0][0]
        if mode not in d.mode_ids:
            raise ValueError(f"{d.name} has no mode {mode!r}")
        if w.sample_rate != d.native_rate:
            raise RateMismatch(
                f"{d.name} expects {d.native_rate} Hz, got {w.sample_rate} Hz"
            )
        if d.kind == "builtin":
            out = self._fn(w, mode)
        else:
            out = invoke_external(d, w, mode)
        if out.sample_rate != d.native_rate:
            raise MalformedOutput(
                f"{d.name} returned {out.sample_rate} Hz instead of {d.native_rate} Hz"
            )
        if abs(len(out) - len(w)) > d.frame_samples:
            raise MalformedOutput(
                f"{d.name} returned {len(out)} samples for {len(w)} input samples "
                f"(tolerance +-{d.frame_samples})"
            )
        return out


def invoke_external(descriptor: CodecDescriptor, w: Waveform, mode: str) -> Waveform:
    """Run one external codec call through the WAV-file wire protocol."""
    tmp_root = os.environ.get(TMPDIR_ENV) or tempfile.gettempdir()
    os.makedirs(tmp_root, exist_ok=True)
    token = uuid.uuid4().hex
    in_path = os.path.join(tmp_root, f"probe-{token}-in.wav")
    out_path = os.path.join(tmp_root, f"probe-{token}-out.wav")
    try:
        write_wav(w, in_path, "float32")
        argv = [
            arg.format(input=in_path, output=out_path, mode=mode)
            for arg in shlex.split(descriptor.command_template)
        ]
        env = dict(os.environ, **{MODE_ENV: mode})
        try:
            proc = subprocess.run(
                argv, capture_output=True, timeout=descriptor.timeout, env=env,
            )
        except FileNotFoundError as exc:
            raise SpawnFailure(f"cannot spawn {argv[0]!r}: {exc}") from exc
        except subprocess.TimeoutExpired as exc:
            raise Timeout(
                f"{descriptor.name} exceeded {descriptor.timeout}s on mode {mode}"
            ) from exc
        if proc.returncode != 0:
            stderr = proc.stderr.decode("utf-8", "replace")
            raise CodecCrashed(
                f"{descriptor.name} exited {proc.returncode}: {stderr.strip()[:500]}",
                stderr=stderr,
            )
        if not os.path.exists(out_path):
            raise MalformedOutput(f"{descriptor.name} produced no output file")
        try:
            out = read_wav(out_path)
        except ValueError as exc:  # non-finite samples in the output file
            raise NonFiniteOutput(f"{descriptor.name}: {exc}") from exc
        except Exception as exc:
            raise MalformedOutput(f"{descriptor.name}: unreadable output ({exc})") from exc
        return out
    finally:
        for path in (in_path, out_path):
            try:
                os.remove(path)
            except OSError:
                pass


# --- builtin reference codecs ---

def _identity(w: Waveform, mode: str) -> Waveform:
    return w


def _make_gain(g: float):
    def fn(w: Waveform, mode: str) -> Waveform:
        return w.replace_samples(g * w.samples)
    return fn


def _make_hardclip(threshold: float):
    def fn(w: Waveform, mode: str) -> Waveform:
        return w.replace_samples(np.clip(w.samples, -threshold, threshold))
    return fn


def mulaw_round_trip(x: np.ndarray, bits: int, mu: float = 255.0) -> np.ndarray:
    """Compress-quantize-expand one buffer through a mid-tread mu-law ladder.

    2^(bits-1)-1 steps per polarity plus an exact zero codeword; quantized
    outputs are fixed points of the round trip.
    """
    levels = (1 << (bits - 1)) - 1
    clipped = np.clip(x, -1.0, 1.0)
    compressed = np.sign(clipped) * np.log1p(mu * np.abs(clipped)) / np.log1p(mu)
    quantized = np.round(compressed * levels) / levels
    return np.sign(quantized) * (np.expm1(np.abs(quantized) * np.log1p(mu))) / mu


def _make_mulaw(bits: int):
    def fn(w: Waveform, mode: str) -> Waveform:
        return w.replace_samples(mulaw_round_trip(w.samples, bits))
    return fn


def _builtin(name, native_rate, bps, fn, frame_samples=0):
    desc = CodecDescriptor(
        name=name, kind="builtin", native_rate=native_rate,
        bitrate_modes=(("default", float(bps)),), frame_samples=frame_samples,
    )
    return CodecUnderTest(desc, fn)


def repeatability_check(codec: CodecUnderTest, duration: float = 0.2,
                        seed: int = 0) -> bool:
    """Process one deterministic probe twice and compare bit-for-bit.

    Builtins are stateless by construction; externals get spot-checked so
    non-deterministic codecs can be flagged in reports.
    """
    from .perturb import gen_white_noise

    probe = gen_white_noise(duration, codec.descriptor.native_rate, seed)
    mode = codec.descriptor.bitrate_modes[0][0]
    first = codec.process(probe, mode)
    second = codec.process(probe, mode)
    return bool(np.array_equal(first.samples, second.samples))


def builtin_catalog(native_rate: int = 16000, rvq_model=None) -> dict:
    """Reference codecs spanning the linearity property space.

    identity (perfectly linear), gain-0.5 (linear, non-unity), mulaw-4/6/8
    (nonlinear near the quantization floor), hardclip-0.1/0.5 (grossly
    non-homogeneous), plus the trained RVQ codec when a model is supplied.
    """
    float_bps = 32 * native_rate  # float passthrough accounting
    catalog = {
        "identity": _builtin("identity", native_rate, float_bps, _identity),
        "gain-0.5": _builtin("gain-0.5", native_rate, float_bps, _make_gain(0.5)),
    }
    for bits in (4, 6, 8):
        catalog[f"mulaw-{bits}"] = _builtin(
            f"mulaw-{bits}", native_rate, bits * native_rate, _make_mulaw(bits))
    for thr in (0.1, 0.5):
        catalog[f"hardclip-{thr}"] = _builtin(
            f"hardclip-{thr}", native_rate, float_bps, _make_hardclip(thr))
    if rvq_model is not None:
        from .rvq import as_codec
        codec = as_codec(rvq_model)
        catalog[codec.name] = codec
    return catalog
