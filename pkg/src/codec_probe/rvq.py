"""Self-contained residual vector quantization codec.

The latent is the raw windowed frame (the analysis transform is framing, the
synthesis transform is its inverse), so the codec is dependency-free and its
bitrate/fidelity trade-off is exactly (sample_rate / frame_size) * k *
log2(C) bits per second for k active stages.

Training runs one k-means per stage on the running residuals. Three
structural rules make the advertised invariants hold by construction rather
than statistically:

* each stage owns one band of an orthonormal DCT split of the frame space
  (low frequencies first) and learns its entries inside that band; because
  the bands are mutually orthogonal, later-stage corrections can never move
  a reconstruction point across an earlier stage's Voronoi boundary, so
  re-encoding a decoded signal reproduces its codes exactly;
* the first k-means++ candidate of every stage is the residual mean, so each
  stage's aggregate training residual energy cannot exceed its input energy;
* stages after the first keep entry 0 frozen at the zero vector, so per-frame
  residual energy is non-increasing in the stage count for any input.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np

from .audio import Waveform
from .errors import (
    DegenerateCorpus,
    InsufficientData,
    ModelMismatch,
    RateMismatch,
    StageOutOfRange,
)

MAGIC = b"RVQM"
FORMAT_VERSION = 1

KMEANS_MAX_ITERS = 50
KMEANS_REL_TOL = 1e-4
MIN_FRAMES_PER_ENTRY = 10


@dataclass(frozen=True)
class RvqModel:
    """Framing transform plus K residual codebooks of C entries each."""

    frame_size: int
    sample_rate: int
    codebooks: np.ndarray  # (K, C, frame_size)
    window: np.ndarray  # (frame_size,) analysis/synthesis weights
    seed: int
    training_stats: np.ndarray  # (K+1,) mean residual energy, raw first

    def __post_init__(self):
        cb = np.ascontiguousarray(self.codebooks, dtype=np.float64)
        if cb.ndim != 3 or cb.shape[2] != self.frame_size:
            raise ValueError("codebooks must have shape (K, C, frame_size)")
        if not np.all(np.isfinite(cb)):
            raise ValueError("codebook entries must be finite")
        win = np.ascontiguousarray(self.window, dtype=np.float64)
        cb.setflags(write=False)
        win.setflags(write=False)
        object.__setattr__(self, "codebooks", cb)
        object.__setattr__(self, "window", win)
        object.__setattr__(
            self, "training_stats",
            np.asarray(self.training_stats, dtype=np.float64))

    @property
    def stages(self) -> int:
        return self.codebooks.shape[0]

    @property
    def entries(self) -> int:
        return self.codebooks.shape[1]

    @property
    def hop(self) -> int:
        # non-overlapping frames: hop equals frame_size
        return self.frame_size

    @property
    def frame_rate(self) -> float:
        return self.sample_rate / self.frame_size

    @property
    def model_id(self) -> str:
        digest = hashlib.sha256()
        digest.update(struct.pack("<IIII", self.frame_size, self.sample_rate,
                                  self.stages, self.entries))
        digest.update(self.codebooks.tobytes())
        digest.update(self.window.tobytes())
        return digest.hexdigest()[:16]


@dataclass(frozen=True)
class CodeSequence:
    """Quantizer output: one index per (frame, stage)."""

    indices: np.ndarray  # (frame_count, stages_used) int32
    stages_used: int
    sample_count: int  # original length before padding
    model_id: str

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int32)
        if idx.ndim != 2 or idx.shape[1] != self.stages_used:
            raise ValueError("indices must have shape (frame_count, stages_used)")
        object.__setattr__(self, "indices", idx)

    @property
    def frame_count(self) -> int:
        return self.indices.shape[0]


def _sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, (n_points, n_centers).

    Computed as direct differences (not the expanded dot-product form) so
    nearest-neighbor decisions are bitwise stable against reference loops.
    """
    out = np.empty((points.shape[0], centers.shape[0]))
    block = max(1, (1 << 22) // max(1, centers.shape[0] * centers.shape[1]))
    for start in range(0, points.shape[0], block):
        stop = min(start + block, points.shape[0])
        diff = points[start:stop, None, :] - centers[None, :, :]
        out[start:stop] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


def _kmeans_pp_init(data, n_centers, rng, first_center):
    """k-means++ seeding with a pinned first candidate."""
    centers = np.empty((n_centers, data.shape[1]))
    centers[0] = first_center
    d2 = _sq_dists(data, centers[:1])[:, 0]
    for i in range(1, n_centers):
        total = d2.sum()
        if total <= 0.0:
            # all points coincide with chosen centers; reuse the first point
            centers[i] = data[0]
            continue
        probs = d2 / total
        choice = rng.choice(data.shape[0], p=probs)
        centers[i] = data[choice]
        d2 = np.minimum(d2, _sq_dists(data, centers[i:i + 1])[:, 0])
    return centers


def _kmeans(data, n_centers, rng, first_center, frozen_zero):
    """Lloyd iterations with farthest-point reseeding for empty clusters.

    When ``frozen_zero`` is set, entry 0 is pinned to the zero vector and
    never updated; assignments still range over all entries.
    """
    centers = _kmeans_pp_init(data, n_centers, rng, first_center)
    if frozen_zero:
        centers[0] = 0.0
    for _ in range(KMEANS_MAX_ITERS):
        assign = np.argmin(_sq_dists(data, centers), axis=1)
        new_centers = centers.copy()
        counts = np.bincount(assign, minlength=n_centers)
        for j in range(1 if frozen_zero else 0, n_centers):
            if counts[j] > 0:
                new_centers[j] = data[assign == j].mean(axis=0)
        empty = np.flatnonzero(counts == 0)
        if frozen_zero:
            empty = empty[empty != 0]
        if empty.size:
            # reseed each empty cluster from the current farthest point
            dist_to_own = _sq_dists(data, new_centers)[np.arange(data.shape[0]), assign]
            order = np.argsort(dist_to_own)[::-1]
            for rank, j in enumerate(empty):
                new_centers[j] = data[order[rank % order.size]]
        shift = np.sqrt(np.sum((new_centers - centers) ** 2))
        norm = np.sqrt(np.sum(centers ** 2))
        centers = new_centers
        if shift <= KMEANS_REL_TOL * max(norm, 1e-30):
            break
    return centers


def frame_signal(w: Waveform, frame_size: int) -> tuple[np.ndarray, int]:
    """Split into non-overlapping frames, reflect-padding the tail.

    Returns (frames, original sample count).
    """
    x = w.samples
    n = x.size
    pad = (-n) % frame_size
    if pad:
        x = np.pad(x, (0, pad), mode="reflect")
    return x.reshape(-1, frame_size), n


def dct_basis(size: int) -> np.ndarray:
    """Orthonormal DCT-II basis; column k is the k-th cosine vector."""
    n = np.arange(size)
    basis = np.cos(np.pi * (2 * n[:, None] + 1) * n[None, :] / (2 * size))
    basis *= np.sqrt(2.0 / size)
    basis[:, 0] = np.sqrt(1.0 / size)
    return basis


def stage_bands(frame_size: int, stages: int) -> list:
    """Contiguous DCT coefficient slices, one band per stage, low first.

    Band widths double stage over stage (octave-like), so each stage covers
    a comparable span of log frequency.
    """
    weights = [2 ** i for i in range(stages)]
    total = sum(weights)
    edges = [0]
    for i in range(stages - 1):
        edge = round(frame_size * sum(weights[:i + 1]) / total)
        edges.append(max(edge, edges[-1] + 1))
    edges.append(frame_size)
    return [slice(edges[i], edges[i + 1]) for i in range(stages)]


def train(corpus: list, frame_size: int, stages: int, entries: int,
          seed: int) -> RvqModel:
    """Train stagewise k-means codebooks on a corpus of waveforms.

    Stage s learns its entries inside the s-th DCT band of the frame space
    (see the module docstring), so the stages partition the spectrum from
    low to high frequencies.
    """
    if stages < 1 or entries < 2 or frame_size < stages:
        raise ValueError("need stages >= 1, entries >= 2, frame_size >= stages")
    if not corpus:
        raise InsufficientData("empty corpus")
    rate = corpus[0].sample_rate
    if any(w.sample_rate != rate for w in corpus):
        raise RateMismatch("corpus mixes sample rates")
    window = np.ones(frame_size)
    frames = np.concatenate(
        [frame_signal(w, frame_size)[0] for w in corpus], axis=0) * window
    if frames.shape[0] < MIN_FRAMES_PER_ENTRY * entries:
        raise InsufficientData(
            f"{frames.shape[0]} frames < {MIN_FRAMES_PER_ENTRY * entries} "
            f"required for {entries} entries"
        )
    if entries > 1 and np.all(frames == frames[0]):
        raise DegenerateCorpus("all frames identical")

    rng = np.random.Generator(np.random.Philox(seed))
    basis = dct_basis(frame_size)
    bands = stage_bands(frame_size, stages)
    residual = frames
    codebooks = np.empty((stages, entries, frame_size))
    stats = [float(np.mean(np.sum(residual * residual, axis=1)))]
    for s in range(stages):
        band = basis[:, bands[s]]
        data = (residual @ band) @ band.T
        mean = data.mean(axis=0)
        centers = _kmeans(data, entries, rng, first_center=mean,
                          frozen_zero=(s > 0))
        codebooks[s] = centers
        assign = np.argmin(_sq_dists(residual, centers), axis=1)
        residual = residual - centers[assign]
        stats.append(float(np.mean(np.sum(residual * residual, axis=1))))
    return RvqModel(frame_size=frame_size, sample_rate=rate,
                    codebooks=codebooks, window=window, seed=seed,
                    training_stats=np.asarray(stats))


def encode(model: RvqModel, w: Waveform, stages_used: int) -> CodeSequence:
    """Greedy per-frame nearest-neighbor quantization through k stages."""
    if w.sample_rate != model.sample_rate:
        raise RateMismatch(
            f"model at {model.sample_rate} Hz, input at {w.sample_rate} Hz"
        )
    if not 1 <= stages_used <= model.stages:
        raise StageOutOfRange(
            f"stages_used {stages_used} not in 1..{model.stages}")
    frames, n = frame_signal(w, model.frame_size)
    residual = frames * model.window
    indices = np.empty((frames.shape[0], stages_used), dtype=np.int32)
    for s in range(stages_used):
        # argmin takes the first occurrence: ties break to the lowest index
        assign = np.argmin(_sq_dists(residual, model.codebooks[s]), axis=1)
        indices[:, s] = assign
        residual = residual - model.codebooks[s][assign]
    return CodeSequence(indices=indices, stages_used=stages_used,
                        sample_count=n, model_id=model.model_id)


def stage_residuals(model: RvqModel, w: Waveform, stages_used: int) -> np.ndarray:
    """Per-frame residual energy after each stage, shape (frames, k+1).

    Column 0 is the pre-quantization frame energy.
    """
    frames, _ = frame_signal(w, model.frame_size)
    residual = frames * model.window
    energies = [np.sum(residual * residual, axis=1)]
    for s in range(stages_used):
        assign = np.argmin(_sq_dists(residual, model.codebooks[s]), axis=1)
        residual = residual - model.codebooks[s][assign]
        energies.append(np.sum(residual * residual, axis=1))
    return np.stack(energies, axis=1)


def decode(model: RvqModel, codes: CodeSequence) -> Waveform:
    """Sum the selected entries per frame and unframe to a waveform."""
    if codes.model_id != model.model_id:
        raise ModelMismatch(
            f"codes for model {codes.model_id}, got model {model.model_id}")
    if codes.stages_used > model.stages:
        raise StageOutOfRange(
            f"codes use {codes.stages_used} stages, model has {model.stages}")
    recon = np.zeros((codes.frame_count, model.frame_size))
    for s in range(codes.stages_used):
        recon += model.codebooks[s][codes.indices[:, s]]
    samples = (recon / model.window).reshape(-1)[:codes.sample_count]
    return Waveform(samples, model.sample_rate)


def bitrate(model: RvqModel, stages_used: int) -> float:
    """Upper-bound bitrate in bits per second for k active stages:
    frame_rate * k * log2(C)."""
    if not 1 <= stages_used <= model.stages:
        raise StageOutOfRange(
            f"stages_used {stages_used} not in 1..{model.stages}")
    return model.frame_rate * stages_used * np.log2(model.entries)


# --- serialization ---

def save_model(model: RvqModel, path) -> None:
    """Versioned little-endian binary container, 64-bit floats throughout."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIIIIq", FORMAT_VERSION, model.sample_rate,
                             model.frame_size, model.stages, model.entries,
                             model.seed))
        fh.write(struct.pack("<I", model.training_stats.size))
        fh.write(model.training_stats.astype("<f8").tobytes())
        fh.write(model.window.astype("<f8").tobytes())
        fh.write(model.codebooks.astype("<f8").tobytes())


def load_model(path) -> RvqModel:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path} is not an RVQM model file")
        version, rate, frame_size, stages, entries, seed = struct.unpack(
            "<IIIIIq", fh.read(28))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported model version {version}")
        (n_stats,) = struct.unpack("<I", fh.read(4))
        stats = np.frombuffer(fh.read(8 * n_stats), dtype="<f8")
        window = np.frombuffer(fh.read(8 * frame_size), dtype="<f8")
        codebooks = np.frombuffer(
            fh.read(8 * stages * entries * frame_size), dtype="<f8",
        ).reshape(stages, entries, frame_size)
    return RvqModel(frame_size=frame_size, sample_rate=rate,
                    codebooks=codebooks, window=window, seed=seed,
                    training_stats=stats)


def save_model_json(model: RvqModel, path) -> None:
    """Human-inspectable JSON twin of the binary container."""
    doc = {
        "format": "rvqm-json",
        "version": FORMAT_VERSION,
        "sample_rate": model.sample_rate,
        "frame_size": model.frame_size,
        "stages": model.stages,
        "entries": model.entries,
        "seed": model.seed,
        "model_id": model.model_id,
        "training_stats": model.training_stats.tolist(),
        "window": model.window.tolist(),
        "codebooks": model.codebooks.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)


def as_codec(model: RvqModel, name: str = "rvq"):
    """Register the model as a builtin codec with one mode per stage count."""
    from .codecs import CodecDescriptor, CodecUnderTest

    modes = tuple(
        (f"k{k}", bitrate(model, k)) for k in range(1, model.stages + 1))
    desc = CodecDescriptor(
        name=name, kind="builtin", native_rate=model.sample_rate,
        bitrate_modes=modes, frame_samples=model.frame_size,
    )

    def fn(w: Waveform, mode: str) -> Waveform:
        k = int(mode[1:])
        return decode(model, encode(model, w, k))

    return CodecUnderTest(desc, fn)
