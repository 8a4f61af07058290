"""Acceptance suite: one test per release criterion, each printing a
pass/fail line. Tolerances are pinned here, not configurable.

Run with `pytest tests/test_acceptance.py -v -s`.
"""

import time

import numpy as np
import pytest

from oracles import oracle_edit_distance, oracle_eer, reference_mel_distance

from codec_probe import rvq
from codec_probe.analysis import (
    GainLevel,
    ProbeSettings,
    additivity_probe,
    default_probe_freqs,
    frequency_response,
    goertzel_magnitude,
    homogeneity_probe,
)
from codec_probe.audio import Waveform
from codec_probe.codecs import builtin_catalog
from codec_probe.harness import ExperimentConfig, emit_reports, run_grid
from codec_probe.metrics import MelConfig, ScoreRecord, TranscriptPair, eer, mel_distance, wer
from codec_probe.perturb import (
    Condition,
    RoomImpulseResponse,
    gen_white_noise,
    measure_drr,
    mix_at_snr,
    scale_rir_to_drr,
)
from codec_probe.smoke import DEFAULT_SEED, speech_like, synthetic_rir
from conftest import SMOKE_RVQ

RATE = 16000
SNR_GRID = (-10.0, -5.0, 0.0, 5.0, 10.0, 20.0, 30.0)
DRR_GRID = (-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0)
GAIN_LADDER = (-40.0, -20.0, -12.0, -6.0, 0.0, 6.0, 12.0)


def report(name, ok):
    print(f"{'PASS' if ok else 'FAIL'}: {name}")
    assert ok, name


def test_identity_zero_suite(smoke_dir, smoke_waves):
    """Identity codec: every analysis path must report exactly zero
    deviation, in under 60 seconds single-threaded."""
    start = time.monotonic()
    cat = builtin_catalog(RATE)
    identity = cat["identity"]

    config = ExperimentConfig(
        manifest=str(smoke_dir / "manifest.csv"),
        codecs=[identity],
        conditions=[Condition("clean")],
        parallelism=1,
    )
    grid = run_grid(config)
    grid_zero = all(r.metrics["mel_distance"] == 0.0
                    for r in grid if r.codec == "identity")

    pairs = [(smoke_waves[2 * i], smoke_waves[2 * i + 1]) for i in range(5)]
    additivity = additivity_probe(identity, "default", pairs)
    additivity_zero = additivity.additivity_distances == (0.0,) * 5

    homogeneity = homogeneity_probe(
        identity, "default", smoke_waves, [GainLevel(g) for g in GAIN_LADDER])
    homogeneity_zero = all(v == 0.0 for _, v in homogeneity.homogeneity)

    curve = frequency_response(identity, "default", default_probe_freqs(RATE, 64))
    response_flat = float(np.max(np.abs(curve.gains_db()))) <= 0.01

    elapsed = time.monotonic() - start
    report("identity zero suite: clean-grid mel distance exactly 0", grid_zero)
    report("identity zero suite: additivity residual exactly 0", additivity_zero)
    report("identity zero suite: homogeneity residual exactly 0 at all gains",
           homogeneity_zero)
    report("identity zero suite: frequency response flat within 0.01 dB",
           response_flat)
    report(f"identity zero suite: runtime {elapsed:.1f}s < 60s single-threaded",
           elapsed < 60.0)


def test_degradation_exactness(rng):
    speech = speech_like(DEFAULT_SEED + 900)
    noise = gen_white_noise(1.5, RATE, 4)
    worst_snr = 0.0
    for target in SNR_GRID:
        mixed = mix_at_snr(speech, noise, target)
        noise_part = mixed.samples - speech.samples
        measured = 10 * np.log10(np.mean(speech.samples ** 2)
                                 / np.mean(noise_part ** 2))
        worst_snr = max(worst_snr, abs(measured - target))
    report(f"re-measured SNR within 1e-6 dB over {SNR_GRID} "
           f"(worst {worst_snr:.2e})", worst_snr <= 1e-6)

    rir = RoomImpulseResponse.from_waveform(synthetic_rir(DEFAULT_SEED + 2000))
    worst_drr = 0.0
    for target in DRR_GRID:
        measured = measure_drr(scale_rir_to_drr(rir, target))
        worst_drr = max(worst_drr, abs(measured - target))
    report(f"re-measured DRR within 1e-6 dB over {DRR_GRID} "
           f"(worst {worst_drr:.2e})", worst_drr <= 1e-6)


def test_bitrate_formula_cross_checks():
    # 24 kHz, 320-sample frames (75 Hz), 1024 entries, one stage: 750 bps
    cb = np.zeros((8, 1024, 320))
    encodec_like = rvq.RvqModel(frame_size=320, sample_rate=24000, codebooks=cb,
                                window=np.ones(320), seed=0,
                                training_stats=np.zeros(9))
    # 16 kHz, 320-sample frames (50 Hz), 1024 entries, eight stages: 4000 bps
    st_like = rvq.RvqModel(frame_size=320, sample_rate=16000, codebooks=cb,
                           window=np.ones(320), seed=0,
                           training_stats=np.zeros(9))
    ok = (rvq.bitrate(encodec_like, 1) == 750.0
          and rvq.bitrate(st_like, 8) == 4000.0)
    report("bitrate formula: 75 Hz x 1 x log2(1024) = 750 bps and "
           "50 Hz x 8 x log2(1024) = 4000 bps, exact", ok)


def test_rvq_properties(smoke_model, smoke_waves, heldout_waves, tmp_path):
    stages = smoke_model.stages

    monotone = True
    for w in heldout_waves:
        energies = rvq.stage_residuals(smoke_model, w, stages)
        monotone &= bool(np.all(np.diff(energies[:, 1:], axis=1) <= 0.0))
    report("rvq: per-frame residual energy non-increasing in k, every frame",
           monotone)

    idempotent = True
    for w in heldout_waves:
        for k in range(1, stages + 1):
            codes = rvq.encode(smoke_model, w, k)
            again = rvq.encode(smoke_model, rvq.decode(smoke_model, codes), k)
            idempotent &= bool(np.array_equal(codes.indices, again.indices))
    report("rvq: encode-decode-encode reproduces codes bit-exactly", idempotent)

    mels = np.array([
        [mel_distance(w, rvq.decode(smoke_model, rvq.encode(smoke_model, w, k)))
         for k in range(1, stages + 1)]
        for w in heldout_waves
    ])
    frac = float((np.diff(mels, axis=1) <= 1e-12).mean())
    report(f"rvq: held-out mel distance non-increasing in k for "
           f"{frac:.0%} >= 90% of steps (20 utterances)", frac >= 0.9)

    again = rvq.train(smoke_waves, **SMOKE_RVQ)
    rvq.save_model(smoke_model, tmp_path / "a.rvqm")
    rvq.save_model(again, tmp_path / "b.rvqm")
    identical = (tmp_path / "a.rvqm").read_bytes() == (tmp_path / "b.rvqm").read_bytes()
    report("rvq: training twice with one seed yields byte-identical model files",
           identical)


def test_metric_oracles(rng):
    vocab = [f"w{i}" for i in range(8)]
    wer_exact = True
    for _ in range(1000):
        ref = tuple(rng.choice(vocab, size=rng.integers(1, 12)))
        hyp = tuple(rng.choice(vocab, size=rng.integers(0, 12)))
        got = wer([TranscriptPair("u", ref, hyp)])
        want = 100.0 * oracle_edit_distance(ref, hyp) / len(ref)
        wer_exact &= got == want
    report("wer matches brute-force DP oracle on 1000 random instances, exact",
           wer_exact)

    eer_worst = 0.0
    for _ in range(1000):
        n_g = int(rng.integers(2, 30))
        n_i = int(rng.integers(2, 30))
        genuine = (rng.standard_normal(n_g) + rng.uniform(0, 2)).tolist()
        impostor = rng.standard_normal(n_i).tolist()
        records = [ScoreRecord(f"g{i}", s, "genuine") for i, s in enumerate(genuine)]
        records += [ScoreRecord(f"i{i}", s, "impostor") for i, s in enumerate(impostor)]
        eer_worst = max(eer_worst, abs(eer(records) - oracle_eer(genuine, impostor)))
    report(f"eer matches exhaustive threshold-sweep oracle on 1000 random "
           f"score sets (worst {eer_worst:.2e} <= 1e-9)", eer_worst <= 1e-9)

    cfg = MelConfig()
    mel_worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1500, 12000))
        a = rng.standard_normal(n) * 0.3
        b = a + rng.standard_normal(n) * rng.uniform(0.01, 0.2)
        got = mel_distance(Waveform(a, RATE), Waveform(b, RATE), cfg)
        want = reference_mel_distance(a, b, cfg, RATE)
        mel_worst = max(mel_worst, abs(got - want))
    report(f"mel distance matches independent spectrogram reference on 50 "
           f"random pairs (worst {mel_worst:.2e} <= 1e-6)", mel_worst <= 1e-6)


def test_reference_codec_linearity_analogues(smoke_model, smoke_waves):
    cat = builtin_catalog(RATE, rvq_model=smoke_model)
    pairs = [(smoke_waves[2 * i], smoke_waves[2 * i + 1]) for i in range(5)]

    ident = additivity_probe(cat["identity"], "default", pairs).additivity_mean
    clip = additivity_probe(cat["hardclip-0.1"], "default", pairs).additivity_mean
    report(f"hardclip additivity residual {clip:.3f} strictly above identity "
           f"{ident:.3f}", clip > ident)

    gains = [GainLevel(-40.0), GainLevel(0.0)]
    hom = dict(homogeneity_probe(cat["mulaw-8"], "default", smoke_waves,
                                 gains).homogeneity)
    report(f"mulaw-8 homogeneity residual at -40 dB ({hom[-40.0]:.4f}) exceeds "
           f"its 0 dB residual ({hom[0.0]:.4f})", hom[-40.0] > hom[0.0])

    k_hi = f"k{smoke_model.stages}"
    rvq_codec = cat["rvq"]
    lo = additivity_probe(rvq_codec, "k1", pairs).additivity_mean
    hi = additivity_probe(rvq_codec, k_hi, pairs).additivity_mean
    report(f"rvq additivity mean at {k_hi} ({hi:.3f}) <= at k1 ({lo:.3f})",
           hi <= lo)


def test_frequency_response_oracles(rng):
    cat = builtin_catalog(RATE)
    freqs = default_probe_freqs(RATE, 64)

    ident = frequency_response(cat["identity"], "default", freqs)
    ident_dev = float(np.max(np.abs(ident.gains_db())))
    report(f"identity response flat within 0.01 dB at 64 probes "
           f"(worst {ident_dev:.2e})", ident_dev <= 0.01)

    half = frequency_response(cat["gain-0.5"], "default", freqs)
    half_dev = float(np.max(np.abs(half.gains_db() - (-6.02))))
    report(f"0.5-gain response at -6.02 +- 0.05 dB at all 64 probes "
           f"(worst dev {half_dev:.3f})", half_dev <= 0.05)

    n = 4096
    x = rng.standard_normal(n)
    w = Waveform(x, RATE)
    spec = np.abs(np.fft.rfft(x))
    worst = 0.0
    for bin_idx in (3, 17, 129, 800, 1500):
        got = goertzel_magnitude(w, bin_idx * RATE / n)
        worst = max(worst, abs(got / spec[bin_idx] - 1.0))
    report(f"goertzel matches FFT bins within 1% (worst {worst:.2e})",
           worst <= 0.01)


def test_grid_determinism(smoke_dir, smoke_model, tmp_path):
    cat = builtin_catalog(RATE, rvq_model=smoke_model)

    def run(out, jobs):
        config = ExperimentConfig(
            manifest=str(smoke_dir / "manifest.csv"),
            codecs=[cat["identity"], cat["mulaw-8"], cat["hardclip-0.5"],
                    cat["rvq"]],
            conditions=[
                Condition("clean"),
                Condition("ambient", level_db=5.0,
                          noise_source=str(smoke_dir / "noise.wav")),
                Condition("white", level_db=0.0, seed=DEFAULT_SEED),
                Condition("reverb", level_db=0.0,
                          noise_source=str(smoke_dir / "rir.wav")),
            ],
            seed=DEFAULT_SEED, parallelism=jobs,
        )
        emit_reports(out, config, run_grid(config))
        return ((out / "grid.csv").read_bytes(),
                (out / "report.json").read_bytes())

    first = run(tmp_path / "run1", 1)
    second = run(tmp_path / "run2", 1)
    threaded = run(tmp_path / "run4", 4)
    report("full smoke grid: two single-threaded runs byte-identical",
           first == second)
    report("full smoke grid: 4-worker run byte-identical to single-threaded",
           first == threaded)
