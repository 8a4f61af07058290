"""Experiment orchestration: dataset manifests, the condition x codec x
bitrate evaluation grid with its Oracle topline, linearity and
frequency-response runs, and report emission.

All intrusive metrics compare against the clean reference, including under
degradation; the Oracle row scores the degraded-but-unencoded signal the same
way, so it upper-bounds what any codec can achieve in that condition.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import rvq
from .audio import Waveform, align, read_wav, read_wav_header, resample
from .analysis import (
    DEFAULT_PROBE_AMPLITUDES,
    FrequencyResponseCurve,
    GainLevel,
    LinearityReport,
    ProbeSettings,
    additivity_probe,
    default_probe_freqs,
    frequency_response,
    homogeneity_probe,
)
from .codecs import CodecDescriptor, CodecUnderTest, builtin_catalog, repeatability_check
from .errors import (
    CodecProbeError,
    ConfigInvalid,
    IoFailure,
    MalformedManifest,
    MissingAudio,
)
from .metrics import (
    MelConfig,
    TranscriptPair,
    accuracy,
    eer,
    mel_distance,
    read_labels,
    read_scores,
    read_transcripts,
    wer,
)
from .perturb import Condition, RoomImpulseResponse, apply_condition

ORACLE_CODEC = "oracle"
ORACLE_MODE = "-"
CORPUS_ROW_ID = "corpus"  # utterance_id used for corpus-level joined metrics

GRID_HEADER = ("utterance_id", "codec", "mode", "condition_family",
               "level_db", "metric", "value", "status")
LINEARITY_HEADER = ("codec", "mode", "kind", "param", "value")
FREQRESP_HEADER = ("codec", "mode", "amplitude", "freq_hz", "gain_db")


@dataclass(frozen=True)
class ManifestEntry:
    utterance_id: str
    wav_path: str
    transcript: Optional[str] = None


@dataclass(frozen=True)
class ExternalScores:
    """Externally produced downstream outputs for one (codec, mode, condition)."""

    codec: str
    mode: str
    family: str
    level_db: Optional[float] = None
    asr_hypotheses: Optional[str] = None
    asv_scores: Optional[str] = None
    ser_reference: Optional[str] = None
    ser_hypotheses: Optional[str] = None


@dataclass
class ExperimentConfig:
    manifest: str
    codecs: list
    conditions: list
    metric_rate: int = 16000
    mel: MelConfig = field(default_factory=MelConfig)
    align_max_lag: float = 0.1
    seed: int = 0
    parallelism: int = 1
    max_utterances: Optional[int] = None
    pair_count: int = 5
    gains_db: Sequence[float] = (-40.0, -20.0, -12.0, -6.0, 0.0, 6.0, 12.0)
    probe_points: int = 64
    probe_amplitudes: Sequence[float] = DEFAULT_PROBE_AMPLITUDES
    probe_duration: float = 1.0
    probe_fade: float = 0.010
    external_scores: list = field(default_factory=list)

    def validate(self):
        if not self.codecs:
            raise ConfigInvalid("at least one codec is required")
        if not any(c.family == "clean" for c in self.conditions):
            raise ConfigInvalid("conditions must include clean")
        if not os.path.isfile(self.manifest):
            raise ConfigInvalid(f"manifest not found: {self.manifest}")
        if self.parallelism < 1:
            raise ConfigInvalid("parallelism must be >= 1")


@dataclass(frozen=True)
class MetricReport:
    utterance_id: str
    codec: str
    mode: str
    condition: Condition
    metrics: dict
    status: str = "ok"  # "ok" | "codec_error" | "skipped"
    error: str = ""


def load_manifest(path) -> list:
    """Validated manifest rows; every WAV must parse at header level."""
    entries = []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise MalformedManifest(f"cannot open manifest {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or \
                not {"utterance_id", "wav_path"} <= set(reader.fieldnames):
            raise MalformedManifest(
                f"{path} must have a header with utterance_id,wav_path[,transcript]")
        base = os.path.dirname(os.path.abspath(path))
        for line_no, row in enumerate(reader, start=2):
            utt_id = (row.get("utterance_id") or "").strip()
            wav = (row.get("wav_path") or "").strip()
            if not utt_id or not wav:
                raise MalformedManifest(f"{path}:{line_no}: missing id or path")
            wav_abs = wav if os.path.isabs(wav) else os.path.join(base, wav)
            try:
                read_wav_header(wav_abs)
            except CodecProbeError as exc:
                raise MissingAudio(f"{path}:{line_no} ({utt_id}): {exc}") from exc
            entries.append(ManifestEntry(utt_id, wav_abs, row.get("transcript")))
    if not entries:
        raise MalformedManifest(f"{path} lists no utterances")
    return entries


def _select_utterances(entries, config):
    """Seeded subset selection, stable in manifest order."""
    if config.max_utterances is None or config.max_utterances >= len(entries):
        return list(entries)
    rng = np.random.Generator(np.random.Philox(config.seed))
    chosen = sorted(rng.permutation(len(entries))[:config.max_utterances])
    return [entries[i] for i in chosen]


def _load_condition_assets(conditions, base_dir):
    """Read each condition's noise clip / RIR once, keyed by source path."""
    assets = {}
    for cond in conditions:
        if cond.noise_source and cond.noise_source not in assets:
            path = cond.noise_source
            if not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            assets[cond.noise_source] = read_wav(path)
    return assets


def _degraded_signal(clean, cond, assets):
    if cond.family == "ambient":
        noise = assets[cond.noise_source]
        if noise.sample_rate != clean.sample_rate:
            noise = resample(noise, clean.sample_rate)
        return apply_condition(clean, cond, noise=noise)
    if cond.family == "reverb":
        rir_wave = assets[cond.noise_source]
        if rir_wave.sample_rate != clean.sample_rate:
            rir_wave = resample(rir_wave, clean.sample_rate)
        return apply_condition(clean, cond, rir=RoomImpulseResponse.from_waveform(rir_wave))
    return apply_condition(clean, cond)


def _grid_metrics(clean_ref, processed, config):
    """Score one processed signal against the clean reference."""
    at_rate = resample(processed, config.metric_rate)
    ref_al, test_al = align(clean_ref, at_rate, config.align_max_lag)
    return {"mel_distance": mel_distance(ref_al, test_al, config.mel)}


def run_grid(config: ExperimentConfig) -> list:
    """Evaluate every (utterance, condition, codec, mode) cell plus the
    Oracle topline; per-row failures are recorded, never fatal."""
    config.validate()
    entries = _select_utterances(load_manifest(config.manifest), config)
    assets = _load_condition_assets(config.conditions, os.path.dirname(config.manifest))
    codecs = list(config.codecs)

    cleans = {e.utterance_id: read_wav(e.wav_path) for e in entries}
    refs = {uid: resample(w, config.metric_rate) for uid, w in cleans.items()}

    def degrade_job(item):
        entry, cond = item
        return (entry.utterance_id, cond), _degraded_signal(
            cleans[entry.utterance_id], cond, assets)

    degrade_items = [(e, c) for e in entries for c in config.conditions]
    degraded = {}
    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        for key, wave in pool.map(degrade_job, degrade_items):
            degraded[key] = wave

    jobs = []
    for entry in entries:
        for cond in config.conditions:
            jobs.append((entry.utterance_id, cond, ORACLE_CODEC, ORACLE_MODE, None))
            for codec in codecs:
                for mode in codec.descriptor.mode_ids:
                    jobs.append((entry.utterance_id, cond, codec.name, mode, codec))

    def run_job(job):
        utt_id, cond, codec_name, mode, codec = job
        signal = degraded[(utt_id, cond)]
        try:
            if codec is None:
                processed = signal
            else:
                native = resample(signal, codec.descriptor.native_rate)
                processed = codec.process(native, mode)
            metrics = _grid_metrics(refs[utt_id], processed, config)
            return MetricReport(utt_id, codec_name, mode, cond, metrics)
        except CodecProbeError as exc:
            return MetricReport(utt_id, codec_name, mode, cond, {},
                                status="codec_error", error=type(exc).__name__)

    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        reports = list(pool.map(run_job, jobs))

    reports.extend(_external_determinism_rows(config))
    reports.extend(_join_external_scores(config, entries))
    return reports


def _external_determinism_rows(config):
    """Spot-check every external codec for repeatable output; the flag lands
    in the grid as a corpus-level row (1.0 deterministic, 0.0 not)."""
    rows = []
    clean = next(c for c in config.conditions if c.family == "clean")
    for codec in config.codecs:
        if codec.descriptor.kind != "external":
            continue
        mode = codec.descriptor.bitrate_modes[0][0]
        try:
            stable = repeatability_check(codec, seed=config.seed)
            rows.append(MetricReport(
                CORPUS_ROW_ID, codec.name, mode, clean,
                {"external_deterministic": 1.0 if stable else 0.0}))
        except CodecProbeError as exc:
            rows.append(MetricReport(
                CORPUS_ROW_ID, codec.name, mode, clean, {},
                status="skipped", error=type(exc).__name__))
    return rows


def _join_external_scores(config, entries):
    """Corpus-level WER/EER/ACC rows from externally produced files."""
    reports = []
    ref_transcripts = {
        e.utterance_id: tuple(e.transcript.split())
        for e in entries if e.transcript
    }
    for ext in config.external_scores:
        cond = next(
            (c for c in config.conditions
             if c.family == ext.family and c.level_db == ext.level_db), None)
        if cond is None:
            reports.append(MetricReport(
                CORPUS_ROW_ID, ext.codec, ext.mode,
                Condition("clean"), {}, status="skipped",
                error="ConditionNotInGrid"))
            continue
        metrics = {}
        try:
            if ext.asr_hypotheses:
                hyp = read_transcripts(ext.asr_hypotheses)
                pairs = [TranscriptPair(uid, ref_transcripts[uid], hyp.get(uid, ()))
                         for uid in sorted(ref_transcripts) if uid in hyp]
                if pairs:
                    metrics["wer"] = wer(pairs)
            if ext.asv_scores:
                metrics["eer"] = eer(read_scores(ext.asv_scores))
            if ext.ser_reference and ext.ser_hypotheses:
                metrics["acc"] = accuracy(read_labels(ext.ser_reference),
                                          read_labels(ext.ser_hypotheses))
            reports.append(MetricReport(CORPUS_ROW_ID, ext.codec, ext.mode,
                                        cond, metrics))
        except (CodecProbeError, OSError, KeyError, ValueError) as exc:
            reports.append(MetricReport(CORPUS_ROW_ID, ext.codec, ext.mode,
                                        cond, {}, status="skipped",
                                        error=type(exc).__name__))
    return reports


def _linearity_utterances(config, entries):
    waves = []
    for entry in entries:
        waves.append(read_wav(entry.wav_path))
    return waves


def run_linearity(config: ExperimentConfig) -> list:
    """Additivity over seeded disjoint pairs and homogeneity over the gain
    ladder, per codec and mode."""
    config.validate()
    entries = _select_utterances(load_manifest(config.manifest), config)
    waves = _linearity_utterances(config, entries)
    gains = [GainLevel(g) for g in config.gains_db]

    reports = []
    for codec in config.codecs:
        rate = codec.descriptor.native_rate
        at_rate = [resample(w, rate) for w in waves]
        rng = np.random.Generator(np.random.Philox(config.seed))
        order = rng.permutation(len(at_rate))
        pairs = [(at_rate[order[2 * i]], at_rate[order[2 * i + 1]])
                 for i in range(min(config.pair_count, len(at_rate) // 2))]
        for mode in codec.descriptor.mode_ids:
            add = additivity_probe(codec, mode, pairs, config.mel,
                                   config.align_max_lag)
            hom = homogeneity_probe(codec, mode, at_rate, gains, config.mel,
                                    config.align_max_lag)
            reports.append(replace(add, homogeneity=hom.homogeneity,
                                   utterance_count=hom.utterance_count))
    return reports


def run_frequency_response(config: ExperimentConfig) -> list:
    """Stepped-sine curves per codec x mode x probe amplitude."""
    config.validate()
    curves = []
    for codec in config.codecs:
        freqs = default_probe_freqs(codec.descriptor.native_rate,
                                    config.probe_points)
        for mode in codec.descriptor.mode_ids:
            for amplitude in config.probe_amplitudes:
                probe = ProbeSettings(duration=config.probe_duration,
                                      amplitude=amplitude,
                                      fade=config.probe_fade)
                curves.append(frequency_response(codec, mode, freqs, probe,
                                                 config.align_max_lag))
    return curves


# --- report emission ---

def _fmt(value) -> str:
    """Lossless, deterministic number formatting (shortest round-trip repr)."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _grid_rows(reports):
    rows = []
    for r in reports:
        level = "" if r.condition.level_db is None else _fmt(float(r.condition.level_db))
        if r.status == "ok":
            for metric in sorted(r.metrics):
                rows.append((r.utterance_id, r.codec, r.mode, r.condition.family,
                             level, metric, _fmt(r.metrics[metric]), "ok"))
        else:
            rows.append((r.utterance_id, r.codec, r.mode, r.condition.family,
                         level, "", r.error, r.status))
    return sorted(rows)


def _linearity_rows(reports):
    rows = []
    for r in reports:
        for i, value in enumerate(r.additivity_distances):
            rows.append((r.codec, r.mode, "additivity_pair", str(i), _fmt(value)))
        if r.additivity_distances:
            rows.append((r.codec, r.mode, "additivity_mean", "", _fmt(r.additivity_mean)))
            rows.append((r.codec, r.mode, "additivity_p05", "", _fmt(r.additivity_p05)))
            rows.append((r.codec, r.mode, "additivity_p95", "", _fmt(r.additivity_p95)))
        for gain_db, value in r.homogeneity:
            rows.append((r.codec, r.mode, "homogeneity_gain_mean",
                         _fmt(float(gain_db)), _fmt(value)))
    return sorted(rows)


def _freqresp_rows(curves):
    rows = []
    for c in curves:
        for freq, gain in c.points:
            rows.append((c.codec, c.mode, _fmt(float(c.probe_amplitude)),
                         _fmt(float(freq)), _fmt(float(gain))))
    return sorted(rows)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(buf.getvalue())


def grid_aggregates(reports):
    """Mean metric values keyed (codec, mode, condition), plus error counts."""
    groups = {}
    for r in sorted(reports, key=lambda r: r.utterance_id):
        key = (r.codec, r.mode, r.condition.family,
               None if r.condition.level_db is None else float(r.condition.level_db))
        entry = groups.setdefault(key, {"values": {}, "errors": 0, "rows": 0})
        entry["rows"] += 1
        if r.status == "ok":
            for metric, value in r.metrics.items():
                entry["values"].setdefault(metric, []).append(value)
        else:
            entry["errors"] += 1
    out = []
    for (codec, mode, family, level), entry in sorted(
            groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2],
                                            -1e300 if kv[0][3] is None else kv[0][3])):
        means = {m: float(np.mean(vals)) for m, vals in sorted(entry["values"].items())}
        out.append({
            "codec": codec, "mode": mode, "condition_family": family,
            "level_db": level, "mean_metrics": means,
            "rows": entry["rows"], "errors": entry["errors"],
        })
    return out


def _config_document(config):
    # parallelism is deliberately absent: results are independent of it,
    # so provenance stays byte-identical across worker counts
    doc = {
        "manifest": config.manifest,
        "metric_rate": config.metric_rate,
        "align_max_lag": config.align_max_lag,
        "seed": config.seed,
        "max_utterances": config.max_utterances,
        "pair_count": config.pair_count,
        "gains_db": list(config.gains_db),
        "probe_points": config.probe_points,
        "probe_amplitudes": list(config.probe_amplitudes),
        "probe_duration": config.probe_duration,
        "probe_fade": config.probe_fade,
        "mel": {
            "n_mels": config.mel.n_mels, "fft_size": config.mel.fft_size,
            "hop": config.mel.hop, "floor": config.mel.floor,
            "fmin": config.mel.fmin, "fmax": config.mel.fmax,
        },
        "snr_definition": "full-signal RMS over the whole utterance",
        "codecs": [
            {
                "name": c.descriptor.name, "kind": c.descriptor.kind,
                "native_rate": c.descriptor.native_rate,
                "modes": [[m, bps] for m, bps in c.descriptor.bitrate_modes],
            }
            for c in config.codecs
        ],
        "conditions": [
            {"family": c.family, "level_db": c.level_db,
             "noise_source": c.noise_source, "seed": c.seed}
            for c in config.conditions
        ],
    }
    return doc


def emit_reports(out_dir, config: ExperimentConfig,
                 grid_reports: Sequence[MetricReport] = (),
                 linearity_reports: Sequence[LinearityReport] = (),
                 freqresp_curves: Sequence[FrequencyResponseCurve] = (),
                 formats: Sequence[str] = ("csv", "json")) -> None:
    """Write grid/linearity/freqresp CSVs, per-figure plot data, and a JSON
    document embedding the resolved config and aggregate tables."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        if "csv" in formats:
            _write_csv(os.path.join(out_dir, "grid.csv"), GRID_HEADER,
                       _grid_rows(grid_reports))
            _write_csv(os.path.join(out_dir, "linearity.csv"), LINEARITY_HEADER,
                       _linearity_rows(linearity_reports))
            _write_csv(os.path.join(out_dir, "freqresp.csv"), FREQRESP_HEADER,
                       _freqresp_rows(freqresp_curves))
            _emit_plot_data(out_dir, config, grid_reports, linearity_reports,
                            freqresp_curves)
        if "json" in formats:
            doc = {
                "config": _config_document(config),
                "aggregates": {
                    "grid": grid_aggregates(grid_reports),
                    "linearity": [
                        {
                            "codec": r.codec, "mode": r.mode,
                            "additivity_mean": r.additivity_mean,
                            "additivity_p05": r.additivity_p05,
                            "additivity_p95": r.additivity_p95,
                            "pair_count": r.pair_count,
                            "homogeneity": [[g, v] for g, v in r.homogeneity],
                            "utterance_count": r.utterance_count,
                        }
                        for r in linearity_reports
                    ],
                    "freqresp": [
                        {
                            "codec": c.codec, "mode": c.mode,
                            "probe_amplitude": c.probe_amplitude,
                            "points": [[f, g] for f, g in c.points],
                        }
                        for c in freqresp_curves
                    ],
                },
            }
            with open(os.path.join(out_dir, "report.json"), "w",
                      encoding="utf-8") as fh:
                json.dump(doc, fh, indent=1, sort_keys=True, allow_nan=False)
    except OSError as exc:
        raise IoFailure(f"cannot write reports to {out_dir}: {exc}") from exc


def _emit_plot_data(out_dir, config, grid_reports, linearity_reports, curves):
    """Per-figure CSVs shaped like the robustness/linearity/response charts."""
    agg = grid_aggregates(grid_reports)
    rows = []
    for entry in agg:
        for metric, value in entry["mean_metrics"].items():
            rows.append((entry["condition_family"],
                         _fmt(entry["level_db"]), entry["codec"], entry["mode"],
                         metric, _fmt(value)))
    _write_csv(os.path.join(out_dir, "plot_robustness.csv"),
               ("condition_family", "level_db", "codec", "mode", "metric", "value"),
               sorted(rows))

    bitrates = {
        (c.descriptor.name, m): bps
        for c in config.codecs for m, bps in c.descriptor.bitrate_modes
    }
    add_rows = []
    hom_rows = []
    for r in linearity_reports:
        if r.additivity_distances:
            kbps = bitrates.get((r.codec, r.mode))
            add_rows.append((r.codec, r.mode,
                             _fmt(None if kbps is None else kbps / 1000.0),
                             _fmt(r.additivity_mean)))
        for gain_db, value in r.homogeneity:
            hom_rows.append((r.codec, r.mode, _fmt(float(gain_db)), _fmt(value)))
    _write_csv(os.path.join(out_dir, "plot_additivity.csv"),
               ("codec", "mode", "bitrate_kbps", "mel_distance"), sorted(add_rows))
    _write_csv(os.path.join(out_dir, "plot_homogeneity.csv"),
               ("codec", "mode", "gain_db", "mel_distance"), sorted(hom_rows))
    _write_csv(os.path.join(out_dir, "plot_freqresp.csv"), FREQRESP_HEADER,
               _freqresp_rows(curves))


# --- config file loading ---

def _build_codec(spec, base_dir, catalogs):
    kind = spec.get("kind", "builtin")
    name = spec.get("name")
    if not name:
        raise ConfigInvalid("codec entry missing a name")
    if kind == "builtin":
        rate = int(spec.get("native_rate", 16000))
        if name == "rvq":
            model_path = spec.get("model")
            if not model_path:
                raise ConfigInvalid("rvq codec entry needs a model path")
            if not os.path.isabs(model_path):
                model_path = os.path.join(base_dir, model_path)
            codec = rvq.as_codec(rvq.load_model(model_path))
        else:
            key = (rate,)
            if key not in catalogs:
                catalogs[key] = builtin_catalog(rate)
            if name not in catalogs[key]:
                raise ConfigInvalid(
                    f"unknown builtin codec {name!r}; have {sorted(catalogs[key])}")
            codec = catalogs[key][name]
        modes = spec.get("modes")
        if modes:
            keep = tuple((m, bps) for m, bps in codec.descriptor.bitrate_modes
                         if m in modes)
            if len(keep) != len(modes):
                raise ConfigInvalid(f"{name}: unknown modes in {modes}")
            codec = CodecUnderTest(replace(codec.descriptor, bitrate_modes=keep),
                                   codec._fn)
        return codec
    if kind == "external":
        modes = spec.get("modes") or [["default", 0.0]]
        desc = CodecDescriptor(
            name=name, kind="external",
            native_rate=int(spec.get("native_rate", 16000)),
            bitrate_modes=tuple((str(m), float(bps)) for m, bps in modes),
            command_template=spec.get("command"),
            timeout=float(spec.get("timeout", 120.0)),
            frame_samples=int(spec.get("frame_samples", 1)),
        )
        return CodecUnderTest(desc)
    raise ConfigInvalid(f"unknown codec kind {kind!r}")


def _build_condition(spec, base_dir):
    family = spec.get("family")
    noise = spec.get("noise") or spec.get("rir") or spec.get("noise_source")
    try:
        return Condition(
            family=family,
            level_db=None if spec.get("level_db") is None else float(spec["level_db"]),
            noise_source=noise,
            seed=int(spec.get("seed", 0)),
        )
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from exc


def load_config(path, seed: Optional[int] = None,
                parallelism: Optional[int] = None) -> ExperimentConfig:
    """Parse a TOML or JSON experiment config; paths resolve against the
    config file's directory."""
    try:
        raw = open(path, "rb").read()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    if str(path).endswith(".json"):
        doc = json.loads(raw.decode("utf-8"))
    else:
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            doc = tomllib.loads(raw.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigInvalid(f"{path}: {exc}") from exc

    base_dir = os.path.dirname(os.path.abspath(path))
    manifest = doc.get("manifest")
    if not manifest:
        raise ConfigInvalid("config needs a manifest path")
    if not os.path.isabs(manifest):
        manifest = os.path.join(base_dir, manifest)

    catalogs = {}
    codecs = [_build_codec(c, base_dir, catalogs) for c in doc.get("codecs", [])]
    conditions = [_build_condition(c, base_dir) for c in doc.get("conditions", [])]

    mel_doc = doc.get("mel", {})
    mel = MelConfig(
        n_mels=int(mel_doc.get("n_mels", 80)),
        fft_size=int(mel_doc.get("fft_size", 1024)),
        hop=int(mel_doc.get("hop", 256)),
        floor=float(mel_doc.get("floor", 1e-5)),
        fmin=float(mel_doc.get("fmin", 0.0)),
        fmax=mel_doc.get("fmax"),
    )

    lin = doc.get("linearity", {})
    fr = doc.get("freqresp", {})
    ext = [
        ExternalScores(
            codec=e.get("codec"), mode=e.get("mode", "default"),
            family=e.get("family", "clean"),
            level_db=None if e.get("level_db") is None else float(e["level_db"]),
            asr_hypotheses=_resolve(e.get("asr_hypotheses"), base_dir),
            asv_scores=_resolve(e.get("asv_scores"), base_dir),
            ser_reference=_resolve(e.get("ser_reference"), base_dir),
            ser_hypotheses=_resolve(e.get("ser_hypotheses"), base_dir),
        )
        for e in doc.get("external_scores", [])
    ]

    config = ExperimentConfig(
        manifest=manifest,
        codecs=codecs,
        conditions=conditions,
        metric_rate=int(doc.get("metric_rate", 16000)),
        mel=mel,
        align_max_lag=float(doc.get("align_max_lag", 0.1)),
        seed=int(doc.get("seed", 0)) if seed is None else seed,
        parallelism=(int(doc.get("parallelism", 1))
                     if parallelism is None else parallelism),
        max_utterances=doc.get("max_utterances"),
        pair_count=int(lin.get("pair_count", 5)),
        gains_db=tuple(lin.get("gains_db", (-40.0, -20.0, -12.0, -6.0, 0.0, 6.0, 12.0))),
        probe_points=int(fr.get("points", 64)),
        probe_amplitudes=tuple(fr.get("amplitudes", DEFAULT_PROBE_AMPLITUDES)),
        probe_duration=float(fr.get("duration", 1.0)),
        probe_fade=float(fr.get("fade", 0.010)),
        external_scores=ext,
    )
    config.validate()
    return config


def _resolve(path, base_dir):
    if path is None or os.path.isabs(path):
        return path
    return os.path.join(base_dir, path)
