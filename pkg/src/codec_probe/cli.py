"""Command line entry points.

Exit codes: 0 all rows ok, 2 completed with per-row codec errors, 1 config
or infrastructure failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import rvq
from .audio import read_wav
from .errors import CodecProbeError, ConfigInvalid
from .harness import (
    emit_reports,
    load_config,
    load_manifest,
    run_frequency_response,
    run_grid,
    run_linearity,
)
from .smoke import DEFAULT_SEED, build_smoke_corpus

SMOKE_RVQ = dict(frame_size=64, stages=4, entries=16)

SMOKE_CONFIG = """\
manifest = "manifest.csv"
metric_rate = 16000
seed = {seed}
parallelism = 1

[[codecs]]
kind = "builtin"
name = "identity"

[[codecs]]
kind = "builtin"
name = "mulaw-8"

[[codecs]]
kind = "builtin"
name = "hardclip-0.5"
{rvq_block}
[[conditions]]
family = "clean"

[[conditions]]
family = "ambient"
level_db = 5.0
noise = "noise.wav"

[[conditions]]
family = "white"
level_db = 0.0
seed = {seed}

[[conditions]]
family = "reverb"
level_db = 0.0
rir = "rir.wav"
"""

SMOKE_RVQ_BLOCK = """
[[codecs]]
kind = "builtin"
name = "rvq"
model = "model.rvqm"
"""


def _add_run_args(sub):
    sub.add_argument("--config", required=True, help="TOML or JSON experiment config")
    sub.add_argument("--out", required=True, help="output directory for reports")
    sub.add_argument("--seed", type=int, default=None, help="override the config seed")
    sub.add_argument("--jobs", type=int, default=None, help="worker count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codec-probe",
        description="Noise-robustness, linearity, and frequency-response "
                    "analysis for black-box audio codecs.")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("grid", "run the condition x codec x bitrate evaluation grid"),
        ("linearity", "run additivity and homogeneity probes"),
        ("freqresp", "run stepped-sine frequency response measurement"),
        ("report", "run all three protocols and emit every report"),
    ]:
        _add_run_args(subs.add_parser(name, help=text))
    smoke = subs.add_parser("smoke", help="materialize the bundled smoke corpus")
    smoke.add_argument("--out", required=True)
    smoke.add_argument("--seed", type=int, default=DEFAULT_SEED)
    smoke.add_argument("--utterances", type=int, default=10)
    smoke.add_argument("--no-rvq", action="store_true",
                       help="skip training the bundled RVQ model")
    return parser


def _run(args) -> int:
    config = load_config(args.config, seed=args.seed, parallelism=args.jobs)
    grid = []
    linearity = []
    freqresp = []
    if args.command in ("grid", "report"):
        grid = run_grid(config)
    if args.command in ("linearity", "report"):
        linearity = run_linearity(config)
    if args.command in ("freqresp", "report"):
        freqresp = run_frequency_response(config)
    emit_reports(args.out, config, grid, linearity, freqresp)
    bad = [r for r in grid if r.status != "ok"]
    for r in bad:
        print(f"row error: {r.utterance_id}/{r.codec}/{r.mode}/"
              f"{r.condition.label()}: {r.error}", file=sys.stderr)
    print(f"wrote reports to {args.out} "
          f"({len(grid)} grid rows, {len(bad)} errors, "
          f"{len(linearity)} linearity reports, {len(freqresp)} curves)")
    return 2 if bad else 0


def _smoke(args) -> int:
    manifest = build_smoke_corpus(args.out, n_utterances=args.utterances,
                                  seed=args.seed)
    rvq_block = ""
    if not args.no_rvq:
        corpus = [read_wav(e.wav_path) for e in load_manifest(manifest)]
        model = rvq.train(corpus, seed=args.seed, **SMOKE_RVQ)
        rvq.save_model(model, os.path.join(args.out, "model.rvqm"))
        rvq.save_model_json(model, os.path.join(args.out, "model.json"))
        rvq_block = SMOKE_RVQ_BLOCK
    config_path = os.path.join(args.out, "config.toml")
    with open(config_path, "w", encoding="utf-8") as fh:
        fh.write(SMOKE_CONFIG.format(seed=args.seed, rvq_block=rvq_block))
    print(f"smoke corpus ready: {manifest}\nconfig: {config_path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "smoke":
            return _smoke(args)
        return _run(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except CodecProbeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
