#!/usr/bin/env node
/**
 * Codec bridge CLI, compatible with the measurement host's subprocess
 * protocol:
 *
 *   adapter --codec <name> --mode <kN> --input <wav> --output <wav>
 *           [--manifest <json>] [--provenance <json>] [--self-test]
 *
 * Reads a float-32 mono WAV at the codec's native rate, writes the
 * reconstruction to --output, exits non-zero with a message on stderr on any
 * failure. `--self-test` (or --codec identity) copies input to output with
 * no model involved.
 */

import { parseArgs, required } from './args.js';
import { runExternal, runIdentity } from './backends.js';
import { bitsPerSecond, lookupCodec, modeMap, stagesForMode } from './bitrate.js';
import { AdapterManifest, loadManifest, writeProvenance } from './manifest.js';
import { readWav } from './wav.js';

export function main(argv: string[]): number {
  const args = parseArgs(argv, new Set(['self-test', 'list-modes']));
  const codecName = (args.get('codec') as string) ?? 'identity';
  const selfTest = args.get('self-test') === true || codecName === 'identity';

  if (args.get('list-modes') === true) {
    if (selfTest) {
      process.stdout.write('identity default 0\n');
      return 0;
    }
    const config = lookupCodec(codecName);
    for (const [mode, bps] of modeMap(config)) {
      process.stdout.write(`${codecName} ${mode} ${bps}\n`);
    }
    return 0;
  }

  const inputPath = required(args, 'input');
  const outputPath = required(args, 'output');
  const mode = (args.get('mode') as string)
    ?? process.env.CODEC_PROBE_MODE
    ?? 'k1';

  let manifest: AdapterManifest;
  if (args.has('manifest')) {
    manifest = loadManifest(args.get('manifest') as string);
  } else {
    manifest = { codec: selfTest ? 'identity' : codecName };
  }

  let bps = 0;
  if (selfTest || manifest.codec === 'identity') {
    const wave = readWav(inputPath); // validate before touching the output
    bps = 32 * wave.sampleRate;
    runIdentity(inputPath, outputPath);
  } else {
    const config = lookupCodec(manifest.codec);
    const stages = stagesForMode(config, mode);
    bps = bitsPerSecond(config.frameRate, stages, config.codebookSize);
    const input = readWav(inputPath);
    if (input.sampleRate !== config.nativeRate) {
      throw new Error(
        `${manifest.codec} expects ${config.nativeRate} Hz, got ${input.sampleRate} Hz`);
    }
    runExternal(manifest, inputPath, outputPath, stages);
  }

  if (args.has('provenance')) {
    writeProvenance(args.get('provenance') as string, manifest, mode, bps);
  }
  return 0;
}

const invokedDirectly = process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split('/').pop() ?? '');
if (invokedDirectly) {
  try {
    process.exit(main(process.argv.slice(2)));
  } catch (err) {
    process.stderr.write(`adapter: ${err instanceof Error ? err.message : err}\n`);
    process.exit(1);
  }
}
