/**
 * Codec backends. The identity backend is the self-test path and needs no
 * models; the runner backend shells out to whatever inference command the
 * manifest configures (one process per call, file-based exchange).
 */

import { spawnSync } from 'child_process';
import { existsSync } from 'fs';

import { AdapterManifest } from './manifest.js';
import { readWav, writeWavAtomic } from './wav.js';

export function runIdentity(inputPath: string, outputPath: string): void {
  writeWavAtomic(readWav(inputPath), outputPath);
}

export function runExternal(manifest: AdapterManifest, inputPath: string,
                            outputPath: string, stages: number): void {
  if (!manifest.runner) {
    throw new Error(
      `${manifest.codec}: no inference runner configured; install the model ` +
      'and point the manifest "runner" command at it');
  }
  if (manifest.checkpoint && !existsSync(manifest.checkpoint)) {
    throw new Error(`${manifest.codec}: checkpoint not found: ${manifest.checkpoint}`);
  }
  const argv = manifest.runner.split(/\s+/).map((arg) =>
    arg
      .replaceAll('{input}', inputPath)
      .replaceAll('{output}', outputPath)
      .replaceAll('{stages}', String(stages))
      .replaceAll('{checkpoint}', manifest.checkpoint ?? ''));
  const proc = spawnSync(argv[0], argv.slice(1), { encoding: 'utf-8' });
  if (proc.error) {
    throw new Error(`${manifest.codec}: cannot spawn runner: ${proc.error.message}`);
  }
  if (proc.status !== 0) {
    throw new Error(
      `${manifest.codec}: runner exited ${proc.status}: ${(proc.stderr ?? '').trim()}`);
  }
  if (!existsSync(outputPath)) {
    throw new Error(`${manifest.codec}: runner produced no output file`);
  }
  // re-read and re-write so the delivered file always satisfies the host's
  // float-32 mono contract regardless of what the runner emitted
  writeWavAtomic(readWav(outputPath), outputPath);
}
