#!/usr/bin/env node
/**
 * Downstream-model runner CLI. Scans a directory of reconstructed WAVs and
 * emits the exact file schemas the measurement host joins:
 *
 *   adapter-metrics --task asr --in <dir> --out <file.tsv> [--engine <cmd>]
 *   adapter-metrics --task asv --in <dir> --out <file.csv> --trials <csv> [--engine <cmd>]
 *   adapter-metrics --task ser --in <dir> --out <file.csv> [--engine <cmd>]
 *
 * The engine command runs once per utterance (or per trial for asv) and
 * prints its result on stdout: transcript text for asr, a numeric score for
 * asv, a label for ser. `{input}` (and `{enroll}`/`{test}` for asv)
 * placeholders are substituted; without placeholders the paths are appended.
 * Engines default from ADAPTER_ASR_ENGINE / ADAPTER_ASV_ENGINE /
 * ADAPTER_SER_ENGINE. Per-utterance failures are logged to stderr and
 * skipped, never fabricated; with no engine configured the outputs are
 * headers only.
 */

import { spawnSync } from 'child_process';
import { readdirSync, readFileSync, renameSync, writeFileSync } from 'fs';
import { basename, join } from 'path';

import { parseArgs, required } from './args.js';

const TASKS = ['asr', 'asv', 'ser'] as const;
type Task = (typeof TASKS)[number];

function listWavs(dir: string): Map<string, string> {
  const out = new Map<string, string>();
  for (const name of readdirSync(dir).sort()) {
    if (name.toLowerCase().endsWith('.wav')) {
      out.set(basename(name, '.wav').replace(/\.WAV$/, ''), join(dir, name));
    }
  }
  return out;
}

function runEngine(engine: string, substitutions: Record<string, string>): string | null {
  let argv = engine.split(/\s+/);
  let usedPlaceholder = false;
  argv = argv.map((arg) => {
    let next = arg;
    for (const [key, value] of Object.entries(substitutions)) {
      if (next.includes(`{${key}}`)) {
        usedPlaceholder = true;
        next = next.replaceAll(`{${key}}`, value);
      }
    }
    return next;
  });
  if (!usedPlaceholder) argv = argv.concat(Object.values(substitutions));
  const proc = spawnSync(argv[0], argv.slice(1), { encoding: 'utf-8' });
  if (proc.error || proc.status !== 0) {
    const reason = proc.error ? proc.error.message : `exit ${proc.status}: ${(proc.stderr ?? '').trim()}`;
    process.stderr.write(`adapter-metrics: engine failed (${reason}); skipping\n`);
    return null;
  }
  return proc.stdout.trim();
}

function writeAtomic(path: string, content: string): void {
  const tmp = `${path}.tmp-${process.pid}`;
  writeFileSync(tmp, content);
  renameSync(tmp, path);
}

function csvEscape(field: string): string {
  return /[",\n]/.test(field) ? `"${field.replaceAll('"', '""')}"` : field;
}

export function runAsr(dir: string, outPath: string, engine: string | undefined): number {
  const lines: string[] = [];
  for (const [id, wav] of listWavs(dir)) {
    if (!engine) {
      process.stderr.write(`adapter-metrics: no asr engine; skipping ${id}\n`);
      continue;
    }
    const text = runEngine(engine, { input: wav });
    if (text !== null) lines.push(`${id}\t${text.replaceAll(/\s+/g, ' ')}`);
  }
  writeAtomic(outPath, lines.map((l) => l + '\n').join(''));
  return lines.length;
}

interface Trial {
  trialId: string;
  enroll: string;
  test: string;
  label: string;
}

export function readTrials(path: string): Trial[] {
  const lines = readFileSync(path, 'utf-8').split('\n').filter((l) => l.trim());
  const header = lines.shift();
  if (header?.trim() !== 'trial_id,enroll,test,label') {
    throw new Error(`${path}: expected header trial_id,enroll,test,label`);
  }
  return lines.map((line) => {
    const [trialId, enroll, test, label] = line.split(',');
    if (label !== 'genuine' && label !== 'impostor') {
      throw new Error(`${path}: label must be genuine or impostor, got ${label}`);
    }
    return { trialId, enroll, test, label };
  });
}

export function runAsv(dir: string, outPath: string, trialsPath: string,
                       engine: string | undefined): number {
  const wavs = listWavs(dir);
  const rows: string[] = [];
  for (const trial of readTrials(trialsPath)) {
    const enroll = wavs.get(trial.enroll);
    const test = wavs.get(trial.test);
    if (!enroll || !test) {
      process.stderr.write(
        `adapter-metrics: missing audio for trial ${trial.trialId}; skipping\n`);
      continue;
    }
    if (!engine) {
      process.stderr.write(`adapter-metrics: no asv engine; skipping ${trial.trialId}\n`);
      continue;
    }
    const score = runEngine(engine, { enroll, test });
    if (score === null) continue;
    if (!Number.isFinite(Number(score))) {
      process.stderr.write(
        `adapter-metrics: engine returned non-numeric score for ${trial.trialId}; skipping\n`);
      continue;
    }
    rows.push(`${csvEscape(trial.trialId)},${Number(score)},${trial.label}`);
  }
  writeAtomic(outPath, ['trial_id,score,label', ...rows].map((l) => l + '\n').join(''));
  return rows.length;
}

export function runSer(dir: string, outPath: string, engine: string | undefined): number {
  const rows: string[] = [];
  for (const [id, wav] of listWavs(dir)) {
    if (!engine) {
      process.stderr.write(`adapter-metrics: no ser engine; skipping ${id}\n`);
      continue;
    }
    const label = runEngine(engine, { input: wav });
    if (label !== null && label.length > 0) {
      rows.push(`${csvEscape(id)},${csvEscape(label.split(/\s+/)[0])}`);
    }
  }
  writeAtomic(outPath, ['id,label', ...rows].map((l) => l + '\n').join(''));
  return rows.length;
}

export function main(argv: string[]): number {
  const args = parseArgs(argv);
  const task = required(args, 'task') as Task;
  if (!TASKS.includes(task)) {
    throw new Error(`--task must be one of ${TASKS.join('|')}, got ${task}`);
  }
  const dir = required(args, 'in');
  const outPath = required(args, 'out');
  const engine = (args.get('engine') as string)
    ?? process.env[`ADAPTER_${task.toUpperCase()}_ENGINE`];

  let emitted: number;
  if (task === 'asr') {
    emitted = runAsr(dir, outPath, engine);
  } else if (task === 'asv') {
    emitted = runAsv(dir, outPath, required(args, 'trials'), engine);
  } else {
    emitted = runSer(dir, outPath, engine);
  }
  process.stdout.write(`adapter-metrics: wrote ${emitted} ${task} rows to ${outPath}\n`);
  return 0;
}

const invokedDirectly = process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split('/').pop() ?? '');
if (invokedDirectly) {
  try {
    process.exit(main(process.argv.slice(2)));
  } catch (err) {
    process.stderr.write(`adapter-metrics: ${err instanceof Error ? err.message : err}\n`);
    process.exit(1);
  }
}
