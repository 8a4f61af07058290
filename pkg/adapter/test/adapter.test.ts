import { spawnSync } from 'child_process';
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from 'fs';
import { tmpdir } from 'os';
import { join } from 'path';
import { fileURLToPath } from 'url';
import { describe, expect, it } from 'vitest';

import { readWav, writeWavFloat32, Wave } from '../src/wav.js';

const ADAPTER = fileURLToPath(new URL('../dist/adapter.js', import.meta.url));

function makeDir(): string {
  return mkdtempSync(join(tmpdir(), 'adapter-cli-'));
}

function sine(n: number, rate: number): Wave {
  const samples = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    samples[i] = Math.fround(0.4 * Math.sin((2 * Math.PI * 440 * i) / rate));
  }
  return { samples, sampleRate: rate };
}

function runAdapter(args: string[], env: Record<string, string> = {}) {
  return spawnSync(process.execPath, [ADAPTER, ...args], {
    encoding: 'utf-8',
    env: { ...process.env, ...env },
  });
}

describe('adapter CLI', () => {
  it('identity self-test copies input to output bit-exactly', () => {
    const dir = makeDir();
    const input = join(dir, 'in.wav');
    const output = join(dir, 'out.wav');
    writeWavFloat32(sine(2048, 24000), input);
    const proc = runAdapter([
      '--codec', 'identity', '--mode', 'k1', '--input', input, '--output', output,
    ]);
    expect(proc.status).toBe(0);
    expect(Array.from(readWav(output).samples)).toEqual(Array.from(readWav(input).samples));
  });

  it('honors CODEC_PROBE_MODE when --mode is absent', () => {
    const dir = makeDir();
    const input = join(dir, 'in.wav');
    const output = join(dir, 'out.wav');
    const provenance = join(dir, 'prov.json');
    writeWavFloat32(sine(1024, 16000), input);
    const proc = runAdapter(
      ['--codec', 'identity', '--input', input, '--output', output,
       '--provenance', provenance],
      { CODEC_PROBE_MODE: 'k3' },
    );
    expect(proc.status).toBe(0);
    expect(JSON.parse(readFileSync(provenance, 'utf-8')).mode).toBe('k3');
  });

  it('fails with a stderr message when no runner is configured', () => {
    const dir = makeDir();
    const input = join(dir, 'in.wav');
    writeWavFloat32(sine(1024, 24000), input);
    const manifest = join(dir, 'manifest.json');
    writeFileSync(manifest, JSON.stringify({ codec: 'encodec' }));
    const proc = runAdapter([
      '--codec', 'encodec', '--mode', 'k2', '--input', input,
      '--output', join(dir, 'out.wav'), '--manifest', manifest,
    ]);
    expect(proc.status).toBe(1);
    expect(proc.stderr).toMatch(/no inference runner configured/);
  });

  it('rejects a rate mismatch against the codec table', () => {
    const dir = makeDir();
    const input = join(dir, 'in.wav');
    writeWavFloat32(sine(1024, 16000), input); // encodec wants 24 kHz
    const manifest = join(dir, 'manifest.json');
    writeFileSync(manifest, JSON.stringify({
      codec: 'encodec',
      runner: `${process.execPath} -e ignored`,
    }));
    const proc = runAdapter([
      '--codec', 'encodec', '--mode', 'k2', '--input', input,
      '--output', join(dir, 'out.wav'), '--manifest', manifest,
    ]);
    expect(proc.status).toBe(1);
    expect(proc.stderr).toMatch(/expects 24000 Hz/);
  });

  it('drives a configured runner command and verifies its output', () => {
    const dir = makeDir();
    const input = join(dir, 'in.wav');
    const output = join(dir, 'out.wav');
    const provenance = join(dir, 'prov.json');
    writeWavFloat32(sine(2400, 24000), input);
    // stand-in "model": copies input to output (a degenerate codec)
    const runnerScript = join(dir, 'runner.mjs');
    writeFileSync(runnerScript, `
import { copyFileSync } from 'fs';
const [input, output, stages] = process.argv.slice(2);
if (Number(stages) < 1) process.exit(2);
copyFileSync(input, output);
`);
    const manifest = join(dir, 'manifest.json');
    const checkpoint = join(dir, 'weights.bin');
    writeFileSync(checkpoint, 'not real weights');
    writeFileSync(manifest, JSON.stringify({
      codec: 'dac',
      checkpoint,
      runner: `${process.execPath} ${runnerScript} {input} {output} {stages}`,
    }));
    const proc = runAdapter([
      '--codec', 'dac', '--mode', 'k8', '--input', input, '--output', output,
      '--manifest', manifest, '--provenance', provenance,
    ]);
    expect(proc.status).toBe(0);
    expect(readWav(output).samples.length).toBe(2400);
    const doc = JSON.parse(readFileSync(provenance, 'utf-8'));
    expect(doc.codec).toBe('dac');
    expect(doc.bitsPerSecond).toBe(6000); // 75 Hz x 8 x 10 bits
    expect(doc.checkpointSha256).toMatch(/^[0-9a-f]{64}$/);
  });

  it('propagates runner crashes as nonzero exit with stderr', () => {
    const dir = makeDir();
    const input = join(dir, 'in.wav');
    writeWavFloat32(sine(2400, 24000), input);
    const manifest = join(dir, 'manifest.json');
    writeFileSync(manifest, JSON.stringify({
      codec: 'dac',
      runner: `${process.execPath} -e process.stderr.write('cuda-oom'),process.exit(3)`,
    }));
    const proc = runAdapter([
      '--codec', 'dac', '--mode', 'k1', '--input', input,
      '--output', join(dir, 'out.wav'), '--manifest', manifest,
    ]);
    expect(proc.status).toBe(1);
    expect(proc.stderr).toMatch(/exited 3/);
    expect(proc.stderr).toMatch(/cuda-oom/);
    expect(existsSync(join(dir, 'out.wav'))).toBe(false);
  });

  it('lists modes with bitrates', () => {
    const proc = runAdapter(['--codec', 'encodec', '--list-modes']);
    expect(proc.status).toBe(0);
    const lines = proc.stdout.trim().split('\n');
    expect(lines).toContain('encodec k1 750');
    expect(lines).toContain('encodec k32 24000');
  });
});
