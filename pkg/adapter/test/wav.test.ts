import { mkdtempSync, readdirSync, readFileSync, writeFileSync } from 'fs';
import { tmpdir } from 'os';
import { join } from 'path';
import { describe, expect, it } from 'vitest';

import { readWav, writeWavAtomic, writeWavFloat32, Wave } from '../src/wav.js';

function tempPath(name: string): string {
  return join(mkdtempSync(join(tmpdir(), 'adapter-wav-')), name);
}

function sine(n: number, freq: number, rate: number): Wave {
  const samples = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    samples[i] = Math.fround(0.5 * Math.sin((2 * Math.PI * freq * i) / rate));
  }
  return { samples, sampleRate: rate };
}

describe('wav io', () => {
  it('round-trips float32 exactly', () => {
    const wave = sine(1600, 440, 16000);
    const path = tempPath('rt.wav');
    writeWavFloat32(wave, path);
    const back = readWav(path);
    expect(back.sampleRate).toBe(16000);
    expect(Array.from(back.samples)).toEqual(Array.from(wave.samples));
  });

  it('reads pcm16 with 2^15 scaling', () => {
    const path = tempPath('p16.wav');
    const payload = Buffer.alloc(6);
    payload.writeInt16LE(0, 0);
    payload.writeInt16LE(16384, 2);
    payload.writeInt16LE(-32768, 4);
    const fmt = Buffer.alloc(16);
    fmt.writeUInt16LE(1, 0);
    fmt.writeUInt16LE(1, 2);
    fmt.writeUInt32LE(16000, 4);
    fmt.writeUInt32LE(32000, 8);
    fmt.writeUInt16LE(2, 12);
    fmt.writeUInt16LE(16, 14);
    const body = Buffer.concat([
      Buffer.from('fmt '), u32(fmt.length), fmt,
      Buffer.from('data'), u32(payload.length), payload,
    ]);
    writeFileSync(path, Buffer.concat([
      Buffer.from('RIFF'), u32(4 + body.length), Buffer.from('WAVE'), body,
    ]));
    const wave = readWav(path);
    expect(Array.from(wave.samples)).toEqual([0, 0.5, -1]);
  });

  it('rejects stereo files', () => {
    const path = tempPath('stereo.wav');
    const wave = sine(64, 440, 16000);
    writeWavFloat32(wave, path);
    const raw = readFileSync(path);
    raw.writeUInt16LE(2, raw.indexOf('fmt ') + 8 + 2); // channel count
    writeFileSync(path, raw);
    expect(() => readWav(path)).toThrow(/mono/);
  });

  it('rejects non-finite samples', () => {
    const path = tempPath('nan.wav');
    const wave = sine(64, 440, 16000);
    writeWavFloat32(wave, path);
    const raw = readFileSync(path);
    raw.writeFloatLE(NaN, raw.indexOf('data') + 8);
    writeFileSync(path, raw);
    expect(() => readWav(path)).toThrow(/non-finite/);
  });

  it('atomic write leaves no temp files', () => {
    const dir = mkdtempSync(join(tmpdir(), 'adapter-atomic-'));
    const path = join(dir, 'out.wav');
    writeWavAtomic(sine(128, 440, 16000), path);
    expect(readWav(path).samples.length).toBe(128);
    expect(readdirSync(dir)).toEqual(['out.wav']);
  });
});

function u32(n: number): Buffer {
  const b = Buffer.alloc(4);
  b.writeUInt32LE(n, 0);
  return b;
}
