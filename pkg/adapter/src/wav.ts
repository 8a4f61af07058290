/**
 * Minimal mono WAV I/O for the wire protocol: reads PCM-16 and IEEE
 * float-32, writes float-32. Little-endian RIFF throughout.
 */

import { readFileSync, writeFileSync, renameSync } from 'fs';

export interface Wave {
  samples: Float64Array;
  sampleRate: number;
}

export function readWav(path: string): Wave {
  const buf = readFileSync(path);
  if (buf.length < 12 || buf.toString('ascii', 0, 4) !== 'RIFF' ||
      buf.toString('ascii', 8, 12) !== 'WAVE') {
    throw new Error(`${path} is not a RIFF/WAVE file`);
  }
  let offset = 12;
  let fmt: { tag: number; channels: number; rate: number; bits: number } | null = null;
  let data: Buffer | null = null;
  while (offset + 8 <= buf.length) {
    const id = buf.toString('ascii', offset, offset + 4);
    const size = buf.readUInt32LE(offset + 4);
    const body = offset + 8;
    if (id === 'fmt ') {
      fmt = {
        tag: buf.readUInt16LE(body),
        channels: buf.readUInt16LE(body + 2),
        rate: buf.readUInt32LE(body + 4),
        bits: buf.readUInt16LE(body + 14),
      };
    } else if (id === 'data') {
      if (body + size > buf.length) throw new Error(`truncated data chunk in ${path}`);
      data = buf.subarray(body, body + size);
    }
    offset = body + size + (size % 2);
  }
  if (!fmt || !data) throw new Error(`missing fmt or data chunk in ${path}`);
  if (fmt.channels !== 1) throw new Error(`${path}: expected mono, got ${fmt.channels} channels`);

  let samples: Float64Array;
  if (fmt.tag === 3 && fmt.bits === 32) {
    samples = new Float64Array(data.length / 4);
    for (let i = 0; i < samples.length; i++) samples[i] = data.readFloatLE(4 * i);
  } else if (fmt.tag === 1 && fmt.bits === 16) {
    samples = new Float64Array(data.length / 2);
    for (let i = 0; i < samples.length; i++) samples[i] = data.readInt16LE(2 * i) / 32768;
  } else {
    throw new Error(`${path}: unsupported encoding (tag ${fmt.tag}, ${fmt.bits} bits)`);
  }
  for (let i = 0; i < samples.length; i++) {
    if (!Number.isFinite(samples[i])) throw new Error(`${path}: non-finite sample at ${i}`);
  }
  return { samples, sampleRate: fmt.rate };
}

export function writeWavFloat32(wave: Wave, path: string): void {
  const n = wave.samples.length;
  const payload = Buffer.alloc(4 * n);
  for (let i = 0; i < n; i++) payload.writeFloatLE(Math.fround(wave.samples[i]), 4 * i);

  const fmt = Buffer.alloc(16);
  fmt.writeUInt16LE(3, 0); // IEEE float
  fmt.writeUInt16LE(1, 2);
  fmt.writeUInt32LE(wave.sampleRate, 4);
  fmt.writeUInt32LE(wave.sampleRate * 4, 8);
  fmt.writeUInt16LE(4, 12);
  fmt.writeUInt16LE(32, 14);
  const fact = Buffer.alloc(4);
  fact.writeUInt32LE(n, 0);

  const chunks = [
    Buffer.from('fmt '), fmt,
    Buffer.from('fact'), fact,
    Buffer.from('data'), payload,
  ];
  let bodyLength = 0;
  for (let i = 0; i < chunks.length; i += 2) {
    bodyLength += 8 + chunks[i + 1].length + (chunks[i + 1].length % 2);
  }
  const out = Buffer.alloc(12 + bodyLength);
  out.write('RIFF', 0, 'ascii');
  out.writeUInt32LE(4 + bodyLength, 4);
  out.write('WAVE', 8, 'ascii');
  let pos = 12;
  for (let i = 0; i < chunks.length; i += 2) {
    chunks[i].copy(out, pos);
    out.writeUInt32LE(chunks[i + 1].length, pos + 4);
    chunks[i + 1].copy(out, pos + 8);
    pos += 8 + chunks[i + 1].length + (chunks[i + 1].length % 2);
  }
  writeFileSync(path, out);
}

/** Write via a temp file in the same directory, then rename (atomic). */
export function writeWavAtomic(wave: Wave, path: string): void {
  const tmp = `${path}.tmp-${process.pid}`;
  writeWavFloat32(wave, tmp);
  renameSync(tmp, path);
}
