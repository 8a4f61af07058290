/**
 * Adapter manifest: binds a codec name to a checkpoint and the command that
 * runs inference for it. Checkpoint hashes are recorded in provenance
 * sidecars rather than claiming equivalence to any published run.
 */

import { createHash } from 'crypto';
import { existsSync, readFileSync, renameSync, writeFileSync } from 'fs';

import { CODEC_TABLE, lookupCodec } from './bitrate.js';

export interface AdapterManifest {
  codec: string;
  /** path to the model checkpoint, if one is needed */
  checkpoint?: string;
  /**
   * inference command; receives {input}, {output}, {stages} and optionally
   * {checkpoint} placeholders
   */
  runner?: string;
  device?: string;
}

export function loadManifest(path: string): AdapterManifest {
  const doc = JSON.parse(readFileSync(path, 'utf-8')) as AdapterManifest;
  if (!doc.codec) throw new Error(`${path}: manifest needs a codec name`);
  if (!(doc.codec in CODEC_TABLE) && doc.codec !== 'identity') {
    throw new Error(`${path}: unknown codec ${doc.codec}`);
  }
  return doc;
}

export function checkpointHash(path: string): string | null {
  if (!existsSync(path)) return null;
  return createHash('sha256').update(readFileSync(path)).digest('hex');
}

export interface Provenance {
  codec: string;
  mode: string;
  nativeRate: number;
  bitsPerSecond: number;
  checkpoint?: string;
  checkpointSha256?: string | null;
  timestamp: string;
}

export function writeProvenance(path: string, manifest: AdapterManifest,
                                mode: string, bps: number): void {
  const config = manifest.codec === 'identity' ? null : lookupCodec(manifest.codec);
  const doc: Provenance = {
    codec: manifest.codec,
    mode,
    nativeRate: config ? config.nativeRate : 0,
    bitsPerSecond: bps,
    checkpoint: manifest.checkpoint,
    checkpointSha256: manifest.checkpoint ? checkpointHash(manifest.checkpoint) : undefined,
    timestamp: new Date().toISOString(),
  };
  // atomic like the WAV writes: temp in the target directory, then rename
  const tmp = `${path}.tmp-${process.pid}`;
  writeFileSync(tmp, JSON.stringify(doc, null, 1) + '\n');
  renameSync(tmp, path);
}
