/**
 * Bitrate accounting and the published-codec configuration table.
 *
 * Bits per second for k active quantizer stages with C-entry codebooks at
 * frame rate fN: fN * k * log2(C). Mode ids follow the "k<N>" convention of
 * the measurement host.
 */

export interface CodecConfig {
  name: string;
  nativeRate: number;
  frameRate: number; // fN, frames per second
  codebookSize: number; // C
  /** selectable stage counts, lowest to highest bitrate */
  stageChoices: number[];
}

export function bitsPerSecond(frameRate: number, stages: number, codebookSize: number): number {
  return frameRate * stages * Math.log2(codebookSize);
}

export function modeMap(config: CodecConfig): Map<string, number> {
  const map = new Map<string, number>();
  for (const k of config.stageChoices) {
    map.set(`k${k}`, bitsPerSecond(config.frameRate, k, config.codebookSize));
  }
  return map;
}

/**
 * Published codec configurations. Rates and bitrate ranges follow each
 * model's released checkpoints: the 24 kHz stream codecs run 75 frames/s
 * with 1024-entry codebooks (0.75 kbps per stage), the 16 kHz ones run
 * 50 frames/s (0.5 kbps per stage).
 */
export const CODEC_TABLE: Record<string, CodecConfig> = {
  encodec: {
    name: 'encodec', nativeRate: 24000, frameRate: 75, codebookSize: 1024,
    stageChoices: [1, 2, 4, 8, 16, 32], // 0.75 .. 24 kbps
  },
  dac: {
    name: 'dac', nativeRate: 24000, frameRate: 75, codebookSize: 1024,
    stageChoices: [1, 2, 4, 8, 16, 32], // 0.75 .. 24 kbps
  },
  speechtokenizer: {
    name: 'speechtokenizer', nativeRate: 16000, frameRate: 50, codebookSize: 1024,
    stageChoices: [1, 2, 3, 4, 5, 6, 7, 8], // up to 4 kbps
  },
  hificodec: {
    name: 'hificodec', nativeRate: 24000, frameRate: 75, codebookSize: 1024,
    stageChoices: [4], // grouped RVQ, fixed 3 kbps operating point
  },
  freqcodec: {
    name: 'freqcodec', nativeRate: 16000, frameRate: 50, codebookSize: 1024,
    stageChoices: [1, 2, 4, 8, 16, 32], // 0.5 .. 16 kbps
  },
};

export function lookupCodec(name: string): CodecConfig {
  const config = CODEC_TABLE[name];
  if (!config) {
    throw new Error(`unknown codec ${name}; known: ${Object.keys(CODEC_TABLE).join(', ')}`);
  }
  return config;
}

export function stagesForMode(config: CodecConfig, modeId: string): number {
  const match = /^k(\d+)$/.exec(modeId);
  if (!match) throw new Error(`bad mode id ${modeId}; expected k<stages>`);
  const k = Number(match[1]);
  if (!config.stageChoices.includes(k)) {
    throw new Error(
      `${config.name} has no mode ${modeId}; choices: ${config.stageChoices.map((s) => `k${s}`).join(', ')}`);
  }
  return k;
}
