/**
 * Training configuration and the fixed CNN architecture description.
 */

/** The seven bearing-condition classes, in canonical (sorted) order. */
export const CLASS_NAMES = [
  'BPFI_03',
  'BPFI_10',
  'BPFI_30',
  'BPFO_03',
  'BPFO_10',
  'BPFO_30',
  'Healthy',
] as const;

export type ClassName = (typeof CLASS_NAMES)[number];

export interface TrainConfig {
  /** Directory holding one subdirectory per class, as written by `scdkit dataset`. */
  dataDir: string;
  /** Images are resized to this square resolution before batching. */
  imageSize: [number, number];
  batchSize: number;
  /** Upper bound on training epochs; early stopping may end sooner. */
  epochs: number;
  /** Train/validation/test fractions; must sum to 1. */
  split: [number, number, number];
  /** Stop after this many epochs without validation-loss improvement. */
  earlyStoppingPatience: number;
  seed: number;
  numClasses: number;
}

export const DEFAULT_CONFIG: Omit<TrainConfig, 'dataDir'> = {
  imageSize: [224, 224],
  batchSize: 32,
  epochs: 15,
  split: [0.7, 0.2, 0.1],
  earlyStoppingPatience: 3,
  seed: 0,
  numClasses: CLASS_NAMES.length,
};

export function makeConfig(
  dataDir: string,
  overrides: Partial<TrainConfig> = {},
): TrainConfig {
  const config = { ...DEFAULT_CONFIG, dataDir, ...overrides };
  const total = config.split[0] + config.split[1] + config.split[2];
  if (Math.abs(total - 1.0) > 1e-9) {
    throw new Error(`split fractions must sum to 1, got ${total}`);
  }
  if (config.numClasses !== CLASS_NAMES.length) {
    throw new Error(`numClasses must be ${CLASS_NAMES.length}`);
  }
  return config;
}

/**
 * Architecture of the convolutional classifier: three conv/max-pool stages
 * with increasing filter counts, one dense hidden layer with dropout, and
 * a softmax head over the seven classes.
 */
export interface CustomCnnSpec {
  convFilters: number[];
  kernelSize: number;
  denseUnits: number;
  dropoutRate: number;
  numClasses: number;
}

export const CUSTOM_CNN: CustomCnnSpec = {
  convFilters: [16, 32, 64],
  kernelSize: 3,
  denseUnits: 128,
  dropoutRate: 0.5,
  numClasses: CLASS_NAMES.length,
};
