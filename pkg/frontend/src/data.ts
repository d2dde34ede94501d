/**
 * Dataset loading: scans a class-per-directory image tree (or the
 * manifest.tsv written next to it), decodes PNGs, normalizes pixels to
 * [0, 1], and yields seeded, shuffled, batched tensors.
 */
import * as fs from 'fs';
import * as path from 'path';

import * as tf from '@tensorflow/tfjs';
import { PNG } from 'pngjs';

import { CLASS_NAMES, TrainConfig } from './config';

export type Split = 'train' | 'val' | 'test';

export interface LabeledImage {
  path: string;
  classIndex: number;
  split: Split;
}

/** Deterministic 32-bit PRNG (mulberry32) so shuffles are seed-reproducible. */
export function seededRandom(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function shuffled<T>(items: T[], rand: () => number): T[] {
  const out = items.slice();
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

/** Per-class split sizes: round(n*train), round(n*val), remainder. */
export function splitSizes(
  n: number,
  split: [number, number, number],
): [number, number, number] {
  const train = Math.round(n * split[0]);
  const val = Math.round(n * split[1]);
  return [train, val, n - train - val];
}

function checkClassDirs(dataDir: string): void {
  const found = fs
    .readdirSync(dataDir, { withFileTypes: true })
    .filter((e) => e.isDirectory())
    .map((e) => e.name)
    .sort();
  const expected = [...CLASS_NAMES];
  const missing = expected.filter((c) => !found.includes(c));
  const extra = found.filter((c) => !(expected as string[]).includes(c));
  if (missing.length || extra.length) {
    throw new Error(
      `class directory mismatch in ${dataDir}: ` +
        `missing [${missing.join(', ')}], unexpected [${extra.join(', ')}]`,
    );
  }
}

/**
 * List every image with its class and split assignment.
 *
 * If `manifest.tsv` (from the image-generation pipeline) exists it is the
 * source of truth for splits; otherwise each class directory is split
 * per `config.split` after a seeded shuffle.
 */
export function listImages(config: TrainConfig): LabeledImage[] {
  checkClassDirs(config.dataDir);
  const manifest = path.join(config.dataDir, 'manifest.tsv');
  if (fs.existsSync(manifest)) {
    return readManifest(manifest, config.dataDir);
  }
  const images: LabeledImage[] = [];
  CLASS_NAMES.forEach((name, classIndex) => {
    const dir = path.join(config.dataDir, name);
    const files = fs
      .readdirSync(dir)
      .filter((f) => f.endsWith('.png'))
      .sort();
    const rand = seededRandom(config.seed + classIndex);
    const order = shuffled(files, rand);
    const [nTrain, nVal] = splitSizes(files.length, config.split);
    order.forEach((file, i) => {
      const split: Split = i < nTrain ? 'train' : i < nTrain + nVal ? 'val' : 'test';
      images.push({ path: path.join(dir, file), classIndex, split });
    });
  });
  images.sort((a, b) => (a.path < b.path ? -1 : a.path > b.path ? 1 : 0));
  return images;
}

function readManifest(manifestPath: string, dataDir: string): LabeledImage[] {
  const images: LabeledImage[] = [];
  for (const line of fs.readFileSync(manifestPath, 'utf8').split('\n')) {
    if (!line || line.startsWith('#')) continue;
    const [rel, label, , , , split] = line.split('\t');
    if (rel === 'path') continue; // header row
    const classIndex = (CLASS_NAMES as readonly string[]).indexOf(label);
    if (classIndex < 0) {
      throw new Error(`manifest lists unknown class '${label}'`);
    }
    images.push({
      path: path.join(dataDir, rel),
      classIndex,
      split: split as Split,
    });
  }
  return images;
}

/** Decode one PNG into a [height, width, 3] float tensor scaled to [0, 1]. */
export function decodePng(
  filePath: string,
  imageSize: [number, number],
): tf.Tensor3D {
  const png = PNG.sync.read(fs.readFileSync(filePath));
  const rgb = new Float32Array(png.width * png.height * 3);
  for (let i = 0; i < png.width * png.height; i++) {
    rgb[3 * i] = png.data[4 * i] / 255;
    rgb[3 * i + 1] = png.data[4 * i + 1] / 255;
    rgb[3 * i + 2] = png.data[4 * i + 2] / 255;
  }
  return tf.tidy(() => {
    const img = tf.tensor3d(rgb, [png.height, png.width, 3]);
    if (png.height === imageSize[0] && png.width === imageSize[1]) {
      return img.clone();
    }
    return tf.image.resizeBilinear(img, imageSize);
  });
}

export interface Batch {
  /** [batch, height, width, 3] pixels in [0, 1]. */
  images: tf.Tensor4D;
  /** [batch, numClasses] one-hot labels. */
  labels: tf.Tensor2D;
  paths: string[];
}

/**
 * A split's images as an iterable of batches. Order is a seeded shuffle
 * for the training split and sorted-path order otherwise.
 */
export class BatchStream {
  constructor(
    readonly items: LabeledImage[],
    private readonly config: TrainConfig,
    private readonly shuffle: boolean,
  ) {}

  get size(): number {
    return this.items.length;
  }

  order(epoch = 0): LabeledImage[] {
    if (!this.shuffle) return this.items;
    return shuffled(this.items, seededRandom(this.config.seed * 9973 + epoch));
  }

  *batches(epoch = 0): Generator<Batch> {
    const order = this.order(epoch);
    const { batchSize, imageSize, numClasses } = this.config;
    for (let start = 0; start < order.length; start += batchSize) {
      const chunk = order.slice(start, start + batchSize);
      const images = tf.stack(
        chunk.map((it) => decodePng(it.path, imageSize)),
      ) as tf.Tensor4D;
      const labels = tf.oneHot(
        tf.tensor1d(chunk.map((it) => it.classIndex), 'int32'),
        numClasses,
      ) as tf.Tensor2D;
      yield { images, labels, paths: chunk.map((it) => it.path) };
    }
  }

  /** Materialize the whole split as one tensor pair (small datasets only). */
  toTensors(): { xs: tf.Tensor4D; ys: tf.Tensor2D } {
    const parts: Batch[] = [...this.batches()];
    const xs = tf.concat(parts.map((b) => b.images)) as tf.Tensor4D;
    const ys = tf.concat(parts.map((b) => b.labels)) as tf.Tensor2D;
    parts.forEach((b) => {
      b.images.dispose();
      b.labels.dispose();
    });
    return { xs, ys };
  }
}

export interface DatasetSplits {
  train: BatchStream;
  val: BatchStream;
  test: BatchStream;
}

export function loadDataset(config: TrainConfig): DatasetSplits {
  const images = listImages(config);
  const bySplit = (s: Split) => images.filter((it) => it.split === s);
  return {
    train: new BatchStream(bySplit('train'), config, true),
    val: new BatchStream(bySplit('val'), config, false),
    test: new BatchStream(bySplit('test'), config, false),
  };
}
