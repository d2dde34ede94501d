/**
 * The convolutional classifier: construction, seeded training with early
 * stopping on validation loss, and prediction helpers.
 */
import * as tf from '@tensorflow/tfjs';

import { CustomCnnSpec, TrainConfig } from './config';
import { BatchStream, DatasetSplits } from './data';

/**
 * Build the network: for each entry in `convFilters`, a 3x3 same-padding
 * ReLU convolution followed by 2x2 max pooling; then flatten, a 128-unit
 * ReLU dense layer, dropout 0.5, and a softmax head.
 */
export function buildCustomCnn(
  spec: CustomCnnSpec,
  imageSize: [number, number],
  seed = 0,
): tf.Sequential {
  const model = tf.sequential();
  let first = true;
  for (const filters of spec.convFilters) {
    model.add(
      tf.layers.conv2d({
        filters,
        kernelSize: spec.kernelSize,
        padding: 'same',
        activation: 'relu',
        kernelInitializer: tf.initializers.glorotUniform({ seed: seed++ }),
        ...(first ? { inputShape: [imageSize[0], imageSize[1], 3] } : {}),
      }),
    );
    model.add(tf.layers.maxPooling2d({ poolSize: 2, strides: 2 }));
    first = false;
  }
  model.add(tf.layers.flatten());
  model.add(
    tf.layers.dense({
      units: spec.denseUnits,
      activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed++ }),
    }),
  );
  model.add(tf.layers.dropout({ rate: spec.dropoutRate, seed }));
  model.add(
    tf.layers.dense({
      units: spec.numClasses,
      activation: 'softmax',
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 1 }),
    }),
  );
  model.compile({
    optimizer: tf.train.adam(1e-3),
    loss: 'categoricalCrossentropy',
    metrics: ['accuracy'],
  });
  return model;
}

export interface EpochRecord {
  epoch: number;
  loss: number;
  accuracy: number;
  valLoss: number;
  valAccuracy: number;
}

export interface TrainResult {
  model: tf.Sequential;
  history: EpochRecord[];
  stoppedEarly: boolean;
}

async function evaluateStream(
  model: tf.Sequential,
  stream: BatchStream,
): Promise<{ loss: number; accuracy: number }> {
  let lossSum = 0;
  let correct = 0;
  let n = 0;
  for (const batch of stream.batches()) {
    const [loss, pred] = tf.tidy(() => {
      const p = model.predict(batch.images) as tf.Tensor2D;
      // categorical cross-entropy on the already-softmaxed outputs
      const ce = tf.neg(tf.sum(tf.mul(batch.labels, tf.log(tf.add(p, 1e-12))), 1));
      return [ce.sum(), p.argMax(1).equal(batch.labels.argMax(1)).sum()];
    });
    lossSum += (await loss.data())[0];
    correct += (await pred.data())[0];
    n += batch.paths.length;
    tf.dispose([loss, pred, batch.images, batch.labels]);
  }
  return { loss: lossSum / n, accuracy: correct / n };
}

/**
 * Train for up to `config.epochs` epochs, stopping when validation loss
 * has not improved for `config.earlyStoppingPatience` epochs. Weights from
 * the best validation epoch are restored. NaN training loss aborts.
 */
export async function trainCustomCnn(
  config: TrainConfig,
  spec: CustomCnnSpec,
  data: DatasetSplits,
  log: (line: string) => void = () => {},
): Promise<TrainResult> {
  const model = buildCustomCnn(spec, config.imageSize, config.seed);
  const history: EpochRecord[] = [];
  let bestValLoss = Infinity;
  let bestWeights: tf.Tensor[] | null = null;
  let sinceBest = 0;
  let stoppedEarly = false;

  for (let epoch = 0; epoch < config.epochs; epoch++) {
    let lossSum = 0;
    let correct = 0;
    let n = 0;
    for (const batch of data.train.batches(epoch)) {
      const out = await model.trainOnBatch(batch.images, batch.labels);
      const [loss, acc] = out as number[];
      if (Number.isNaN(loss)) {
        tf.dispose([batch.images, batch.labels]);
        throw new Error(
          `training diverged: NaN loss at epoch ${epoch + 1} ` +
            `after ${n} samples`,
        );
      }
      lossSum += loss * batch.paths.length;
      correct += acc * batch.paths.length;
      n += batch.paths.length;
      tf.dispose([batch.images, batch.labels]);
    }
    const val = await evaluateStream(model, data.val);
    const rec: EpochRecord = {
      epoch: epoch + 1,
      loss: lossSum / n,
      accuracy: correct / n,
      valLoss: val.loss,
      valAccuracy: val.accuracy,
    };
    history.push(rec);
    log(
      `epoch ${rec.epoch}/${config.epochs} ` +
        `loss=${rec.loss.toFixed(4)} acc=${rec.accuracy.toFixed(4)} ` +
        `val_loss=${rec.valLoss.toFixed(4)} val_acc=${rec.valAccuracy.toFixed(4)}`,
    );
    if (val.loss < bestValLoss) {
      bestValLoss = val.loss;
      if (bestWeights) tf.dispose(bestWeights);
      bestWeights = model.getWeights().map((w) => w.clone());
      sinceBest = 0;
    } else {
      sinceBest++;
      if (sinceBest >= config.earlyStoppingPatience) {
        stoppedEarly = true;
        log(`early stop: val_loss flat for ${sinceBest} epochs`);
        break;
      }
    }
  }
  if (bestWeights) {
    model.setWeights(bestWeights);
    tf.dispose(bestWeights);
  }
  return { model, history, stoppedEarly };
}

/** Predicted class index for every item in a stream, in stream order. */
export async function predictClasses(
  model: tf.LayersModel,
  stream: BatchStream,
): Promise<{ predicted: number[]; actual: number[] }> {
  const predicted: number[] = [];
  const actual: number[] = [];
  for (const batch of stream.batches()) {
    const p = tf.tidy(
      () => (model.predict(batch.images) as tf.Tensor2D).argMax(1),
    );
    predicted.push(...Array.from(await p.data()));
    actual.push(
      ...Array.from(await batch.labels.argMax(1).data()),
    );
    tf.dispose([p, batch.images, batch.labels]);
  }
  return { predicted, actual };
}
