/**
 * Command-line entry point: train the classifier on a dataset directory
 * produced by `scdkit dataset`, evaluate on the held-out test split, and
 * write the evaluation report plus model weights.
 */
import * as fs from 'fs';
import * as path from 'path';

import * as tf from '@tensorflow/tfjs';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { CUSTOM_CNN, makeConfig } from './config';
import { loadDataset } from './data';
import { predictClasses, trainCustomCnn } from './model';
import { evalReport, formatReport } from './report';

async function main(): Promise<void> {
  const argv = await yargs(hideBin(process.argv))
    .command('train', 'train and evaluate the classifier')
    .demandCommand(1)
    .option('data-dir', { type: 'string', demandOption: true })
    .option('out-dir', { type: 'string', default: 'runs/latest' })
    .option('epochs', { type: 'number', default: 15 })
    .option('image-size', { type: 'number', default: 224 })
    .option('batch-size', { type: 'number', default: 32 })
    .option('seed', { type: 'number', default: 0 })
    .option('patience', { type: 'number', default: 3 })
    .strict()
    .parse();

  const config = makeConfig(argv['data-dir'], {
    epochs: argv.epochs,
    imageSize: [argv['image-size'], argv['image-size']],
    batchSize: argv['batch-size'],
    seed: argv.seed,
    earlyStoppingPatience: argv.patience,
  });
  const data = loadDataset(config);
  console.log(
    `dataset: ${data.train.size} train / ${data.val.size} val / ` +
      `${data.test.size} test images`,
  );

  const t0 = Date.now();
  const { model, history, stoppedEarly } = await trainCustomCnn(
    config,
    CUSTOM_CNN,
    data,
    console.log,
  );
  console.log(
    `trained ${history.length} epochs in ${((Date.now() - t0) / 1000).toFixed(0)}s` +
      (stoppedEarly ? ' (early stop)' : ''),
  );

  const { predicted, actual } = await predictClasses(model, data.test);
  const report = evalReport(actual, predicted);
  const text = formatReport(report, { datasetName: config.dataDir });
  console.log('\n' + text);

  fs.mkdirSync(argv['out-dir'], { recursive: true });
  fs.writeFileSync(path.join(argv['out-dir'], 'eval_report.txt'), text + '\n');
  fs.writeFileSync(
    path.join(argv['out-dir'], 'eval_report.json'),
    JSON.stringify({ report, history }, null, 2) + '\n',
  );
  const saveDir = path.resolve(argv['out-dir'], 'model');
  fs.mkdirSync(saveDir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      fs.writeFileSync(
        path.join(saveDir, 'model.json'),
        JSON.stringify({
          modelTopology: artifacts.modelTopology,
          weightSpecs: artifacts.weightSpecs,
        }),
      );
      fs.writeFileSync(
        path.join(saveDir, 'weights.bin'),
        Buffer.from(artifacts.weightData as ArrayBuffer),
      );
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' } };
    }),
  );
  console.log(`report and weights written to ${argv['out-dir']}`);
}

main().catch((err) => {
  console.error(err instanceof Error ? err.message : err);
  process.exit(1);
});
