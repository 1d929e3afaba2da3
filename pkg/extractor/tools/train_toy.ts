/**
 * Train a small 10-class toy model on Gaussian blobs and save a checkpoint
 * plus train/test dataset directories, ready for the extract command.
 *
 *   npm run train-toy -- --out /tmp/toy [--per-class 80] [--seed 0]
 */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { saveCheckpoint } from '../src/checkpoint.js';
import { mulberry32 } from '../src/extract.js';
import { writeNpy } from '../src/npy.js';

const N_CLASSES = 10;
const DIM = 16;

function gaussian(rand: () => number): number {
  // Box-Muller; rand() is in [0, 1)
  const u = Math.max(rand(), 1e-12);
  return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * rand());
}

function makeCenters(seed: number): number[][] {
  const rand = mulberry32(seed);
  const centers: number[][] = [];
  for (let c = 0; c < N_CLASSES; c++) {
    centers.push(Array.from({ length: DIM }, () => 3.0 * gaussian(rand)));
  }
  return centers;
}

function makeBlobs(centers: number[][], perClass: number, seed: number, spread: number) {
  const rand = mulberry32(seed);
  const features = new Float32Array(N_CLASSES * perClass * DIM);
  const labels = new BigInt64Array(N_CLASSES * perClass);
  let row = 0;
  for (let c = 0; c < N_CLASSES; c++) {
    for (let s = 0; s < perClass; s++) {
      for (let d = 0; d < DIM; d++) {
        features[row * DIM + d] = centers[c][d] + spread * gaussian(rand);
      }
      labels[row] = BigInt(c);
      row++;
    }
  }
  return { features, labels, n: row };
}

function writeDataset(dir: string, blob: ReturnType<typeof makeBlobs>) {
  fs.mkdirSync(dir, { recursive: true });
  writeNpy(path.join(dir, 'inputs.npy'), {
    dtype: '<f4',
    shape: [blob.n, DIM],
    data: blob.features,
  });
  writeNpy(path.join(dir, 'labels.npy'), {
    dtype: '<i8',
    shape: [blob.n],
    data: blob.labels,
  });
}

async function main() {
  const args = await yargs(hideBin(process.argv))
    .option('out', { type: 'string', demandOption: true })
    .option('per-class', { type: 'number', default: 80 })
    .option('seed', { type: 'number', default: 0 })
    .option('epochs', { type: 'number', default: 30 })
    .strict()
    .parse();

  const centers = makeCenters(args.seed);
  const train = makeBlobs(centers, args['per-class'], args.seed + 1, 1.2);
  const test = makeBlobs(centers, Math.max(20, Math.floor(args['per-class'] / 2)), args.seed + 2, 1.2);
  writeDataset(path.join(args.out, 'train'), train);
  writeDataset(path.join(args.out, 'test'), test);

  const model = tf.sequential({
    layers: [
      tf.layers.dense({ inputShape: [DIM], units: 32, activation: 'relu', name: 'hidden_0' }),
      tf.layers.dense({ units: 24, activation: 'relu', name: 'hidden_1' }),
      tf.layers.dense({ units: 16, activation: 'relu', name: 'hidden_2' }),
      tf.layers.dense({ units: N_CLASSES, activation: 'softmax', name: 'probs' }),
    ],
  });
  model.compile({
    optimizer: tf.train.adam(0.01),
    loss: 'sparseCategoricalCrossentropy',
    metrics: ['accuracy'],
  });

  const x = tf.tensor2d(train.features, [train.n, DIM]);
  const y = tf.tensor1d(Float32Array.from(train.labels, Number));
  const history = await model.fit(x, y, {
    epochs: args.epochs,
    batchSize: 64,
    shuffle: true,
    verbose: 0,
  });
  const accs = history.history['acc'] ?? history.history['accuracy'];
  const finalAcc = Number(accs[accs.length - 1]);

  await saveCheckpoint(model, path.join(args.out, 'checkpoint'));
  console.log(
    `saved ${path.join(args.out, 'checkpoint')} ` +
      `(train acc ${finalAcc.toFixed(4)}, ${train.n} train / ${test.n} test samples)`,
  );
}

main().catch(err => {
  console.error(err);
  process.exitCode = 1;
});
