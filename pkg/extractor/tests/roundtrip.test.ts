/**
 * Cross-component integration: extract features from a small trained
 * 10-class model and make sure the Python toolkit consumes them.
 * Requires python3 with the distortion-lens package installed.
 */

import { spawnSync } from 'child_process';
import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { saveCheckpoint } from '../src/checkpoint.js';
import { extract, mulberry32 } from '../src/extract.js';
import { writeNpy } from '../src/npy.js';

const python = spawnSync('python3', ['-c', 'import distortion_lens']).status === 0
  ? 'python3'
  : null;

const N_CLASSES = 10;
const DIM = 12;

function gaussian(rand: () => number): number {
  const u = Math.max(rand(), 1e-12);
  return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * rand());
}

function blobs(perClass: number, seed: number) {
  const rand = mulberry32(seed);
  const centerRand = mulberry32(1234);
  const centers = Array.from({ length: N_CLASSES }, () =>
    Array.from({ length: DIM }, () => 3.0 * gaussian(centerRand)),
  );
  const n = N_CLASSES * perClass;
  const x = new Float32Array(n * DIM);
  const y: number[] = [];
  for (let i = 0; i < n; i++) {
    const c = i % N_CLASSES;
    y.push(c);
    for (let d = 0; d < DIM; d++) {
      x[i * DIM + d] = centers[c][d] + gaussian(rand);
    }
  }
  return { x, y, n };
}

let dir: string;
beforeAll(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), 'roundtrip-'));
});
afterAll(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

describe.skipIf(python === null)('round trip with the Python toolkit', () => {
  it(
    'extracted features load via load_feature_set and score end to end',
    { timeout: 300_000 },
    async () => {
      const train = blobs(30, 5);
      const dataDir = path.join(dir, 'train');
      fs.mkdirSync(dataDir, { recursive: true });
      writeNpy(path.join(dataDir, 'inputs.npy'), {
        dtype: '<f4',
        shape: [train.n, DIM],
        data: train.x,
      });
      writeNpy(path.join(dataDir, 'labels.npy'), {
        dtype: '<i8',
        shape: [train.n],
        data: BigInt64Array.from(train.y, BigInt),
      });

      const model = tf.sequential({
        layers: [
          tf.layers.dense({ inputShape: [DIM], units: 24, activation: 'relu', name: 'h0' }),
          tf.layers.dense({ units: 16, activation: 'relu', name: 'h1' }),
          tf.layers.dense({ units: N_CLASSES, activation: 'softmax', name: 'probs' }),
        ],
      });
      model.compile({
        optimizer: tf.train.adam(0.01),
        loss: 'sparseCategoricalCrossentropy',
        metrics: ['accuracy'],
      });
      const x = tf.tensor2d(train.x, [train.n, DIM]);
      const y = tf.tensor1d(Float32Array.from(train.y));
      await model.fit(x, y, { epochs: 20, batchSize: 64, verbose: 0 });

      const ckpt = path.join(dir, 'ckpt');
      await saveCheckpoint(model, ckpt);
      const out = path.join(dir, 'extracted');
      const start = Date.now();
      const result = await extract({
        checkpoint: ckpt,
        data: dataDir,
        layers: [],
        perClass: 20,
        policy: 'gap',
        seed: 3,
        out,
        modelId: 'toy',
      });
      expect(result.layerIds).toEqual(['h0', 'h1', 'probs']);
      expect(result.trainAccuracy).toBeGreaterThan(0.8);

      const check = spawnSync(
        python!,
        [
          '-c',
          `
import sys
from distortion_lens.feature_store import load_manifest
man = load_manifest(sys.argv[1])
model = man.models[0]
assert model.model_id == "toy"
for layer in model.layers:
    fs = man.load_layer(model, layer)
    assert fs.n_samples == 200, fs.n_samples
    assert fs.num_classes == 10
print("ok")
`,
          path.join(out, 'manifest.json'),
        ],
        { encoding: 'utf8' },
      );
      expect(check.stderr).toBe('');
      expect(check.stdout.trim()).toBe('ok');

      const score = spawnSync(
        python!,
        [
          '-m', 'distortion_lens.cli', 'score',
          '--manifest', path.join(out, 'manifest.json'),
          '--measures', 'l2,gmm,svm,svs',
          '--out', path.join(dir, 'score'),
          '--seed', '1',
        ],
        { encoding: 'utf8' },
      );
      expect(score.status, score.stderr).toBe(0);
      const report = JSON.parse(
        fs.readFileSync(path.join(dir, 'score', 'report.json'), 'utf8'),
      );
      expect(report.measures).toHaveLength(4);
      for (const entry of report.measures) {
        expect(entry.models).toHaveLength(1);
        expect(Object.keys(entry.models[0].per_layer)).toEqual(['h0', 'h1', 'probs']);
      }
      // paper-style per-model budget
      expect(Date.now() - start).toBeLessThan(5 * 60 * 1000);
    },
  );
});
