/**
 * Feature extraction: forward a trained model over labeled samples and dump
 * each selected layer's post-activation output in the interchange format.
 */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';

import { loadCheckpoint } from './checkpoint.js';
import { readLabels, readNpy, writeNpy } from './npy.js';

export type FlattenPolicy = 'gap' | 'flatten';

export interface ExtractionSpec {
  /** Directory holding model.json + weight shards. */
  checkpoint: string;
  /** Directory holding inputs.npy (<f4/<f8) and labels.npy (<i8). */
  data: string;
  /** Optional second dataset for a test-accuracy entry. */
  testData?: string;
  /** Layer names to capture; empty means every post-activation layer. */
  layers: string[];
  /** Samples kept per class (>= 2). */
  perClass: number;
  /** 'gap': average spatial axes, keep channels. 'flatten': ravel everything. */
  policy: FlattenPolicy;
  seed: number;
  out: string;
  modelId?: string;
  batchSize?: number;
}

export interface ExtractionResult {
  manifestPath: string;
  modelId: string;
  layerIds: string[];
  trainAccuracy: number;
  testAccuracy: number | null;
  samplesKept: number;
}

/** Small deterministic PRNG so sample selection is reproducible. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Pick up to perClass indices from each class with a seeded shuffle,
 * returning them in original dataset order.
 */
export function selectPerClass(
  labels: number[],
  perClass: number,
  seed: number,
): number[] {
  if (perClass < 2) {
    throw new Error(`per-class budget must be >= 2, got ${perClass}`);
  }
  const byClass = new Map<number, number[]>();
  labels.forEach((y, i) => {
    const bucket = byClass.get(y) ?? [];
    bucket.push(i);
    byClass.set(y, bucket);
  });
  const chosen: number[] = [];
  for (const cls of [...byClass.keys()].sort((a, b) => a - b)) {
    const idx = [...byClass.get(cls)!];
    if (idx.length < 2) {
      throw new Error(`class ${cls} has only ${idx.length} sample(s); need >= 2`);
    }
    const rand = mulberry32(seed ^ (cls * 0x9e3779b9));
    for (let i = idx.length - 1; i > 0; i--) {
      const j = Math.floor(rand() * (i + 1));
      [idx[i], idx[j]] = [idx[j], idx[i]];
    }
    chosen.push(...idx.slice(0, Math.min(perClass, idx.length)));
  }
  return chosen.sort((a, b) => a - b);
}

function loadDataset(dir: string): { inputs: tf.Tensor; labels: number[] } {
  const raw = readNpy(path.join(dir, 'inputs.npy'));
  if (raw.dtype === '<i8') {
    throw new Error(`${dir}/inputs.npy: inputs must be float`);
  }
  const labels = readLabels(path.join(dir, 'labels.npy'));
  if (raw.shape[0] !== labels.length) {
    throw new Error(
      `${dir}: ${raw.shape[0]} inputs vs ${labels.length} labels`,
    );
  }
  const inputs = tf.tensor(Float32Array.from(raw.data as ArrayLike<number>), raw.shape);
  return { inputs, labels };
}

function resolveLayers(model: tf.LayersModel, names: string[]): tf.layers.Layer[] {
  const all = model.layers.filter(l => l.getClassName() !== 'InputLayer');
  if (names.length === 0) {
    return all;
  }
  const byName = new Map(all.map(l => [l.name, l]));
  return names.map(name => {
    const layer = byName.get(name);
    if (!layer) {
      throw new Error(
        `layer '${name}' not in model; available: ${all.map(l => l.name).join(', ')}`,
      );
    }
    return layer;
  });
}

function flatten(t: tf.Tensor, policy: FlattenPolicy): tf.Tensor {
  if (t.rank <= 2) {
    return t;
  }
  if (policy === 'gap') {
    // average every axis between batch and channels
    const spatial = Array.from({ length: t.rank - 2 }, (_, i) => i + 1);
    return t.mean(spatial);
  }
  return t.reshape([t.shape[0], -1]);
}

function batchedPredict(
  model: tf.LayersModel,
  inputs: tf.Tensor,
  batchSize: number,
): tf.Tensor[] {
  const nOut = model.outputs.length;
  const parts: tf.Tensor[][] = Array.from({ length: nOut }, () => []);
  const n = inputs.shape[0];
  for (let start = 0; start < n; start += batchSize) {
    const batch = inputs.slice(start, Math.min(batchSize, n - start));
    const out = model.predict(batch, { batchSize });
    const outs = Array.isArray(out) ? out : [out];
    outs.forEach((t, i) => parts[i].push(t));
    batch.dispose();
  }
  return parts.map(chunk => {
    const joined = tf.concat(chunk, 0);
    chunk.forEach(t => t.dispose());
    return joined;
  });
}

function accuracy(
  model: tf.LayersModel,
  inputs: tf.Tensor,
  labels: number[],
  batchSize: number,
): number {
  const [logits] = batchedPredict(model, inputs, batchSize);
  const pred = logits.argMax(-1).arraySync() as number[];
  logits.dispose();
  let hits = 0;
  pred.forEach((p, i) => {
    if (p === labels[i]) hits++;
  });
  return hits / labels.length;
}

export async function extract(spec: ExtractionSpec): Promise<ExtractionResult> {
  const model = await loadCheckpoint(spec.checkpoint);
  const { inputs, labels } = loadDataset(spec.data);
  const batchSize = spec.batchSize ?? 256;
  const modelId = spec.modelId ?? path.basename(path.resolve(spec.checkpoint));

  const trainAccuracy = accuracy(model, inputs, labels, batchSize);
  let testAccuracy: number | null = null;
  if (spec.testData) {
    const test = loadDataset(spec.testData);
    testAccuracy = accuracy(model, test.inputs, test.labels, batchSize);
    test.inputs.dispose();
  }

  const layers = resolveLayers(model, spec.layers);
  const tap = tf.model({
    inputs: model.inputs,
    outputs: layers.map(l => l.output as tf.SymbolicTensor),
  });

  const keep = selectPerClass(labels, spec.perClass, spec.seed);
  const subset = tf.gather(inputs, keep);
  inputs.dispose();
  const keptLabels = BigInt64Array.from(keep, i => BigInt(labels[i]));

  const modelDir = path.join(spec.out, modelId);
  fs.mkdirSync(modelDir, { recursive: true });
  const activations = batchedPredict(tap, subset, batchSize);
  subset.dispose();

  const manifestLayers: Array<{ layer_id: string; features: string; labels: string }> = [];
  for (let i = 0; i < layers.length; i++) {
    const flat = flatten(activations[i], spec.policy);
    const values = flat.dataSync() as Float32Array;
    const layerId = layers[i].name;
    const featRel = path.join(modelId, `${layerId}.features.npy`);
    const labRel = path.join(modelId, `${layerId}.labels.npy`);
    writeNpy(path.join(spec.out, featRel), {
      dtype: '<f4',
      shape: [flat.shape[0], flat.shape[1]!],
      data: Float32Array.from(values),
    });
    writeNpy(path.join(spec.out, labRel), {
      dtype: '<i8',
      shape: [keptLabels.length],
      data: keptLabels,
    });
    manifestLayers.push({ layer_id: layerId, features: featRel, labels: labRel });
    flat.dispose();
    activations[i].dispose();
  }

  const manifestPath = path.join(spec.out, 'manifest.json');
  const manifest = {
    models: [
      {
        model_id: modelId,
        train_accuracy: trainAccuracy,
        test_accuracy: testAccuracy,
        layers: manifestLayers,
      },
    ],
  };
  fs.writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + '\n');

  return {
    manifestPath,
    modelId,
    layerIds: manifestLayers.map(l => l.layer_id),
    trainAccuracy,
    testAccuracy,
    samplesKept: keep.length,
  };
}
