/**
 * File-system checkpoint IO for tfjs LayersModels.
 *
 * The pure-JS tfjs build ships no file:// handler, so we adapt the
 * browser-oriented IOHandler interface to plain directory reads/writes:
 * a checkpoint is a directory holding model.json plus its weight shards.
 */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';

interface ModelJson {
  modelTopology: {};
  format?: string;
  generatedBy?: string;
  convertedBy?: string | null;
  weightsManifest: Array<{
    paths: string[];
    weights: tf.io.WeightsManifestEntry[];
  }>;
}

export async function loadCheckpoint(dir: string): Promise<tf.LayersModel> {
  const modelPath = path.join(dir, 'model.json');
  if (!fs.existsSync(modelPath)) {
    throw new Error(`checkpoint ${dir} has no model.json`);
  }
  const doc: ModelJson = JSON.parse(fs.readFileSync(modelPath, 'utf8'));
  const weightSpecs: tf.io.WeightsManifestEntry[] = [];
  const shards: Buffer[] = [];
  for (const group of doc.weightsManifest) {
    weightSpecs.push(...group.weights);
    for (const rel of group.paths) {
      shards.push(fs.readFileSync(path.join(dir, rel)));
    }
  }
  const blob = Buffer.concat(shards);
  const weightData = blob.buffer.slice(
    blob.byteOffset,
    blob.byteOffset + blob.byteLength,
  );
  return tf.loadLayersModel({
    load: async () => ({
      modelTopology: doc.modelTopology,
      weightSpecs,
      weightData,
    }),
  });
}

export async function saveCheckpoint(
  model: tf.LayersModel,
  dir: string,
): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save({
    save: async (artifacts: tf.io.ModelArtifacts) => {
      const weightData = tf.io.CompositeArrayBuffer.join(artifacts.weightData);
      fs.writeFileSync(path.join(dir, 'weights.bin'), Buffer.from(weightData));
      const doc: ModelJson = {
        modelTopology: artifacts.modelTopology as {},
        format: 'layers-model',
        weightsManifest: [
          {
            paths: ['weights.bin'],
            weights: artifacts.weightSpecs ?? [],
          },
        ],
      };
      fs.writeFileSync(path.join(dir, 'model.json'), JSON.stringify(doc));
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: 'JSON' as const,
        },
      };
    },
  });
}
