#!/usr/bin/env node
/** CLI entry: `extract` dumps per-layer features + a manifest. */

import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { extract, FlattenPolicy } from './extract.js';

export async function main(argv: string[]): Promise<number> {
  const parser = yargs(argv)
    .scriptName('dl-extract')
    .command(
      'extract',
      'run a checkpoint over a dataset and dump intermediate-layer features',
      y =>
        y
          .option('checkpoint', { type: 'string', demandOption: true, describe: 'directory with model.json' })
          .option('data', { type: 'string', demandOption: true, describe: 'directory with inputs.npy + labels.npy' })
          .option('test-data', { type: 'string', describe: 'optional held-out dataset directory' })
          .option('layers', { type: 'string', default: '', describe: 'comma-separated layer names; empty = all' })
          .option('per-class', { type: 'number', demandOption: true, describe: 'samples kept per class' })
          .option('policy', { choices: ['gap', 'flatten'] as const, default: 'gap' as FlattenPolicy })
          .option('seed', { type: 'number', default: 0 })
          .option('model-id', { type: 'string', describe: 'manifest model id; defaults to checkpoint dir name' })
          .option('out', { type: 'string', demandOption: true }),
    )
    .demandCommand(1)
    .strict()
    .exitProcess(false);

  const args = await parser.parse();
  try {
    const result = await extract({
      checkpoint: args.checkpoint as string,
      data: args.data as string,
      testData: args['test-data'] as string | undefined,
      layers: (args.layers as string)
        .split(',')
        .map(s => s.trim())
        .filter(s => s.length > 0),
      perClass: args['per-class'] as number,
      policy: args.policy as FlattenPolicy,
      seed: args.seed as number,
      out: args.out as string,
      modelId: args['model-id'] as string | undefined,
    });
    console.log(
      `wrote ${result.layerIds.length} layer(s) x ${result.samplesKept} samples ` +
        `for ${result.modelId} (train acc ${result.trainAccuracy.toFixed(4)}) -> ${result.manifestPath}`,
    );
    return 0;
  } catch (err) {
    console.error(`extract failed: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

const isDirect =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split('/').pop() ?? '');
if (isDirect) {
  main(hideBin(process.argv)).then(code => {
    process.exitCode = code;
  });
}
