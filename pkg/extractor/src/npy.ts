/**
 * Minimal NPY v1.0 reader/writer for the interchange files.
 *
 * Only the dtypes the toolkit exchanges are supported: little-endian
 * float32/float64 for features and int64 for labels, C-contiguous order.
 */

import * as fs from 'fs';

const MAGIC = Buffer.from('\x93NUMPY', 'latin1');

export type NpyDtype = '<f4' | '<f8' | '<i8';

export interface NpyArray {
  dtype: NpyDtype;
  shape: number[];
  /** Flat C-order values; bigint[] for '<i8', number[] otherwise. */
  data: Float32Array | Float64Array | BigInt64Array;
}

function headerFor(dtype: NpyDtype, shape: number[]): Buffer {
  const shapeStr =
    shape.length === 1 ? `(${shape[0]},)` : `(${shape.join(', ')})`;
  let header = `{'descr': '${dtype}', 'fortran_order': False, 'shape': ${shapeStr}, }`;
  // pad with spaces so magic+version+len+header is a multiple of 64, '\n' last
  const unpadded = MAGIC.length + 2 + 2 + header.length + 1;
  const pad = (64 - (unpadded % 64)) % 64;
  header = header + ' '.repeat(pad) + '\n';
  const out = Buffer.alloc(MAGIC.length + 2 + 2 + header.length);
  MAGIC.copy(out, 0);
  out[MAGIC.length] = 1; // major version
  out[MAGIC.length + 1] = 0; // minor version
  out.writeUInt16LE(header.length, MAGIC.length + 2);
  out.write(header, MAGIC.length + 4, 'latin1');
  return out;
}

export function writeNpy(path: string, arr: NpyArray): void {
  const count = arr.shape.reduce((a, b) => a * b, 1);
  if (arr.data.length !== count) {
    throw new Error(
      `shape ${JSON.stringify(arr.shape)} wants ${count} values, got ${arr.data.length}`,
    );
  }
  const header = headerFor(arr.dtype, arr.shape);
  const body = Buffer.from(arr.data.buffer, arr.data.byteOffset, arr.data.byteLength);
  fs.writeFileSync(path, Buffer.concat([header, body]));
}

export function readNpy(path: string): NpyArray {
  const buf = fs.readFileSync(path);
  if (buf.length < 10 || !buf.subarray(0, 6).equals(MAGIC)) {
    throw new Error(`${path}: not an NPY file`);
  }
  if (buf[6] !== 1 || buf[7] !== 0) {
    throw new Error(`${path}: unsupported NPY version ${buf[6]}.${buf[7]}`);
  }
  const headerLen = buf.readUInt16LE(8);
  const header = buf.subarray(10, 10 + headerLen).toString('latin1');
  const descr = /'descr':\s*'([^']+)'/.exec(header);
  const fortran = /'fortran_order':\s*(True|False)/.exec(header);
  const shapeMatch = /'shape':\s*\(([^)]*)\)/.exec(header);
  if (!descr || !fortran || !shapeMatch) {
    throw new Error(`${path}: malformed NPY header: ${header.trim()}`);
  }
  if (fortran[1] !== 'False') {
    throw new Error(`${path}: fortran-order arrays are not supported`);
  }
  const dtype = descr[1] as NpyDtype;
  const shape = shapeMatch[1]
    .split(',')
    .map(s => s.trim())
    .filter(s => s.length > 0)
    .map(s => parseInt(s, 10));
  const count = shape.reduce((a, b) => a * b, 1);
  const body = buf.subarray(10 + headerLen);
  const copy = (size: number) => {
    if (body.length < count * size) {
      throw new Error(`${path}: truncated payload`);
    }
    // slice to drop the header offset so typed-array views start at 0
    return body.buffer.slice(body.byteOffset, body.byteOffset + count * size);
  };
  let data: NpyArray['data'];
  switch (dtype) {
    case '<f4':
      data = new Float32Array(copy(4));
      break;
    case '<f8':
      data = new Float64Array(copy(8));
      break;
    case '<i8':
      data = new BigInt64Array(copy(8));
      break;
    default:
      throw new Error(`${path}: unsupported dtype ${descr[1]}`);
  }
  return { dtype, shape, data };
}

/** Labels as plain numbers, checking they survive the int64 -> number trip. */
export function readLabels(path: string): number[] {
  const arr = readNpy(path);
  if (arr.dtype !== '<i8' || arr.shape.length !== 1) {
    throw new Error(`${path}: expected a 1-D <i8 label vector`);
  }
  return Array.from(arr.data as BigInt64Array, v => {
    if (v > BigInt(Number.MAX_SAFE_INTEGER) || v < 0n) {
      throw new Error(`${path}: label ${v} out of range`);
    }
    return Number(v);
  });
}
