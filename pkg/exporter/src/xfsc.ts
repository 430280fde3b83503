// Exchange formats consumed by the xferscore CLI: a little-endian binary
// matrix container, one-integer-per-line label files, and the JSON
// experiment manifest. Numbers are written as float64 so the scoring side
// never loses bits we computed here.

import * as fs from 'node:fs';
import * as path from 'node:path';

export const MAGIC = 'XFSC';
export const BIN_VERSION = 1;
const HEADER_BYTES = 4 + 4 + 8 + 8;

export interface Matrix {
  rows: number;
  cols: number;
  data: Float64Array; // row-major
}

export function encodeMatrix(m: Matrix): Buffer {
  if (m.data.length !== m.rows * m.cols) {
    throw new RangeError(`matrix data length ${m.data.length} != ${m.rows}x${m.cols}`);
  }
  const buf = Buffer.alloc(HEADER_BYTES + 8 * m.data.length);
  buf.write(MAGIC, 0, 'ascii');
  buf.writeUInt32LE(BIN_VERSION, 4);
  buf.writeBigUInt64LE(BigInt(m.rows), 8);
  buf.writeBigUInt64LE(BigInt(m.cols), 16);
  for (let i = 0; i < m.data.length; i++) {
    buf.writeDoubleLE(m.data[i], HEADER_BYTES + 8 * i);
  }
  return buf;
}

export function decodeMatrix(buf: Buffer): Matrix {
  if (buf.length < HEADER_BYTES) {
    throw new RangeError(`short header: ${buf.length} bytes`);
  }
  if (buf.toString('ascii', 0, 4) !== MAGIC || buf.readUInt32LE(4) !== BIN_VERSION) {
    throw new RangeError('bad magic or version');
  }
  const rows = Number(buf.readBigUInt64LE(8));
  const cols = Number(buf.readBigUInt64LE(16));
  if (buf.length !== HEADER_BYTES + 8 * rows * cols) {
    throw new RangeError('payload size disagrees with header');
  }
  const data = new Float64Array(rows * cols);
  for (let i = 0; i < data.length; i++) {
    data[i] = buf.readDoubleLE(HEADER_BYTES + 8 * i);
  }
  return { rows, cols, data };
}

export function encodeLabels(labels: number[]): Buffer {
  for (const y of labels) {
    if (!Number.isInteger(y)) throw new RangeError(`label ${y} is not an integer`);
  }
  return Buffer.from(labels.map(y => `${y}\n`).join(''), 'utf-8');
}

export interface ManifestEntry {
  model_id: string;
  predictions_path: string; // relative to the manifest file
  labels_path: string;
  features_path?: string;
}

export function encodeManifest(entries: ManifestEntry[]): Buffer {
  return Buffer.from(JSON.stringify({ version: '1', entries }, null, 2) + '\n', 'utf-8');
}

/** Write via a temp file in the same directory, then rename into place. */
export function atomicWrite(file: string, payload: Buffer): void {
  const tmp = path.join(path.dirname(file), `.${path.basename(file)}.tmp-${process.pid}`);
  fs.writeFileSync(tmp, payload);
  fs.renameSync(tmp, file);
}
