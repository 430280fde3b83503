import * as crypto from 'node:crypto';
import * as fs from 'node:fs';
import * as path from 'node:path';
import * as tf from '@tensorflow/tfjs';

import { DatasetNotFound, ShapeMismatch } from './errors.js';
import { readPpm } from './ppm.js';
import { loadZooModel, listZoo } from './zoo.js';
import { atomicWrite, encodeLabels, encodeManifest, encodeMatrix, ManifestEntry } from './xfsc.js';

export interface ExportJob {
  zooDir: string;
  modelId: string;
  imagesDir: string;
  outDir: string;
  batchSize?: number;
}

export interface LabeledImage {
  file: string;
  label: number;
}

/** Parse the fixture index: one `filename,label` pair per line. */
export function readImageIndex(imagesDir: string): LabeledImage[] {
  const indexPath = path.join(imagesDir, 'labels.csv');
  if (!fs.existsSync(indexPath)) {
    throw new DatasetNotFound(`no labels.csv under ${imagesDir}`);
  }
  const out: LabeledImage[] = [];
  for (const line of fs.readFileSync(indexPath, 'utf-8').split('\n')) {
    const text = line.trim();
    if (!text || text.startsWith('#')) continue;
    const [file, labelText] = text.split(',');
    const label = Number(labelText);
    if (!file || !Number.isInteger(label) || label < 0) {
      throw new ShapeMismatch(`bad index line: ${text}`);
    }
    out.push({ file: path.join(imagesDir, file), label });
  }
  if (out.length === 0) throw new DatasetNotFound(`labels.csv under ${imagesDir} lists no images`);
  return out;
}

/** Decode, bilinear-resize to the model's square input, scale to [-1, 1]. */
export function imageToTensor(file: string, inputSize: number): tf.Tensor3D {
  const img = readPpm(file);
  return tf.tidy(() => {
    const raw = tf.tensor3d(img.pixels, [img.height, img.width, 3], 'int32').toFloat();
    const resized =
      img.height === inputSize && img.width === inputSize
        ? raw
        : tf.image.resizeBilinear(raw as tf.Tensor3D, [inputSize, inputSize]);
    return resized.div(127.5).sub(1.0);
  });
}

function sha256(buf: Buffer): string {
  return crypto.createHash('sha256').update(buf).digest('hex');
}

export interface ExportResult {
  modelId: string;
  n: number;
  numClasses: number;
  featureDim: number;
  files: Record<string, string>; // name -> sha256
}

export async function exportModel(job: ExportJob): Promise<ExportResult> {
  const zoo = await loadZooModel(job.zooDir, job.modelId);
  const index = readImageIndex(job.imagesDir);
  const n = index.length;
  const batchSize = job.batchSize ?? 32;

  const predRows: Float32Array[] = [];
  const featRows: Float32Array[] = [];
  for (let start = 0; start < n; start += batchSize) {
    const chunk = index.slice(start, start + batchSize);
    const tensors = chunk.map(item => imageToTensor(item.file, zoo.inputSize));
    const batch = tf.stack(tensors);
    tensors.forEach(t => t.dispose());
    const [feats, preds] = zoo.model.predict(batch) as tf.Tensor[];
    const featData = (await feats.data()) as Float32Array;
    const predData = (await preds.data()) as Float32Array;
    for (let i = 0; i < chunk.length; i++) {
      featRows.push(featData.subarray(i * zoo.featureDim, (i + 1) * zoo.featureDim));
      predRows.push(predData.subarray(i * zoo.numClasses, (i + 1) * zoo.numClasses));
    }
    batch.dispose();
    feats.dispose();
    preds.dispose();
  }

  const flatten = (rows: Float32Array[], cols: number): Float64Array => {
    const out = new Float64Array(n * cols);
    rows.forEach((row, i) => {
      if (row.length !== cols) throw new ShapeMismatch(`row ${i} has ${row.length} values, expected ${cols}`);
      out.set(row, i * cols);
    });
    return out;
  };

  const outDir = path.join(job.outDir, job.modelId);
  fs.mkdirSync(outDir, { recursive: true });
  const payloads: Record<string, Buffer> = {
    'predictions.bin': encodeMatrix({ rows: n, cols: zoo.numClasses, data: flatten(predRows, zoo.numClasses) }),
    'features.bin': encodeMatrix({ rows: n, cols: zoo.featureDim, data: flatten(featRows, zoo.featureDim) }),
    'labels.txt': encodeLabels(index.map(item => item.label)),
  };
  const files: Record<string, string> = {};
  for (const [name, payload] of Object.entries(payloads)) {
    atomicWrite(path.join(outDir, name), payload);
    files[name] = sha256(payload);
  }

  const metadata = {
    model_id: job.modelId,
    dataset: path.basename(job.imagesDir),
    n,
    num_source_classes: zoo.numClasses,
    feature_dim: zoo.featureDim,
    input_size: zoo.inputSize,
    normalization: 'bilinear resize, pixels scaled to [-1, 1]',
    sha256: files,
  };
  atomicWrite(path.join(outDir, 'metadata.json'), Buffer.from(JSON.stringify(metadata, null, 2) + '\n', 'utf-8'));

  return { modelId: job.modelId, n, numClasses: zoo.numClasses, featureDim: zoo.featureDim, files };
}

/** Export every model in the zoo and write one manifest covering them all. */
export async function exportZoo(zooDir: string, imagesDir: string, outDir: string): Promise<ExportResult[]> {
  const results: ExportResult[] = [];
  const entries: ManifestEntry[] = [];
  for (const id of listZoo(zooDir)) {
    const result = await exportModel({ zooDir, modelId: id, imagesDir, outDir });
    results.push(result);
    entries.push({
      model_id: id,
      predictions_path: `${id}/predictions.bin`,
      labels_path: `${id}/labels.txt`,
      features_path: `${id}/features.bin`,
    });
  }
  fs.mkdirSync(outDir, { recursive: true });
  atomicWrite(path.join(outDir, 'manifest.json'), encodeManifest(entries));
  return results;
}
