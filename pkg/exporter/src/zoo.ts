// Bundled model zoo. Models are ordinary tfjs layers models stored on disk
// as model.json + weights.bin (the standard serialization, written through
// a custom IOHandler so no filesystem plugin is needed). Each classifier
// ends in global average pooling followed by a softmax head; the pooling
// output is what gets exported as the feature vector.

import * as fs from 'node:fs';
import * as path from 'node:path';
import * as tf from '@tensorflow/tfjs';

import { ModelNotFound } from './errors.js';

export interface ZooModel {
  id: string;
  inputSize: number; // square HxW
  numClasses: number;
  featureDim: number;
  model: tf.LayersModel; // maps images to [features, predictions]
}

export async function saveModelDir(model: tf.LayersModel, dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async artifacts => {
      const manifest = {
        modelTopology: artifacts.modelTopology,
        format: 'layers-model',
        generatedBy: `TensorFlow.js ${tf.version.tfjs}`,
        weightsManifest: [{ paths: ['weights.bin'], weights: artifacts.weightSpecs }],
      };
      fs.writeFileSync(path.join(dir, 'model.json'), JSON.stringify(manifest));
      fs.writeFileSync(path.join(dir, 'weights.bin'), Buffer.from(artifacts.weightData as ArrayBuffer));
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' } };
    }),
  );
}

export async function loadModelDir(dir: string): Promise<tf.LayersModel> {
  const jsonPath = path.join(dir, 'model.json');
  if (!fs.existsSync(jsonPath)) throw new ModelNotFound(`no model.json under ${dir}`);
  const manifest = JSON.parse(fs.readFileSync(jsonPath, 'utf-8'));
  const weightData = fs.readFileSync(path.join(dir, 'weights.bin'));
  const weightSpecs = manifest.weightsManifest.flatMap((g: { weights: unknown[] }) => g.weights);
  return tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: manifest.modelTopology,
      weightSpecs,
      weightData: weightData.buffer.slice(
        weightData.byteOffset,
        weightData.byteOffset + weightData.byteLength,
      ),
    }),
  );
}

/**
 * Rebuild the saved classifier as a two-output model: the activations of the
 * last pooling layer (the layer feeding the classifier head) plus the
 * softmax predictions.
 */
export function withFeatureOutput(model: tf.LayersModel): tf.LayersModel {
  const layers = model.layers;
  const head = layers[layers.length - 1];
  const penultimate = layers[layers.length - 2];
  return tf.model({
    inputs: model.inputs,
    outputs: [penultimate.output as tf.SymbolicTensor, head.output as tf.SymbolicTensor],
  });
}

export async function loadZooModel(zooDir: string, id: string): Promise<ZooModel> {
  const saved = await loadModelDir(path.join(zooDir, id));
  const model = withFeatureOutput(saved);
  const inputShape = model.inputs[0].shape; // [null, h, w, 3]
  const [featShape, predShape] = model.outputs.map(o => o.shape);
  return {
    id,
    inputSize: inputShape[1] as number,
    numClasses: predShape[predShape.length - 1] as number,
    featureDim: featShape[featShape.length - 1] as number,
    model,
  };
}

export function listZoo(zooDir: string): string[] {
  if (!fs.existsSync(zooDir)) throw new ModelNotFound(`zoo directory ${zooDir} does not exist`);
  const ids = fs
    .readdirSync(zooDir, { withFileTypes: true })
    .filter(e => e.isDirectory() && fs.existsSync(path.join(zooDir, e.name, 'model.json')))
    .map(e => e.name)
    .sort();
  if (ids.length === 0) throw new ModelNotFound(`zoo directory ${zooDir} has no models`);
  return ids;
}

// --- deterministic zoo construction ------------------------------------------

/** mulberry32: tiny seeded PRNG, uniform in [0, 1). */
export function mulberry32(seed: number): () => number {
  let s = seed >>> 0;
  return () => {
    s = (s + 0x6d2b79f5) >>> 0;
    let t = s;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function seededWeights(model: tf.LayersModel, seed: number): void {
  const rand = mulberry32(seed);
  const fresh = model.getWeights().map(w => {
    const vals = new Float32Array(w.size);
    const scale = 1 / Math.sqrt(Math.max(1, w.shape[0] ?? 1));
    for (let i = 0; i < vals.length; i++) vals[i] = (rand() * 2 - 1) * scale;
    return tf.tensor(vals, w.shape);
  });
  model.setWeights(fresh);
  fresh.forEach(t => t.dispose());
}

export interface ZooSpec {
  id: string;
  inputSize: number;
  filters: number;
  kernel: number;
  numClasses: number;
  seed: number;
}

export const DEFAULT_ZOO: ZooSpec[] = [
  { id: 'conv8-gap-src7', inputSize: 16, filters: 8, kernel: 3, numClasses: 7, seed: 0xa11ce },
  { id: 'conv12-gap-src5', inputSize: 16, filters: 12, kernel: 5, numClasses: 5, seed: 0xb0b },
];

export function buildClassifier(spec: ZooSpec): tf.LayersModel {
  const model = tf.sequential({
    name: spec.id,
    layers: [
      tf.layers.conv2d({
        inputShape: [spec.inputSize, spec.inputSize, 3],
        filters: spec.filters,
        kernelSize: spec.kernel,
        padding: 'same',
        activation: 'relu',
        name: 'conv',
      }),
      tf.layers.globalAveragePooling2d({ name: 'gap' }),
      tf.layers.dense({ units: spec.numClasses, activation: 'softmax', name: 'head' }),
    ],
  });
  seededWeights(model, spec.seed);
  return model;
}
