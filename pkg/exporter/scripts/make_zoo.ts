// Regenerates the bundled zoo under fixtures/zoo. Weights come from a
// seeded PRNG, so the output is byte-stable run to run.

import { buildClassifier, DEFAULT_ZOO, saveModelDir } from '../src/zoo.js';

const outRoot = process.argv[2] ?? 'fixtures/zoo';

for (const spec of DEFAULT_ZOO) {
  const model = buildClassifier(spec);
  await saveModelDir(model, `${outRoot}/${spec.id}`);
  console.log(`${spec.id}: input ${spec.inputSize}x${spec.inputSize}x3, ${spec.numClasses} classes`);
}
