import { parseArgs } from 'node:util';

import { ExportError } from './errors.js';
import { exportZoo } from './export.js';

async function main(): Promise<void> {
  const { values } = parseArgs({
    options: {
      zoo: { type: 'string' },
      images: { type: 'string' },
      out: { type: 'string' },
    },
  });
  if (!values.zoo || !values.images || !values.out) {
    console.error('usage: cli.js --zoo <dir> --images <dir> --out <dir>');
    process.exit(2);
  }
  const results = await exportZoo(values.zoo, values.images, values.out);
  for (const r of results) {
    console.log(`${r.modelId}: n=${r.n} m=${r.numClasses} d=${r.featureDim}`);
    for (const [name, digest] of Object.entries(r.files)) {
      console.log(`  ${name}  sha256=${digest.slice(0, 16)}...`);
    }
  }
  console.log(`manifest: ${values.out}/manifest.json`);
}

main().catch(err => {
  if (err instanceof ExportError) {
    console.error(`error: ${err.message}`);
    process.exit(1);
  }
  throw err;
});
