// Regenerates the 10-image labeled fixture under fixtures/images. Each
// target class gets a distinct dominant color plus seeded speckle noise;
// two images are grayscale and two use non-native sizes so the export
// path has to resize and replicate channels.

import * as fs from 'node:fs';
import * as path from 'node:path';

import { encodePpm, Image } from '../src/ppm.js';
import { mulberry32 } from '../src/zoo.js';

const outDir = process.argv[2] ?? 'fixtures/images';
fs.mkdirSync(outDir, { recursive: true });

const rand = mulberry32(0x5eed);
const labels = [0, 1, 2, 0, 1, 2, 0, 1, 2, 0];

function makeImage(label: number, width: number, height: number): Image {
  const pixels = new Uint8Array(width * height * 3);
  for (let i = 0; i < width * height; i++) {
    for (let ch = 0; ch < 3; ch++) {
      const base = ch === label ? 190 : 40;
      pixels[3 * i + ch] = Math.max(0, Math.min(255, Math.round(base + (rand() * 2 - 1) * 50)));
    }
  }
  return { width, height, pixels };
}

const lines: string[] = [];
labels.forEach((label, i) => {
  const gray = i === 3 || i === 7; // exercise single-channel input
  const [w, h] = i === 4 ? [24, 20] : i === 8 ? [12, 12] : [16, 16];
  const name = `img${String(i).padStart(2, '0')}.${gray ? 'pgm' : 'ppm'}`;
  fs.writeFileSync(path.join(outDir, name), encodePpm(makeImage(label, w, h), gray));
  lines.push(`${name},${label}`);
});
fs.writeFileSync(path.join(outDir, 'labels.csv'), lines.join('\n') + '\n');
console.log(`wrote ${labels.length} images + labels.csv to ${outDir}`);
