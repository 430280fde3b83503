// Minimal PPM/PGM reader for the bundled fixture. P6 is 8-bit RGB, P5 is
// 8-bit grayscale; grayscale images come back with the single channel
// duplicated three times so every downstream model sees 3-channel input.

import * as fs from 'node:fs';

import { DatasetNotFound, ShapeMismatch } from './errors.js';

export interface Image {
  width: number;
  height: number;
  /** HWC uint8, always 3 channels */
  pixels: Uint8Array;
}

export function decodePpm(buf: Buffer): Image {
  let pos = 0;
  const token = (): string => {
    // skip whitespace and # comments between header fields
    for (;;) {
      while (pos < buf.length && /\s/.test(String.fromCharCode(buf[pos]))) pos++;
      if (pos < buf.length && buf[pos] === 0x23) {
        while (pos < buf.length && buf[pos] !== 0x0a) pos++;
      } else break;
    }
    const start = pos;
    while (pos < buf.length && !/\s/.test(String.fromCharCode(buf[pos]))) pos++;
    if (start === pos) throw new ShapeMismatch('truncated header');
    return buf.toString('ascii', start, pos);
  };

  const magic = token();
  if (magic !== 'P6' && magic !== 'P5') {
    throw new ShapeMismatch(`not a binary PPM/PGM file (magic ${magic})`);
  }
  const width = Number(token());
  const height = Number(token());
  const maxval = Number(token());
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
    throw new ShapeMismatch(`bad dimensions ${width}x${height}`);
  }
  if (maxval !== 255) throw new ShapeMismatch(`only maxval 255 supported, got ${maxval}`);
  pos++; // single whitespace byte after maxval

  const channels = magic === 'P6' ? 3 : 1;
  const expect = width * height * channels;
  if (buf.length - pos !== expect) {
    throw new ShapeMismatch(`expected ${expect} pixel bytes, found ${buf.length - pos}`);
  }
  const raw = buf.subarray(pos);
  const pixels = new Uint8Array(width * height * 3);
  if (channels === 3) {
    pixels.set(raw);
  } else {
    for (let i = 0; i < width * height; i++) {
      pixels[3 * i] = pixels[3 * i + 1] = pixels[3 * i + 2] = raw[i];
    }
  }
  return { width, height, pixels };
}

export function readPpm(file: string): Image {
  let buf: Buffer;
  try {
    buf = fs.readFileSync(file);
  } catch {
    throw new DatasetNotFound(`cannot read image ${file}`);
  }
  return decodePpm(buf);
}

export function encodePpm(img: Image, gray = false): Buffer {
  const header = Buffer.from(`${gray ? 'P5' : 'P6'}\n${img.width} ${img.height}\n255\n`, 'ascii');
  if (!gray) return Buffer.concat([header, Buffer.from(img.pixels)]);
  const single = new Uint8Array(img.width * img.height);
  for (let i = 0; i < single.length; i++) single[i] = img.pixels[3 * i];
  return Buffer.concat([header, Buffer.from(single)]);
}
