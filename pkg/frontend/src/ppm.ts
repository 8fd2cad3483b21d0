// Minimal binary P6 pixmap decoder for the observation frames.

export interface Pixmap {
  width: number;
  height: number;
  rgb: Uint8Array; // 3 bytes per pixel, row-major
}

export function decodeP6(bytes: Uint8Array): Pixmap {
  const text = new TextDecoder('latin1').decode(bytes.subarray(0, 64));
  const match = /^P6\s+(\d+)\s+(\d+)\s+255\n/.exec(text);
  if (!match) throw new Error('not a binary P6 pixmap');
  const width = parseInt(match[1], 10);
  const height = parseInt(match[2], 10);
  const offset = match[0].length;
  const rgb = bytes.subarray(offset, offset + width * height * 3);
  if (rgb.length !== width * height * 3) throw new Error('truncated pixmap');
  return { width, height, rgb };
}

export function drawToCanvas(pixmap: Pixmap, canvas: HTMLCanvasElement, scale = 2): void {
  canvas.width = pixmap.width;
  canvas.height = pixmap.height;
  canvas.style.width = `${pixmap.width * scale}px`;
  canvas.style.height = `${pixmap.height * scale}px`;
  canvas.style.imageRendering = 'pixelated';
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const image = ctx.createImageData(pixmap.width, pixmap.height);
  for (let i = 0, j = 0; i < pixmap.rgb.length; i += 3, j += 4) {
    image.data[j] = pixmap.rgb[i];
    image.data[j + 1] = pixmap.rgb[i + 1];
    image.data[j + 2] = pixmap.rgb[i + 2];
    image.data[j + 3] = 255;
  }
  ctx.putImageData(image, 0, 0);
}
