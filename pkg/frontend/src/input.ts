// Physical input -> one normalized action. One key press or click is one
// budget unit; the server owns legality, so unknown keys are forwarded
// and its OOS verdict is surfaced rather than filtered locally.

import type { NormalizedAction } from './protocol.js';

const KEY_NAMES: Record<string, string> = {
  ' ': 'Space',
  Spacebar: 'Space',
  Esc: 'Escape',
};

const IGNORED_KEYS = new Set([
  'Shift', 'Control', 'Alt', 'Meta', 'CapsLock', 'Tab',
  'F5', 'F11', 'F12', 'Dead', 'Unidentified',
]);

export function translateKey(key: string): NormalizedAction | null {
  if (IGNORED_KEYS.has(key)) return null;
  const name = KEY_NAMES[key] ?? key;
  return { kind: 'press_key', key: name };
}

export interface BoardGeometry {
  // on-screen size of the board element and the game's viewport size
  elementWidth: number;
  elementHeight: number;
  viewportWidth: number;
  viewportHeight: number;
}

export function translateClick(
  offsetX: number,
  offsetY: number,
  geometry: BoardGeometry,
  button: 'left' | 'right' = 'left',
): NormalizedAction | null {
  if (geometry.elementWidth <= 0 || geometry.elementHeight <= 0) return null;
  const x = Math.floor((offsetX / geometry.elementWidth) * geometry.viewportWidth);
  const y = Math.floor((offsetY / geometry.elementHeight) * geometry.viewportHeight);
  if (x < 0 || y < 0 || x >= geometry.viewportWidth || y >= geometry.viewportHeight) {
    return null;
  }
  return { kind: 'click', x, y, button };
}
