import assert from 'node:assert/strict';
import { test } from 'node:test';

import { translateClick, translateKey } from '../src/input.js';
import { decodeP6 } from '../src/ppm.js';
import {
  applyStepEvent,
  applyStepResult,
  applyTask,
  canSubmit,
  emptyViewModel,
} from '../src/view_model.js';
import type { StepResult } from '../src/protocol.js';

test('key translation produces one press_key action', () => {
  assert.deepEqual(translateKey('ArrowLeft'), { kind: 'press_key', key: 'ArrowLeft' });
  assert.deepEqual(translateKey(' '), { kind: 'press_key', key: 'Space' });
  assert.deepEqual(translateKey('w'), { kind: 'press_key', key: 'w' });
});

test('modifier keys are ignored, unknown keys pass through', () => {
  assert.equal(translateKey('Shift'), null);
  assert.equal(translateKey('Meta'), null);
  // legality is the server's call; surface its OOS verdict instead
  assert.deepEqual(translateKey('q'), { kind: 'press_key', key: 'q' });
});

test('click translation maps element pixels onto the game viewport', () => {
  const geometry = { elementWidth: 288, elementHeight: 288, viewportWidth: 144, viewportHeight: 144 };
  assert.deepEqual(translateClick(144, 144, geometry, 'left'),
    { kind: 'click', x: 72, y: 72, button: 'left' });
  assert.deepEqual(translateClick(0, 0, geometry, 'right'),
    { kind: 'click', x: 0, y: 0, button: 'right' });
  assert.equal(translateClick(-4, 10, geometry), null);
});

test('budget always comes from server numbers', () => {
  let vm = emptyViewModel();
  vm = applyTask(vm, { instruction: 'do it', maxSteps: 100 });
  assert.equal(vm.budgetRemaining, 100);
  vm = applyStepEvent(vm, {
    step: 1, stepsUsed: 1, budgetRemaining: 99, runStatus: 'running',
    runProgress: 0.1, verdict: null, status: 'playing',
  });
  assert.equal(vm.budgetRemaining, 99);
  assert.equal(vm.stepsUsed, 1);
});

test('invalid verdicts surface as notices', () => {
  let vm = { ...emptyViewModel(), connected: true };
  const result: StepResult = {
    snapshot: {
      gameId: 'g', seed: 0, timestampMs: 0, gameTimeMs: 0, status: 'playing',
      terminal: { isTerminal: false, outcome: null, reason: null },
      game_state: {}, metrics: {}, raw: {},
    },
    verdict: { valid: false, category: 'OOS', reason: 'key not allowed', substitutedKey: null },
    stepsUsed: 3, budgetRemaining: 97, runStatus: 'running', runProgress: 0,
  };
  vm = applyStepResult(vm, result);
  assert.match(vm.notice, /OOS/);
  assert.equal(canSubmit(vm), true);
});

test('submission gate honours run status and budget', () => {
  const vm = { ...emptyViewModel(), connected: true, runStatus: 'running', budgetRemaining: 1 };
  assert.equal(canSubmit(vm), true);
  assert.equal(canSubmit({ ...vm, budgetRemaining: 0 }), false);
  assert.equal(canSubmit({ ...vm, runStatus: 'success' }), false);
  assert.equal(canSubmit({ ...vm, connected: false }), false);
});

test('P6 decoder reads header and pixels', () => {
  const header = new TextEncoder().encode('P6\n2 1\n255\n');
  const pixels = new Uint8Array([255, 0, 0, 0, 255, 0]);
  const frame = new Uint8Array(header.length + pixels.length);
  frame.set(header);
  frame.set(pixels, header.length);
  const pixmap = decodeP6(frame);
  assert.equal(pixmap.width, 2);
  assert.equal(pixmap.height, 1);
  assert.deepEqual([...pixmap.rgb], [255, 0, 0, 0, 255, 0]);
  assert.throws(() => decodeP6(new TextEncoder().encode('P3\n2 1\n255\n')));
});
