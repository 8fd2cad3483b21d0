// DOM rendering of the view model: text grid, raster frame, and HUD.

import type { ViewModel } from './view_model.js';
import { decodeP6, drawToCanvas } from './ppm.js';

export interface Elements {
  board: HTMLPreElement;
  frame: HTMLCanvasElement;
  score: HTMLElement;
  status: HTMLElement;
  instruction: HTMLElement;
  budget: HTMLElement;
  progress: HTMLProgressElement;
  notice: HTMLElement;
  resetButton: HTMLButtonElement;
}

export function bindElements(doc: Document): Elements {
  const get = <T extends HTMLElement>(id: string) => doc.getElementById(id) as T;
  return {
    board: get<HTMLPreElement>('board'),
    frame: get<HTMLCanvasElement>('frame'),
    score: get('score'),
    status: get('status'),
    instruction: get('instruction'),
    budget: get('budget'),
    progress: get<HTMLProgressElement>('progress'),
    notice: get('notice'),
    resetButton: get<HTMLButtonElement>('reset'),
  };
}

export function render(vm: ViewModel, el: Elements): void {
  el.board.textContent = vm.observationText;
  el.instruction.textContent = vm.instruction;
  el.budget.textContent = `${vm.budgetRemaining} / ${vm.maxSteps} actions left`;
  el.progress.value = vm.runProgress;

  const snapshot = vm.snapshot;
  if (snapshot) {
    const score = (snapshot.game_state as { score?: number }).score ?? 0;
    el.score.textContent = `score ${score}`;
    if (snapshot.terminal.isTerminal) {
      el.status.textContent = `terminal: ${snapshot.terminal.outcome}`;
    } else {
      el.status.textContent = snapshot.status;
    }
    el.resetButton.hidden = !snapshot.terminal.isTerminal && vm.runStatus === 'running';
  }
  if (vm.runStatus !== 'running') {
    el.status.textContent = `run ${vm.runStatus}`;
  }
  el.notice.textContent = vm.notice;
  el.notice.hidden = vm.notice === '';
}

export async function renderFrame(bytes: Uint8Array, el: Elements): Promise<void> {
  try {
    drawToCanvas(decodeP6(bytes), el.frame);
  } catch {
    // frame may be empty before the first publish; the text grid carries on
  }
}
