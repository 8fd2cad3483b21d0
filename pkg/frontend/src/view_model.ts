// View state assembled purely from server responses. The budget counter
// in particular is always the server's number, never a local guess.

import type { SnapshotDoc, StepEvent, StepResult, TaskDoc, VerdictDoc } from './protocol.js';

export interface ViewModel {
  snapshot: SnapshotDoc | null;
  observationText: string;
  instruction: string;
  maxSteps: number;
  budgetRemaining: number;
  stepsUsed: number;
  runStatus: string;
  runProgress: number;
  lastVerdict: VerdictDoc | null;
  notice: string;
  connected: boolean;
}

export function emptyViewModel(): ViewModel {
  return {
    snapshot: null,
    observationText: '',
    instruction: '',
    maxSteps: 0,
    budgetRemaining: 0,
    stepsUsed: 0,
    runStatus: 'running',
    runProgress: 0,
    lastVerdict: null,
    notice: '',
    connected: false,
  };
}

export function applyTask(vm: ViewModel, task: TaskDoc): ViewModel {
  return {
    ...vm,
    instruction: task.instruction,
    maxSteps: task.maxSteps,
    budgetRemaining: Math.max(0, task.maxSteps - vm.stepsUsed),
  };
}

export function applyStepEvent(vm: ViewModel, event: StepEvent): ViewModel {
  return {
    ...vm,
    stepsUsed: event.stepsUsed,
    budgetRemaining: event.budgetRemaining,
    runStatus: event.runStatus,
    runProgress: event.runProgress,
    lastVerdict: event.verdict,
  };
}

export function applyStepResult(vm: ViewModel, result: StepResult): ViewModel {
  const verdict = result.verdict;
  let notice = '';
  if (verdict && !verdict.valid) {
    notice = `${verdict.category}: ${verdict.reason}`;
  }
  return {
    ...vm,
    snapshot: result.snapshot,
    stepsUsed: result.stepsUsed,
    budgetRemaining: result.budgetRemaining,
    runStatus: result.runStatus,
    runProgress: result.runProgress,
    lastVerdict: verdict,
    notice,
  };
}

export function canSubmit(vm: ViewModel): boolean {
  return vm.connected && vm.runStatus === 'running' && vm.budgetRemaining > 0;
}
