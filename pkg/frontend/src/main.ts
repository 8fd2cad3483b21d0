// Browser entry point: connect to a session service, relay input, render
// state. All game logic and scoring stay on the server; this file only
// wires events together.

import { SessionClient, ServerRejection } from './api.js';
import { translateClick, translateKey } from './input.js';
import { bindElements, render, renderFrame } from './render.js';
import {
  applyStepEvent,
  applyStepResult,
  applyTask,
  canSubmit,
  emptyViewModel,
  ViewModel,
} from './view_model.js';

const RETRY_MS = 2000;

function sessionUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get('session') ?? `http://${window.location.hostname}:8600`;
}

async function start(): Promise<void> {
  const el = bindElements(document);
  const client = new SessionClient(sessionUrl());
  let vm: ViewModel = emptyViewModel();
  let submitting = false;

  const paint = () => render(vm, el);

  async function refresh(): Promise<void> {
    const [run, observation, frame] = await Promise.all([
      client.getRun(),
      client.getObservationText(),
      client.getObservationFrame(),
    ]);
    vm = applyTask({ ...vm, stepsUsed: run.record.stepsUsed }, run.task);
    vm = {
      ...vm,
      observationText: observation,
      runStatus: run.record.status,
      runProgress: run.record.runProgress,
      budgetRemaining: Math.max(0, run.task.maxSteps - run.record.stepsUsed),
    };
    try {
      vm = { ...vm, snapshot: await client.getState() };
    } catch {
      // no state published yet; the readiness gate is still absorbing
    }
    await renderFrame(frame, el);
    paint();
  }

  async function connect(): Promise<void> {
    try {
      await refresh();
      vm = { ...vm, connected: true, notice: '' };
      paint();
    } catch (err) {
      vm = { ...vm, connected: false, notice: `connection failed, retrying: ${err}` };
      paint();
      setTimeout(connect, RETRY_MS);
      return;
    }
    client.subscribeEvents(
      (event) => {
        vm = applyStepEvent(vm, event);
        void refresh();
      },
      () => {
        vm = { ...vm, connected: false, notice: 'event stream lost, reconnecting' };
        paint();
        setTimeout(connect, RETRY_MS);
      },
    );
  }

  async function submit(action: ReturnType<typeof translateKey>): Promise<void> {
    if (!action || submitting) return;
    if (!canSubmit(vm)) {
      vm = { ...vm, notice: vm.budgetRemaining <= 0 ? 'budget exhausted: input ignored' : `run ${vm.runStatus}` };
      paint();
      return;
    }
    submitting = true;
    try {
      const result = await client.submitAction(action);
      vm = applyStepResult(vm, result);
      const observation = await client.getObservationText();
      vm = { ...vm, observationText: observation };
      await renderFrame(await client.getObservationFrame(), el);
    } catch (err) {
      if (err instanceof ServerRejection) {
        vm = { ...vm, notice: String(err.body.error ?? err.message) };
      } else {
        vm = { ...vm, notice: `submit failed: ${err}` };
      }
    } finally {
      submitting = false;
      paint();
    }
  }

  window.addEventListener('keydown', (event) => {
    if (event.repeat) return;
    const action = translateKey(event.key);
    if (action) {
      event.preventDefault();
      void submit(action);
    }
  });

  const clickGeometry = () => ({
    elementWidth: el.frame.clientWidth,
    elementHeight: el.frame.clientHeight,
    viewportWidth: el.frame.width,
    viewportHeight: el.frame.height,
  });

  el.frame.addEventListener('click', (event) => {
    void submit(translateClick(event.offsetX, event.offsetY, clickGeometry(), 'left'));
  });
  el.frame.addEventListener('contextmenu', (event) => {
    event.preventDefault();
    void submit(translateClick(event.offsetX, event.offsetY, clickGeometry(), 'right'));
  });
  el.resetButton.addEventListener('click', () => {
    void (async () => {
      try {
        const result = await client.reset();
        vm = applyStepResult(vm, result);
        await refresh();
      } catch (err) {
        vm = { ...vm, notice: `reset failed: ${err}` };
        paint();
      }
    })();
  });

  await connect();
}

void start();
