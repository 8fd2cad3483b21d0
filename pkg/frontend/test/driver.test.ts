// Scripted driver against a live human-play session: replays the greedy
// 2048 policy through the frontend client and checks the server-side run
// record, then exhausts a 100-step budget and checks the rejection.

import assert from 'node:assert/strict';
import { spawn, type ChildProcess } from 'node:child_process';
import { once } from 'node:events';
import { test } from 'node:test';

import { SessionClient, ServerRejection } from '../src/api.js';
import { greedyKey, type Board } from './oracle2048.js';

interface LiveSession {
  child: ChildProcess;
  client: SessionClient;
  stop: () => void;
}

async function serveHuman(preset: string): Promise<LiveSession> {
  const child = spawn(
    'python3',
    ['-m', 'gamebench.cli', 'serve', '--config', preset, '--human',
     '--port', '0', '--linger', '30'],
    { stdio: ['ignore', 'pipe', 'inherit'] },
  );
  const address = await new Promise<string>((resolve, reject) => {
    let buffer = '';
    const timer = setTimeout(() => reject(new Error('server did not start')), 15000);
    child.stdout!.on('data', (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = /serving .* on (http:\/\/[0-9.:]+)/.exec(buffer);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]);
      }
    });
    child.on('exit', () => reject(new Error(`server exited early\n${buffer}`)));
  });
  return {
    child,
    client: new SessionClient(address),
    stop: () => child.kill('SIGTERM'),
  };
}

test('replayed greedy policy completes the easy 2048 task with SR = 1', async () => {
  const session = await serveHuman('g2048+t01+oracle');
  try {
    const { task } = await session.client.getRun();
    assert.equal(task.gameId, 'g2048');
    let runStatus = 'running';
    for (let step = 0; step < task.maxSteps && runStatus === 'running'; step += 1) {
      const state = await session.client.getState();
      const board = state.game_state.board as Board;
      const key = greedyKey(board) ?? 'ArrowLeft';
      const result = await session.client.submitAction({ kind: 'press_key', key });
      assert.equal(result.verdict?.valid, true);
      runStatus = result.runStatus;
    }
    assert.equal(runStatus, 'success');
    const final = await session.client.getRun();
    assert.equal(final.record.status, 'success');
    assert.equal(final.record.runProgress, 1);
    assert.ok(final.record.stepsUsed <= task.maxSteps);
  } finally {
    session.stop();
    await once(session.child, 'exit');
  }
});

test('the 101st input on a 100-action budget is rejected', async () => {
  const session = await serveHuman('g2048+t03+oracle'); // t03 carries the 100-step budget
  try {
    const { task } = await session.client.getRun();
    assert.equal(task.maxSteps, 100);
    let lastStatus = 'running';
    for (let i = 0; i < 100; i += 1) {
      const result = await session.client.submitAction({ kind: 'wait', duration_ms: 200 });
      lastStatus = result.runStatus;
    }
    assert.equal(lastStatus, 'budget_exhausted');
    await assert.rejects(
      session.client.submitAction({ kind: 'wait', duration_ms: 200 }),
      (err: unknown) => {
        assert.ok(err instanceof ServerRejection);
        assert.equal(err.status, 409);
        const text = JSON.stringify(err.body);
        assert.match(text, /budget/);
        return true;
      },
    );
    const final = await session.client.getRun();
    assert.equal(final.record.status, 'budget_exhausted');
    assert.equal(final.record.stepsUsed, 100);
  } finally {
    session.stop();
    await once(session.child, 'exit');
  }
});

test('event stream delivers step notifications to subscribers', async () => {
  const session = await serveHuman('g2048+t01+oracle');
  try {
    const events: number[] = [];
    const done = new Promise<void>((resolve) => {
      const dispose = session.client.subscribeEvents((event) => {
        events.push(event.step);
        if (events.length >= 1) {
          dispose();
          resolve();
        }
      });
    });
    await session.client.submitAction({ kind: 'press_key', key: 'ArrowLeft' });
    await done;
    assert.ok(events.includes(1));
  } finally {
    session.stop();
    await once(session.child, 'exit');
  }
});
