// Wire types for the session service. Field names mirror the server's
// canonical JSON documents exactly.

export interface TerminalDoc {
  isTerminal: boolean;
  outcome: string | null;
  reason: string | null;
}

export interface SnapshotDoc {
  gameId: string;
  seed: number;
  timestampMs: number;
  gameTimeMs: number;
  status: string;
  terminal: TerminalDoc;
  game_state: Record<string, unknown>;
  metrics: Record<string, number>;
  raw: Record<string, unknown>;
}

export interface VerdictDoc {
  valid: boolean;
  category: string | null;
  reason: string;
  substitutedKey: string | null;
}

export interface RunRecordDoc {
  runId: string;
  gameId: string;
  taskId: string;
  profileId: string;
  status: string;
  stepsUsed: number;
  runProgress: number;
  episodeBoundaries: number[];
  validity: { proposed: number; valid: number; ntc: number; oos: number };
}

export interface TaskDoc {
  instruction: string;
  maxSteps: number;
  targetScore?: number;
  startScore?: number;
  gameId?: string;
  taskId?: string;
}

export interface RunReply {
  record: RunRecordDoc;
  task: TaskDoc;
}

export interface StepEvent {
  step: number;
  stepsUsed: number;
  budgetRemaining: number;
  runStatus: string;
  runProgress: number;
  verdict: VerdictDoc | null;
  status: string | null;
}

export interface StepResult {
  snapshot: SnapshotDoc;
  verdict: VerdictDoc | null;
  stepsUsed: number;
  budgetRemaining: number;
  runStatus: string;
  runProgress: number;
}

// One normalized action, exactly as the server's POST /action expects it.
export interface NormalizedAction {
  kind: string;
  x?: number;
  y?: number;
  x2?: number;
  y2?: number;
  button?: string;
  amount?: number;
  text?: string;
  key?: string;
  keys?: string[];
  duration_ms?: number;
}
