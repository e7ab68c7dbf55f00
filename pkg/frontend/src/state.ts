// Console state is a pure fold over received gateway frames. Nothing here
// simulates the robot: if a fact is not in a frame, the console cannot
// display it. Replaying the same frames always rebuilds the same state.

import {
  Envelope,
  MINOR_KINDS,
  PlanStep,
  ResponsePayload,
  SymbolicState,
  WorldSnapshot,
} from "./protocol.js";

export interface ChatEntry {
  role: "user" | "robot";
  text: string;
  tick: number;
  category?: string;
  queued?: boolean;
  resubmission?: boolean;
}

export interface PlanView {
  steps: PlanStep[];
  cursor: number;
  active: boolean;
}

export interface Ticker {
  received: number;
  executed: number;
  ignored: number;
  transcripts: number;
  corrupted: number;
  resubmissions: number;
}

export interface ConsoleState {
  connected: boolean;
  tick: number;
  seq: number;
  mode: string;
  robot: SymbolicState | null;
  world: WorldSnapshot | null;
  plan: PlanView | null;
  chat: ChatEntry[];
  ticker: Ticker;
}

export function initialState(): ConsoleState {
  return {
    connected: false,
    tick: 0,
    seq: 0,
    mode: "idle",
    robot: null,
    world: null,
    plan: null,
    chat: [],
    ticker: { received: 0, executed: 0, ignored: 0, transcripts: 0,
              corrupted: 0, resubmissions: 0 },
  };
}

export function applyFrame(state: ConsoleState, env: Envelope): ConsoleState {
  state.tick = env.tick;
  state.seq = env.seq;
  const payload = env.payload as Record<string, any>;
  switch (env.topic) {
    case "utterance_in":
      state.chat.push({
        role: "user",
        text: String(payload.text ?? ""),
        tick: env.tick,
        resubmission: Boolean(payload.resubmission),
      });
      break;
    case "transcript":
      state.ticker.transcripts += 1;
      if (payload.corruption && payload.corruption !== "clean") {
        state.ticker.corrupted += 1;
      }
      if (payload.resubmission) {
        state.ticker.resubmissions += 1;
      }
      break;
    case "response_out":
      state.chat.push(responseEntry(state, payload as ResponsePayload, env.tick));
      break;
    case "robot_state":
      state.robot = payload as SymbolicState;
      if (payload.step === "idle" || payload.step === "stopped"
          || payload.step === "failed") {
        state.mode = String(payload.step);
      } else {
        state.mode = "executing";
      }
      break;
    case "command":
      state.ticker.received += 1;
      break;
    case "trial_event":
      applyTrialEvent(state, payload, env.tick);
      break;
  }
  return state;
}

function responseEntry(state: ConsoleState, payload: ResponsePayload,
                       tick: number): ChatEntry {
  const queued =
    payload.category === "confirmation"
    && payload.command_kind !== undefined
    && MINOR_KINDS.has(payload.command_kind)
    && state.robot !== null
    && !state.robot.interruptable;
  return {
    role: "robot",
    text: payload.text,
    tick,
    category: payload.category,
    queued: queued || undefined,
  };
}

function applyTrialEvent(state: ConsoleState, payload: Record<string, any>,
                         tick: number): void {
  const data = (payload.data ?? {}) as Record<string, any>;
  switch (payload.kind) {
    case "world_snapshot":
      state.world = data.world as WorldSnapshot;
      if (data.mode) {
        state.mode = String(data.mode);
      }
      break;
    case "plan_compiled":
      state.plan = { steps: data.steps as PlanStep[], cursor: 0, active: true };
      state.mode = "executing";
      break;
    case "replan":
    case "retry":
      if (data.steps) {
        state.plan = {
          steps: data.steps as PlanStep[],
          cursor: Number(data.cursor ?? 0),
          active: true,
        };
      }
      break;
    case "action_started":
      if (state.plan) {
        state.plan.cursor = Number(data.index ?? state.plan.cursor);
      }
      break;
    case "action_completed":
      if (state.plan) {
        state.plan.cursor = Number(data.index ?? state.plan.cursor) + 1;
      }
      break;
    case "plan_completed":
      if (state.plan) {
        state.plan.cursor = state.plan.steps.length;
        state.plan.active = false;
      }
      state.mode = "idle";
      break;
    case "plan_failed":
      if (state.plan) {
        state.plan.active = false;
      }
      state.mode = "failed";
      break;
    case "stopped":
      if (state.plan) {
        state.plan.active = false;
      }
      state.mode = "stopped";
      break;
    case "reset":
      state.plan = null;
      state.mode = "idle";
      break;
    case "disposition": {
      const disposition = (data.disposition ?? {}) as Record<string, unknown>;
      if (disposition.kind === "ignored") {
        state.ticker.ignored += 1;
      } else if (disposition.kind === "applied" || disposition.kind === "stopped") {
        state.ticker.executed += 1;
      }
      break;
    }
  }
}

export function foldFrames(frames: Envelope[]): ConsoleState {
  const state = initialState();
  state.connected = true;
  for (const frame of frames) {
    applyFrame(state, frame);
  }
  return state;
}
