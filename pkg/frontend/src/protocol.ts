// Wire types for gateway frames: one JSON object per bus envelope outbound,
// {type: ...} control frames inbound. Mirrors the simulator's log format.

export interface Envelope {
  seq: number;
  tick: number;
  topic: string;
  payload: Record<string, unknown>;
}

export interface SymbolicState {
  step: string;
  interruptable: boolean;
  move_arm: boolean;
  move_base: boolean;
  current_location: string | null;
  destination_location: string | null;
}

export interface WorldObject {
  id: string;
  type: string;
  color: string;
  size: string;
  location: string; // a location name, or "held"
  origin: string | null;
}

export interface WorldSnapshot {
  objects: WorldObject[];
  containers: Record<string, string>;
  robot: { location: string; holding: string | null };
}

export interface PlanStep {
  kind: string;
  interruptable: boolean;
  duration_ticks: number;
  location: string | null;
  designator: number | null;
}

export interface ResponsePayload {
  text: string;
  category: string;
  command_kind?: string;
  add_query?: Record<string, string>;
  delete_query?: Record<string, string>;
}

export const MINOR_KINDS = new Set([
  "bring_me", "setting_breakfast", "replace_object", "change_location",
]);

export type OutboundFrame =
  | { type: "utterance"; text: string; age_group?: string }
  | { type: "interrupt" }
  | { type: "reset" }
  | { type: "set_age"; group: string };
