/** Wire types mirrored from the session service. */

export interface DroneTelemetry {
  id: number;
  x: number;
  y: number;
  z: number;
  heading: number;
  gimbal: number;
  is_flying: boolean;
  last_command: Record<string, unknown> | null;
}

export interface FleetSnapshot {
  drones: DroneTelemetry[];
}

export type EventKind =
  | "user_input"
  | "head_plan"
  | "reason"
  | "action"
  | "evaluation"
  | "state_update"
  | "response"
  | "error";

export interface SessionEvent {
  sequence: number;
  kind: EventKind;
  payload: Record<string, any>;
  timestamp: string;
}

export type ChatRole = "user" | "head" | "worker";

export interface ChatMessage {
  role: ChatRole;
  text: string;
}

export type StepCard =
  | { kind: "reasoning"; droneId: number; reasoning: string; intendedAction: string; endFlag?: boolean }
  | { kind: "action"; droneId: number; tool: string; success: boolean; message: string }
  | { kind: "evaluation"; droneId: number; summary: string; endFlag: boolean; notes: string };

export type ConnectionState = "live" | "reconnecting" | "replay";

export interface ConsoleViewState {
  chat: ChatMessage[];
  fleet: FleetSnapshot | null;
  /** Per-drone step cards in event-sequence order. */
  threadPanels: Record<number, StepCard[]>;
  headPlan: Record<string, any> | null;
  connection: ConnectionState;
  lastSequence: number;
  running: boolean;
  notice: string | null;
}
