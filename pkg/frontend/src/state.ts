/** Pure view-state reducer: the console is a fold over the event stream,
 * so replaying a recorded stream reproduces the identical final state. */

import type { ConsoleViewState, SessionEvent, StepCard } from "./types.js";

export function initialViewState(): ConsoleViewState {
  return {
    chat: [],
    fleet: null,
    threadPanels: {},
    headPlan: null,
    connection: "replay",
    lastSequence: 0,
    running: false,
    notice: null,
  };
}

function pushCard(state: ConsoleViewState, droneId: number, card: StepCard): void {
  const panels = { ...state.threadPanels };
  panels[droneId] = [...(panels[droneId] ?? []), card];
  state.threadPanels = panels;
}

export function applyEvent(previous: ConsoleViewState, event: SessionEvent): ConsoleViewState {
  const state: ConsoleViewState = {
    ...previous,
    chat: [...previous.chat],
    threadPanels: { ...previous.threadPanels },
  };
  if (event.sequence <= previous.lastSequence) {
    // Duplicate delivery after a resume: already rendered.
    return previous;
  }
  state.lastSequence = event.sequence;
  const payload = event.payload ?? {};

  switch (event.kind) {
    case "user_input":
      state.chat.push({ role: "user", text: String(payload.text ?? "") });
      state.running = true;
      state.notice = null;
      break;
    case "head_plan":
      state.headPlan = payload;
      break;
    case "reason":
      pushCard(state, Number(payload.drone_id ?? 0), {
        kind: "reasoning",
        droneId: Number(payload.drone_id ?? 0),
        reasoning: String(payload.reasoning ?? ""),
        intendedAction: String(payload.intended_action ?? ""),
        endFlag: typeof payload.end_flag === "boolean" ? payload.end_flag : undefined,
      });
      break;
    case "action":
      pushCard(state, Number(payload.drone_id ?? 0), {
        kind: "action",
        droneId: Number(payload.drone_id ?? 0),
        tool: String(payload.tool_name ?? ""),
        success: Boolean(payload.success),
        message: String(payload.message ?? ""),
      });
      break;
    case "evaluation":
      pushCard(state, Number(payload.drone_id ?? 0), {
        kind: "evaluation",
        droneId: Number(payload.drone_id ?? 0),
        summary: String(payload.evaluation_summary ?? ""),
        endFlag: Boolean(payload.end_flag),
        notes: String(payload.next_steps_notes ?? ""),
      });
      break;
    case "state_update":
      // Events arrive in sequence order, so the latest assignment always
      // reflects the highest-sequence snapshot.
      state.fleet = payload as ConsoleViewState["fleet"];
      break;
    case "response":
      state.chat.push({ role: "head", text: String(payload.text ?? "") });
      state.running = false;
      break;
    case "error":
      state.chat.push({
        role: "worker",
        text: payload.drone_id != null
          ? `drone ${payload.drone_id} error: ${payload.error ?? "unknown"}`
          : `error: ${payload.error ?? "unknown"}`,
      });
      break;
  }
  return state;
}

export function replay(events: SessionEvent[]): ConsoleViewState {
  return events.reduce(applyEvent, initialViewState());
}

export function withConnection(state: ConsoleViewState, connection: ConsoleViewState["connection"]): ConsoleViewState {
  return { ...state, connection };
}

export function withNotice(state: ConsoleViewState, notice: string | null): ConsoleViewState {
  return { ...state, notice };
}
