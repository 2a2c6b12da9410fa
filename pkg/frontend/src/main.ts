/** Browser bootstrap: create or join a session and wire up the DOM. */

import { HttpApi } from "./api.js";
import { ConsoleController } from "./console.js";
import { paintMap, renderMap } from "./map.js";
import { EventStreamClient } from "./stream.js";
import type { ConsoleViewState, StepCard } from "./types.js";

const api = new HttpApi("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function renderChat(state: ConsoleViewState): void {
  const chat = el<HTMLDivElement>("chat");
  chat.innerHTML = "";
  for (const message of state.chat) {
    const row = document.createElement("div");
    row.className = `msg msg-${message.role}`;
    row.textContent = `${message.role}: ${message.text}`;
    chat.appendChild(row);
  }
  chat.scrollTop = chat.scrollHeight;
}

function cardText(card: StepCard): string {
  switch (card.kind) {
    case "reasoning":
      return `reason: ${card.reasoning}${card.endFlag ? " [end]" : ""}`;
    case "action":
      return `action: ${card.tool} ${card.success ? "ok" : "FAILED"} - ${card.message}`;
    case "evaluation":
      return `evaluate: ${card.summary}${card.endFlag ? " [end]" : ""}`;
  }
}

function renderPanels(state: ConsoleViewState): void {
  const panels = el<HTMLDivElement>("panels");
  panels.innerHTML = "";
  for (const droneId of Object.keys(state.threadPanels).map(Number).sort((a, b) => a - b)) {
    const column = document.createElement("div");
    column.className = "panel";
    const title = document.createElement("h3");
    title.textContent = `Drone ${droneId}`;
    column.appendChild(title);
    for (const card of state.threadPanels[droneId] ?? []) {
      const node = document.createElement("div");
      node.className = `card card-${card.kind}`;
      node.textContent = cardText(card);
      column.appendChild(node);
    }
    panels.appendChild(column);
  }
}

function renderAll(state: ConsoleViewState): void {
  renderChat(state);
  renderPanels(state);

  const canvas = el<HTMLCanvasElement>("map");
  const ctx = canvas.getContext("2d");
  if (ctx) {
    paintMap(ctx, renderMap(state.fleet), canvas.width, canvas.height);
  }

  el<HTMLSpanElement>("connection").textContent = state.connection;
  const notice = el<HTMLDivElement>("notice");
  notice.textContent = state.notice ?? "";
  notice.style.display = state.notice ? "block" : "none";

  const input = el<HTMLInputElement>("task-input");
  const button = el<HTMLButtonElement>("send");
  input.disabled = state.running;
  button.disabled = state.running;
  button.textContent = state.running ? "running..." : "send";
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  let sessionId = params.get("session");
  if (!sessionId) {
    sessionId = await api.createSession({ n_drones: 2, method: params.get("method") ?? "reacteval" });
    params.set("session", sessionId);
    window.history.replaceState(null, "", `?${params.toString()}`);
  }
  el<HTMLSpanElement>("session-id").textContent = sessionId;

  const controller = new ConsoleController(api, sessionId, renderAll);
  const stream = new EventStreamClient("", sessionId, {
    onEvent: (event) => controller.handleEvent(event),
    onConnectionChange: (connection) => controller.handleConnectionChange(connection),
  });
  stream.start(0);

  const input = el<HTMLInputElement>("task-input");
  const send = async () => {
    if (await controller.sendTask(input.value)) {
      input.value = "";
    }
  };
  el<HTMLButtonElement>("send").addEventListener("click", () => void send());
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      void send();
    }
  });
}

void boot();
