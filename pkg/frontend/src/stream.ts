/** Resumable event-stream client.
 *
 * Reads the service's server-sent event stream with fetch, tracks the last
 * seen sequence, and reconnects from lastSequence + 1 after a drop so the
 * console never misses or duplicates an event.
 */

import type { SessionEvent } from "./types.js";

export interface SseMessage {
  id?: string;
  data: string;
}

/** Incremental SSE parser; feed() returns completed messages per chunk. */
export class SseParser {
  private buffer = "";

  feed(chunk: string): SseMessage[] {
    this.buffer += chunk;
    const messages: SseMessage[] = [];
    let boundary = this.buffer.indexOf("\n\n");
    while (boundary >= 0) {
      const block = this.buffer.slice(0, boundary);
      this.buffer = this.buffer.slice(boundary + 2);
      const message: SseMessage = { data: "" };
      const dataLines: string[] = [];
      for (const line of block.split("\n")) {
        if (line.startsWith("id: ")) {
          message.id = line.slice(4).trim();
        } else if (line.startsWith("data: ")) {
          dataLines.push(line.slice(6));
        }
      }
      message.data = dataLines.join("\n");
      if (message.data.length > 0) {
        messages.push(message);
      }
      boundary = this.buffer.indexOf("\n\n");
    }
    return messages;
  }
}

export interface StreamCallbacks {
  onEvent(event: SessionEvent): void;
  onConnectionChange(state: "live" | "reconnecting"): void;
}

export class EventStreamClient {
  private lastSequence = 0;
  private stopped = false;
  private retryDelayMs = 500;

  constructor(
    private readonly baseUrl: string,
    private readonly sessionId: string,
    private readonly callbacks: StreamCallbacks,
  ) {}

  start(fromSequence = 0): void {
    this.lastSequence = Math.max(0, fromSequence - 1);
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
  }

  private async loop(): Promise<void> {
    while (!this.stopped) {
      try {
        const from = this.lastSequence + 1;
        const url = `${this.baseUrl}/sessions/${this.sessionId}/events?from=${from}&follow=true`;
        const response = await fetch(url, { headers: { Accept: "text/event-stream" } });
        if (!response.ok || !response.body) {
          throw new Error(`stream failed: HTTP ${response.status}`);
        }
        this.callbacks.onConnectionChange("live");
        this.retryDelayMs = 500;
        const reader = response.body.getReader();
        const decoder = new TextDecoder();
        const parser = new SseParser();
        for (;;) {
          const { value, done } = await reader.read();
          if (done) {
            break;
          }
          for (const message of parser.feed(decoder.decode(value, { stream: true }))) {
            const event = JSON.parse(message.data) as SessionEvent;
            if (event.sequence <= this.lastSequence) {
              continue; // duplicate after resume
            }
            this.lastSequence = event.sequence;
            this.callbacks.onEvent(event);
          }
          if (this.stopped) {
            return;
          }
        }
      } catch {
        // fall through to reconnect
      }
      if (this.stopped) {
        return;
      }
      this.callbacks.onConnectionChange("reconnecting");
      await new Promise((resolve) => setTimeout(resolve, this.retryDelayMs));
      this.retryDelayMs = Math.min(this.retryDelayMs * 2, 5000);
    }
  }
}
