/** Thin fetch wrappers for the session service. */

export interface SendTaskOk {
  ok: true;
  runId: string;
}

export interface SendTaskRejected {
  ok: false;
  status: number;
  detail: string;
}

export type SendTaskResult = SendTaskOk | SendTaskRejected;

export interface ConsoleApi {
  createSession(config: Record<string, unknown>): Promise<string>;
  sendTask(sessionId: string, text: string): Promise<SendTaskResult>;
}

export class HttpApi implements ConsoleApi {
  constructor(private readonly baseUrl: string = "") {}

  async createSession(config: Record<string, unknown>): Promise<string> {
    const response = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(config),
    });
    if (!response.ok) {
      throw new Error(`create session failed: HTTP ${response.status}`);
    }
    const body = (await response.json()) as { session_id: string };
    return body.session_id;
  }

  async sendTask(sessionId: string, text: string): Promise<SendTaskResult> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/input`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
    if (response.ok) {
      const body = (await response.json()) as { run_id: string };
      return { ok: true, runId: body.run_id };
    }
    let detail = `HTTP ${response.status}`;
    try {
      const body = (await response.json()) as { detail?: unknown };
      if (body.detail) {
        detail = String(body.detail);
      }
    } catch {
      // keep the status text
    }
    return { ok: false, status: response.status, detail };
  }
}
