/** Console controller: connects the event stream to the pure view state and
 * guards task submission while a run is active. Rendering is injected so the
 * controller is testable without a DOM. */

import type { ConsoleApi } from "./api.js";
import { applyEvent, initialViewState, withConnection, withNotice } from "./state.js";
import type { ConsoleViewState, SessionEvent } from "./types.js";

export class ConsoleController {
  state: ConsoleViewState = initialViewState();

  constructor(
    private readonly api: ConsoleApi,
    private readonly sessionId: string,
    private readonly render: (state: ConsoleViewState) => void = () => {},
  ) {}

  handleEvent(event: SessionEvent): void {
    this.state = applyEvent(this.state, event);
    this.render(this.state);
  }

  handleConnectionChange(connection: "live" | "reconnecting"): void {
    this.state = withConnection(this.state, connection);
    this.render(this.state);
  }

  /** Submit a task; a busy rejection surfaces inline and changes nothing else. */
  async sendTask(text: string): Promise<boolean> {
    const trimmed = text.trim();
    if (!trimmed) {
      return false;
    }
    if (this.state.running) {
      this.state = withNotice(this.state, "A run is already active; wait for the response.");
      this.render(this.state);
      return false;
    }
    const result = await this.api.sendTask(this.sessionId, trimmed);
    if (!result.ok) {
      const message =
        result.status === 409
          ? "The session is busy with another run; try again after it responds."
          : `Task rejected: ${result.detail}`;
      this.state = withNotice(this.state, message);
      this.render(this.state);
      return false;
    }
    this.state = withNotice(this.state, null);
    this.render(this.state);
    return true;
  }
}
