// Websocket client: hello on open, frames into the latest-frame slot, one
// InputMsg per received frame acknowledging its tick.

import { makeHello, makeInput, parseFrame } from "./protocol.js";
import { ConsoleState } from "./state.js";
import { KeyboardController } from "./input.js";

export class ConsoleClient {
  ws: WebSocket | null = null;

  constructor(
    readonly url: string,
    readonly state: ConsoleState,
    readonly controller: KeyboardController,
  ) {}

  connect(): void {
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => ws.send(JSON.stringify(makeHello("browser-console")));
    ws.onmessage = (ev) => {
      const frame = parseFrame(String(ev.data));
      this.state.onFrame(frame);
      if (frame !== null) {
        const input = this.controller.tick();
        ws.send(JSON.stringify(makeInput(frame.tick, input.takeover, input.steering, input.throttle)));
      }
    };
    ws.onclose = () => this.state.onClose();
    ws.onerror = () => this.state.onClose();
  }
}
