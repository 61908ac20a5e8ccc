// Console state: connection status, the latest frame (older frames are
// dropped, never queued), and a short HUD history of server-reported stats.

import { FrameMsg } from "./protocol.js";

export type Connection = "connecting" | "connected" | "paused" | "closed";

export interface HudSample {
  envStep: number;
  takeoverRate: number;
  episodicCost: number;
}

export class ConsoleState {
  connection: Connection = "connecting";
  frame: FrameMsg | null = null;
  history: HudSample[] = [];
  framesSeen = 0;
  framesSkipped = 0;
  historyLimit: number;

  constructor(historyLimit = 300) {
    this.historyLimit = historyLimit;
  }

  onFrame(frame: FrameMsg | null): void {
    if (frame === null) {
      this.framesSkipped += 1;
      return;
    }
    // render only the latest frame
    if (this.frame !== null && frame.tick <= this.frame.tick) {
      this.framesSkipped += 1;
      return;
    }
    this.frame = frame;
    this.framesSeen += 1;
    this.connection = frame.paused ? "paused" : "connected";
    const h = this.history;
    const last = h[h.length - 1];
    if (!last || last.envStep !== frame.stats.env_step) {
      h.push({
        envStep: frame.stats.env_step,
        takeoverRate: frame.stats.takeover_rate,
        episodicCost: frame.stats.episodic_cost,
      });
      if (h.length > this.historyLimit) h.shift();
    }
  }

  onClose(): void {
    this.connection = "closed";
  }
}
