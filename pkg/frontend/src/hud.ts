// HUD text: displays the server-reported stats verbatim (no client-side
// recomputation, so the numbers cannot drift from the server's).

import { ConsoleState } from "./state.js";
import { InputState } from "./input.js";

export function hudLines(state: ConsoleState, input: InputState): string[] {
  const lines: string[] = [];
  if (state.connection === "closed") return ["DISCONNECTED"];
  if (state.frame === null) return ["waiting for frames..."];
  const s = state.frame.stats;
  lines.push(`episode ${s.episode}  step ${s.step}  env step ${s.env_step}`);
  lines.push(`takeover rate ${(s.takeover_rate * 100).toFixed(1)}%  intervention cost ${s.episodic_cost.toFixed(2)}`);
  lines.push(`speed ${state.frame.ego.speed.toFixed(1)} m/s`);
  lines.push(
    input.takeover
      ? `TAKEOVER  steer ${input.steering.toFixed(2)}  throttle ${input.throttle.toFixed(2)}`
      : "agent driving (Space to take over)"
  );
  if (state.connection === "paused") lines.push("PAUSED");
  return lines;
}
