// Wire types for the copilot server protocol (v1). Mirrors docs/protocol.md
// on the server side; every message carries {v, type}.

export const PROTOCOL_VERSION = 1;

export type XY = [number, number];

export interface EgoPose {
  x: number;
  y: number;
  heading: number;
  speed: number;
}

export interface FrameStats {
  episode: number;
  step: number;
  env_step: number;
  takeover_rate: number;
  episodic_cost: number;
}

export interface FrameView {
  centerline: XY[];
  left: XY[];
  right: XY[];
  obstacles: [number, number, number][];
  destination: XY;
}

export interface FrameMsg {
  v: number;
  type: "frame";
  tick: number;
  paused: boolean;
  ego: EgoPose;
  view: FrameView;
  lidar: XY[];
  agent_action: [number, number];
  takeover: boolean;
  stats: FrameStats;
}

export interface InputMsg {
  v: number;
  type: "input";
  ack_tick: number;
  takeover: boolean;
  steering: number;
  throttle: number;
}

export interface HelloMsg {
  v: number;
  type: "hello";
  client: string;
}

const clamp = (x: number) => Math.max(-1, Math.min(1, x));

export function makeInput(ackTick: number, takeover: boolean, steering: number, throttle: number): InputMsg {
  return {
    v: PROTOCOL_VERSION,
    type: "input",
    ack_tick: Math.trunc(ackTick),
    takeover,
    steering: clamp(steering),
    throttle: clamp(throttle),
  };
}

export function makeHello(client: string): HelloMsg {
  return { v: PROTOCOL_VERSION, type: "hello", client };
}

function isXY(p: unknown): p is XY {
  return Array.isArray(p) && p.length === 2 && p.every((v) => typeof v === "number" && isFinite(v));
}

// Defensive parse: the renderer skips malformed frames rather than crashing.
export function parseFrame(raw: string): FrameMsg | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  const f = msg as FrameMsg;
  if (!f || typeof f !== "object" || f.v !== PROTOCOL_VERSION || f.type !== "frame") return null;
  if (!Number.isInteger(f.tick) || f.tick < 0 || typeof f.paused !== "boolean") return null;
  const e = f.ego;
  if (!e || ![e.x, e.y, e.heading, e.speed].every((v) => typeof v === "number" && isFinite(v))) return null;
  const v = f.view;
  if (!v || !Array.isArray(v.centerline) || !Array.isArray(v.left) || !Array.isArray(v.right)) return null;
  if (!v.centerline.every(isXY) || !v.left.every(isXY) || !v.right.every(isXY)) return null;
  if (!Array.isArray(v.obstacles) || !isXY(v.destination as unknown as XY)) return null;
  if (!Array.isArray(f.lidar) || !f.lidar.every(isXY)) return null;
  if (
    !Array.isArray(f.agent_action) ||
    f.agent_action.length !== 2 ||
    !f.agent_action.every((a) => typeof a === "number" && a >= -1 && a <= 1)
  )
    return null;
  const s = f.stats;
  if (!s || !Number.isInteger(s.episode) || !Number.isInteger(s.step)) return null;
  if (typeof s.takeover_rate !== "number" || s.takeover_rate < 0 || s.takeover_rate > 1) return null;
  return f;
}
