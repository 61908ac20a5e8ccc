import { describe, expect, it } from "vitest";
import { makeInput, parseFrame, PROTOCOL_VERSION } from "../src/protocol.js";

function validFrame(tick = 0): Record<string, unknown> {
  return {
    v: PROTOCOL_VERSION,
    type: "frame",
    tick,
    paused: false,
    ego: { x: 1.5, y: -2.0, heading: 0.1, speed: 3.2 },
    view: {
      centerline: [[0, 0], [1, 0]],
      left: [[0, 4], [1, 4]],
      right: [[0, -4], [1, -4]],
      obstacles: [[5, 2, 0.5]],
      destination: [50, 0],
    },
    lidar: [[10, 0], [0, 10]],
    agent_action: [0.1, -0.2],
    takeover: false,
    stats: { episode: 0, step: 3, env_step: 3, takeover_rate: 0.25, episodic_cost: 0.4 },
  };
}

describe("makeInput", () => {
  it("clamps steering and throttle to [-1, 1]", () => {
    const msg = makeInput(7, true, -5, 9);
    expect(msg.steering).toBe(-1);
    expect(msg.throttle).toBe(1);
    expect(msg.ack_tick).toBe(7);
    expect(msg.v).toBe(PROTOCOL_VERSION);
  });

  it("truncates fractional ack ticks", () => {
    expect(makeInput(3.9, false, 0, 0).ack_tick).toBe(3);
  });
});

describe("parseFrame", () => {
  it("accepts a well-formed frame", () => {
    const f = parseFrame(JSON.stringify(validFrame(5)));
    expect(f).not.toBeNull();
    expect(f!.tick).toBe(5);
  });

  it("rejects malformed JSON", () => {
    expect(parseFrame("{nope")).toBeNull();
  });

  it("rejects wrong version or type", () => {
    const f = validFrame();
    expect(parseFrame(JSON.stringify({ ...f, v: 2 }))).toBeNull();
    expect(parseFrame(JSON.stringify({ ...f, type: "input" }))).toBeNull();
  });

  it("rejects non-finite ego fields", () => {
    const f = validFrame();
    (f.ego as Record<string, unknown>).speed = "fast";
    expect(parseFrame(JSON.stringify(f))).toBeNull();
  });

  it("rejects out-of-range agent actions", () => {
    const f = validFrame();
    f.agent_action = [1.5, 0];
    expect(parseFrame(JSON.stringify(f))).toBeNull();
  });

  it("rejects broken geometry", () => {
    const f = validFrame();
    (f.view as Record<string, unknown>).centerline = [[0]];
    expect(parseFrame(JSON.stringify(f))).toBeNull();
  });
});
