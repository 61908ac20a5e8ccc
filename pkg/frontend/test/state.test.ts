import { describe, expect, it } from "vitest";
import { ConsoleState } from "../src/state.js";
import { hudLines } from "../src/hud.js";
import { FrameMsg } from "../src/protocol.js";

function frame(tick: number, envStep = tick, takeoverRate = 0.5): FrameMsg {
  return {
    v: 1,
    type: "frame",
    tick,
    paused: false,
    ego: { x: 0, y: 0, heading: 0, speed: 2 },
    view: { centerline: [], left: [], right: [], obstacles: [], destination: [0, 0] },
    lidar: [],
    agent_action: [0, 0],
    takeover: false,
    stats: { episode: 0, step: tick, env_step: envStep, takeover_rate: takeoverRate, episodic_cost: 1.25 },
  };
}

describe("ConsoleState", () => {
  it("keeps only the latest frame", () => {
    const s = new ConsoleState();
    s.onFrame(frame(5));
    s.onFrame(frame(3)); // stale: dropped
    expect(s.frame!.tick).toBe(5);
    expect(s.framesSkipped).toBe(1);
  });

  it("counts malformed frames as skipped", () => {
    const s = new ConsoleState();
    s.onFrame(null);
    expect(s.framesSkipped).toBe(1);
    expect(s.frame).toBeNull();
  });

  it("tracks history bounded by the limit", () => {
    const s = new ConsoleState(10);
    for (let t = 0; t < 25; t++) s.onFrame(frame(t));
    expect(s.history.length).toBe(10);
    expect(s.history[9].envStep).toBe(24);
  });

  it("close marks the connection", () => {
    const s = new ConsoleState();
    s.onClose();
    expect(s.connection).toBe("closed");
  });
});

describe("hudLines", () => {
  it("shows the server-reported takeover rate verbatim", () => {
    const s = new ConsoleState();
    s.onFrame(frame(1, 1, 0.333));
    const lines = hudLines(s, { takeover: false, steering: 0, throttle: 0 });
    expect(lines.join("\n")).toContain("33.3%");
    expect(lines.join("\n")).toContain("1.25");
  });

  it("renders takeover state of the controller", () => {
    const s = new ConsoleState();
    s.onFrame(frame(2));
    const lines = hudLines(s, { takeover: true, steering: -0.5, throttle: 0.25 });
    expect(lines.join("\n")).toContain("TAKEOVER");
  });

  it("disconnected message when closed", () => {
    const s = new ConsoleState();
    s.onClose();
    expect(hudLines(s, { takeover: false, steering: 0, throttle: 0 })).toEqual(["DISCONNECTED"]);
  });

  it("paused overlay line", () => {
    const s = new ConsoleState();
    const f = frame(3);
    f.paused = true;
    s.onFrame(f);
    expect(hudLines(s, { takeover: false, steering: 0, throttle: 0 }).join("\n")).toContain("PAUSED");
  });
});
