// Keyboard capture mapped to continuous control.
//
// Space toggles takeover. Arrows (or WASD) drive steering/throttle targets;
// held keys approach their target exponentially so a keyboard can produce
// usable continuous actions. Steering sign: left arrow gives -1 (full left),
// matching the server's "positive steering turns right" convention.

export interface InputState {
  takeover: boolean;
  steering: number;
  throttle: number;
}

export class KeyboardController {
  private keys = new Set<string>();
  state: InputState = { takeover: false, steering: 0, throttle: 0 };
  /** Per-tick approach rate toward the held target, in (0, 1]. */
  smoothing: number;
  /** Per-tick decay toward 0 when no key is held. */
  centering: number;

  constructor(smoothing = 0.35, centering = 0.5) {
    this.smoothing = smoothing;
    this.centering = centering;
  }

  keyDown(code: string): void {
    if (code === "Space") {
      this.state.takeover = !this.state.takeover;
      return;
    }
    this.keys.add(code);
  }

  keyUp(code: string): void {
    this.keys.delete(code);
  }

  private target(neg: string[], pos: string[]): number {
    const n = neg.some((k) => this.keys.has(k));
    const p = pos.some((k) => this.keys.has(k));
    if (n && !p) return -1;
    if (p && !n) return 1;
    return 0;
  }

  /** Advance the smoothed state one tick; returns a copy. */
  tick(): InputState {
    const steerTarget = this.target(["ArrowLeft", "KeyA"], ["ArrowRight", "KeyD"]);
    const throttleTarget = this.target(["ArrowDown", "KeyS"], ["ArrowUp", "KeyW"]);
    this.state.steering = approach(this.state.steering, steerTarget, steerTarget === 0 ? this.centering : this.smoothing);
    this.state.throttle = approach(this.state.throttle, throttleTarget, throttleTarget === 0 ? this.centering : this.smoothing);
    return { ...this.state };
  }

  attach(target: EventTarget): void {
    target.addEventListener("keydown", (e) => {
      const ev = e as KeyboardEvent;
      if (["Space", "ArrowLeft", "ArrowRight", "ArrowUp", "ArrowDown"].includes(ev.code)) ev.preventDefault();
      this.keyDown(ev.code);
    });
    target.addEventListener("keyup", (e) => this.keyUp((e as KeyboardEvent).code));
  }
}

function approach(current: number, target: number, rate: number): number {
  const next = current + (target - current) * rate;
  return Math.max(-1, Math.min(1, Math.abs(next - target) < 1e-3 ? target : next));
}
