// Browser entry point: canvas + keyboard + websocket wiring.

import { ConsoleClient } from "./client.js";
import { ConsoleState } from "./state.js";
import { KeyboardController } from "./input.js";
import { hudLines } from "./hud.js";
import { render, renderOverlay, COLORS } from "./render.js";

function main(): void {
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const params = new URLSearchParams(window.location.search);
  const url = params.get("ws") ?? `ws://${window.location.hostname || "127.0.0.1"}:8700/ws`;

  const state = new ConsoleState();
  const controller = new KeyboardController();
  controller.attach(window);
  new ConsoleClient(url, state, controller).connect();

  const draw = () => {
    const w = (canvas.width = canvas.clientWidth);
    const h = (canvas.height = canvas.clientHeight);
    if (state.frame !== null) {
      render(ctx, state.frame, controller.state, w, h);
    } else {
      ctx.fillStyle = COLORS.background;
      ctx.fillRect(0, 0, w, h);
    }
    renderOverlay(ctx, hudLines(state, controller.state), w);
    requestAnimationFrame(draw);
  };
  requestAnimationFrame(draw);
}

main();
