// Top-down canvas rendering of a FrameMsg: road edges, centerline, obstacles,
// destination, lidar fan, the ego (human-control color while takeover is on),
// and the agent's proposed action as a vector from the ego.

import { FrameMsg, XY } from "./protocol.js";
import { InputState } from "./input.js";

export const COLORS = {
  background: "#101418",
  road: "#2a2f36",
  edge: "#8a929c",
  centerline: "#4a5568",
  obstacle: "#d97706",
  destination: "#22c55e",
  egoAgent: "#38bdf8",
  egoHuman: "#f43f5e",
  lidar: "rgba(125, 211, 252, 0.25)",
  action: "#fbbf24",
  text: "#e5e7eb",
};

const SCALE = 6; // pixels per meter
const CAR_RADIUS = 0.8;

export function render(ctx: CanvasRenderingContext2D, frame: FrameMsg, input: InputState, w: number, h: number): void {
  ctx.save();
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, w, h);

  // world -> screen: ego centered, y up
  ctx.translate(w / 2, h / 2);
  ctx.scale(SCALE, -SCALE);
  ctx.translate(-frame.ego.x, -frame.ego.y);
  ctx.lineWidth = 1 / SCALE;

  drawRoad(ctx, frame);
  drawLidar(ctx, frame);
  drawObstacles(ctx, frame);
  drawDestination(ctx, frame.view.destination);
  drawEgo(ctx, frame);
  drawActionVector(ctx, frame);
  ctx.restore();
}

function path(ctx: CanvasRenderingContext2D, pts: XY[]): void {
  if (pts.length < 2) return;
  ctx.beginPath();
  ctx.moveTo(pts[0][0], pts[0][1]);
  for (let i = 1; i < pts.length; i++) ctx.lineTo(pts[i][0], pts[i][1]);
  ctx.stroke();
}

function drawRoad(ctx: CanvasRenderingContext2D, frame: FrameMsg): void {
  const v = frame.view;
  if (v.left.length > 1 && v.right.length > 1) {
    ctx.beginPath();
    ctx.moveTo(v.left[0][0], v.left[0][1]);
    for (const p of v.left) ctx.lineTo(p[0], p[1]);
    for (let i = v.right.length - 1; i >= 0; i--) ctx.lineTo(v.right[i][0], v.right[i][1]);
    ctx.closePath();
    ctx.fillStyle = COLORS.road;
    ctx.fill();
  }
  ctx.strokeStyle = COLORS.edge;
  path(ctx, v.left);
  path(ctx, v.right);
  ctx.strokeStyle = COLORS.centerline;
  ctx.setLineDash([1.5, 1.5]);
  path(ctx, v.centerline);
  ctx.setLineDash([]);
}

function drawLidar(ctx: CanvasRenderingContext2D, frame: FrameMsg): void {
  ctx.strokeStyle = COLORS.lidar;
  for (const end of frame.lidar) {
    ctx.beginPath();
    ctx.moveTo(frame.ego.x, frame.ego.y);
    ctx.lineTo(end[0], end[1]);
    ctx.stroke();
  }
}

function drawObstacles(ctx: CanvasRenderingContext2D, frame: FrameMsg): void {
  ctx.fillStyle = COLORS.obstacle;
  for (const [x, y, r] of frame.view.obstacles) {
    ctx.beginPath();
    ctx.arc(x, y, r, 0, Math.PI * 2);
    ctx.fill();
  }
}

function drawDestination(ctx: CanvasRenderingContext2D, dest: XY): void {
  ctx.strokeStyle = COLORS.destination;
  ctx.lineWidth = 3 / SCALE;
  ctx.beginPath();
  ctx.arc(dest[0], dest[1], 1.6, 0, Math.PI * 2);
  ctx.stroke();
  ctx.lineWidth = 1 / SCALE;
}

function drawEgo(ctx: CanvasRenderingContext2D, frame: FrameMsg): void {
  const { x, y, heading } = frame.ego;
  // human-controlled ticks are outlined in the takeover color
  ctx.fillStyle = frame.takeover ? COLORS.egoHuman : COLORS.egoAgent;
  ctx.beginPath();
  ctx.arc(x, y, CAR_RADIUS, 0, Math.PI * 2);
  ctx.fill();
  ctx.strokeStyle = COLORS.text;
  ctx.beginPath();
  ctx.moveTo(x, y);
  ctx.lineTo(x + 1.8 * Math.cos(heading), y + 1.8 * Math.sin(heading));
  ctx.stroke();
}

function drawActionVector(ctx: CanvasRenderingContext2D, frame: FrameMsg): void {
  // proposed agent action: throttle along heading, steering across it
  const { x, y, heading } = frame.ego;
  const [steer, throttle] = frame.agent_action;
  const fx = Math.cos(heading);
  const fy = Math.sin(heading);
  // positive steering turns right = clockwise = negative normal direction
  const nx = Math.sin(heading);
  const ny = -Math.cos(heading);
  ctx.strokeStyle = COLORS.action;
  ctx.lineWidth = 2 / SCALE;
  ctx.beginPath();
  ctx.moveTo(x, y);
  ctx.lineTo(x + 3 * (throttle * fx + steer * nx), y + 3 * (throttle * fy + steer * ny));
  ctx.stroke();
  ctx.lineWidth = 1 / SCALE;
}

export function renderOverlay(ctx: CanvasRenderingContext2D, lines: string[], w: number): void {
  ctx.save();
  ctx.fillStyle = "rgba(16, 20, 24, 0.75)";
  ctx.fillRect(8, 8, 340, 18 * lines.length + 12);
  ctx.fillStyle = COLORS.text;
  ctx.font = "13px monospace";
  lines.forEach((line, i) => ctx.fillText(line, 16, 26 + 18 * i));
  ctx.restore();
  void w;
}
