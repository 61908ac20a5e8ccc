"""Procedural road geometry: seeded generation, projection, serialization.

A map is a chain of straight and circular-arc segments sampled into a
centerline polyline, a drivable width, circular obstacles, and a destination
arc-length. Obstacle placement always leaves a straight-ahead corridor of
configurable half-width free along the centerline, so a centerline-tracking
controller can complete every generated map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from guardrl.errors import MapGenerationError

CENTERLINE_STEP = 0.5  # meters between sampled centerline points

MAP_FORMAT = "guardrl-map"
MAP_VERSION = 1


@dataclass(frozen=True)
class Difficulty:
    """Knobs for the procedural generator."""

    min_segments: int = 4
    max_segments: int = 7
    straight_length: tuple[float, float] = (28.0, 46.0)
    curve_radius: tuple[float, float] = (15.0, 34.0)
    curve_angle: tuple[float, float] = (0.4, 1.2)
    obstacle_density: float = 0.018  # expected obstacles per meter of track
    obstacle_radius: tuple[float, float] = (0.4, 0.8)
    corridor_half_width: float = 1.6  # clear strip about the centerline
    min_obstacle_spacing: float = 10.0  # along-track separation
    first_obstacle_at: float = 18.0


@dataclass
class MapSpec:
    """One generated road. Derived polyline arrays are rebuilt from segments."""

    seed: int
    lane_width: float
    segments: list[tuple]  # ("straight", length) | ("left"|"right", radius, angle)
    obstacles: list[tuple[float, float, float]]  # (x, y, radius)
    destination_s: float
    # derived, filled by _build_polyline
    cl_xy: np.ndarray = field(default=None, repr=False)
    cl_theta: np.ndarray = field(default=None, repr=False)
    cl_s: np.ndarray = field(default=None, repr=False)
    left_xy: np.ndarray = field(default=None, repr=False)
    right_xy: np.ndarray = field(default=None, repr=False)
    obs_xy: np.ndarray = field(default=None, repr=False)
    obs_r: np.ndarray = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.cl_xy is None:
            _build_polyline(self)

    @property
    def half_width(self) -> float:
        return self.lane_width / 2.0

    @property
    def total_length(self) -> float:
        return float(self.cl_s[-1])


def _segment_points(segments: list[tuple]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xs = [np.array([0.0, 0.0])]
    thetas = [0.0]
    ss = [0.0]
    pos = np.array([0.0, 0.0])
    theta = 0.0
    s = 0.0
    for seg in segments:
        kind = seg[0]
        if kind == "straight":
            length = float(seg[1])
            steps = _substeps(length)
            for ds in steps:
                pos = pos + ds * np.array([np.cos(theta), np.sin(theta)])
                s += ds
                xs.append(pos.copy())
                thetas.append(theta)
                ss.append(s)
        elif kind in ("left", "right"):
            radius, angle = float(seg[1]), float(seg[2])
            sign = 1.0 if kind == "left" else -1.0
            length = radius * angle
            for ds in _substeps(length):
                dtheta = sign * ds / radius
                # exact chord of the arc step
                chord = 2.0 * radius * np.sin(abs(dtheta) / 2.0)
                mid = theta + dtheta / 2.0
                pos = pos + chord * np.array([np.cos(mid), np.sin(mid)])
                theta = theta + dtheta
                s += ds
                xs.append(pos.copy())
                thetas.append(theta)
                ss.append(s)
        else:
            raise MapGenerationError(f"unknown segment kind {kind!r}")
    return np.array(xs), np.array(thetas), np.array(ss)


def _substeps(length: float) -> list[float]:
    n = int(length // CENTERLINE_STEP)
    steps = [CENTERLINE_STEP] * n
    rem = length - n * CENTERLINE_STEP
    if rem > 1e-9:
        steps.append(rem)
    return steps


def _build_polyline(m: MapSpec) -> None:
    cl_xy, cl_theta, cl_s = _segment_points(m.segments)
    normal = np.stack([-np.sin(cl_theta), np.cos(cl_theta)], axis=1)
    m.cl_xy = cl_xy
    m.cl_theta = cl_theta
    m.cl_s = cl_s
    m.left_xy = cl_xy + m.half_width * normal
    m.right_xy = cl_xy - m.half_width * normal
    if m.obstacles:
        m.obs_xy = np.array([[o[0], o[1]] for o in m.obstacles])
        m.obs_r = np.array([o[2] for o in m.obstacles])
    else:
        m.obs_xy = np.zeros((0, 2))
        m.obs_r = np.zeros(0)


def point_at(m: MapSpec, s: float) -> tuple[np.ndarray, float]:
    """Interpolated centerline point and tangent heading at arc-length s (clamped)."""
    s = float(np.clip(s, 0.0, m.cl_s[-1]))
    i = int(np.searchsorted(m.cl_s, s, side="right") - 1)
    i = min(max(i, 0), len(m.cl_s) - 2)
    span = m.cl_s[i + 1] - m.cl_s[i]
    t = 0.0 if span <= 0 else (s - m.cl_s[i]) / span
    xy = (1.0 - t) * m.cl_xy[i] + t * m.cl_xy[i + 1]
    th = m.cl_theta[i] + t * _wrap(m.cl_theta[i + 1] - m.cl_theta[i])
    return xy, float(_wrap(th))


def _wrap(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def project(m: MapSpec, xy: np.ndarray, hint: int | None = None, window: int = 40):
    """Project a point onto the centerline.

    Returns (s, lateral, index, tangent_heading); lateral > 0 means left of the
    centerline. With a hint index the search is restricted to a window around
    it, which keeps per-step projection cheap and monotone during rollouts.
    """
    n = len(m.cl_s)
    if hint is None:
        lo, hi = 0, n
    else:
        lo, hi = max(0, hint - window), min(n, hint + window + 1)
    pts = m.cl_xy[lo:hi]
    d2 = ((pts - xy) ** 2).sum(axis=1)
    i = int(np.argmin(d2)) + lo
    best = None
    for j in (i - 1, i):
        if j < 0 or j + 1 >= n:
            continue
        p, q = m.cl_xy[j], m.cl_xy[j + 1]
        seg = q - p
        L2 = float(seg @ seg)
        if L2 <= 0:
            continue
        t = float(np.clip((xy - p) @ seg / L2, 0.0, 1.0))
        foot = p + t * seg
        dist2 = float(((xy - foot) ** 2).sum())
        if best is None or dist2 < best[0]:
            s = m.cl_s[j] + t * (m.cl_s[j + 1] - m.cl_s[j])
            th = m.cl_theta[j] + t * _wrap(m.cl_theta[j + 1] - m.cl_theta[j])
            best = (dist2, s, foot, th, j)
    if best is None:  # single-point centerline, degenerate
        return float(m.cl_s[i]), 0.0, i, float(m.cl_theta[i])
    dist2, s, foot, th, j = best
    nvec = np.array([-np.sin(th), np.cos(th)])
    lateral = float((xy - foot) @ nvec)
    return float(s), lateral, j, float(_wrap(th))


def project_batch(m: MapSpec, xy: np.ndarray, lo: int, hi: int):
    """Vectorized nearest-vertex projection for (N, 2) points against cl[lo:hi].

    Coarser than `project` (vertex resolution, ~CENTERLINE_STEP/2 error) but
    fast enough to screen thousands of lookahead rollout positions.
    """
    pts = m.cl_xy[lo:hi]
    d2 = ((xy[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    idx = np.argmin(d2, axis=1) + lo
    th = m.cl_theta[idx]
    nvec = np.stack([-np.sin(th), np.cos(th)], axis=1)
    lateral = ((xy - m.cl_xy[idx]) * nvec).sum(axis=1)
    return m.cl_s[idx], lateral, idx, th


def generate_map(seed: int, difficulty: Difficulty = Difficulty(), lane_width: float = 8.0) -> MapSpec:
    """Deterministic-in-seed procedural map. Raises MapGenerationError when the
    difficulty cannot be satisfied (e.g. obstacles cannot fit the road)."""
    rng = np.random.default_rng(seed)
    for _ in range(24):
        segments = _sample_segments(rng, difficulty)
        cl_xy, cl_theta, cl_s = _segment_points(segments)
        total = float(cl_s[-1])
        obstacles = _place_obstacles(rng, difficulty, lane_width, cl_xy, cl_theta, cl_s)
        if obstacles is None:
            continue
        return MapSpec(
            seed=seed,
            lane_width=lane_width,
            segments=segments,
            obstacles=obstacles,
            destination_s=total - 1.5,
        )
    raise MapGenerationError(f"seed {seed}: could not place obstacles at density {difficulty.obstacle_density} on a {lane_width} m road")


def _sample_segments(rng: np.random.Generator, d: Difficulty) -> list[tuple]:
    n = int(rng.integers(d.min_segments, d.max_segments + 1))
    segments: list[tuple] = [("straight", float(np.round(rng.uniform(*d.straight_length), 3)))]
    for _ in range(n - 1):
        kind = rng.choice(["straight", "left", "right"])
        if kind == "straight":
            segments.append(("straight", float(np.round(rng.uniform(*d.straight_length), 3))))
        else:
            radius = float(np.round(rng.uniform(*d.curve_radius), 3))
            angle = float(np.round(rng.uniform(*d.curve_angle), 3))
            segments.append((str(kind), radius, angle))
    return segments


def _place_obstacles(rng, d: Difficulty, lane_width, cl_xy, cl_theta, cl_s):
    total = float(cl_s[-1])
    half = lane_width / 2.0
    usable = max(0.0, total - d.first_obstacle_at - 10.0)
    count = int(np.floor(d.obstacle_density * usable))
    if rng.uniform() < d.obstacle_density * usable - count:
        count += 1
    if count == 0:
        return []
    placed: list[tuple[float, float, float, float]] = []  # (s, x, y, r)
    for _ in range(count):
        ok = False
        for _try in range(60):
            r = float(rng.uniform(*d.obstacle_radius))
            lat_lo = d.corridor_half_width + r
            lat_hi = half - r - 0.2
            if lat_hi <= lat_lo:
                continue
            s = float(rng.uniform(d.first_obstacle_at, total - 10.0))
            if any(abs(s - p[0]) < d.min_obstacle_spacing for p in placed):
                continue
            lat = float(rng.uniform(lat_lo, lat_hi)) * (1.0 if rng.uniform() < 0.5 else -1.0)
            i = int(np.searchsorted(cl_s, s))
            i = min(i, len(cl_s) - 1)
            nvec = np.array([-np.sin(cl_theta[i]), np.cos(cl_theta[i])])
            xy = cl_xy[i] + lat * nvec
            placed.append((s, float(xy[0]), float(xy[1]), r))
            ok = True
            break
        if not ok:
            return None
    placed.sort(key=lambda p: p[0])
    return [(p[1], p[2], p[3]) for p in placed]


def save_map(m: MapSpec, path: str | Path) -> None:
    doc = {
        "format": MAP_FORMAT,
        "version": MAP_VERSION,
        "seed": m.seed,
        "lane_width": m.lane_width,
        "segments": [list(s) for s in m.segments],
        "obstacles": [list(o) for o in m.obstacles],
        "destination_s": m.destination_s,
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def load_map(path: str | Path) -> MapSpec:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != MAP_FORMAT or doc.get("version") != MAP_VERSION:
        raise MapGenerationError(f"{path}: not a version-{MAP_VERSION} map file")
    return MapSpec(
        seed=int(doc["seed"]),
        lane_width=float(doc["lane_width"]),
        segments=[tuple(s) for s in doc["segments"]],
        obstacles=[tuple(o) for o in doc["obstacles"]],
        destination_s=float(doc["destination_s"]),
    )
