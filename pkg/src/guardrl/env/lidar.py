"""Planar lidar: K rays against road-edge polylines and obstacle circles."""

from __future__ import annotations

import numpy as np

from guardrl.env.track import MapSpec


def lidar_scan(m: MapSpec, xy: np.ndarray, heading: float, k: int, max_range: float) -> np.ndarray:
    """K normalized distances, rays uniformly spanning 360 degrees.

    Ray i points at heading + 2*pi*i/K (ray 0 straight ahead). Each distance is
    the nearest hit on a road edge or obstacle, capped at max_range, divided by
    max_range so the result lies in [0, 1].
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    angles = heading + 2.0 * np.pi * np.arange(k) / k
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)  # (k, 2)
    dist = np.full(k, max_range)

    for edge in (m.left_xy, m.right_xy):
        hit = _ray_polyline(xy, dirs, edge, max_range)
        dist = np.minimum(dist, hit)
    if len(m.obs_r):
        hit = _ray_circles(xy, dirs, m.obs_xy, m.obs_r, max_range)
        dist = np.minimum(dist, hit)
    return dist / max_range


def _ray_polyline(origin: np.ndarray, dirs: np.ndarray, pts: np.ndarray, max_range: float) -> np.ndarray:
    """Min hit distance per ray against consecutive segments of a polyline,
    considering only segments with an endpoint within range of the origin."""
    near = ((pts - origin) ** 2).sum(axis=1) <= (max_range + 1.0) ** 2
    seg_mask = near[:-1] | near[1:]
    if not seg_mask.any():
        return np.full(len(dirs), max_range)
    p = pts[:-1][seg_mask]
    q = pts[1:][seg_mask]
    e = q - p  # (m, 2)
    rel = p - origin  # (m, 2)
    # Solve origin + t*d = p + u*e;  cross products, broadcast rays x segments.
    dxe = dirs[:, 0][:, None] * e[:, 1][None, :] - dirs[:, 1][:, None] * e[:, 0][None, :]  # (k, m)
    rel_cross_e = rel[:, 0] * e[:, 1] - rel[:, 1] * e[:, 0]  # (m,)
    rel_cross_d = rel[:, 0][None, :] * dirs[:, 1][:, None] - rel[:, 1][None, :] * dirs[:, 0][:, None]  # (k, m)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = rel_cross_e[None, :] / dxe
        u = rel_cross_d / dxe
    valid = (np.abs(dxe) > 1e-12) & (t >= 0.0) & (u >= 0.0) & (u <= 1.0)
    t = np.where(valid, t, np.inf)
    return np.minimum(t.min(axis=1), max_range)


def _ray_circles(origin, dirs, centers, radii, max_range) -> np.ndarray:
    rel = centers - origin  # (m, 2)
    along = dirs @ rel.T  # (k, m)
    d2 = (rel ** 2).sum(axis=1)[None, :]  # (1, m)
    perp2 = d2 - along ** 2
    reach2 = radii[None, :] ** 2 - perp2
    ok = reach2 >= 0.0
    root = np.sqrt(np.where(ok, reach2, 0.0))
    t = along - root
    # origin inside a circle counts as distance 0
    inside = d2 <= radii[None, :] ** 2
    t = np.where(inside, 0.0, t)
    valid = ok & (t >= 0.0)
    t = np.where(valid, t, np.inf)
    return np.minimum(t.min(axis=1), max_range)
