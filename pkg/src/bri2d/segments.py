"""Segment-level geometry kernels shared by samplers and field queries.

Paths are stored as polylines whose vertices are exact in law at grid times.
Between vertices the conditional law is approximated by a planar Brownian
bridge with the segment's planar-clock duration, so distance and crossing
queries refine segments by drawing bridge midpoints.  Midpoint draws are tied
to (segment key, tree position), which makes every query deterministic and
independent of visit order.

All kernels treat distances beyond a caller-supplied cutoff as "don't care":
returned values above the cutoff are valid lower bounds only.
"""

from __future__ import annotations

import math

import numpy as np

from .streams import mix_key_vec, node_normals_vec, _splitmix64_vec

# Bridge excursions beyond BRIDGE_MARGIN * sqrt(dt) are ignored
# (tail mass ~ exp(-2 * 4.5^2) per coordinate).
BRIDGE_MARGIN = 4.5
DEPTH_CAP = 24
_SALT_LEFT = np.uint64(0x8C2F9D5347B1E6A3)
_SALT_RIGHT = np.uint64(0x3A7D64E19C58BF21)


def point_segment_distance(x: np.ndarray, p: np.ndarray,
                           q: np.ndarray) -> np.ndarray:
    """Distances from point x (2,) to segments p->q (m, 2)."""
    d = q - p
    w = x[None, :] - p
    dd = np.einsum("ij,ij->i", d, d)
    t = np.einsum("ij,ij->i", w, d) / np.where(dd > 0.0, dd, 1.0)
    np.clip(t, 0.0, 1.0, out=t)
    proj = p + t[:, None] * d
    return np.hypot(x[0] - proj[:, 0], x[1] - proj[:, 1])


def pair_segment_distance(xs: np.ndarray, p: np.ndarray,
                          q: np.ndarray) -> np.ndarray:
    """Row-wise distances: xs[i] to segment (p[i], q[i])."""
    d = q - p
    w = xs - p
    dd = np.einsum("ij,ij->i", d, d)
    t = np.einsum("ij,ij->i", w, d) / np.where(dd > 0.0, dd, 1.0)
    np.clip(t, 0.0, 1.0, out=t)
    proj = p + t[:, None] * d
    return np.hypot(xs[:, 0] - proj[:, 0], xs[:, 1] - proj[:, 1])


def polyline_min_distance_brute(x: np.ndarray,
                                vertices: np.ndarray) -> float:
    """Exhaustive min distance from x to a polyline; test oracle."""
    if len(vertices) == 1:
        return float(np.hypot(*(np.asarray(x) - vertices[0])))
    return float(point_segment_distance(np.asarray(x, dtype=float),
                                        vertices[:-1], vertices[1:]).min())


def segment_circle_crossing(p: np.ndarray, q: np.ndarray, center: np.ndarray,
                            rho: float) -> float | None:
    """Smallest t in [0, 1] with |p + t(q-p) - center| = rho, else None."""
    d = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    w = np.asarray(p, dtype=float) - np.asarray(center, dtype=float)
    a = float(d @ d)
    if a == 0.0:
        return None
    b = 2.0 * float(w @ d)
    c = float(w @ w) - rho * rho
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    s = math.sqrt(disc)
    for t in ((-b - s) / (2.0 * a), (-b + s) / (2.0 * a)):
        if 0.0 <= t <= 1.0:
            return t
    return None


def circle_crossings_batch(p: np.ndarray, q: np.ndarray, center: np.ndarray,
                           rho: float) -> np.ndarray:
    """Row-wise first-crossing parameters; NaN where no crossing in [0, 1]."""
    d = q - p
    w = p - center[None, :]
    a = np.einsum("ij,ij->i", d, d)
    b = 2.0 * np.einsum("ij,ij->i", w, d)
    c = np.einsum("ij,ij->i", w, w) - rho * rho
    disc = b * b - 4.0 * a * c
    out = np.full(len(p), np.nan)
    ok = (disc >= 0.0) & (a > 0.0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    t1 = (-b - sq) / np.where(ok, 2.0 * a, 1.0)
    t2 = (-b + sq) / np.where(ok, 2.0 * a, 1.0)
    t1_ok = ok & (t1 >= 0.0) & (t1 <= 1.0)
    t2_ok = ok & (t2 >= 0.0) & (t2 <= 1.0)
    out[t2_ok] = t2[t2_ok]
    out[t1_ok] = t1[t1_ok]
    return out


def _split_nodes(p, q, dt, keys):
    """Draw bridge midpoints for every node and return the two child sets."""
    mid = 0.5 * (p + q)
    mid = mid + node_normals_vec(keys) * np.sqrt(dt * 0.25)[:, None]
    half = 0.5 * dt
    with np.errstate(over="ignore"):
        kl = _splitmix64_vec(keys ^ _SALT_LEFT)
        kr = _splitmix64_vec(keys ^ _SALT_RIGHT)
    return (np.concatenate([p, mid]), np.concatenate([mid, q]),
            np.concatenate([half, half]), np.concatenate([kl, kr]))


def refined_min_distance(x: np.ndarray, p: np.ndarray, q: np.ndarray,
                         dtp: np.ndarray, keys: np.ndarray,
                         cutoff: float, resolution: float = 1e-3,
                         no_refine: np.ndarray | None = None,
                         anchor: float | None = None,
                         depth_cap: int = DEPTH_CAP) -> float:
    """Min distance from x to the bridge-refined union of segments.

    Exact (to ``resolution``) whenever the result is below ``cutoff``.  When
    ``anchor`` is given, refinement additionally stops once the verdict
    "distance vs anchor" is stable, which is what hit/crossing queries need.
    Segments flagged in ``no_refine`` contribute their chord distance only
    (used next to the conditioning circle, where a free bridge would be the
    wrong law).
    """
    x = np.asarray(x, dtype=float)
    if len(p) == 0:
        return np.inf
    d0 = point_segment_distance(x, p, q)
    best = float(d0.min())
    margin = BRIDGE_MARGIN * np.sqrt(dtp)
    live = d0 - margin < min(best, cutoff)
    if no_refine is not None:
        live &= ~no_refine
    if not live.any():
        return best
    np_, nq, ndt, nk = p[live], q[live], dtp[live], keys[live]
    for _ in range(depth_cap):
        dch = point_segment_distance(x, np_, nq)
        w = BRIDGE_MARGIN * np.sqrt(ndt)
        target = np.maximum(resolution, dch / 16.0)
        if anchor is not None:
            target = np.maximum(resolution, np.abs(dch - anchor) / 16.0)
        done = w <= target
        best = min(best, float(dch[done].min())) if done.any() else best
        keep = ~done & (dch - w < min(best, cutoff))
        if not keep.any():
            break
        np_, nq, ndt, nk = _split_nodes(np_[keep], nq[keep], ndt[keep],
                                        nk[keep])
    else:
        dch = point_segment_distance(x, np_, nq)
        if len(dch):
            best = min(best, float(dch.min()))
    return best


def refined_min_pairs(xs: np.ndarray, slot: np.ndarray, p: np.ndarray,
                      q: np.ndarray, dtp: np.ndarray, keys: np.ndarray,
                      best: np.ndarray, resolution: float = 1e-3,
                      depth_cap: int = DEPTH_CAP) -> np.ndarray:
    """Batched refinement: row i may improve ``best[slot[i]]``.

    ``xs`` holds the query point for each candidate row.  Used by boundary
    profiles where many (angle, trajectory) cells refine at once.  Returns
    the updated ``best`` array (modified in place as well).
    """
    if len(p) == 0:
        return best
    np_, nq, ndt, nk = p, q, dtp, keys
    nx, ns = xs, slot
    for _ in range(depth_cap):
        dch = pair_segment_distance(nx, np_, nq)
        w = BRIDGE_MARGIN * np.sqrt(ndt)
        target = np.maximum(resolution, dch / 16.0)
        done = w <= target
        if done.any():
            np.minimum.at(best, ns[done], dch[done])
        keep = ~done & (dch - w < best[ns])
        if not keep.any():
            break
        np_, nq, ndt, nk = _split_nodes(np_[keep], nq[keep], ndt[keep],
                                        nk[keep])
        nx = np.tile(nx[keep], (2, 1))
        ns = np.tile(ns[keep], 2)
    else:
        dch = pair_segment_distance(nx, np_, nq)
        if len(dch):
            np.minimum.at(best, ns, dch)
    return best


def refine_to_resolution(p: np.ndarray, q: np.ndarray, dtp: np.ndarray,
                         keys: np.ndarray, res: float,
                         no_refine: np.ndarray | None = None,
                         depth_cap: int = DEPTH_CAP):
    """Split segments until chords are shorter than ~res and bridge slack is
    below res/2; returns the final chord arrays for rasterization."""
    out_p, out_q = [], []
    np_, nq, ndt, nk = p, q, dtp, keys
    if no_refine is not None and no_refine.any():
        out_p.append(p[no_refine])
        out_q.append(q[no_refine])
        keep0 = ~no_refine
        np_, nq, ndt, nk = p[keep0], q[keep0], dtp[keep0], keys[keep0]
    for _ in range(depth_cap):
        if len(np_) == 0:
            break
        ln = np.hypot(*(nq - np_).T)
        done = (ln <= 0.75 * res) & (BRIDGE_MARGIN * np.sqrt(ndt) <= 0.5 * res)
        if done.any():
            out_p.append(np_[done])
            out_q.append(nq[done])
        keep = ~done
        if not keep.any():
            np_ = np_[:0]
            break
        np_, nq, ndt, nk = _split_nodes(np_[keep], nq[keep], ndt[keep],
                                        nk[keep])
    if len(np_):
        out_p.append(np_)
        out_q.append(nq)
    if not out_p:
        return np.empty((0, 2)), np.empty((0, 2))
    return np.concatenate(out_p), np.concatenate(out_q)


def mark_cells(grid: np.ndarray, p: np.ndarray, q: np.ndarray,
               half_width: float, res: float) -> None:
    """Mark grid cells touched by short chords (sampled at res/4 spacing)."""
    if len(p) == 0:
        return
    n = grid.shape[0]
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        pts = p + t * (q - p)
        ix = np.floor((pts[:, 0] + half_width) / res).astype(np.int64)
        iy = np.floor((pts[:, 1] + half_width) / res).astype(np.int64)
        ok = (ix >= 0) & (ix < n) & (iy >= 0) & (iy < n)
        grid[ix[ok], iy[ok]] = True


def segment_keys(base_key: int, entry_index: int, chunk_index: int,
                 n_segments: int) -> np.ndarray:
    """Stable per-segment refinement keys for one polyline chunk."""
    ids = (np.uint64(entry_index) << np.uint64(40)) \
        + (np.uint64(chunk_index) << np.uint64(28)) \
        + np.arange(n_segments, dtype=np.uint64)
    return mix_key_vec(base_key, ids)
