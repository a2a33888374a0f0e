"""Vacant-set geometry over realized fields.

Distance profiles (nearest trajectories from a probe point), raster
extraction of vacant connected components, boundary profiles of the unit
circle (per-angle distances with their extremes), and the disconnection
proxy for a path stretch.

Everything here is read-only over immutable fields and moustaches, and all
bridge refinement is keyed to stored segment identities, so repeated or
reordered queries give identical answers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .conditioned import PlanarPath, planar_chunk_durations
from .interlacement import InterlacementField, MIN_PROBE_RADIUS, Moustache
from .segments import BRIDGE_MARGIN, DEPTH_CAP, _split_nodes, mark_cells, \
    pair_segment_distance, point_segment_distance, refined_min_pairs, \
    segment_keys
from .streams import mix_key

TWO_PI = 2.0 * math.pi

# Distance ties are broken by trajectory index and separated by a nudge
# below the guaranteed resolution so reported profiles ascend strictly.
_TIE_NUDGE = 1e-13

# Refinement salt for paths queried outside any field (no base key).
_PATH_SALT = 0xD15C07EC

_ORIGIN = np.zeros(2)


@dataclass
class DistanceProfile:
    """Ascending distances from ``x`` to the nearest trajectories."""

    x: tuple[float, float]
    distances: np.ndarray
    trajectory_ids: np.ndarray


@dataclass
class BoundaryProfile:
    """Per-angle distances from the unit circle to the soup.

    ``phi_values`` live on the sampled angle grid (censored at the query
    radius); ``m_hat`` is the continuum minimum over the whole circle,
    evaluated through exact circle-to-chord distances, so it is a lower
    bound for every sampled value.  ``M_hat`` is the grid maximum.
    """

    alpha: float
    sample_angles: np.ndarray
    phi_values: np.ndarray
    m_hat: float
    M_hat: float


@dataclass
class RasterComponent:
    """One 4-connected vacant component on a square raster.

    The grid covers ``[-half_width, half_width)`` in both coordinates with
    ``n_side`` cells of size ``resolution``.  ``cells`` holds (ix, iy)
    index pairs in lexicographic order.
    """

    resolution: float
    half_width: float
    n_side: int
    cells: np.ndarray
    seed_point: tuple[float, float]
    touches_window_boundary: bool
    seed_blocked: bool

    @property
    def empty(self) -> bool:
        return self.cells.shape[0] == 0

    def area(self) -> float:
        return float(self.cells.shape[0]) * self.resolution ** 2

    def centers(self) -> np.ndarray:
        return -self.half_width + (self.cells + 0.5) * self.resolution

    def rad(self) -> float:
        """Largest cell-center radius plus the half-diagonal (an upper
        bound for the continuum radius of the covered region)."""
        if self.empty:
            return 0.0
        c = self.centers()
        return float(np.hypot(c[:, 0], c[:, 1]).max()
                     + self.resolution * math.sqrt(2.0) / 2.0)

    def contains(self, point) -> bool:
        ix = math.floor((point[0] + self.half_width) / self.resolution)
        iy = math.floor((point[1] + self.half_width) / self.resolution)
        if not (0 <= ix < self.n_side and 0 <= iy < self.n_side):
            return False
        code = ix * self.n_side + iy
        codes = self.cells[:, 0] * self.n_side + self.cells[:, 1]
        j = np.searchsorted(codes, code)
        return bool(j < len(codes) and codes[j] == code)

    def rle(self) -> list[tuple[int, int, int]]:
        """Run-length encoding: (row index, first column, run length)."""
        out: list[tuple[int, int, int]] = []
        if self.empty:
            return out
        for ix in np.unique(self.cells[:, 0]):
            ys = np.sort(self.cells[self.cells[:, 0] == ix, 1])
            breaks = np.nonzero(np.diff(ys) > 1)[0]
            starts = np.concatenate(([0], breaks + 1))
            ends = np.concatenate((breaks, [ys.size - 1]))
            for s, e in zip(starts, ends):
                out.append((int(ix), int(ys[s]), int(ys[e] - ys[s] + 1)))
        return out

    def summary(self) -> str:
        return (f"area={self.area():.17g}\n"
                f"rad={self.rad():.17g}\n"
                f"touches_window_boundary={self.touches_window_boundary}\n"
                f"seed_blocked={self.seed_blocked}\n"
                f"cells={self.cells.shape[0]}\n")


def _level_indices(field: InterlacementField, alpha: float) -> list[int]:
    if not 0.0 < alpha <= field.alpha_max:
        raise ValueError("alpha must lie in (0, alpha_max]")
    return [i for i, e in enumerate(field.entries)
            if e.scale.in_level(alpha)]


def _concat_segments(field: InterlacementField, indices: list[int]):
    """Concatenate per-entry chord arrays; slot maps each segment to its
    position in ``indices``."""
    ps, qs, dts, ks, bands, slots = [], [], [], [], [], []
    for pos, i in enumerate(indices):
        seg = field.entry_segments(i)
        if seg.n == 0:
            continue
        ps.append(seg.p)
        qs.append(seg.q)
        dts.append(seg.dt)
        ks.append(seg.keys)
        bands.append(seg.no_refine)
        slots.append(np.full(seg.n, pos, dtype=np.int64))
    if not ps:
        return (np.empty((0, 2)), np.empty((0, 2)), np.empty(0),
                np.empty(0, dtype=np.uint64), np.empty(0, dtype=bool),
                np.empty(0, dtype=np.int64))
    return (np.concatenate(ps), np.concatenate(qs), np.concatenate(dts),
            np.concatenate(ks), np.concatenate(bands),
            np.concatenate(slots))


def distance_profile(field: InterlacementField, alpha: float, x,
                     j_max: int, r_query: float,
                     resolution: float = 1e-3,
                     refine: bool = True) -> DistanceProfile:
    """Distances from ``x`` to its nearest level-``alpha`` trajectories.

    Returns at most ``j_max`` strictly ascending distances, all at most
    ``r_query``; ties are broken by trajectory index and separated by a
    sub-resolution nudge.  ``x`` strictly inside the unit disk is only
    meaningful at the origin (every trajectory stays outside its scale
    circle, so distances from 0 are exact scale gaps).
    """
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    if r_query < MIN_PROBE_RADIUS:
        raise ValueError("r_query below the resolvable scale")
    x = np.asarray(x, dtype=float)
    nx = float(np.hypot(x[0], x[1]))
    if 0.0 < nx < 1.0:
        raise ValueError("probe points strictly inside the unit disk are "
                         "supported only at the origin")
    found: list[tuple[float, int]] = []
    for i in _level_indices(field, alpha):
        d = field.min_distance(x, i, cutoff=r_query + 2.0 * resolution,
                               resolution=resolution, refine=refine)
        if d <= r_query:
            found.append((d, field.entries[i].scale.index))
    found.sort()
    found = found[:j_max]
    dists = np.array([d for d, _ in found])
    for k in range(1, len(dists)):
        if dists[k] <= dists[k - 1]:
            dists[k] = dists[k - 1] + _TIE_NUDGE
    ids = np.array([t for _, t in found], dtype=np.int64)
    return DistanceProfile(x=(float(x[0]), float(x[1])), distances=dists,
                           trajectory_ids=ids)


_RASTER_BLOCK = 4096


def _refine_and_mark(grid: np.ndarray, p, q, dt, keys, no_refine,
                     window: float, res: float) -> None:
    """Rasterize segments with interleaved bridge refinement.

    Segments are processed in path order, block by block, so marks laid
    down early prune the refinement of later revisits: each wave marks
    finished pieces (chord below 0.75 cells, bridge slack below one
    cell), then drops live pieces whose whole envelope (chord box plus
    slack) lies off the grid or inside already-marked cells.  Such
    pieces cannot change the raster, so only pieces along the
    blocked-tube boundary keep splitting.
    """
    n = grid.shape[0]
    if no_refine is not None and no_refine.any():
        mark_cells(grid, p[no_refine], q[no_refine], window, res)
        keep = ~no_refine
        p, q, dt, keys = p[keep], q[keep], dt[keep], keys[keep]
    sat = np.zeros((n + 1, n + 1), dtype=np.int64)
    for b0 in range(0, len(p), _RASTER_BLOCK):
        bp, bq = p[b0:b0 + _RASTER_BLOCK], q[b0:b0 + _RASTER_BLOCK]
        bdt, bk = dt[b0:b0 + _RASTER_BLOCK], keys[b0:b0 + _RASTER_BLOCK]
        for depth in range(DEPTH_CAP + 1):
            if len(bp) == 0:
                break
            slack = BRIDGE_MARGIN * np.sqrt(bdt)
            ln = np.hypot(*(bq - bp).T)
            done = (ln <= 0.75 * res) & (slack <= res)
            if depth == DEPTH_CAP:
                done |= True
            if done.any():
                mark_cells(grid, bp[done], bq[done], window, res)
            live = ~done
            if not live.any():
                break
            bp, bq, bdt, bk = bp[live], bq[live], bdt[live], bk[live]
            slack = slack[live]
            sat[1:, 1:] = grid.cumsum(axis=0).cumsum(axis=1)
            lox = np.floor((np.minimum(bp[:, 0], bq[:, 0]) - slack + window)
                           / res).astype(np.int64)
            hix = np.floor((np.maximum(bp[:, 0], bq[:, 0]) + slack + window)
                           / res).astype(np.int64)
            loy = np.floor((np.minimum(bp[:, 1], bq[:, 1]) - slack + window)
                           / res).astype(np.int64)
            hiy = np.floor((np.maximum(bp[:, 1], bq[:, 1]) + slack + window)
                           / res).astype(np.int64)
            off = (hix < 0) | (lox >= n) | (hiy < 0) | (loy >= n)
            lox = np.clip(lox, 0, n - 1)
            hix = np.clip(hix, 0, n - 1)
            loy = np.clip(loy, 0, n - 1)
            hiy = np.clip(hiy, 0, n - 1)
            area = (hix - lox + 1) * (hiy - loy + 1)
            marked = sat[hix + 1, hiy + 1] - sat[lox, hiy + 1] \
                - sat[hix + 1, loy] + sat[lox, loy]
            keep = ~(off | (marked == area))
            if not keep.any():
                break
            bp, bq, bdt, bk = _split_nodes(bp[keep], bq[keep], bdt[keep],
                                           bk[keep])


def _component_from_segments(p, q, dt, keys, no_refine, seed,
                             resolution: float,
                             window: float) -> RasterComponent:
    """Raster component of ``seed`` in the complement of the segments.

    A cell is blocked when a bridge-refined chord touches it; vacant cells
    are 4-connected.
    """
    if resolution > window / 16.0:
        raise ValueError("resolution must be at most window / 16")
    sx, sy = float(seed[0]), float(seed[1])
    if not (-window < sx < window and -window < sy < window):
        raise ValueError("seed outside the raster window")
    n_side = max(2, int(round(2.0 * window / resolution)))
    grid = np.zeros((n_side, n_side), dtype=bool)
    if len(p):
        # only segments whose bridge envelope can reach the window box
        d0 = point_segment_distance(_ORIGIN, p, q)
        reach = window * math.sqrt(2.0) + resolution
        keep = d0 - BRIDGE_MARGIN * np.sqrt(dt) <= reach
        _refine_and_mark(grid, p[keep], q[keep], dt[keep], keys[keep],
                         no_refine[keep], window, resolution)
    ix = math.floor((sx + window) / resolution)
    iy = math.floor((sy + window) / resolution)
    if grid[ix, iy]:
        return RasterComponent(resolution=resolution, half_width=window,
                               n_side=n_side,
                               cells=np.empty((0, 2), dtype=np.int64),
                               seed_point=(sx, sy),
                               touches_window_boundary=False,
                               seed_blocked=True)
    labels, _ = ndimage.label(~grid)
    cells = np.argwhere(labels == labels[ix, iy])
    order = np.lexsort((cells[:, 1], cells[:, 0]))
    cells = cells[order]
    touches = bool((cells == 0).any() or (cells == n_side - 1).any())
    return RasterComponent(resolution=resolution, half_width=window,
                           n_side=n_side, cells=cells,
                           seed_point=(sx, sy),
                           touches_window_boundary=touches,
                           seed_blocked=False)


def extract_component(field: InterlacementField, alpha: float, seed,
                      resolution: float, window: float,
                      entry_indices: list[int] | None = None
                      ) -> RasterComponent:
    """Vacant raster component of ``seed`` for the level-``alpha`` field.

    ``entry_indices`` restricts the blocking set to chosen entries (used
    for nearest-trajectory comparisons); by default every level entry
    blocks."""
    if resolution > window / 64.0:
        raise ValueError("resolution must be at most window / 64")
    if entry_indices is None:
        entry_indices = _level_indices(field, alpha)
    p, q, dt, keys, band, _ = _concat_segments(field, entry_indices)
    return _component_from_segments(p, q, dt, keys, band, seed, resolution,
                                    window)


def component_touched_by(field: InterlacementField, comp: RasterComponent,
                         entry_indices: list[int]) -> bool:
    """Whether any listed entry's trajectory would block a cell of
    ``comp`` when rasterized at the component's window and resolution.

    Refinement waves drop pieces whose bridge envelope misses every
    component cell, and the first finished piece landing on one answers
    True immediately, so trajectories that stay clear are cheap."""
    if comp.seed_blocked or comp.cells.shape[0] == 0:
        return False
    res, window, n = comp.resolution, comp.half_width, comp.n_side
    mask = np.zeros((n, n), dtype=bool)
    mask[comp.cells[:, 0], comp.cells[:, 1]] = True
    sat = np.zeros((n + 1, n + 1), dtype=np.int64)
    sat[1:, 1:] = mask.cumsum(axis=0).cumsum(axis=1)

    def leaf_hits(bp, bq) -> bool:
        for t in (0.0, 0.25, 0.5, 0.75, 1.0):
            pts = bp + t * (bq - bp)
            ix = np.floor((pts[:, 0] + window) / res).astype(np.int64)
            iy = np.floor((pts[:, 1] + window) / res).astype(np.int64)
            ok = (ix >= 0) & (ix < n) & (iy >= 0) & (iy < n)
            if mask[ix[ok], iy[ok]].any():
                return True
        return False

    p, q, dt, keys, no_refine, _ = _concat_segments(field, entry_indices)
    if len(p) == 0:
        return False
    if no_refine.any() and leaf_hits(p[no_refine], q[no_refine]):
        return True
    keep = ~no_refine
    p, q, dt, keys = p[keep], q[keep], dt[keep], keys[keep]
    for b0 in range(0, len(p), _RASTER_BLOCK):
        bp, bq = p[b0:b0 + _RASTER_BLOCK], q[b0:b0 + _RASTER_BLOCK]
        bdt, bk = dt[b0:b0 + _RASTER_BLOCK], keys[b0:b0 + _RASTER_BLOCK]
        for depth in range(DEPTH_CAP + 1):
            if len(bp) == 0:
                break
            slack = BRIDGE_MARGIN * np.sqrt(bdt)
            ln = np.hypot(*(bq - bp).T)
            done = (ln <= 0.75 * res) & (slack <= res)
            if depth == DEPTH_CAP:
                done |= True
            if done.any() and leaf_hits(bp[done], bq[done]):
                return True
            live = ~done
            if not live.any():
                break
            bp, bq, bdt, bk = bp[live], bq[live], bdt[live], bk[live]
            slack = slack[live]
            lox = np.floor((np.minimum(bp[:, 0], bq[:, 0]) - slack + window)
                           / res).astype(np.int64)
            hix = np.floor((np.maximum(bp[:, 0], bq[:, 0]) + slack + window)
                           / res).astype(np.int64)
            loy = np.floor((np.minimum(bp[:, 1], bq[:, 1]) - slack + window)
                           / res).astype(np.int64)
            hiy = np.floor((np.maximum(bp[:, 1], bq[:, 1]) + slack + window)
                           / res).astype(np.int64)
            off = (hix < 0) | (lox >= n) | (hiy < 0) | (loy >= n)
            lox = np.clip(lox, 0, n - 1)
            hix = np.clip(hix, 0, n - 1)
            loy = np.clip(loy, 0, n - 1)
            hiy = np.clip(hiy, 0, n - 1)
            inside = sat[hix + 1, hiy + 1] - sat[lox, hiy + 1] \
                - sat[hix + 1, loy] + sat[lox, loy]
            alive = ~off & (inside > 0)
            if not alive.any():
                break
            bp, bq, bdt, bk = _split_nodes(bp[alive], bq[alive], bdt[alive],
                                           bk[alive])
    return False


def moustache_segments(m: Moustache):
    """Chord arrays of the geometry-complete part of a moustache (fine
    runs only; far-excursion chords carry no local geometry)."""
    ps, qs, dts, ks, bands = [], [], [], [], []
    for bi, (branch, runs) in enumerate(zip(m.branches, m.fine_runs)):
        for ri, (s, e) in enumerate(runs):
            if e - s < 2:
                continue
            verts = branch.vertices[s:e]
            times = branch.times[s:e]
            p = verts[:-1]
            q = verts[1:]
            ps.append(p)
            qs.append(q)
            dts.append(planar_chunk_durations(verts, times, "skew"))
            ks.append(segment_keys(m.base_key, bi, ri, p.shape[0]))
            rel = np.minimum(np.hypot(p[:, 0], p[:, 1]),
                             np.hypot(q[:, 0], q[:, 1]))
            bands.append(rel <= 1.0 + 8.0 * m.dr)
    if not ps:
        return (np.empty((0, 2)), np.empty((0, 2)), np.empty(0),
                np.empty(0, dtype=np.uint64), np.empty(0, dtype=bool))
    return (np.concatenate(ps), np.concatenate(qs), np.concatenate(dts),
            np.concatenate(ks), np.concatenate(bands))


def amoeba_radius(m: Moustache, resolution: float, window: float):
    """Radius of the origin's vacant component for a single moustache;
    ``"exceeds-window"`` when that component reaches the raster edge."""
    if window < 4.0:
        raise ValueError("window must be at least 4")
    if m.fine_radius < window * math.sqrt(2.0):
        raise ValueError("moustache fine radius does not cover the "
                         "raster window diagonal")
    p, q, dt, keys, band = moustache_segments(m)
    comp = _component_from_segments(p, q, dt, keys, band, (0.0, 0.0),
                                    resolution, window)
    if comp.touches_window_boundary:
        return "exceeds-window"
    return comp.rad()


def circle_distance_matrix(field: InterlacementField,
                           entry_indices: list[int],
                           angles: np.ndarray, r_query: float,
                           resolution: float = 1e-3) -> np.ndarray:
    """Per-(angle, entry) distances from unit-circle points to each
    trajectory, censored at ``r_query``.

    Each segment can only matter for circle points within its angular
    reach (censor distance plus bridge envelope plus half-length), so the
    chord pass enumerates (angle, segment) pairs inside that window.
    Refinement then runs in two batched waves: first the chord-leading
    row of every cell, then any row whose envelope could still beat the
    tightened cell value.  Entries listed in ``entry_indices`` map to
    matrix columns in order, so nested level subsets reuse one matrix
    with exact consistency.
    """
    p, q, dt, keys, band, slot = _concat_segments(field, entry_indices)
    na = len(angles)
    ne = len(entry_indices)
    out = np.full((na, ne), float(r_query))
    if ne == 0 or len(p) == 0 or na == 0:
        return out
    margin = BRIDGE_MARGIN * np.sqrt(dt)
    d0 = point_segment_distance(_ORIGIN, p, q)
    keep = d0 - margin <= 1.0 + r_query + resolution
    p, q, dt, keys, band, slot = (p[keep], q[keep], dt[keep], keys[keep],
                                  band[keep], slot[keep])
    margin = margin[keep]
    if len(p) == 0:
        return out
    xs = np.column_stack((np.cos(angles), np.sin(angles)))
    flat = out.reshape(-1)
    mid = 0.5 * (p + q)
    rc = np.hypot(mid[:, 0], mid[:, 1])
    phic = np.arctan2(mid[:, 1], mid[:, 0])
    halflen = 0.5 * np.hypot(q[:, 0] - p[:, 0], q[:, 1] - p[:, 1])
    reach = r_query + margin + halflen + resolution
    cosw = np.clip((1.0 + rc * rc - reach * reach)
                   / np.maximum(2.0 * rc, 1e-300), -1.0, 1.0)
    halfw = np.arccos(cosw)
    # Sorted angular centers give each circle point a contiguous slab of
    # possibly relevant segments (doubled array absorbs the wraparound).
    order = np.argsort(phic).astype(np.int64)
    phis = phic[order]
    order2 = np.concatenate((order, order))
    phis2 = np.concatenate((phis, phis + TWO_PI))
    cap = float(halfw.max()) if len(halfw) else 0.0
    wrapped = np.mod(angles, TWO_PI)
    los = np.searchsorted(phis2, wrapped - cap)
    his = np.searchsorted(phis2, wrapped + cap)

    def _pairs(a: int) -> tuple[np.ndarray, np.ndarray]:
        js = order2[los[a]:his[a]]
        gap = np.abs((wrapped[a] - phic[js] + np.pi) % TWO_PI - np.pi)
        js = js[gap <= halfw[js]]
        return js, pair_segment_distance(
            np.broadcast_to(xs[a], (js.size, 2)), p[js], q[js])

    # Wave one: chord minima per cell, then one batched refine of every
    # cell's chord-leading rows so later pruning sees near-final values.
    lead_a: list[np.ndarray] = []
    lead_j: list[np.ndarray] = []
    lead_sets: list[np.ndarray] = []
    for a in range(na):
        js, d = _pairs(a)
        rows = a * ne + slot[js]
        np.minimum.at(flat, rows, d)
        leads = ~band[js] & (d <= flat[rows])
        lead_sets.append(js[leads])
        if leads.any():
            lead_a.append(np.full(int(leads.sum()), a, dtype=np.int64))
            lead_j.append(js[leads])
    if lead_a:
        aa = np.concatenate(lead_a)
        jj = np.concatenate(lead_j)
        refined_min_pairs(xs[aa], aa * ne + slot[jj], p[jj], q[jj],
                          dt[jj], keys[jj], flat, resolution=resolution)
    # Wave two: any remaining row whose bridge envelope could still beat
    # its cell value.
    cand_a: list[np.ndarray] = []
    cand_j: list[np.ndarray] = []
    was_lead = np.zeros(p.shape[0], dtype=bool)
    for a in range(na):
        js, d = _pairs(a)
        was_lead[lead_sets[a]] = True
        improvable = ~band[js] & ~was_lead[js] \
            & (d - margin[js] < flat[a * ne + slot[js]])
        was_lead[lead_sets[a]] = False
        if improvable.any():
            cand_a.append(np.full(int(improvable.sum()), a, dtype=np.int64))
            cand_j.append(js[improvable])
    if cand_a:
        aa = np.concatenate(cand_a)
        jj = np.concatenate(cand_j)
        refined_min_pairs(xs[aa], aa * ne + slot[jj], p[jj], q[jj],
                          dt[jj], keys[jj], flat, resolution=resolution)
    return out


def boundary_profile(field: InterlacementField, alpha: float,
                     n_points: int, r_query: float,
                     resolution: float = 1e-3) -> BoundaryProfile:
    """Distances from the unit circle to the level-``alpha`` soup.

    ``phi_values`` sample ``n_points`` equally spaced angles (censored at
    ``r_query``); ``m_hat`` is the exact continuum minimum over the whole
    circle, which for a soup anchored at scale ``rho_1`` is ``rho_1 - 1``
    up to chord sag; ``M_hat`` is the sampled maximum.
    """
    if n_points < 8:
        raise ValueError("n_points must be at least 8")
    idx = _level_indices(field, alpha)
    angles = TWO_PI * np.arange(n_points) / n_points
    phi = circle_distance_matrix(field, idx, angles, r_query,
                                 resolution).min(axis=1) \
        if idx else np.full(n_points, float(r_query))
    m_hat = float(r_query)
    if idx:
        p, q = _concat_segments(field, idx)[:2]
        if len(p):
            gap = float(point_segment_distance(_ORIGIN, p, q).min()) - 1.0
            m_hat = min(m_hat, max(gap, 0.0))
    m_hat = min(m_hat, float(phi.min()) if len(phi) else m_hat)
    return BoundaryProfile(alpha=alpha, sample_angles=angles,
                           phi_values=phi, m_hat=m_hat,
                           M_hat=float(phi.max()))


def path_segments(path: PlanarPath, base_key: int | None = None,
                  band_radius: float | None = None):
    """Chord arrays for a standalone path (queries outside any field)."""
    verts = path.vertices
    if verts.shape[0] < 2:
        return (np.empty((0, 2)), np.empty((0, 2)), np.empty(0),
                np.empty(0, dtype=np.uint64), np.empty(0, dtype=bool))
    p = verts[:-1]
    q = verts[1:]
    dt = planar_chunk_durations(verts, path.times, path.kind)
    key = mix_key(_PATH_SALT) if base_key is None else base_key
    keys = segment_keys(key, 0, 0, p.shape[0])
    if band_radius is None:
        band = np.zeros(p.shape[0], dtype=bool)
    else:
        rel = np.minimum(np.hypot(p[:, 0], p[:, 1]),
                         np.hypot(q[:, 0], q[:, 1]))
        band = rel <= band_radius
    return p, q, dt, keys, band


def check_disconnection(path: PlanarPath, resolution: float,
                        band_radius: float | None = None) -> bool:
    """Whether the path stretch cuts the unit disk off from far away.

    The path starts on some circle of radius ``r`` and runs to radius
    ``2r``; the result is true when the origin's raster component fails
    to reach the window boundary at ``2.1 r``.
    """
    r = float(np.hypot(*path.vertices[0]))
    if r < 1.0:
        raise ValueError("path must start outside the unit disk")
    p, q, dt, keys, band = path_segments(path, band_radius=band_radius)
    comp = _component_from_segments(p, q, dt, keys, band, (0.0, 0.0),
                                    resolution, 2.1 * r)
    return (not comp.seed_blocked) and not comp.touches_window_boundary
