"""Poisson soup of circle-grazing trajectories and its level sets.

The soup lives on scales ``rho`` drawn from intensity ``2 alpha / rho`` on
``(b, infinity)``.  Each scale carries one trajectory: two independent
conditioned branches started at a uniform point of the circle of radius
``rho``, so the trajectory touches that circle exactly once and never
re-enters it.  Restriction to a lower level ``alpha`` is a deterministic
thinning through per-scale marks, which is what makes nested couplings
exact: the restricted field is a subset of the master field, trajectory by
trajectory and vertex by vertex.

Trajectories are stored trimmed to a keep radius slightly beyond the
requested window.  Far excursions are sampled with growing steps (cheap,
still exact in law at the grid times) and a branch is only terminated once
the chance of ever returning below the keep radius is at most
``return_tolerance``; the discarded tail therefore cannot contribute to
any query inside the window beyond that probability.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .conditioned import DR_FIELD, PlanarPath, _MAX_STEPS, _sample_skew, \
    planar_chunk_durations
from .segments import point_segment_distance, refined_min_distance, \
    segment_keys
from .streams import RngStream, mix_key

TWO_PI = 2.0 * math.pi

# Default ratio between the fine-step radius and the keep radius.  Inside
# the fine zone vertices sit at constant increments of the radial clock;
# outside it steps grow with the distance back, so the far excursion costs
# O(log) vertices instead of O(exp).
KAPPA_OVERSHOOT = math.exp(4.0)

# A branch stops once the chance of ever coming back below the keep
# radius is at most this.
RETURN_TOLERANCE = 2e-3

# Trajectories are kept out to window_radius * (1 + TRIM_MARGIN) so that
# chords and bridge spread hanging off the outermost stored vertices still
# cover every query that stays inside the window.
TRIM_MARGIN = 0.08

# Queries closer than this to a trajectory are not resolvable by the
# stored discretization; disk probes below this radius are refused.
MIN_PROBE_RADIUS = 1e-3

# Segments with an endpoint within this many fine steps of the scale
# circle keep their chord geometry: the bisection law used elsewhere does
# not know the trajectory is conditioned to stay outside that circle.
_BAND_STEPS = 8.0

# Log-radius ceiling for materialized vertices of the far excursion.
_LOG_SATURATION = 100.0


@dataclass(frozen=True)
class ScalePoint:
    """One atom of the scale soup: radius, thinning mark, ladder index."""

    rho: float
    mark: float
    index: int

    def in_level(self, alpha: float) -> bool:
        """A ScalePoint belongs to the level-``alpha`` field iff its mark
        is at most ``2 alpha / rho``."""
        return self.mark <= 2.0 * alpha / self.rho


@dataclass
class Moustache:
    """A single trajectory in its own scale frame (touch circle radius 1).

    ``branches`` hold every sampled vertex including the far excursion
    (radii saturated at ``exp(100)``); ``fine_runs`` index the maximal
    vertex ranges inside the fine zone, padded by one vertex, and only
    those chords carry valid local geometry.
    """

    anchor_angle: float
    branches: tuple[PlanarPath, PlanarPath]
    fine_runs: tuple[list[tuple[int, int]], list[tuple[int, int]]]
    radial_extent: float
    fine_radius: float
    dr: float
    base_key: int


@dataclass
class FieldEntry:
    """One trajectory of a field, trimmed and scaled to global coordinates.

    Each chunk is a run of consecutive vertices whose radii stay at or
    below the keep radius, padded by one flanking vertex on each side;
    times are the raw radial-clock instants, so planar durations follow
    from the scaled radii.
    """

    scale: ScalePoint
    anchor_angle: float
    chunks: list[tuple[np.ndarray, np.ndarray]]


@dataclass
class EntrySegments:
    """Flat chord arrays for one entry, ready for distance queries."""

    p: np.ndarray
    q: np.ndarray
    dt: np.ndarray
    keys: np.ndarray
    no_refine: np.ndarray

    @property
    def n(self) -> int:
        return int(self.p.shape[0])


def _padded_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal index ranges of True values, grown by one slot each side.

    Adjacent runs separated by a single False merge after padding, which
    keeps every stored chord a chord between consecutive path vertices.
    """
    if not mask.any():
        return []
    padded = mask.copy()
    padded[:-1] |= mask[1:]
    padded[1:] |= mask[:-1]
    idx = np.nonzero(padded)[0]
    cuts = np.nonzero(np.diff(idx) > 1)[0]
    starts = np.concatenate(([0], cuts + 1))
    ends = np.concatenate((cuts, [idx.size - 1]))
    return [(int(idx[s]), int(idx[e]) + 1) for s, e in zip(starts, ends)]


def _check_soup_params(dr: float, overshoot: float,
                       return_tolerance: float) -> None:
    if not 0.0 < dr <= 0.125:
        raise ValueError("dr must lie in (0, 0.125]")
    if overshoot <= 1.0 + 2.0 * TRIM_MARGIN:
        raise ValueError("overshoot must exceed the trim margin band")
    if not 0.0 < return_tolerance < 1.0:
        raise ValueError("return_tolerance must lie in (0, 1)")


def _sample_branch(theta0: float, extent_keep: float, stream: RngStream,
                   dr: float, overshoot: float, return_tolerance: float):
    """One conditioned branch from angle ``theta0`` on the unit circle.

    Fine constant steps below ``extent_keep * overshoot``; growing steps
    beyond.  The branch ends at the certification radius, chosen so the
    chance of ever returning below the keep radius
    ``extent_keep * (1 + TRIM_MARGIN)`` is at most ``return_tolerance``
    (scale function of the radial part: ``z_keep / z`` from log-radius z).
    """
    z_keep = math.log(extent_keep * (1.0 + TRIM_MARGIN))
    z_fine = math.log(extent_keep * overshoot)
    z_cert = max(z_keep / return_tolerance, z_fine + 1.0)
    # Constant steps continue a short band above the advertised fine
    # radius: excursions that barely poke out stay on the vectorized
    # path instead of thrashing the scalar stepper at the boundary.
    z_band = z_fine + 32.0 * dr
    logr, theta, times, _ = _sample_skew(0.0, theta0, None, z_cert, stream,
                                         dr, z_band, _MAX_STEPS,
                                         coarse_floor=8.0)
    return logr, theta, times


def _derive_base_key(stream: RngStream) -> int:
    u = stream.uniforms(2)
    return mix_key(int(u[0] * 2.0 ** 53), int(u[1] * 2.0 ** 53))


def sample_moustache(radial_extent: float, stream: RngStream,
                     dr: float = DR_FIELD,
                     overshoot: float = KAPPA_OVERSHOOT,
                     return_tolerance: float = RETURN_TOLERANCE) -> Moustache:
    """Sample one trajectory in its own scale frame.

    Both branches start at ``(cos U, sin U)`` for one uniform ``U`` and are
    otherwise independent.  Geometry is complete (fine vertices) out to
    ``radial_extent * overshoot``.
    """
    if radial_extent <= 1.0:
        raise ValueError("radial_extent must exceed the touch circle")
    _check_soup_params(dr, overshoot, return_tolerance)
    anchor = TWO_PI * float(stream.uniforms(1)[0])
    base_key = _derive_base_key(stream)
    z_fine = math.log(radial_extent * overshoot)
    branches = []
    runs = []
    for _ in range(2):
        logr, th, t = _sample_branch(anchor, radial_extent, stream, dr,
                                     overshoot, return_tolerance)
        r = np.exp(np.minimum(logr, _LOG_SATURATION))
        verts = np.column_stack((r * np.cos(th), r * np.sin(th)))
        branches.append(PlanarPath(vertices=verts, times=t, kind="branch",
                                   center=(0.0, 0.0), exit_side="outer"))
        runs.append(_padded_runs(logr <= z_fine))
    return Moustache(anchor_angle=anchor,
                     branches=(branches[0], branches[1]),
                     fine_runs=(runs[0], runs[1]),
                     radial_extent=radial_extent,
                     fine_radius=radial_extent * overshoot,
                     dr=dr, base_key=base_key)


def sample_scales(alpha: float, b: float, rho_cap: float,
                  stream: RngStream) -> list[ScalePoint]:
    """Scale ladder on ``(b, rho_cap]`` with intensity ``2 alpha / rho``.

    Log-radii are a rate ``2 alpha`` arrival process above ``log b``; each
    scale carries a mark uniform on ``(0, 2 alpha / rho]`` so that nested
    levels thin deterministically.  ``rho_cap < b`` yields an empty list.
    ``b`` must be positive: the soup below any fixed radius has infinite
    mass, so there is no meaningful ``b = 0`` field.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    if b <= 0.0:
        raise ValueError("scale floor b must be positive; total soup mass "
                         "below any fixed radius is infinite")
    if rho_cap < b:
        return []
    out: list[ScalePoint] = []
    lr = math.log(b)
    cap = math.log(rho_cap)
    rate = 2.0 * alpha
    while True:
        lr += float(stream.exponentials(1)[0]) / rate
        if lr > cap:
            break
        rho = math.exp(lr)
        mark = float(stream.open_uniforms(1)[0]) * rate / rho
        out.append(ScalePoint(rho=rho, mark=mark, index=len(out)))
    return out


def _build_entries(scales: list[ScalePoint], window_radius: float,
                   stream: RngStream, dr: float, overshoot: float,
                   return_tolerance: float) -> list[FieldEntry]:
    entries = []
    for sp in scales:
        if sp.rho > window_radius:
            continue
        anchor = TWO_PI * float(stream.uniforms(1)[0])
        extent_keep = window_radius / sp.rho
        z_keep = math.log(extent_keep * (1.0 + TRIM_MARGIN))
        chunks: list[tuple[np.ndarray, np.ndarray]] = []
        for _ in range(2):
            logr, th, t = _sample_branch(anchor, extent_keep, stream, dr,
                                         overshoot, return_tolerance)
            for s, e in _padded_runs(logr <= z_keep):
                r = np.exp(logr[s:e]) * sp.rho
                verts = np.column_stack((r * np.cos(th[s:e]),
                                         r * np.sin(th[s:e])))
                chunks.append((verts, t[s:e].copy()))
        entries.append(FieldEntry(scale=sp, anchor_angle=anchor,
                                  chunks=chunks))
    return entries


@dataclass
class InterlacementField:
    """A realized soup at master level ``alpha_max`` inside a window."""

    alpha_max: float
    b: float
    window_radius: float
    dr: float
    overshoot: float
    return_tolerance: float
    base_key: int
    backend: str
    entries: list[FieldEntry]
    _seg_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def restrict(self, alpha: float) -> list[FieldEntry]:
        """Entries of the level-``alpha`` subfield (deterministic thinning
        by marks; a subset of the master entries, so couplings across
        alpha are exact)."""
        if not 0.0 < alpha <= self.alpha_max:
            raise ValueError("alpha must lie in (0, alpha_max]")
        return [e for e in self.entries if e.scale.in_level(alpha)]

    def entry_segments(self, i: int) -> EntrySegments:
        """Chord arrays for entry ``i`` (cached per field)."""
        cached = self._seg_cache.get(i)
        if cached is not None:
            return cached
        ent = self.entries[i]
        ps, qs, dts, ks, bands = [], [], [], [], []
        for ci, (verts, times) in enumerate(ent.chunks):
            if verts.shape[0] < 2:
                continue
            p = verts[:-1]
            q = verts[1:]
            ps.append(p)
            qs.append(q)
            dts.append(planar_chunk_durations(verts, times, "skew"))
            ks.append(segment_keys(self.base_key, ent.scale.index, ci,
                                   p.shape[0]))
            rel = np.minimum(np.hypot(p[:, 0], p[:, 1]),
                             np.hypot(q[:, 0], q[:, 1])) / ent.scale.rho
            bands.append(rel <= 1.0 + _BAND_STEPS * self.dr)
        if not ps:
            seg = EntrySegments(np.empty((0, 2)), np.empty((0, 2)),
                                np.empty(0), np.empty(0, dtype=np.uint64),
                                np.empty(0, dtype=bool))
        else:
            seg = EntrySegments(np.concatenate(ps), np.concatenate(qs),
                                np.concatenate(dts), np.concatenate(ks),
                                np.concatenate(bands))
        self._seg_cache[i] = seg
        return seg

    def min_distance(self, x, entry_index: int,
                     cutoff: float = math.inf, resolution: float = 1e-3,
                     refine: bool = True) -> float:
        """Distance from ``x`` to one trajectory, resolved to
        ``resolution`` whenever it is below ``cutoff``."""
        seg = self.entry_segments(entry_index)
        if seg.n == 0:
            return math.inf
        x = np.asarray(x, dtype=float)
        if not refine:
            return float(point_segment_distance(x, seg.p, seg.q).min())
        return refined_min_distance(x, seg.p, seg.q, seg.dt, seg.keys,
                                    cutoff, resolution=resolution,
                                    no_refine=seg.no_refine)

    def count_hitting(self, alpha: float, x, r: float,
                      resolution: float = 1e-3) -> int:
        """Number of level-``alpha`` trajectories meeting the closed disk
        ``B(x, r)``."""
        if r < MIN_PROBE_RADIUS:
            raise ValueError("probe radius below the resolvable scale")
        cutoff = r + 2.0 * resolution
        count = 0
        for i, ent in enumerate(self.entries):
            if not ent.scale.in_level(alpha):
                continue
            if self.min_distance(x, i, cutoff, resolution) <= r:
                count += 1
        return count

    def save(self, path) -> None:
        meta = {
            "alpha_max": self.alpha_max,
            "b": self.b,
            "window_radius": self.window_radius,
            "dr": self.dr,
            "overshoot": self.overshoot,
            "return_tolerance": self.return_tolerance,
            "base_key": self.base_key,
            "backend": self.backend,
            "entries": [{"rho": e.scale.rho, "mark": e.scale.mark,
                         "index": e.scale.index,
                         "anchor": e.anchor_angle,
                         "n_chunks": len(e.chunks)}
                        for e in self.entries],
        }
        arrays = {}
        for i, ent in enumerate(self.entries):
            for j, (verts, times) in enumerate(ent.chunks):
                arrays[f"v{i}_{j}"] = verts
                arrays[f"t{i}_{j}"] = times
        blob = np.frombuffer(json.dumps(meta).encode("utf-8"),
                             dtype=np.uint8)
        np.savez_compressed(path, meta=blob, **arrays)

    @classmethod
    def load(cls, path) -> "InterlacementField":
        with np.load(path) as data:
            meta = json.loads(bytes(data["meta"]).decode("utf-8"))
            entries = []
            for i, em in enumerate(meta["entries"]):
                sp = ScalePoint(rho=em["rho"], mark=em["mark"],
                                index=em["index"])
                chunks = [(data[f"v{i}_{j}"], data[f"t{i}_{j}"])
                          for j in range(em["n_chunks"])]
                entries.append(FieldEntry(scale=sp,
                                          anchor_angle=em["anchor"],
                                          chunks=chunks))
        return cls(alpha_max=meta["alpha_max"], b=meta["b"],
                   window_radius=meta["window_radius"], dr=meta["dr"],
                   overshoot=meta["overshoot"],
                   return_tolerance=meta["return_tolerance"],
                   base_key=meta["base_key"], backend=meta["backend"],
                   entries=entries)


def _check_field_params(alpha_max: float, b: float,
                        window_radius: float) -> None:
    if alpha_max <= 0.0:
        raise ValueError("alpha_max must be positive")
    if b <= 0.0:
        raise ValueError("scale floor b must be positive")
    if window_radius < max(b, 1.0):
        raise ValueError("window_radius must cover the scale floor and "
                         "the unit disk")


def assemble_field(alpha_max: float, b: float, window_radius: float,
                   stream: RngStream, dr: float = DR_FIELD,
                   overshoot: float = KAPPA_OVERSHOOT,
                   return_tolerance: float = RETURN_TOLERANCE,
                   scales: list[ScalePoint] | None = None
                   ) -> InterlacementField:
    """Realize the soup at level ``alpha_max`` inside the window.

    Scales come from the arrival-process ladder unless an explicit list is
    supplied (rescaled frames); either way only scales with
    ``rho <= window_radius`` produce trajectories, since a trajectory of a
    larger scale never enters the window.
    """
    _check_field_params(alpha_max, b, window_radius)
    _check_soup_params(dr, overshoot, return_tolerance)
    base_key = _derive_base_key(stream)
    if scales is None:
        scales = sample_scales(alpha_max, b, window_radius, stream)
    entries = _build_entries(scales, window_radius, stream, dr, overshoot,
                             return_tolerance)
    return InterlacementField(alpha_max=alpha_max, b=b,
                              window_radius=window_radius, dr=dr,
                              overshoot=overshoot,
                              return_tolerance=return_tolerance,
                              base_key=base_key, backend="ladder",
                              entries=entries)


def assemble_field_bessel(alpha_max: float, b: float, window_radius: float,
                          stream: RngStream, dr: float = DR_FIELD,
                          overshoot: float = KAPPA_OVERSHOOT,
                          return_tolerance: float = RETURN_TOLERANCE
                          ) -> InterlacementField:
    """Alternative construction of the same law.

    The number of scales in ``(b, window_radius]`` is Poisson with mean
    ``2 alpha_max log(window_radius / b)`` (realized by counting unit
    exponential arrivals), log-radii are then an independent uniform
    scatter over the log-interval, sorted so indices increase with rho.
    Trajectories are built exactly as in the ladder construction.
    """
    _check_field_params(alpha_max, b, window_radius)
    _check_soup_params(dr, overshoot, return_tolerance)
    base_key = _derive_base_key(stream)
    lam = 2.0 * alpha_max * (math.log(window_radius) - math.log(b))
    n = 0
    acc = 0.0
    while True:
        acc += float(stream.exponentials(1)[0])
        if acc > lam:
            break
        n += 1
    lr = math.log(b) + (math.log(window_radius) - math.log(b)) \
        * stream.uniforms(n)
    marks_u = stream.open_uniforms(n)
    order = np.argsort(lr, kind="stable")
    scales = []
    for k, o in enumerate(order):
        rho = math.exp(float(lr[o]))
        mark = float(marks_u[o]) * 2.0 * alpha_max / rho
        scales.append(ScalePoint(rho=rho, mark=mark, index=k))
    entries = _build_entries(scales, window_radius, stream, dr, overshoot,
                             return_tolerance)
    return InterlacementField(alpha_max=alpha_max, b=b,
                              window_radius=window_radius, dr=dr,
                              overshoot=overshoot,
                              return_tolerance=return_tolerance,
                              base_key=base_key, backend="scatter",
                              entries=entries)


def count_disk_trajectories(field: InterlacementField, alpha: float, x,
                            r: float, resolution: float = 1e-3) -> int:
    """Level-``alpha`` trajectories meeting the closed disk ``B(x, r)``."""
    return field.count_hitting(alpha, x, r, resolution)


def count_annulus_trajectories(field: InterlacementField, alpha: float, x,
                               r_small: float, r_big: float,
                               resolution: float = 1e-3) -> int:
    """Level-``alpha`` trajectories meeting ``B(x, r_big)`` but not
    ``B(x, r_small)`` (one refined distance per trajectory decides both)."""
    if not 0.0 < r_small < r_big:
        raise ValueError("need 0 < r_small < r_big")
    if r_small < MIN_PROBE_RADIUS:
        raise ValueError("inner probe radius below the resolvable scale")
    if not 0.0 < alpha <= field.alpha_max:
        raise ValueError("alpha must lie in (0, alpha_max]")
    cutoff = r_big + 2.0 * resolution
    count = 0
    for i, ent in enumerate(field.entries):
        if not ent.scale.in_level(alpha):
            continue
        d = field.min_distance(x, i, cutoff, resolution)
        if r_small < d <= r_big:
            count += 1
    return count
