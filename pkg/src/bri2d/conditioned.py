"""Samplers for planar Brownian motion conditioned to avoid the unit disk.

Two backends produce the same law:

* skew backend: the log-radius is a three-dimensional Bessel process
  (sampled exactly at grid times as the norm of a 3-d Brownian motion) and
  the angle is an independent Brownian motion in the same auxiliary clock.
  Vertices are exact in law at grid times; there is no drift discretization.
* euler backend: direct Euler-Maruyama integration of the drift
  x / (|x|^2 ln|x|) in planar time, forbidden near the unit circle where the
  drift blows up.

The auxiliary clock of the skew backend relates to planar time through
dt = r^2 ds, which is what `PlanarPath.planar_durations` accounts for.

Step sizes adapt to the distance from the active barriers; because steps
stay a fixed fraction of that distance, barrier crossings between grid
times have negligible probability and exit detection at vertices is sound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .segments import circle_crossings_batch
from .streams import Bes3State, RngStream, step_bes3

DR_PATH = 2.0 ** -7
DR_FIELD = 2.0 ** -6
EULER_EXCLUSION = 0.05
EULER_DT_FACTOR = 0.5
ADAPT_FACTOR = 0.25
COARSE_FACTOR = 0.125
_MAX_STEPS = 1 << 23


@dataclass(frozen=True)
class StopSpec:
    """Stopping rule for path samplers: exit of the annulus
    inner_radius < |z| < outer_radius (inner barrier optional)."""

    outer_radius: float
    inner_radius: float | None = None
    max_steps: int = _MAX_STEPS

    def __post_init__(self):
        if not self.outer_radius > 1.0:
            raise ValueError("outer_radius must exceed 1")
        if self.inner_radius is not None:
            if not 1.0 < self.inner_radius < self.outer_radius:
                raise ValueError(
                    "inner_radius must lie in (1, outer_radius)")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


@dataclass
class PlanarPath:
    """Polyline with vertex times; kind selects the clock semantics."""

    vertices: np.ndarray
    times: np.ndarray
    kind: str  # "skew": times are auxiliary; "euler"/"bm": planar
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))
    exit_side: str | None = None

    def radii(self) -> np.ndarray:
        rel = self.vertices - self.center[None, :]
        return np.hypot(rel[:, 0], rel[:, 1])

    def planar_durations(self) -> np.ndarray:
        """Planar-time length of every segment (bridge durations)."""
        dts = np.diff(self.times)
        if self.kind != "skew":
            return dts
        r2 = self.radii() ** 2
        return dts * 0.5 * (r2[:-1] + r2[1:])


def planar_chunk_durations(vertices: np.ndarray, times: np.ndarray,
                           kind: str = "skew") -> np.ndarray:
    dts = np.diff(times)
    if kind != "skew":
        return dts
    r2 = vertices[:, 0] ** 2 + vertices[:, 1] ** 2
    return dts * 0.5 * (r2[:-1] + r2[1:])


@dataclass
class SkewProductState:
    """Single-step view of the skew-product coordinates.

    ``bes3`` carries the log-radius, ``angle`` winds on the universal
    cover, and ``clock`` accumulates planar time (the radial clock scaled
    by the squared radius).  The batch samplers below are the fast path;
    this state exists for callers that need to observe or steer the
    coordinates one step at a time.
    """

    bes3: Bes3State
    angle: float
    clock: float = 0.0

    @classmethod
    def from_point(cls, point) -> "SkewProductState":
        x, y = float(point[0]), float(point[1])
        r = math.hypot(x, y)
        if r < 1.0:
            raise ValueError("point must lie outside the open unit disk")
        return cls(bes3=Bes3State.from_value(math.log(r)),
                   angle=math.atan2(y, x))

    @property
    def log_radius(self) -> float:
        return self.bes3.value

    def position(self) -> np.ndarray:
        r = math.exp(self.log_radius)
        return np.array([r * math.cos(self.angle), r * math.sin(self.angle)])

    def step(self, ds: float, stream: RngStream) -> "SkewProductState":
        """Advance both coordinates by one auxiliary-clock increment;
        planar time grows by the trapezoidal r^2 weight."""
        r2former = math.exp(2.0 * self.log_radius)
        bes = step_bes3(self.bes3, ds, stream)
        ang = self.angle + float(stream.normals(1)[0]) * math.sqrt(ds)
        r2now = math.exp(2.0 * bes.value)
        return SkewProductState(bes3=bes, angle=ang,
                                clock=self.clock
                                + ds * 0.5 * (r2former + r2now))




def _sample_skew(z0: float, theta0: float, la: float | None, lb: float,
                 stream: RngStream, dr: float, z_fine: float,
                 max_steps: int, coarse_floor: float = 1.0):
    """Core skew sampler in log-polar coordinates.

    Fine constant steps (d s = dr^2) while the log-radius is below
    ``z_fine``; above it, steps scale with the distance back to the fine
    zone, which keeps faraway excursions cheap while the law at grid times
    stays exact (the step size depends only on the current state).
    ``coarse_floor`` sets the smallest coarse step in units of ``dr``;
    callers that discard the coarse vertices can afford a few ``dr``.

    Returns (logr, theta, times) arrays including the starting point, and
    the exit side ("inner"/"outer").
    """
    la_eff = -math.inf if la is None else la
    out_z = [np.array([z0])]
    out_th = [np.array([theta0])]
    out_t = [np.array([0.0])]
    px, py, pz = 0.0, 0.0, float(z0)
    th = float(theta0)
    tt = 0.0
    steps = 0
    side = None
    block = 256
    z = float(z0)
    buf: list[float] = []
    ptr = 0
    while side is None:
        if steps > max_steps:
            raise RuntimeError("skew sampler exceeded max_steps")
        if z <= z_fine:
            k = block
            raw = stream.normals(4 * k).reshape(k, 4)
            disp = np.cumsum(raw[:, :3] * dr, axis=0) \
                + np.array([px, py, pz])[None, :]
            zs = np.sqrt(np.einsum("ij,ij->i", disp, disp))
            stop = (zs <= la_eff) | (zs >= lb) | (zs > z_fine)
            cut = int(np.argmax(stop)) + 1 if stop.any() else k
            ths = th + np.cumsum(raw[:cut, 3] * dr)
            ts = tt + (np.arange(1, cut + 1)) * dr * dr
            out_z.append(zs[:cut])
            out_th.append(ths)
            out_t.append(ts)
            px = float(disp[cut - 1, 0])
            py = float(disp[cut - 1, 1])
            pz = float(disp[cut - 1, 2])
            th = float(ths[-1])
            tt = float(ts[-1])
            z = float(zs[cut - 1])
            steps += cut
            if z <= la_eff:
                side = "inner"
            elif z >= lb:
                side = "outer"
            if cut == k:
                block = min(block * 2, 8192)
            else:
                block = 256
        else:
            # Far excursion: plain-float loop with buffered draws.  The
            # step rule depends only on the current state, so the grid
            # law stays exact however the steps grow.
            zrec, trec, threc = [], [], []
            floor = coarse_floor * dr
            while z > z_fine:
                if steps > max_steps:
                    raise RuntimeError("skew sampler exceeded max_steps")
                if ptr + 4 > len(buf):
                    buf = stream.normals(4096).tolist()
                    ptr = 0
                gap = z - z_fine
                cap = lb - z
                sd = COARSE_FACTOR * (gap if gap < cap else cap)
                if sd < floor:
                    sd = floor
                px += buf[ptr] * sd
                py += buf[ptr + 1] * sd
                pz += buf[ptr + 2] * sd
                th += buf[ptr + 3] * sd
                ptr += 4
                tt += sd * sd
                z = math.sqrt(px * px + py * py + pz * pz)
                zrec.append(z)
                threc.append(th)
                trec.append(tt)
                steps += 1
                if z >= lb:
                    side = "outer"
                    break
            if zrec:
                out_z.append(np.array(zrec))
                out_th.append(np.array(threc))
                out_t.append(np.array(trec))
                # re-entries sit just under the boundary and tend to cross
                # straight back; restart the fine phase on a small block
                block = 32
    return (np.concatenate(out_z), np.concatenate(out_th),
            np.concatenate(out_t), side)


def sample_conditioned_path_skew(start, stop: StopSpec, stream: RngStream,
                                 dr: float = DR_PATH,
                                 fine_radius: float | None = None
                                 ) -> PlanarPath:
    """Sample one conditioned-motion trace from ``start`` until it exits
    the StopSpec annulus.  ``fine_radius`` bounds the zone of constant-step
    sampling; beyond it step sizes grow (coarser vertices, same law)."""
    start = np.asarray(start, dtype=float)
    r0 = float(np.hypot(*start))
    if r0 < 1.0:
        raise ValueError("start must lie outside the open unit disk")
    z0 = math.log(max(r0, 1.0))
    la = None if stop.inner_radius is None else math.log(stop.inner_radius)
    if la is not None and z0 <= la:
        raise ValueError("start must lie outside the inner barrier")
    lb = math.log(stop.outer_radius)
    if z0 >= lb:
        raise ValueError("start must lie inside the outer barrier")
    if fine_radius is not None and stop.inner_radius is not None \
            and fine_radius < stop.inner_radius:
        raise ValueError("fine_radius must cover the inner barrier")
    z_fine = math.inf if fine_radius is None else math.log(fine_radius)
    logr, theta, times, side = _sample_skew(
        z0, math.atan2(start[1], start[0]), la, lb, stream, dr, z_fine,
        stop.max_steps)
    verts = np.exp(logr)[:, None] * np.stack(
        [np.cos(theta), np.sin(theta)], axis=1)
    verts[0] = start
    return PlanarPath(verts, times, "skew", exit_side=side)


def sample_conditioned_path_euler(start, stop: StopSpec, stream: RngStream,
                                  dr: float = DR_PATH,
                                  dt_factor: float = EULER_DT_FACTOR,
                                  exclusion: float = EULER_EXCLUSION
                                  ) -> PlanarPath:
    """Euler-Maruyama backend.  Refused within ``exclusion`` of the unit
    circle, where the conditioning drift is too stiff for this scheme."""
    x = np.asarray(start, dtype=float).copy()
    r = float(np.hypot(*x))
    if r < 1.0 + exclusion:
        raise ValueError("euler backend requires |start| >= 1 + exclusion")
    if stop.inner_radius is None or stop.inner_radius < 1.0 + exclusion:
        raise ValueError(
            "euler backend requires an inner barrier >= 1 + exclusion")
    verts = [x.copy()]
    times = [0.0]
    t = 0.0
    buf = stream.normals(2048)
    ptr = 0
    side = None
    for _ in range(stop.max_steps):
        r = float(np.hypot(*x))
        if r <= stop.inner_radius:
            side = "inner"
            break
        if r >= stop.outer_radius:
            side = "outer"
            break
        dt = (dt_factor * dr * r) ** 2
        drift = x / (r * r * math.log(r))
        dmag = float(np.hypot(*drift)) * dt
        cap = 0.2 * (r - 1.0)
        if dmag > cap:
            dt *= cap / dmag
        if ptr + 2 > len(buf):
            buf = stream.normals(2048)
            ptr = 0
        x = x + drift * dt + math.sqrt(dt) * buf[ptr:ptr + 2]
        ptr += 2
        t += dt
        verts.append(x.copy())
        times.append(t)
    else:
        raise RuntimeError("euler sampler exceeded max_steps")
    return PlanarPath(np.array(verts), np.array(times), "euler",
                      exit_side=side)


def sample_scaled_conditioned(center, scale_r: float, start,
                              stop: StopSpec, stream: RngStream,
                              dr: float = DR_PATH,
                              fine_radius: float | None = None
                              ) -> PlanarPath:
    """Conditioned motion avoiding B(center, scale_r): the unit-disk path
    mapped through z -> center + scale_r * z.  StopSpec radii and
    ``fine_radius`` are distances from ``center`` in absolute units."""
    center = np.asarray(center, dtype=float)
    if scale_r <= 0.0:
        raise ValueError("scale_r must be positive")
    rel = (np.asarray(start, dtype=float) - center) / scale_r
    unit_stop = StopSpec(
        outer_radius=stop.outer_radius / scale_r,
        inner_radius=None if stop.inner_radius is None
        else stop.inner_radius / scale_r,
        max_steps=stop.max_steps)
    fine = None if fine_radius is None else fine_radius / scale_r
    path = sample_conditioned_path_skew(rel, unit_stop, stream, dr, fine)
    return PlanarPath(center[None, :] + scale_r * path.vertices,
                      path.times, "skew", center=center,
                      exit_side=path.exit_side)


def first_hit_radius(path: PlanarPath, center, rho: float):
    """First chord crossing of the circle |z - center| = rho, as
    (segment index, interpolated point), or None."""
    c = np.asarray(center, dtype=float)
    p, q = path.vertices[:-1], path.vertices[1:]
    ts = circle_crossings_batch(p, q, c, rho)
    hit = np.nonzero(~np.isnan(ts))[0]
    if len(hit) == 0:
        return None
    i = int(hit[0])
    pt = p[i] + ts[i] * (q[i] - p[i])
    return i, pt


# ---------------------------------------------------------------------------
# Trace-free batch kernels (exit statistics without storing paths)
# ---------------------------------------------------------------------------

def skew_exit_batch(s_radius: float, inner: float, outer: float, n: int,
                    stream: RngStream, dr: float = DR_PATH,
                    adapt: float = ADAPT_FACTOR, start_angle: float = 0.0):
    """Run n independent skew-backend paths from radius ``s_radius`` until
    they exit the annulus (inner, outer); returns a dict with the exit
    side and the exact final log-radius / angle of every path.

    Step sizes shrink proportionally to the distance from the nearer
    barrier (floored at ``adapt * dr``), so each path takes a few hundred
    exact Bessel steps regardless of how far the barriers are.
    """
    if not 1.0 < inner < s_radius < outer:
        raise ValueError("need 1 < inner < s_radius < outer")
    la, lb, z0 = math.log(inner), math.log(outer), math.log(s_radius)
    pos = np.zeros((n, 3))
    pos[:, 2] = z0
    theta = np.full(n, float(start_angle))
    taux = np.zeros(n)
    out_side = np.empty(n, dtype=bool)
    out_z = np.empty(n)
    out_theta = np.empty(n)
    out_t = np.empty(n)
    idx = np.arange(n)
    guard = 0
    while len(idx):
        guard += 1
        if guard > 1_000_000:
            raise RuntimeError("skew_exit_batch failed to converge")
        z = np.sqrt(np.einsum("ij,ij->i", pos, pos))
        inner_hit = z <= la
        outer_hit = z >= lb
        done = inner_hit | outer_hit
        if done.any():
            sel = idx[done]
            out_side[sel] = outer_hit[done]
            out_z[sel] = z[done]
            out_theta[sel] = theta[done]
            out_t[sel] = taux[done]
            keep = ~done
            pos, theta, taux, idx, z = (pos[keep], theta[keep], taux[keep],
                                        idx[keep], z[keep])
            if len(idx) == 0:
                break
        sd = adapt * np.maximum(np.minimum(z - la, lb - z), dr)
        draws = stream.normals(4 * len(idx)).reshape(len(idx), 4)
        pos = pos + draws[:, :3] * sd[:, None]
        theta = theta + draws[:, 3] * sd
        taux = taux + sd * sd
    return {"outer": out_side, "log_radius": out_z, "angle": out_theta,
            "aux_time": out_t}


def euler_exit_batch(s_radius: float, inner: float, outer: float, n: int,
                     stream: RngStream, dr: float = DR_PATH,
                     dt_factor: float = EULER_DT_FACTOR,
                     exclusion: float = EULER_EXCLUSION):
    """Euler-backend companion of `skew_exit_batch` (planar clock)."""
    if not 1.0 + exclusion <= inner < s_radius < outer:
        raise ValueError("barriers invalid for the euler backend")
    x = np.zeros((n, 2))
    x[:, 0] = s_radius
    out_side = np.empty(n, dtype=bool)
    idx = np.arange(n)
    guard = 0
    while len(idx):
        guard += 1
        if guard > 2_000_000:
            raise RuntimeError("euler_exit_batch failed to converge")
        r = np.hypot(x[:, 0], x[:, 1])
        inner_hit = r <= inner
        outer_hit = r >= outer
        done = inner_hit | outer_hit
        if done.any():
            out_side[idx[done]] = outer_hit[done]
            keep = ~done
            x, idx, r = x[keep], idx[keep], r[keep]
            if len(idx) == 0:
                break
        dt = (dt_factor * dr * r) ** 2
        lnr = np.log(r)
        x = x + x * (dt / (r * r * lnr))[:, None] \
            + np.sqrt(dt)[:, None] * stream.normals(2 * len(idx)).reshape(-1, 2)
    return {"outer": out_side}


# ---------------------------------------------------------------------------
# Plain Brownian motion tools (oracle walkers, entrance-measure law)
# ---------------------------------------------------------------------------

def bridge_circle_hits(p: np.ndarray, q: np.ndarray, dt: np.ndarray,
                       center: np.ndarray, rho: float, stream: RngStream,
                       depth: int = 10):
    """Decide for each planar Brownian segment (p[i], q[i], duration dt[i])
    whether the bridge between its endpoints enters B(center, rho), by
    recursive midpoint sampling.  Both endpoints are assumed outside.
    Returns (hit mask, hit points); ambiguity below the depth cap is
    resolved as a miss (residual probability ~ exp(-2 * 3.5^2) per level).
    """
    n = len(p)
    hit = np.zeros(n, dtype=bool)
    pts = np.zeros((n, 2))
    ids = np.arange(n)
    cp, cq, cdt = p.copy(), q.copy(), dt.copy()
    for _ in range(depth):
        if len(ids) == 0:
            break
        ts = circle_crossings_batch(cp, cq, center, rho)
        crossed = ~np.isnan(ts)
        if crossed.any():
            sel = ids[crossed]
            newly = ~hit[sel]
            hit[sel] = True
            t_hit = ts[crossed]
            pts[sel[newly]] = (cp[crossed][newly]
                               + t_hit[newly, None]
                               * (cq[crossed] - cp[crossed])[newly])
        live = ~crossed & ~hit[ids]
        if not live.any():
            break
        cp, cq, cdt, ids = cp[live], cq[live], cdt[live], ids[live]
        d = np.minimum(
            np.hypot(cp[:, 0] - center[0], cp[:, 1] - center[1]) - rho,
            np.hypot(cq[:, 0] - center[0], cq[:, 1] - center[1]) - rho)
        near = d < 3.5 * np.sqrt(cdt)
        if not near.any():
            break
        cp, cq, cdt, ids = cp[near], cq[near], cdt[near], ids[near]
        mid = 0.5 * (cp + cq) + np.sqrt(cdt * 0.25)[:, None] \
            * stream.normals(2 * len(ids)).reshape(-1, 2)
        cp = np.concatenate([cp, mid])
        cq = np.concatenate([mid, cq])
        cdt = np.concatenate([cdt * 0.5, cdt * 0.5])
        ids = np.concatenate([ids, ids])
    return hit, pts


def entrance_angle_sample(r: float, s_radius: float, big_r: float,
                          n_accepted: int, stream: RngStream,
                          adapt: float = 0.35) -> dict:
    """Plain Brownian motion from a uniform point of the radius-s circle,
    run until it enters B(r) (accepted) or exits B(big_r) (rejected);
    returns the entrance angles of the first ``n_accepted`` acceptances.

    Starting angles are uniform, so the aggregate entrance law on the
    small circle is exactly rotation invariant; this is the law the
    12-sector test checks.  Entry detection combines exact chord crossings
    with bridge refinement of near misses.
    """
    if not 0.0 < 2 * r < s_radius < big_r:
        raise ValueError("need 0 < 2r < s < R")
    angles = np.empty(n_accepted)
    got = 0
    attempts = 0
    batch = 4096
    x = np.empty((0, 2))
    floor = 0.25 * r
    guard = 0
    while got < n_accepted:
        guard += 1
        if guard > 2_000_000:
            raise RuntimeError("entrance sampler failed to converge")
        refill = batch - len(x)
        if refill > 0:
            th = 2.0 * math.pi * stream.uniforms(refill)
            fresh = s_radius * np.stack([np.cos(th), np.sin(th)], axis=1)
            x = np.concatenate([x, fresh])
            attempts += refill
        rad = np.hypot(x[:, 0], x[:, 1])
        d = np.minimum(rad - r, big_r - rad)
        dt = (adapt * np.maximum(d, floor)) ** 2
        step = np.sqrt(dt)[:, None] * stream.normals(2 * len(x)).reshape(-1, 2)
        xn = x + step
        t_in = circle_crossings_batch(x, xn, np.zeros(2), r)
        t_out = circle_crossings_batch(x, xn, np.zeros(2), big_r)
        hit_in = ~np.isnan(t_in) & (np.isnan(t_out) | (t_in <= t_out))
        hit_out = ~np.isnan(t_out) & ~hit_in
        maybe = np.isnan(t_in) & np.isnan(t_out)
        if maybe.any():
            dmin = np.minimum(
                np.hypot(x[maybe, 0], x[maybe, 1]),
                np.hypot(xn[maybe, 0], xn[maybe, 1])) - r
            near = dmin < 3.5 * np.sqrt(dt[maybe])
            if near.any():
                rows = np.nonzero(maybe)[0][near]
                bh, bp = bridge_circle_hits(x[rows], xn[rows], dt[rows],
                                            np.zeros(2), r, stream)
                if bh.any():
                    hit_in[rows[bh]] = True
                    xn[rows[bh]] = bp[bh]
                    t_in[rows[bh]] = 1.0
        if hit_in.any():
            rows = np.nonzero(hit_in)[0]
            pts = x[rows] + np.where(
                np.isnan(t_in[rows]), 1.0, t_in[rows])[:, None] \
                * (xn[rows] - x[rows])
            new = np.arctan2(pts[:, 1], pts[:, 0])
            take = min(len(new), n_accepted - got)
            angles[got:got + take] = new[:take]
            got += take
        keep = ~hit_in & ~hit_out
        x = xn[keep]
    return {"angles": angles, "attempts": attempts,
            "accepted": n_accepted}


def estimate_entrance_angle_law(r: float, big_r: float, s_radius: float,
                                replicas: int, stream: RngStream,
                                n_sectors: int = 12) -> dict:
    """Sector histogram of the entrance angle into B(r).

    Plain Brownian motion starts on the radius-``s_radius`` circle and is
    kept only when it reaches B(r) before leaving B(big_r); the accepted
    entrance angles are binned into equal sectors.  Masses sum to one and
    should be uniform; ``deviation_scale`` is the asymptotic deviation
    size r*ln(R/r) / (s*ln(1 + R/s)) for tolerance calibration.
    """
    if replicas <= 0:
        raise ValueError("replicas must be positive")
    res = entrance_angle_sample(r, s_radius, big_r, replicas, stream)
    sector = np.floor((res["angles"] + math.pi)
                      / (2.0 * math.pi / n_sectors)).astype(np.int64)
    sector = np.clip(sector, 0, n_sectors - 1)
    counts = np.bincount(sector, minlength=n_sectors)
    scale = (r * math.log(big_r / r)) \
        / (s_radius * math.log(1.0 + big_r / s_radius))
    return {"counts": counts, "masses": counts / replicas,
            "accepted": replicas, "attempts": res["attempts"],
            "n_sectors": n_sectors, "deviation_scale": scale}
