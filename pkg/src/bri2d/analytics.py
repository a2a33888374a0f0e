"""Closed forms and quadratures for the potential theory of planar Brownian
motion conditioned off the unit disk.

Asymptotic error terms carry unproven constants; every such term is
evaluated with constant 1 and surfaced as an ``error_bound`` field.  Those
bounds are scale indicators for test tolerances, not certified inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .conditioned import bridge_circle_hits
from .segments import circle_crossings_batch
from .streams import RngStream

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre panel quadrature with node doubling until the value
    moves by less than ``tolerance``."""

    nodes: int = 256
    rule: str = "gauss-legendre"
    tolerance: float = 1e-10
    max_doublings: int = 8

    def __post_init__(self):
        if self.nodes < 2 or self.tolerance <= 0 or self.max_doublings < 0:
            raise ValueError("invalid quadrature parameters")
        if self.rule != "gauss-legendre":
            raise ValueError("unknown quadrature rule: " + self.rule)


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class CapacityResult:
    """Capacity of B(1) plus a disk.  ``leading-form`` results evaluate the
    closed leading expression; ``oracle`` results are harmonic-measure
    Monte Carlo with a 99% CI half-width as the error bound."""

    value: float
    leading_term: float
    error_bound: float
    method: str


@dataclass(frozen=True)
class PsiTriple:
    """The three error scales of the Poissonian-distances approximation."""

    psi1: float
    psi2: float
    psi3: float
    h: float
    x_norm: float
    alpha: float

    @property
    def total(self) -> float:
        return self.psi1 + self.psi2 + self.psi3


@dataclass(frozen=True)
class LogDiff:
    lead: float
    remainder: float
    bound: float


@lru_cache(maxsize=32)
def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panel_integrate(f, edges: np.ndarray, n: int) -> float:
    x, w = _gl(n)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    return float(half @ (vals @ w))


def _bisect(edges: np.ndarray) -> np.ndarray:
    mids = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(2 * len(edges) - 1)
    out[::2] = edges
    out[1::2] = mids
    return out


def adaptive_integrate(f, edges, spec: QuadratureSpec = DEFAULT_QUAD):
    """Integrate a vectorized integrand over the given panels, bisecting
    every panel until the value settles (node count per panel is fixed by
    the spec, so refinement cost stays linear).  Returns
    (value, last_change)."""
    edges = np.asarray(edges, dtype=float)
    n = min(spec.nodes, 512)
    prev = _panel_integrate(f, edges, n)
    change = math.inf
    for _ in range(spec.max_doublings):
        edges = _bisect(edges)
        cur = _panel_integrate(f, edges, n)
        change = abs(cur - prev)
        prev = cur
        if change < spec.tolerance:
            break
    return prev, change


def poisson_kernel(x, z) -> float:
    """Density at z (on the unit circle) of the first entrance to B(1)
    from x."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    nx = float(np.hypot(*x))
    if nx <= 1.0:
        raise ValueError("poisson_kernel requires |x| > 1")
    if abs(float(np.hypot(*z)) - 1.0) > 1e-6:
        raise ValueError("z must lie on the unit circle")
    return (nx * nx - 1.0) / (TWO_PI * float((z - x) @ (z - x)))


def _ell_edges(s: float) -> np.ndarray:
    """Panel edges on [0, pi] refined geometrically near the angle of the
    nearest circle point, where the entrance density peaks as s drops
    to 1."""
    delta = max(s - 1.0, 1e-12)
    edges = [0.0]
    w = min(delta, math.pi / 8) / 64.0
    while w < math.pi:
        edges.append(w)
        w *= 4.0
    edges.append(math.pi)
    return np.asarray(edges)


def ell(x, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Mean of ln|x - entry point| under the entrance law to B(1)."""
    x = np.asarray(x, dtype=float)
    s = float(np.hypot(*x))
    if s <= 1.0:
        raise ValueError("ell requires |x| > 1")

    def integrand(phi):
        # (s-1)^2 + 4 s sin^2(phi/2) avoids cancellation as s drops to 1
        d2 = (s - 1.0) ** 2 + 4.0 * s * np.sin(0.5 * phi) ** 2
        return 0.5 * np.log(d2) * (s * s - 1.0) / (TWO_PI * d2)

    val, _ = adaptive_integrate(integrand, _ell_edges(s), spec)
    return 2.0 * val


def ell_tilde(ell_val: float) -> float:
    return max(abs(ell_val), 1.0)


def caphat_disk(y, r: float, mode: str = "leading",
                spec: QuadratureSpec = DEFAULT_QUAD,
                walkers: int = 10 ** 6,
                stream: RngStream | None = None) -> CapacityResult:
    """Capacity of B(1) plus the disk B(y, r), for r < |y| - 1.

    ``leading`` evaluates the closed leading form; its error bound combines
    the numerator and denominator correction scales (constant 1) to first
    order.  ``oracle`` samples the harmonic measure directly.
    """
    y = np.asarray(y, dtype=float)
    ny = float(np.hypot(*y))
    if r <= 0.0:
        raise ValueError("radius must be positive")
    if r >= ny - 1.0:
        raise ValueError("caphat_disk requires r < |y| - 1")
    lead, err = _caphat_leading(ny, -math.log(r), ell(y, spec), r)
    if mode == "leading":
        return CapacityResult(lead, lead, err, "leading-form")
    if mode != "oracle":
        raise ValueError("mode must be 'leading' or 'oracle'")
    if stream is None:
        raise ValueError("oracle mode needs a stream")
    est, half = capacity_oracle([((0.0, 0.0), 1.0), (tuple(y), r)],
                                walkers, stream)
    return CapacityResult(est, lead, half, "oracle")


def _caphat_leading(y_norm: float, ln_inv_r: float, ell_y: float,
                    r: float | None):
    """Leading capacity form in log-domain arguments, with the first-order
    propagation of the two correction scales (both evaluated with
    constant 1).  ``r=None`` means r is far below floating-point range:
    corrections involving r are then zero."""
    lny = math.log(y_norm)
    den = ln_inv_r + ell_y + lny
    if den <= 0.0:
        raise ValueError("leading form degenerate: denominator <= 0")
    num = lny * lny
    value = (2.0 / math.pi) * num / den
    if r is None:
        return value, 0.0
    eps_num = r * (1.0 + abs(math.log(r)) + lny) * lny / y_norm
    eps_den = r / (y_norm - 1.0) * abs(math.log((y_norm - 1.0) / r))
    err = (2.0 / math.pi) * (eps_num / den + num * eps_den / (den * den))
    return value, err


def caphat_leading_log(y_norm: float, ln_inv_r: float,
                       ell_y: float) -> float:
    """Leading capacity value for radii given only through ln(1/r); usable
    far below the floating-point underflow threshold."""
    value, _ = _caphat_leading(y_norm, ln_inv_r, ell_y, None)
    return value


def cap_disk_centered(radius: float) -> float:
    """Closed-form capacity of B(0, R), R >= 1 (oracle validation)."""
    if radius < 1.0:
        raise ValueError("radius must be >= 1")
    return (2.0 / math.pi) * math.log(radius)


def capacity_oracle(disks, walkers: int, stream: RngStream,
                    r_start: float = 1e3, r_kill: float = 1e7,
                    adapt: float = 0.2, batch: int = 8192):
    """Estimate cap(union of disks) by sampling the harmonic measure from
    infinity with plain Brownian walkers.

    Walkers start uniformly on the radius ``r_start`` circle (the uniform
    start angle cancels the leading finite-start correction), step with
    size proportional to the distance to the nearest disk, detect entry by
    exact chord crossings plus bridge refinement of near misses, and are
    re-injected when they wander past ``r_kill``.  Returns
    (estimate, 99% CI half-width).
    """
    centers = np.array([d[0] for d in disks], dtype=float)
    radii = np.array([d[1] for d in disks], dtype=float)
    if len(disks) == 0 or np.any(radii <= 0.0):
        raise ValueError("need at least one disk of positive radius")
    reach = float(np.max(np.hypot(centers[:, 0], centers[:, 1]) + radii))
    if reach * 4.0 > r_start:
        raise ValueError("disks too large for the start circle")
    floor = 0.02 * float(radii.min())
    total = 0.0
    total_sq = 0.0
    done = 0
    x = np.empty((0, 2))
    attempts = 0
    while done < walkers:
        need = min(batch, walkers - done) - len(x)
        if need > 0:
            th = TWO_PI * stream.uniforms(need)
            x = np.concatenate(
                [x, r_start * np.stack([np.cos(th), np.sin(th)], axis=1)])
            attempts += need
        d = np.full(len(x), np.inf)
        for c, r in zip(centers, radii):
            d = np.minimum(d, np.hypot(x[:, 0] - c[0], x[:, 1] - c[1]) - r)
        dt = (adapt * np.maximum(d, floor)) ** 2
        xn = x + np.sqrt(dt)[:, None] * stream.normals(2 * len(x)).reshape(-1, 2)
        t_best = np.full(len(x), np.nan)
        pt = np.empty_like(x)
        for c, r in zip(centers, radii):
            ts = circle_crossings_batch(x, xn, np.asarray(c, dtype=float), r)
            better = ~np.isnan(ts) & (np.isnan(t_best) | (ts < t_best))
            t_best[better] = ts[better]
        entered = ~np.isnan(t_best)
        pt[entered] = x[entered] + t_best[entered, None] * (xn - x)[entered]
        # near misses: refine the bridge against each disk separately
        maybe = ~entered
        if maybe.any():
            rows = np.nonzero(maybe)[0]
            for c, r in zip(centers, radii):
                if len(rows) == 0:
                    break
                dm = np.minimum(
                    np.hypot(x[rows, 0] - c[0], x[rows, 1] - c[1]),
                    np.hypot(xn[rows, 0] - c[0], xn[rows, 1] - c[1])) - r
                near = dm < 3.0 * np.sqrt(dt[rows])
                if near.any():
                    rr = rows[near]
                    bh, bp = bridge_circle_hits(
                        x[rr], xn[rr], dt[rr], np.asarray(c, dtype=float),
                        r, stream)
                    if bh.any():
                        entered[rr[bh]] = True
                        pt[rr[bh]] = bp[bh]
                    rows = rows[~np.isin(rows, rr[bh])] \
                        if bh.any() else rows
        if entered.any():
            lv = np.log(np.hypot(pt[entered, 0], pt[entered, 1]))
            total += float(lv.sum())
            total_sq += float((lv * lv).sum())
            done += int(entered.sum())
        xn = xn[~entered]
        far = np.hypot(xn[:, 0], xn[:, 1]) > r_kill
        if far.any():
            th = TWO_PI * stream.uniforms(int(far.sum()))
            xn[far] = r_start * np.stack([np.cos(th), np.sin(th)], axis=1)
        x = xn
    mean = total / done
    var = max(total_sq / done - mean * mean, 0.0)
    scale = 2.0 / math.pi
    return scale * mean, 2.576 * scale * math.sqrt(var / done)


def hitting_prob(s: float, a: float, b: float) -> float:
    """Chance that the conditioned motion reaches radius b before radius a,
    starting from radius s."""
    if not (1.0 < a <= s <= b) or not b > a:
        raise ValueError("need 1 < a <= s <= b with a < b")
    if s == a:
        return 0.0
    if s == b:
        return 1.0
    return (math.log(s / a) * math.log(b)) / (math.log(b / a) * math.log(s))


def escape_prob(s: float, a: float) -> float:
    """Chance that the conditioned motion started at radius s never
    reaches radius a <= s."""
    if not 1.0 <= a <= s:
        raise ValueError("need 1 <= a <= s")
    if s == a:
        return 0.0
    return 1.0 - math.log(a) / math.log(s)


def cond_hit_small_disk(x, y, r: float, delta0: float = 1.0,
                        spec: QuadratureSpec = DEFAULT_QUAD) -> dict:
    """Leading forms for hitting / escaping a small disk B(y, r) from a
    nearby start x, with the shared correction scale as error bound.

    The preconditions are reported distinctly: proximity (|x-y| < 1/2),
    the closeness-to-circle clause |x-y| <= (|y|-1)^(1+delta0), and
    0 < r < |x-y|.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dxy = float(np.hypot(*(x - y)))
    ny = float(np.hypot(*y))
    if not dxy < 0.5:
        raise ValueError("proximity violated: |x-y| >= 1/2")
    if not dxy <= (ny - 1.0) ** (1.0 + delta0):
        raise ValueError("closeness clause violated: "
                         "|x-y| > (|y|-1)^(1+delta0)")
    if not 0.0 < r < dxy:
        raise ValueError("radius clause violated: need 0 < r < |x-y|")
    ell_y = ell(y, spec)
    lny = math.log(ny)
    num = math.log(1.0 / dxy) + ell_y + lny
    den = math.log(1.0 / r) + ell_y + lny
    hit = num / den
    err = (dxy * ell_tilde(ell_y)) / ((ny - 1.0)
                                      * (math.log(1.0 / dxy) + lny))
    esc = math.log(dxy / r) / den
    return {"hit": hit, "hit_error": abs(hit) * err,
            "escape": esc, "escape_error": err, "ell_y": ell_y}


def _l_integral_edges(delta: float) -> np.ndarray:
    edges = [0.0]
    w = max(min(delta, math.pi / 8), 1e-7)
    while w < math.pi:
        edges.append(w)
        w *= 4.0
    edges.append(math.pi)
    return np.asarray(edges)


def L_value(x, y, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """The continuous martingale kernel of the conditioned motion.

    Uses the folded half-circle integral; the numerator of the integrand
    vanishes at angle 0, which tames the kernel peak as |x| drops to 1.
    Exactly on the unit circle the dedicated boundary formula applies.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx = float(np.hypot(*x))
    ny = float(np.hypot(*y))
    if nx < 1.0 - 1e-12 or ny < 1.0 - 1e-12:
        raise ValueError("L_value requires both points outside B(1)")
    dxy = float(np.hypot(*(x - y)))
    if dxy < 1e-6:
        raise ValueError("L_value refused within 1e-6 of the diagonal")
    # rotate so that x lies on the positive real axis
    cos_b = x[0] / nx
    sin_b = x[1] / nx
    yr = np.array([cos_b * y[0] + sin_b * y[1],
                   -sin_b * y[0] + cos_b * y[1]])
    ln_x0y = 0.5 * math.log((1.0 - yr[0]) ** 2 + yr[1] ** 2)

    def g(phi):
        c, s = np.cos(phi), np.sin(phi)
        a2 = (c - yr[0]) ** 2 + (s - yr[1]) ** 2
        b2 = (c - yr[0]) ** 2 + (s + yr[1]) ** 2
        return 0.5 * np.log(a2 * b2) - 2.0 * ln_x0y

    if nx <= 1.0 + 1e-12:
        def integrand(phi):
            return g(phi) / (4.0 * np.sin(0.5 * phi) ** 2)

        val, _ = adaptive_integrate(integrand, _l_integral_edges(1e-4),
                                    spec)
        x0 = np.array([cos_b, sin_b])
        return float((y - x0) @ y) / (dxy * dxy) + val / math.pi

    def integrand(phi):
        return g(phi) / ((nx - 1.0) ** 2
                         + 4.0 * nx * np.sin(0.5 * phi) ** 2)

    val, _ = adaptive_integrate(integrand, _l_integral_edges(nx - 1.0),
                                spec)
    lead = -math.log(dxy) + ln_x0y + (nx * nx - 1.0) / TWO_PI * val
    return 1.0 + lead / math.log(nx)


def L_value_batch(points: np.ndarray, y, nodes: int = 2048) -> np.ndarray:
    """Vectorized fixed-rule L over many x points (Monte Carlo use).

    Evaluated in bounded-memory chunks; the (points x nodes) work arrays
    stay under a few hundred MB regardless of batch size."""
    pts = np.asarray(points, dtype=float)
    chunk = max(1, (1 << 23) // nodes)
    if len(pts) > chunk:
        return np.concatenate([L_value_batch(pts[i:i + chunk], y, nodes)
                               for i in range(0, len(pts), chunk)])
    y = np.asarray(y, dtype=float)
    nx = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(nx <= 1.0):
        raise ValueError("all points must lie strictly outside B(1)")
    gx, gw = _gl(nodes)
    phi = 0.5 * math.pi * (gx + 1.0)
    w = 0.5 * math.pi * gw
    cos_b = pts[:, 0] / nx
    sin_b = pts[:, 1] / nx
    y0 = cos_b * y[0] + sin_b * y[1]
    y1 = -sin_b * y[0] + cos_b * y[1]
    c, s = np.cos(phi), np.sin(phi)
    a2 = (c[None, :] - y0[:, None]) ** 2 + (s[None, :] - y1[:, None]) ** 2
    b2 = (c[None, :] - y0[:, None]) ** 2 + (s[None, :] + y1[:, None]) ** 2
    ln_x0y = 0.5 * np.log((1.0 - y0) ** 2 + y1 ** 2)
    gmat = 0.5 * np.log(a2 * b2) - 2.0 * ln_x0y[:, None]
    den = ((nx[:, None] - 1.0) ** 2
           + 4.0 * nx[:, None] * np.sin(0.5 * phi)[None, :] ** 2)
    integral = (gmat / den) @ w
    dxy = np.hypot(pts[:, 0] - y[0], pts[:, 1] - y[1])
    lead = -np.log(dxy) + ln_x0y + (nx * nx - 1.0) / TWO_PI * integral
    return 1.0 + lead / np.log(nx)


def psi_terms(h: float, x_norm: float, alpha: float,
              ell_val: float) -> PsiTriple:
    """Error scales entering the exponential-spacings approximation of the
    nearest-trajectory distances."""
    if h <= 0 or alpha <= 0 or x_norm <= 1.0:
        raise ValueError("need h > 0, alpha > 0, x_norm > 1")
    lnx = math.log(x_norm)
    lt = ell_tilde(ell_val)
    core = alpha * lnx * lnx
    psi1 = lt * h / core
    grow = math.exp(2.0 * core / h)
    psi2 = (1.0 + core / h + lnx) / (grow * x_norm * lnx)
    psi3 = (1.0 + psi1) / (grow * (x_norm - 1.0))
    return PsiTriple(psi1, psi2, psi3, h, x_norm, alpha)


def r_b(alpha: float, x_norm: float, b: float) -> float:
    """Distance scale below which roughly b trajectories pass."""
    if b <= 0 or alpha <= 0 or x_norm <= 1.0:
        raise ValueError("need b > 0, alpha > 0, x_norm > 1")
    return math.exp(-2.0 * alpha * math.log(x_norm) ** 2 / b)


def ytilde_transform(distances, alpha: float, x_norm: float) -> np.ndarray:
    """Map ascending trajectory distances to their exponential-spacing
    coordinates (inverse of `r_b` on the first coordinate)."""
    d = np.asarray(distances, dtype=float)
    if np.any(d >= 1.0) or np.any(d <= 0.0):
        raise ValueError("distances must lie in (0, 1)")
    if np.any(np.diff(d) <= 0.0):
        raise ValueError("distances must be strictly ascending")
    core = 2.0 * alpha * math.log(x_norm) ** 2
    y = core / np.log(1.0 / d)
    out = np.diff(np.concatenate([[0.0], y]))
    return out


def vacancy_prob(alpha: float, caphat_value: float) -> float:
    """Probability that a compact set of the given capacity is untouched
    by the level-alpha soup."""
    if caphat_value < 0.0:
        raise ValueError("capacity must be nonnegative")
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    return math.exp(-math.pi * alpha * caphat_value)


def diff_logs(x, y) -> LogDiff:
    """Re-center ln|x| at ln|y|; the remainder obeys the 2|x-y|/|y| bound
    whenever |x-y| <= |y|/4."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ny = float(np.hypot(*y))
    nx = float(np.hypot(*x))
    if min(nx, ny) <= 0.0:
        raise ValueError("points must be away from the origin")
    lead = math.log(ny)
    return LogDiff(lead, math.log(nx) - lead,
                   2.0 * float(np.hypot(*(x - y))) / ny)
