"""Deterministic random streams and the two exact building blocks.

Every stochastic routine in this package draws from an :class:`RngStream`,
which wraps a counter-based Philox generator keyed by ``(seed, stream_id)``.
The draw sequence is a pure function of that pair, so replicas can run in any
order (or on any number of workers) without changing results.

Gaussian variates use the Box-Muller transform (rejection-free: every normal
consumes exactly one uniform), so the ``counter`` field advances by a fixed,
predictable amount per draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1
# Epsilon nudges keeping transformed uniforms strictly inside (0, 1).
_U_LO = 2.0**-54
_U_SCALE = 1.0 - 2.0**-53


def _splitmix64(x: int) -> int:
    """One round of splitmix64; used to derive child stream keys."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix_key(*parts: int) -> int:
    """Collapse integers into a single well-mixed 64-bit key."""
    acc = 0x243F6A8885A308D3
    for p in parts:
        acc = _splitmix64(acc ^ (p & _MASK64))
    return acc


def box_muller(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Map two uniform arrays in [0, 1) to 2*len standard normals."""
    r = np.sqrt(-2.0 * np.log(1.0 - u1))
    th = (2.0 * np.pi) * u2
    out = np.empty(2 * u1.size)
    out[0::2] = r * np.cos(th)
    out[1::2] = r * np.sin(th)
    return out


@dataclass
class RngStream:
    """Counter-based stream; output is a pure function of (seed, stream_id).

    ``counter`` records the number of uniforms consumed so far, which is also
    the number of variates handed out (one uniform per normal/exponential).
    """

    seed: int
    stream_id: int = 0
    counter: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64],
                       dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))
        if self.counter:
            self._gen.random(self.counter)  # replay to the recorded position

    def uniforms(self, n: int) -> np.ndarray:
        """n uniforms in [0, 1)."""
        self.counter += n
        return self._gen.random(n)

    def open_uniforms(self, n: int) -> np.ndarray:
        """n uniforms in the open interval (0, 1)."""
        return self.uniforms(n) * _U_SCALE + _U_LO

    def normals(self, n: int) -> np.ndarray:
        """n standard normals via Box-Muller (one uniform each)."""
        m = (n + 1) // 2
        u = self.uniforms(2 * m)
        out = box_muller(u[:m], u[m:])
        return out[:n]

    def exponentials(self, n: int) -> np.ndarray:
        """n Exponential(1) variates via inversion of the survival function."""
        return -np.log(1.0 - self.uniforms(n))

    def substream(self, *tags: int) -> "RngStream":
        """Derived stream for a nested task; independent for distinct tags."""
        return RngStream(mix_key(self.seed, 0x5B, *tags),
                         mix_key(self.stream_id, 0xA7, *tags))


@dataclass
class Bes3State:
    """Norm process of a 3-d Brownian motion, tracked through its 3-d driver.

    ``position3`` holds the driving point; the Bessel(3) value is its norm,
    which is exact in law at every grid time (no drift discretization).
    """

    position3: np.ndarray
    time: float = 0.0

    @property
    def value(self) -> float:
        return float(np.linalg.norm(self.position3))

    @classmethod
    def from_value(cls, z: float, time: float = 0.0) -> "Bes3State":
        if z < 0.0:
            raise ValueError("Bessel(3) value must be nonnegative")
        return cls(position3=np.array([0.0, 0.0, z]), time=time)


def draw_exponential(stream: RngStream) -> float:
    """Single Exponential(1) draw."""
    return float(stream.exponentials(1)[0])


def step_bes3(state: Bes3State, dt: float, stream: RngStream) -> Bes3State:
    """Advance the Bessel(3) state by dt using an exact 3-d Gaussian step."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    disp = stream.normals(3) * math.sqrt(dt)
    return Bes3State(position3=state.position3 + disp, time=state.time + dt)


@dataclass
class BridgeSegment:
    """Planar path segment conditioned on its endpoints over ``duration``."""

    start: np.ndarray
    end: np.ndarray
    duration: float


def refine_bridge(segment: BridgeSegment,
                  stream: RngStream) -> tuple[BridgeSegment, BridgeSegment]:
    """Split a segment at its bridge midpoint.

    The midpoint has mean (start+end)/2 and variance duration/4 per
    coordinate; the two children carry duration/2 each, so the recursion is
    consistent with the planar Brownian bridge at every depth.
    """
    if segment.duration <= 0.0:
        raise ValueError("duration must be positive")
    mid = 0.5 * (np.asarray(segment.start) + np.asarray(segment.end))
    mid = mid + stream.normals(2) * math.sqrt(segment.duration / 4.0)
    half = segment.duration / 2.0
    return (BridgeSegment(np.asarray(segment.start), mid, half),
            BridgeSegment(mid, np.asarray(segment.end), half))


def node_normals(key: int, n: int = 2) -> np.ndarray:
    """Deterministic normals tied to a tree node key, not to visit order.

    Query-time bridge refinement must give the same midpoint for a given
    (segment, node) pair no matter which query reaches it first, so the
    draw is derived from the key alone.
    """
    out = np.empty(n)
    for i in range(0, n, 2):
        x = _splitmix64(key + i)
        y = _splitmix64(x ^ 0xD1B54A32D192ED03)
        u1 = ((x >> 11) + 0.5) * 2.0**-53
        u2 = ((y >> 11) + 0.5) * 2.0**-53
        r = math.sqrt(-2.0 * math.log(u1))
        out[i] = r * math.cos(2.0 * math.pi * u2)
        if i + 1 < n:
            out[i + 1] = r * math.sin(2.0 * math.pi * u2)
    return out


def node_normals_vec(keys: np.ndarray, n: int = 2) -> np.ndarray:
    """Vectorized :func:`node_normals`: shape (len(keys), n)."""
    keys = np.asarray(keys, dtype=np.uint64)
    out = np.empty((keys.size, n))
    for i in range(0, n, 2):
        x = _splitmix64_vec(keys + np.uint64(i))
        y = _splitmix64_vec(x ^ np.uint64(0xD1B54A32D192ED03))
        u1 = ((x >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
        u2 = ((y >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
        r = np.sqrt(-2.0 * np.log(u1))
        out[:, i] = r * np.cos(2.0 * np.pi * u2)
        if i + 1 < n:
            out[:, i + 1] = r * np.sin(2.0 * np.pi * u2)
    return out


def _splitmix64_vec(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        x = x + np.uint64(0x9E3779B97F4A7C15)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def mix_key_vec(base: int, parts: np.ndarray) -> np.ndarray:
    """Vectorized key derivation for per-segment refinement streams."""
    acc = np.full(parts.shape, base & _MASK64, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _splitmix64_vec(acc ^ parts.astype(np.uint64))
