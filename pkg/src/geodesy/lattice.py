"""Edge-weight environments on finite boxes of the d-dimensional lattice.

Weights are produced by counter-based hashing: each edge's weight is a pure
function of (seed, absolute edge coordinates), so overlapping boxes agree
edge-for-edge and lattice shifts are exact, not resampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import DomainError

_U64 = np.uint64
_MASK64 = (1 << 64) - 1

# splitmix64 multipliers
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, vectorized over uint64 arrays."""
    x = (x ^ (x >> _U64(30))) * _U64(_M1)
    x = (x ^ (x >> _U64(27))) * _U64(_M2)
    return x ^ (x >> _U64(31))


def _hash_edges(seed: int, coords: Iterable[np.ndarray], axis: int) -> np.ndarray:
    """Hash absolute edge coordinates to uniforms in the open interval (0, 1).

    ``coords`` holds one int64 array per dimension (the lesser endpoint of
    each edge); ``axis`` is the edge direction. All arrays broadcast together.
    """
    h = _mix64(_U64(seed & _MASK64) ^ _U64(_GOLDEN))
    for c in coords:
        h = _mix64(h ^ c.astype(np.int64).view(np.uint64))
    h = _mix64(h ^ _U64((axis + 1) * _GOLDEN & _MASK64))
    # 53-bit mantissa, offset by half an ulp so u is strictly inside (0, 1)
    return ((h >> _U64(11)).astype(np.float64) + 0.5) * 2.0**-53


@dataclass(frozen=True)
class Distribution:
    """Continuous edge-weight law on [0, inf), sampled by inverse CDF."""

    kind: str
    a: float = 0.0
    b: float = 1.0

    _KINDS = ("exponential", "uniform", "shifted_exponential")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "exponential" and not self.a > 0:
            raise ValueError("exponential rate must be > 0")
        if self.kind == "uniform":
            if not (self.a >= 0 and self.a < self.b):
                raise ValueError("uniform requires 0 <= a < b")
        if self.kind == "shifted_exponential":
            if self.a < 0:
                raise ValueError("shift must be >= 0")
            if not self.b > 0:
                raise ValueError("rate must be > 0")

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "Distribution":
        return cls("exponential", a=float(rate))

    @classmethod
    def uniform(cls, a: float, b: float) -> "Distribution":
        return cls("uniform", a=float(a), b=float(b))

    @classmethod
    def shifted_exponential(cls, shift: float, rate: float = 1.0) -> "Distribution":
        return cls("shifted_exponential", a=float(shift), b=float(rate))

    def inv_cdf(self, u: np.ndarray) -> np.ndarray:
        if self.kind == "exponential":
            return -np.log1p(-u) / self.a
        if self.kind == "uniform":
            return self.a + (self.b - self.a) * u
        return self.a - np.log1p(-u) / self.b

    def cdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "exponential":
            return np.where(x < 0, 0.0, -np.expm1(-self.a * x))
        if self.kind == "uniform":
            return np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)
        return np.where(x < self.a, 0.0, -np.expm1(-self.b * (x - self.a)))

    def mean(self) -> float:
        if self.kind == "exponential":
            return 1.0 / self.a
        if self.kind == "uniform":
            return 0.5 * (self.a + self.b)
        return self.a + 1.0 / self.b

    def to_config(self) -> dict:
        if self.kind == "exponential":
            return {"kind": "exponential", "rate": self.a}
        if self.kind == "uniform":
            return {"kind": "uniform", "a": self.a, "b": self.b}
        return {"kind": "shifted_exponential", "shift": self.a, "rate": self.b}

    @classmethod
    def from_config(cls, cfg: dict) -> "Distribution":
        kind = cfg.get("kind")
        if kind == "exponential":
            return cls.exponential(cfg["rate"])
        if kind == "uniform":
            return cls.uniform(cfg["a"], cfg["b"])
        if kind == "shifted_exponential":
            return cls.shifted_exponential(cfg["shift"], cfg["rate"])
        raise ValueError(f"unknown distribution kind {kind!r}")


@dataclass(frozen=True)
class LatticeBox:
    """Axis-aligned box of lattice vertices, lo[i] <= v[i] <= hi[i]."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(int(c) for c in self.lo)
        hi = tuple(int(c) for c in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi):
            raise ValueError("lo and hi must have equal length")
        if len(lo) < 2:
            raise ValueError("dimension must be >= 2")
        if any(l > h for l, h in zip(lo, hi)):
            raise ValueError("box requires lo[i] <= hi[i]")
        if self.n_vertices > 2**62:
            raise ValueError("box too large to address")

    @classmethod
    def cube(cls, dim: int, radius: int) -> "LatticeBox":
        """The centered box [-radius, radius]^dim."""
        return cls((-radius,) * dim, (radius,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    @property
    def n_vertices(self) -> int:
        return math.prod(self.shape)

    def contains(self, v) -> bool:
        return len(v) == self.dim and all(
            l <= c <= h for c, l, h in zip(v, self.lo, self.hi)
        )

    def index(self, v) -> int:
        """Flat C-order index of a vertex."""
        if not self.contains(v):
            raise DomainError(f"vertex {tuple(v)} outside box {self.lo}..{self.hi}")
        idx = 0
        for c, l, n in zip(v, self.lo, self.shape):
            idx = idx * n + (c - l)
        return idx

    def vertex(self, idx: int) -> tuple:
        out = []
        for n in reversed(self.shape):
            out.append(idx % n)
            idx //= n
        return tuple(o + l for o, l in zip(reversed(out), self.lo))

    def on_boundary(self, v) -> bool:
        return any(c == l or c == h for c, l, h in zip(v, self.lo, self.hi))

    def coordinate_grids(self):
        """Per-axis int64 coordinate arrays of shape ``self.shape``."""
        axes = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(self.lo, self.hi)]
        return np.meshgrid(*axes, indexing="ij")

    def translate(self, z) -> "LatticeBox":
        return LatticeBox(
            tuple(l + int(c) for l, c in zip(self.lo, z)),
            tuple(h + int(c) for h, c in zip(self.hi, z)),
        )


@dataclass(frozen=True)
class EdgeId:
    """Canonical name of the undirected edge {base, base + e_axis}.

    ``base`` is the lexicographically lesser endpoint, which for a
    nearest-neighbor edge is the endpoint with the smaller coordinate
    along ``axis``.
    """

    base: tuple
    axis: int

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(int(c) for c in self.base))
        if not 0 <= self.axis < len(self.base):
            raise ValueError("axis out of range")

    @classmethod
    def between(cls, u, v) -> "EdgeId":
        """EdgeId of the edge joining adjacent vertices u and v."""
        diffs = [(i, b - a) for i, (a, b) in enumerate(zip(u, v)) if a != b]
        if len(diffs) != 1 or abs(diffs[0][1]) != 1:
            raise ValueError(f"{tuple(u)} and {tuple(v)} are not adjacent")
        axis, d = diffs[0]
        return cls(tuple(u) if d == 1 else tuple(v), axis)

    @property
    def head(self) -> tuple:
        return tuple(
            c + 1 if i == self.axis else c for i, c in enumerate(self.base)
        )

    def endpoints(self):
        return self.base, self.head

    def sort_key(self):
        return (self.base, self.axis)


class WeightField:
    """Deterministic i.i.d.-style positive edge weights on a box.

    Lazily evaluated: nothing is materialized until an edge or an axis
    array is queried. The optional integer ``offset`` implements exact
    lattice shifts: the field's weight at edge e is the base hash
    evaluated at e + offset.
    """

    def __init__(self, seed: int, dist: Distribution, box: LatticeBox, offset=None):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed
        self.dist = dist
        self.box = box
        self.offset = tuple(int(c) for c in (offset or (0,) * box.dim))
        if len(self.offset) != box.dim:
            raise ValueError("offset dimension mismatch")
        self._axis_cache: dict[int, np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.box.dim

    def fingerprint(self) -> tuple:
        """Identity of the field; equal fingerprints produce equal weights."""
        return (
            "hashed",
            self.seed,
            self.dist.kind,
            self.dist.a,
            self.dist.b,
            self.box.lo,
            self.box.hi,
            self.offset,
        )

    def edge_weight(self, edge: EdgeId) -> float:
        base, head = edge.endpoints()
        if not (self.box.contains(base) and self.box.contains(head)):
            raise DomainError(f"edge {edge} outside box {self.box.lo}..{self.box.hi}")
        coords = [
            np.array([c + o], dtype=np.int64) for c, o in zip(base, self.offset)
        ]
        u = _hash_edges(self.seed, coords, edge.axis)
        return float(self.dist.inv_cdf(u)[0])

    def axis_weight_array(self, axis: int) -> np.ndarray:
        """Weights of all box edges along ``axis``.

        Shape is the box shape with (len - 1) along ``axis``; entry at
        grid position p is the weight of {p, p + e_axis}.
        """
        cached = self._axis_cache.get(axis)
        if cached is not None:
            return cached
        grids = self.box.coordinate_grids()
        sl = tuple(
            slice(0, -1) if i == axis else slice(None) for i in range(self.dim)
        )
        coords = [g[sl] + o for g, o in zip(grids, self.offset)]
        u = _hash_edges(self.seed, coords, axis)
        w = self.dist.inv_cdf(u)
        self._axis_cache[axis] = w
        return w

    def shifted(self, z) -> "WeightField":
        """The field theta_z: weight'({x, y}) = weight({x+z, y+z}) exactly."""
        z = tuple(int(c) for c in z)
        if len(z) != self.dim:
            raise ValueError("shift vector dimension mismatch")
        return WeightField(
            self.seed,
            self.dist,
            self.box.translate([-c for c in z]),
            offset=tuple(o + c for o, c in zip(self.offset, z)),
        )


class FixtureField:
    """Explicit per-edge weights, for hand-built oracle instances."""

    def __init__(self, box: LatticeBox, weights: dict, default: Optional[float] = None):
        self.box = box
        self.default = default
        self.weights = {}
        for (base, axis), w in weights.items():
            e = EdgeId(tuple(base), axis)
            if not (box.contains(e.base) and box.contains(e.head)):
                raise DomainError(f"fixture edge {e} outside box")
            if not w > 0:
                raise ValueError("fixture weights must be > 0")
            self.weights[(e.base, e.axis)] = float(w)
        if default is not None and not default > 0:
            raise ValueError("default weight must be > 0")

    @property
    def dim(self) -> int:
        return self.box.dim

    def fingerprint(self) -> tuple:
        return ("fixture", self.box.lo, self.box.hi, tuple(sorted(self.weights.items())), self.default)

    def edge_weight(self, edge: EdgeId) -> float:
        base, head = edge.endpoints()
        if not (self.box.contains(base) and self.box.contains(head)):
            raise DomainError(f"edge {edge} outside box")
        w = self.weights.get((edge.base, edge.axis), self.default)
        if w is None:
            raise DomainError(f"fixture has no weight for edge {edge}")
        return w

    def axis_weight_array(self, axis: int) -> np.ndarray:
        shape = tuple(
            n - 1 if i == axis else n for i, n in enumerate(self.box.shape)
        )
        if self.default is not None:
            out = np.full(shape, self.default, dtype=np.float64)
        else:
            out = np.full(shape, np.nan, dtype=np.float64)
        for (base, ax), w in self.weights.items():
            if ax != axis:
                continue
            pos = tuple(c - l for c, l in zip(base, self.box.lo))
            out[pos] = w
        if np.isnan(out).any():
            raise DomainError("fixture is missing edge weights and has no default")
        return out

    @classmethod
    def from_json_dict(cls, doc: dict) -> "FixtureField":
        box = LatticeBox(tuple(doc["box"]["lo"]), tuple(doc["box"]["hi"]))
        weights = {
            (tuple(e["base"]), int(e["axis"])): float(e["weight"])
            for e in doc["edges"]
        }
        return cls(box, weights, default=doc.get("default"))


def make_environment(seed: int, dist: Distribution, box: LatticeBox) -> WeightField:
    """Build a lazily-evaluated weight field on ``box``."""
    return WeightField(seed, dist, box)


def sample_weight(env, edge: EdgeId) -> float:
    """Weight of one edge; strictly positive and repeatable."""
    return env.edge_weight(edge)


def shift_environment(env: WeightField, z) -> WeightField:
    """Apply the lattice shift by integer vector z to the environment."""
    return env.shifted(z)
