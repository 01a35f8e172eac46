"""Structured grids, site indices and grid functions.

Lattice indices are integer tuples. Physical coordinates are ``h * B @ l``
where ``B`` is the lattice basis; the triangular lattice uses the oblique
basis (1, 0), (1/2, sqrt(3)/2). Component indices are 0-based internally
(``alpha in range(m)``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

KINDS = ("line1d", "square2d", "triangular2d", "cubic3d", "fcc3d")

_DIMENSION = {"line1d": 1, "square2d": 2, "triangular2d": 2, "cubic3d": 3, "fcc3d": 3}

_BASIS = {
    "line1d": np.array([[1.0]]),
    "square2d": np.eye(2),
    "triangular2d": np.array([[1.0, 0.5], [0.0, math.sqrt(3.0) / 2.0]]),
    "cubic3d": np.eye(3),
    "fcc3d": np.eye(3),
}


def _unit_vectors(d: int) -> list[tuple[int, ...]]:
    return [tuple(int(i == k) for i in range(d)) for k in range(d)]


def neighbor_offsets(kind: str) -> list[tuple[int, ...]]:
    """Nearest-neighbour offsets defining the graph metric of each lattice."""
    if kind in ("line1d", "square2d", "cubic3d"):
        d = _DIMENSION[kind]
        out = []
        for e in _unit_vectors(d):
            out.append(e)
            out.append(tuple(-x for x in e))
        return out
    if kind == "triangular2d":
        return [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)]
    if kind == "fcc3d":
        out = []
        for a, b in itertools.combinations(range(3), 2):
            for sa, sb in itertools.product((1, -1), repeat=2):
                v = [0, 0, 0]
                v[a], v[b] = sa, sb
                out.append(tuple(v))
        return out
    raise ValueError(f"unknown lattice kind {kind!r}")


def _graph_norm(kind: str, diff: Sequence[int]) -> int:
    """Graph distance of a lattice displacement on the infinite lattice."""
    if kind in ("line1d", "square2d", "cubic3d"):
        return sum(abs(x) for x in diff)
    if kind == "triangular2d":
        a, b = diff
        if a * b >= 0:
            return abs(a) + abs(b)
        return max(abs(a), abs(b))
    if kind == "fcc3d":
        a = [abs(x) for x in diff]
        return max(max(a), sum(a) // 2)
    raise ValueError(f"unknown lattice kind {kind!r}")


class SiteIndex(NamedTuple):
    """A point of the state space M = L x {0..m-1}."""

    l: tuple[int, ...]
    alpha: int = 0


@dataclass(frozen=True)
class Lattice:
    kind: str
    extent: tuple[int, ...]
    periodic: tuple[bool, ...] | None = None
    h: float = 1.0
    dimension: int = field(init=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown lattice kind {self.kind!r}; expected one of {KINDS}")
        d = _DIMENSION[self.kind]
        object.__setattr__(self, "dimension", d)
        extent = tuple(int(n) for n in self.extent)
        if len(extent) == 1 and d > 1:
            extent = extent * d
        if len(extent) != d or any(n < 1 for n in extent):
            raise ValueError(f"extent {self.extent} invalid for {self.kind}")
        object.__setattr__(self, "extent", extent)
        periodic = self.periodic
        if periodic is None:
            periodic = (True,) * d
        elif isinstance(periodic, bool):
            periodic = (periodic,) * d
        periodic = tuple(bool(p) for p in periodic)
        if len(periodic) != d:
            raise ValueError("periodic flags must match the dimension")
        object.__setattr__(self, "periodic", periodic)
        if not self.h > 0:
            raise ValueError("spacing h must be positive")
        if self.kind == "fcc3d":
            for n, p in zip(extent, periodic):
                if p and n % 2:
                    raise ValueError("periodic fcc3d needs even extents")

    @property
    def basis(self) -> np.ndarray:
        return _BASIS[self.kind]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.extent

    def with_h(self, h: float) -> "Lattice":
        return Lattice(self.kind, self.extent, self.periodic, h)

    def contains(self, l: Sequence[int]) -> bool:
        if len(l) != self.dimension:
            return False
        if self.kind == "fcc3d" and sum(l) % 2:
            return False
        return all(p or 0 <= x < n for x, n, p in zip(l, self.extent, self.periodic))

    def wrap(self, l: Sequence[int]) -> tuple[int, ...]:
        """Reduce periodic coordinates modulo the extent; validate the rest."""
        if len(l) != self.dimension:
            raise IndexError(f"index {tuple(l)} has wrong length for {self.kind}")
        out = []
        for x, n, p in zip(l, self.extent, self.periodic):
            x = int(x)
            if p:
                x %= n
            elif not 0 <= x < n:
                raise IndexError(f"index {tuple(l)} outside non-periodic lattice")
            out.append(x)
        if self.kind == "fcc3d" and sum(out) % 2:
            raise IndexError(f"{tuple(l)} is not an fcc site (odd coordinate sum)")
        return tuple(out)

    def sites(self) -> list[tuple[int, ...]]:
        """All lattice indices, in C order."""
        allsites = itertools.product(*(range(n) for n in self.extent))
        if self.kind == "fcc3d":
            return [s for s in allsites if sum(s) % 2 == 0]
        return list(allsites)

    def state_sites(self, m: int = 1) -> list[SiteIndex]:
        return [SiteIndex(l, a) for l in self.sites() for a in range(m)]

    def offset_coords(self, offset: Sequence[int]) -> np.ndarray:
        """Physical displacement of a lattice offset (no wrapping)."""
        return self.h * (self.basis @ np.asarray(offset, dtype=float))

    def coords(self, l: Sequence[int]) -> np.ndarray:
        return self.offset_coords(self.wrap(l))

    def _min_image_candidates(self, l1, l2):
        a, b = self.wrap(l1), self.wrap(l2)
        options = []
        for x, y, n, p in zip(a, b, self.extent, self.periodic):
            d = y - x
            options.append({d % n, d % n - n} if p else {d})
        return itertools.product(*options)

    def graph_distance(self, l1, l2) -> int:
        return min(_graph_norm(self.kind, d) for d in self._min_image_candidates(l1, l2))

    def euclidean_distance(self, l1, l2) -> float:
        return min(
            float(np.linalg.norm(self.offset_coords(d)))
            for d in self._min_image_candidates(l1, l2)
        )

    def distance(self, l1, l2, metric: str = "graph") -> float:
        if metric == "graph":
            return self.graph_distance(l1, l2)
        if metric == "euclidean":
            return self.euclidean_distance(l1, l2)
        raise ValueError(f"unknown metric {metric!r}")

    def sample(self, fn, m: int = 1) -> np.ndarray:
        """Grid function values ``fn(x)`` at every site, shape ``extent + (m,)``.

        ``fn`` maps a coordinate array of shape (d,) to a scalar (m == 1) or an
        m-vector. Non-sites of fcc3d stay zero.
        """
        out = np.zeros(self.extent + (m,))
        for l in self.sites():
            out[l] = fn(self.offset_coords(l))
        return out

    def zeros(self, m: int = 1, dtype=float) -> np.ndarray:
        return np.zeros(self.extent + (m,), dtype=dtype)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "extent": list(self.extent),
            "periodic": list(self.periodic),
            "h": self.h,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Lattice":
        return cls(data["kind"], tuple(data["extent"]), tuple(data.get("periodic", ())) or None,
                   float(data.get("h", 1.0)))


@dataclass
class GridFunction:
    """Real values on M; ``values`` has shape ``lattice.extent + (m,)``."""

    lattice: Lattice
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape == self.lattice.extent:
            v = v[..., None]
        if v.shape[:-1] != self.lattice.extent:
            raise ValueError(f"values of shape {v.shape} do not fit lattice {self.lattice.extent}")
        self.values = v

    @property
    def m(self) -> int:
        return self.values.shape[-1]

    def __getitem__(self, site: SiteIndex):
        return self.values[self.lattice.wrap(site.l) + (site.alpha,)]


def as_values(g, lattice: Lattice | None = None) -> np.ndarray:
    """Accept a GridFunction or a raw array; return the trailing-m array."""
    if isinstance(g, GridFunction):
        return g.values
    v = np.asarray(g)
    if lattice is not None and v.shape == lattice.extent:
        v = v[..., None]
    return v
