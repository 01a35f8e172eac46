"""Signed symmetries of the state space and the relocating set of a multi-index.

A :class:`SignedSymmetry` acts on a lattice index by ``l -> A @ l + b`` and on
a component by a permutation. Finite point groups are materialized with
:func:`generate_group`; translation groups never are. Instead
:func:`relocators` enumerates only the translations that move one site of a
multi-index to the origin.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .lattice import Lattice, SiteIndex

MultiIndex = tuple[SiteIndex, ...]


class GroupError(ValueError):
    pass


def permutation_parity(perm: Sequence[int]) -> int:
    """+1 for even permutations of range(n), -1 for odd."""
    perm = list(perm)
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True)
class SignedPermutation:
    """Permutation of multi-index positions: ``new[k] = old[sigma[k]]``."""

    sigma: tuple[int, ...]

    @property
    def sign(self) -> int:
        return permutation_parity(self.sigma)

    def __call__(self, seq):
        return tuple(seq[j] for j in self.sigma)

    def inverse(self) -> "SignedPermutation":
        inv = [0] * len(self.sigma)
        for k, j in enumerate(self.sigma):
            inv[j] = k
        return SignedPermutation(tuple(inv))

    @classmethod
    def rotation(cls, n: int, shift: int) -> "SignedPermutation":
        return cls(tuple((k + shift) % n for k in range(n)))


def _as_matrix(a) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in a)


@dataclass(frozen=True)
class SignedSymmetry:
    matrix: tuple[tuple[int, ...], ...]
    shift: tuple[int, ...]
    sign: int = 1
    component_map: tuple[int, ...] | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "matrix", _as_matrix(self.matrix))
        object.__setattr__(self, "shift", tuple(int(x) for x in self.shift))
        if self.sign not in (1, -1):
            raise GroupError(f"sign must be +1 or -1, got {self.sign}")
        det = round(np.linalg.det(np.array(self.matrix, dtype=float)))
        if abs(det) != 1:
            raise GroupError(f"{self.name or 'map'}: matrix is not unimodular (det {det})")
        if self.component_map is not None:
            cm = tuple(int(a) for a in self.component_map)
            if sorted(cm) != list(range(len(cm))):
                raise GroupError("component_map must be a permutation")
            if cm == tuple(range(len(cm))):
                cm = None
            object.__setattr__(self, "component_map", cm)

    @classmethod
    def identity(cls, d: int) -> "SignedSymmetry":
        return cls(np.eye(d, dtype=int), (0,) * d, 1, None, "id")

    @classmethod
    def translation(cls, shift: Sequence[int]) -> "SignedSymmetry":
        d = len(shift)
        return cls(np.eye(d, dtype=int), tuple(shift), 1, None, f"t{tuple(shift)}")

    @property
    def dimension(self) -> int:
        return len(self.shift)

    @property
    def is_spatial(self) -> bool:
        return self.component_map is None

    def key(self):
        return (self.matrix, self.shift, self.component_map)

    def apply_l(self, l: Sequence[int], lattice: Lattice | None = None) -> tuple[int, ...]:
        out = tuple(
            sum(a * x for a, x in zip(row, l)) + b for row, b in zip(self.matrix, self.shift)
        )
        return lattice.wrap(out) if lattice is not None else out

    def apply_alpha(self, alpha: int) -> int:
        return alpha if self.component_map is None else self.component_map[alpha]

    def __call__(self, site: SiteIndex, lattice: Lattice | None = None) -> SiteIndex:
        return SiteIndex(self.apply_l(site.l, lattice), self.apply_alpha(site.alpha))

    def compose(self, other: "SignedSymmetry", lattice: Lattice | None = None) -> "SignedSymmetry":
        """``self o other`` (apply ``other`` first)."""
        a = np.array(self.matrix)
        m = a @ np.array(other.matrix)
        b = tuple(a @ np.array(other.shift) + np.array(self.shift))
        if lattice is not None:
            b = tuple(x % n if p else x for x, n, p in zip(b, lattice.extent, lattice.periodic))
        if self.component_map is None and other.component_map is None:
            cm = None
        else:
            n = len(self.component_map or other.component_map)
            first = other.component_map or tuple(range(n))
            second = self.component_map or tuple(range(n))
            cm = tuple(second[first[a_]] for a_ in range(n))
        return SignedSymmetry(m, b, self.sign * other.sign, cm)

    def inverse(self) -> "SignedSymmetry":
        a = np.array(self.matrix)
        inv = np.rint(np.linalg.inv(a)).astype(int)
        b = tuple(-(inv @ np.array(self.shift)))
        cm = None
        if self.component_map is not None:
            cm = [0] * len(self.component_map)
            for i, j in enumerate(self.component_map):
                cm[j] = i
            cm = tuple(cm)
        return SignedSymmetry(inv, b, self.sign, cm)

    def with_sign(self, sign: int) -> "SignedSymmetry":
        return SignedSymmetry(self.matrix, self.shift, sign, self.component_map, self.name)


@dataclass(frozen=True)
class SymmetryGroup:
    elements: tuple[SignedSymmetry, ...]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def dimension(self) -> int:
        return self.elements[0].dimension

    @property
    def is_spatial(self) -> bool:
        return all(g.is_spatial for g in self.elements)


def generate_group(
    generators: Iterable[SignedSymmetry],
    max_order: int = 1000,
    lattice: Lattice | None = None,
    dimension: int | None = None,
) -> SymmetryGroup:
    """Closure of ``generators`` under composition.

    Shifts are reduced modulo periodic extents when ``lattice`` is given.
    Raises :class:`GroupError` if the closure exceeds ``max_order`` or if the
    signs are not a homomorphism to Z_2.
    """
    gens = list(generators)
    if dimension is None:
        if gens:
            dimension = gens[0].dimension
        elif lattice is not None:
            dimension = lattice.dimension
        else:
            raise GroupError("cannot infer dimension of an empty generator list")
    ident = SignedSymmetry.identity(dimension)
    if any(g.component_map is not None for g in gens):
        m = len(next(g.component_map for g in gens if g.component_map is not None))
        ident = SignedSymmetry(ident.matrix, ident.shift, 1, tuple(range(m)), "id")
    found = {ident.key(): ident}
    frontier = [ident]
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = g.compose(x, lattice)
                k = y.key()
                if k in found:
                    if found[k].sign != y.sign:
                        raise GroupError("signs are not a homomorphism to Z_2")
                    continue
                found[k] = y
                new.append(y)
                if len(found) > max_order:
                    raise GroupError(f"group closure exceeds max_order={max_order}")
        frontier = new
    ordered = [ident] + [g for k, g in found.items() if k != ident.key()]
    return SymmetryGroup(tuple(ordered))


# --- presets -------------------------------------------------------------

def _gen(kind: str, name: str) -> SignedSymmetry:
    d = {"line1d": 1, "square2d": 2, "triangular2d": 2, "cubic3d": 3, "fcc3d": 3}[kind]
    zero = (0,) * d
    if name == "reflection":
        return SignedSymmetry(-np.eye(d, dtype=int), zero, 1, None, name)
    if kind == "square2d":
        table = {"rotation": [[0, -1], [1, 0]], "mirror": [[0, 1], [1, 0]]}
    elif kind == "triangular2d":
        # oblique basis e1 = (1, 0), e2 = (1/2, sqrt3/2); columns are images of e1, e2
        table = {
            "rotation": [[0, -1], [1, 1]],
            "rotation3": [[-1, -1], [1, 0]],
            "mirror": [[0, 1], [1, 0]],
        }
    elif kind in ("cubic3d", "fcc3d"):
        table = {
            "rotation": [[0, -1, 0], [1, 0, 0], [0, 0, 1]],
            "rotation3": [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
            "mirror": [[0, 1, 0], [1, 0, 0], [0, 0, 1]],
        }
    else:
        table = {}
    if name not in table:
        raise GroupError(f"no generator {name!r} on {kind}")
    return SignedSymmetry(table[name], zero, 1, None, name)


PRESETS = {
    "translations": {"*": []},
    "reflection": {"*": ["reflection"]},
    "c4": {"square2d": ["rotation"]},
    "d4": {"square2d": ["rotation", "mirror"]},
    "c3": {"triangular2d": ["rotation3"]},
    "d3": {"triangular2d": ["rotation3", "mirror"]},
    "c6": {"triangular2d": ["rotation"]},
    "d6": {"triangular2d": ["rotation", "mirror"]},
    "o": {"cubic3d": ["rotation", "rotation3"], "fcc3d": ["rotation", "rotation3"]},
    "oh": {"cubic3d": ["rotation", "rotation3", "reflection"],
           "fcc3d": ["rotation", "rotation3", "reflection"]},
    "full": {
        "line1d": ["reflection"],
        "square2d": ["rotation", "mirror"],
        "triangular2d": ["rotation", "mirror"],
        "cubic3d": ["rotation", "rotation3", "reflection"],
        "fcc3d": ["rotation", "rotation3", "reflection"],
    },
}


def preset_generators(preset: str, kind: str, signs: dict[str, int] | None = None) -> list[SignedSymmetry]:
    """Generators of a named point-group preset with per-generator signs.

    Generator names: ``reflection`` (l -> -l), ``rotation`` (smallest proper
    rotation of the lattice), ``rotation3`` (order-3 rotation), ``mirror``.
    Every sign defaults to +1; the caller supplies the parity of the operator.
    """
    if preset not in PRESETS:
        raise GroupError(f"unknown group preset {preset!r}")
    table = PRESETS[preset]
    names = table.get(kind, table.get("*"))
    if names is None:
        raise GroupError(f"preset {preset!r} not available on {kind}")
    signs = signs or {}
    unknown = set(signs) - set(names)
    if unknown:
        raise GroupError(f"sign override for generators not in preset: {sorted(unknown)}")
    return [_gen(kind, n).with_sign(signs.get(n, 1)) for n in names]


def point_group(preset: str, kind: str, signs: dict[str, int] | None = None) -> SymmetryGroup:
    d = {"line1d": 1, "square2d": 2, "triangular2d": 2, "cubic3d": 3, "fcc3d": 3}[kind]
    return generate_group(preset_generators(preset, kind, signs), dimension=d)


# --- action on multi-indices ----------------------------------------------

def act(g: SignedSymmetry, mi: MultiIndex, lattice: Lattice | None = None) -> MultiIndex:
    return tuple(g(s, lattice) for s in mi)


def act_perm(sp: SignedPermutation, mi: MultiIndex) -> MultiIndex:
    return sp(mi)


def multi_index(*sites, alphas: Sequence[int] | None = None) -> MultiIndex:
    """Build a MultiIndex from lattice tuples (or ints for 1D)."""
    out = []
    for k, s in enumerate(sites):
        l = (s,) if isinstance(s, (int, np.integer)) else tuple(s)
        out.append(SiteIndex(l, 0 if alphas is None else alphas[k]))
    return tuple(out)


def relocators(
    group: SymmetryGroup,
    mi: MultiIndex,
    translations: bool = True,
    lattice: Lattice | None = None,
) -> list[tuple[SignedSymmetry, SignedPermutation]]:
    """Pairs (g, sigma) with ``sigma(g(mi))[0]`` at the lattice origin.

    ``g`` ranges over the point group composed with every translation sending
    some site of ``g(mi)`` to the origin. ``sigma`` is the cyclic rotation that
    brings the first origin site to the front.
    """
    if mi[0].l != (0,) * len(mi[0].l):
        raise ValueError("multi-index must start at the lattice origin")
    n = len(mi)
    origin = (0,) * len(mi[0].l)
    out = []
    for r in group:
        image_l = [r.apply_l(s.l) for s in mi]
        if translations:
            shifts = []
            for l in image_l:
                b = tuple(-x for x in l)
                if b not in shifts:
                    shifts.append(b)
        else:
            shifts = [origin] if origin in image_l else []
        for b in shifts:
            g = SignedSymmetry.translation(b).compose(r, lattice)
            moved = [g.apply_l(s.l, lattice) for s in mi]
            zero = lattice.wrap(origin) if lattice is not None else origin
            first = moved.index(zero)
            out.append((g, SignedPermutation.rotation(n, first)))
    return out
