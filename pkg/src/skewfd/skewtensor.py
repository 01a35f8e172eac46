"""Sparse tensors over the state space M.

A :class:`SkewTensor` stores one coefficient per *set* of distinct sites,
keyed by the sorted multi-index; the value at any ordering follows from the
parity of the sort. Antisymmetry therefore holds by construction, and
entries with a repeated site cannot be stored. Construction arithmetic uses
:class:`fractions.Fraction`; floats only enter at evaluation time.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .lattice import Lattice, SiteIndex, as_values
from .symmetry import MultiIndex, SymmetryGroup, act, permutation_parity

Number = Fraction | float | int


def canonical(mi: MultiIndex) -> tuple[MultiIndex | None, int]:
    """Sorted multi-index and the parity of the sorting permutation.

    Returns ``(None, 0)`` when a site repeats (the antisymmetric part vanishes).
    """
    order = sorted(range(len(mi)), key=lambda k: mi[k])
    srt = tuple(mi[k] for k in order)
    for a, b in zip(srt, srt[1:]):
        if a == b:
            return None, 0
    return srt, permutation_parity(order)


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, np.integer))


def _exact_array(v: np.ndarray) -> bool:
    if v.dtype == object:
        return all(_is_exact(x) for x in v.flat)
    return np.issubdtype(v.dtype, np.integer)


@dataclass(frozen=True)
class Report:
    ok: bool
    violation: MultiIndex | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class GeneralTensor:
    """Real function on M^{rank} with finite support (no symmetry assumed)."""

    rank: int
    entries: dict[MultiIndex, Number] = field(default_factory=dict)
    lattice: Lattice | None = None
    m: int = 1

    def value(self, mi: MultiIndex) -> Number:
        return self.entries.get(tuple(mi), 0)

    def add(self, mi: MultiIndex, c: Number) -> None:
        mi = tuple(mi)
        v = self.entries.get(mi, 0) + c
        if v == 0:
            self.entries.pop(mi, None)
        else:
            self.entries[mi] = v

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class SkewTensor:
    """Completely antisymmetric tensor; ``entries`` keyed by sorted multi-index."""

    rank: int
    entries: dict[MultiIndex, Number] = field(default_factory=dict)
    lattice: Lattice | None = None
    m: int = 1
    scale: Number = 1
    _plan: dict = field(default=None, init=False, repr=False, compare=False)

    def value(self, mi: MultiIndex) -> Number:
        key, parity = canonical(tuple(mi))
        if key is None:
            return 0
        return parity * self.entries.get(key, 0)

    def add(self, mi: MultiIndex, c: Number) -> None:
        """Add ``c`` to the entry at ``mi`` (and, implicitly, to all its permutations)."""
        key, parity = canonical(tuple(mi))
        if key is None:
            if c != 0:
                raise ValueError(f"cannot store a nonzero entry with a repeated site: {mi}")
            return
        v = self.entries.get(key, 0) + parity * c
        if v == 0:
            self.entries.pop(key, None)
        else:
            self.entries[key] = v
        self._plan = None

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SkewTensor):
            return NotImplemented
        return (self.rank == other.rank and self.entries == other.entries
                and self.scale == other.scale)

    def scaled(self, c: Number) -> "SkewTensor":
        out = SkewTensor(self.rank, {k: c * v for k, v in self.entries.items() if c * v != 0},
                         self.lattice, self.m, self.scale)
        return out

    def astype(self, kind=float) -> "SkewTensor":
        return SkewTensor(self.rank, {k: kind(v) for k, v in self.entries.items()},
                          self.lattice, self.m, kind(self.scale))

    def full_entries(self) -> Iterable[tuple[MultiIndex, Number]]:
        """Every ordered multi-index with its value (rank! per stored entry)."""
        for key, c in self.entries.items():
            for perm in itertools.permutations(range(self.rank)):
                yield tuple(key[k] for k in perm), permutation_parity(perm) * c

    def to_dense(self) -> np.ndarray:
        """Dense matrix of a rank-2 tensor over flattened M."""
        if self.rank != 2:
            raise ValueError("to_dense is only provided for rank 2")
        lat = self._require_lattice()
        n = int(np.prod(lat.extent)) * self.m
        out = np.zeros((n, n))
        for (a, b), c in self.entries.items():
            i, j = _flat(lat, self.m, a), _flat(lat, self.m, b)
            out[i, j] += float(self.scale * c)
            out[j, i] -= float(self.scale * c)
        return out

    def _require_lattice(self) -> Lattice:
        if self.lattice is None:
            raise ValueError("tensor has no lattice attached")
        return self.lattice

    # --- json -------------------------------------------------------------

    def to_json(self) -> str:
        def frac(x):
            x = Fraction(x) if _is_exact(x) else Fraction(x).limit_denominator(10**12)
            return [x.numerator, x.denominator]

        return json.dumps({
            "rank": self.rank,
            "m": self.m,
            "lattice": self.lattice.to_dict() if self.lattice else None,
            "scale": frac(self.scale),
            "entries": [
                [[list(s.l) + [s.alpha] for s in key], *frac(c)]
                for key, c in sorted(self.entries.items())
            ],
        })

    @classmethod
    def from_json(cls, text: str) -> "SkewTensor":
        data = json.loads(text)
        lat = Lattice.from_dict(data["lattice"]) if data.get("lattice") else None
        out = cls(data["rank"], {}, lat, data.get("m", 1), Fraction(*data.get("scale", [1, 1])))
        for sites, num, den in data["entries"]:
            mi = tuple(SiteIndex(tuple(s[:-1]), s[-1]) for s in sites)
            out.add(mi, Fraction(num, den))
        return out


def _flat(lat: Lattice, m: int, s: SiteIndex) -> int:
    return int(np.ravel_multi_index(lat.wrap(s.l) + (s.alpha,), lat.extent + (m,)))


def delta_tensor(mi: MultiIndex, value: Number = 1, lattice: Lattice | None = None,
                 m: int = 1) -> GeneralTensor:
    t = GeneralTensor(len(mi), {}, lattice, m)
    t.add(mi, Fraction(value) if _is_exact(value) else value)
    return t


def coupled_delta(base_l: Sequence[tuple[int, ...]], coupling: np.ndarray,
                  lattice: Lattice | None = None) -> GeneralTensor:
    """Elementary tensor ``K[(l, alpha)] = T[alpha]`` for one spatial pattern ``l``."""
    coupling = np.asarray(coupling, dtype=object)
    m = coupling.shape[0] if coupling.ndim else 1
    rank = len(base_l)
    t = GeneralTensor(rank, {}, lattice, m)
    for alpha in itertools.product(range(m), repeat=rank):
        c = coupling[alpha] if coupling.ndim else coupling
        if c != 0:
            t.add(tuple(SiteIndex(tuple(l), a) for l, a in zip(base_l, alpha)), Fraction(c))
    return t


def symmetrize(
    t: GeneralTensor | SkewTensor,
    group: SymmetryGroup,
    lattice: Lattice,
    translations: bool = True,
    max_terms: int = 5_000_000,
) -> SkewTensor:
    """Sum of sgn(sigma) sgn(g) t[sigma(g(i))] over S_{rank} and G.

    ``G`` is the point group composed with every translation of the periodic
    ``lattice`` (when ``translations``). No normalization is applied.
    """
    if translations and not all(lattice.periodic):
        raise ValueError("translation symmetrization needs a fully periodic lattice")
    entries = t.full_entries() if isinstance(t, SkewTensor) else t.entries.items()
    entries = list(entries)
    shifts = lattice.sites() if translations else [(0,) * lattice.dimension]
    if len(entries) * len(group) * len(shifts) > max_terms:
        raise ValueError("orbit too large for symmetrize; raise max_terms or shrink lattice")
    out = SkewTensor(t.rank, {}, lattice, t.m)
    for mi, c in entries:
        for r in group:
            base = act(r, mi)
            for b in shifts:
                img = tuple(SiteIndex(lattice.wrap(tuple(x + y for x, y in zip(s.l, b))), s.alpha)
                            for s in base)
                key, parity = canonical(img)
                if key is not None:
                    out.add(key, r.sign * parity * c)
    return out


# --- checks ---------------------------------------------------------------

def is_skew(t: GeneralTensor | SkewTensor) -> Report:
    """Check antisymmetry under every transposition of index positions."""
    if isinstance(t, SkewTensor):
        for key in t.entries:
            if canonical(key)[0] is None:
                return Report(False, key, "repeated site in stored entry")
        return Report(True)
    for mi, c in t.entries.items():
        if len(set(mi)) < len(mi):
            return Report(False, mi, "nonzero entry with a repeated site")
        for a, b in itertools.combinations(range(len(mi)), 2):
            sw = list(mi)
            sw[a], sw[b] = sw[b], sw[a]
            if t.value(tuple(sw)) != -c:
                return Report(False, mi, f"entry changes by other than sign under swap ({a} {b})")
    return Report(True)


def is_g_invariant(t: SkewTensor, group: SymmetryGroup, lattice: Lattice | None = None,
                   translations: bool = True) -> Report:
    """Check ``t[g(i)] == sgn(g) t[i]`` for g in the point group (x translations)."""
    lattice = lattice or t.lattice
    shifts = lattice.sites() if translations else [(0,) * lattice.dimension]
    for key, c in t.entries.items():
        for r in group:
            base = act(r, key)
            for b in shifts:
                img = tuple(SiteIndex(lattice.wrap(tuple(x + y for x, y in zip(s.l, b))), s.alpha)
                            for s in base)
                if t.value(img) != r.sign * c:
                    return Report(False, key, f"fails under {r.name or r.matrix} shifted by {b}")
    return Report(True)


def bandwidth(t: GeneralTensor | SkewTensor, metric: str = "graph",
              lattice: Lattice | None = None) -> float:
    lattice = lattice or t.lattice
    best = 0
    for mi in t.entries:
        ls = [s.l for s in mi]
        for a, b in itertools.combinations(ls, 2):
            best = max(best, lattice.distance(a, b, metric))
    return best


# --- contraction ----------------------------------------------------------

def _plan(t: SkewTensor | GeneralTensor, lat: Lattice, m: int):
    full = list(t.full_entries()) if isinstance(t, SkewTensor) else list(t.entries.items())
    idx = np.array([[_flat(lat, m, s) for s in mi] for mi, _ in full], dtype=np.int64)
    idx = idx.reshape(len(full), t.rank)
    coefs = [c for _, c in full]
    return idx, coefs


def _get_plan(t, lat, m):
    if isinstance(t, SkewTensor):
        if t._plan is None or t._plan.get("key") != (lat, m):
            idx, coefs = _plan(t, lat, m)
            t._plan = {"key": (lat, m), "idx": idx, "coefs": coefs,
                       "fcoefs": np.array([float(c) for c in coefs])}
        return t._plan
    idx, coefs = _plan(t, lat, m)
    return {"idx": idx, "coefs": coefs, "fcoefs": np.array([float(c) for c in coefs])}


def contract(t: SkewTensor | GeneralTensor, grads: Sequence, state=None) -> np.ndarray:
    """``F[i0] = scale * sum K[i0, i1, .., ip] g1[i1] ... gp[ip]``.

    Exact (Fraction/int) inputs give an exact object array; anything else is
    evaluated in float64 with a fixed summation order.
    """
    if isinstance(t, ModulatedTensor):
        return contract(t.at(state), grads)
    lat = t.lattice
    if lat is None:
        raise ValueError("tensor has no lattice attached")
    if len(grads) != t.rank - 1:
        raise ValueError(f"rank-{t.rank} tensor needs {t.rank - 1} arguments, got {len(grads)}")
    m = t.m
    shape = lat.extent + (m,)
    vals = [as_values(g, lat) for g in grads]
    for v in vals:
        if v.shape != shape:
            raise ValueError(f"argument shape {v.shape} does not match {shape}")
    flat = [v.reshape(-1) for v in vals]
    plan = _get_plan(t, lat, m)
    idx = plan["idx"]
    scale = getattr(t, "scale", 1)
    exact = all(_exact_array(v) for v in vals) and all(_is_exact(c) for c in plan["coefs"]) \
        and _is_exact(scale)
    n = int(np.prod(shape))
    if exact:
        out = [Fraction(0)] * n
        for row, c in zip(idx, plan["coefs"]):
            term = c
            for k, f in enumerate(flat):
                term = term * f[row[k + 1]]
            out[row[0]] += term
        res = np.empty(n, dtype=object)
        res[:] = [scale * x for x in out]
        return res.reshape(shape)
    terms = plan["fcoefs"].copy()
    for k, f in enumerate(flat):
        terms = terms * np.asarray(f, dtype=float)[idx[:, k + 1]] if len(idx) else terms
    out = np.zeros(n)
    if len(idx):
        np.add.at(out, idx[:, 0], terms)
    return (float(scale) * out).reshape(shape)


def contract_terms_abs(t: SkewTensor | GeneralTensor, grads: Sequence) -> np.ndarray:
    """Per-site sum of |term| in the contraction; the roundoff yardstick."""
    lat, m = t.lattice, t.m
    vals = [np.asarray(as_values(g, lat), dtype=float).reshape(-1) for g in grads]
    plan = _get_plan(t, lat, m)
    idx = plan["idx"]
    terms = np.abs(plan["fcoefs"])
    for k, f in enumerate(vals):
        terms = terms * np.abs(f[idx[:, k + 1]])
    out = np.zeros(int(np.prod(lat.extent)) * m)
    np.add.at(out, idx[:, 0], terms)
    return abs(float(getattr(t, "scale", 1))) * out.reshape(lat.extent + (m,))


def contract_partial(t: SkewTensor, grad) -> SkewTensor | np.ndarray:
    """Contract the last slot against ``grad``; the result has ``grad`` as a Casimir."""
    if t.rank < 2:
        raise ValueError("contract_partial needs rank >= 2")
    if t.rank == 2:
        return contract(t, [grad])
    lat = t.lattice
    g = as_values(grad, lat)
    exact = _exact_array(g)
    out = SkewTensor(t.rank - 1, {}, lat, t.m, t.scale)
    p = t.rank - 1
    for key, c in t.entries.items():
        for q in range(t.rank):
            rest = key[:q] + key[q + 1:]
            val = g[lat.wrap(key[q].l) + (key[q].alpha,)]
            if not exact:
                val = float(val)
            if val == 0:
                continue
            sign = -1 if (p - q) % 2 else 1
            out.add(rest, sign * c * val)
    return out


# --- state-dependent (modulated) rank-2 tensors ----------------------------

class AsymmetricModulationError(ValueError):
    pass


@dataclass
class SymmetricModulation:
    """``s_ij = q(x_i, x_j, u_i, u_j)``, required symmetric under swapping the pairs."""

    q: Callable
    name: str = ""

    def check(self, d: int = 1, trials: int = 8, seed: int = 0, positive: bool = False) -> None:
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            xi, xj = rng.normal(size=d), rng.normal(size=d)
            ui, uj = rng.uniform(0.1, 2.0, size=2) if positive else rng.normal(size=2)
            a, b = self.q(xi, xj, ui, uj), self.q(xj, xi, uj, ui)
            if not np.isclose(a, b, rtol=1e-12, atol=1e-14):
                raise AsymmetricModulationError(
                    f"modulation {self.name!r} is not symmetric: {a} != {b}")


@dataclass
class ModulatedTensor:
    """Rank-2 skew tensor with entries scaled by a symmetric state-dependent factor."""

    base: SkewTensor
    modulation: SymmetricModulation

    @property
    def rank(self) -> int:
        return 2

    @property
    def lattice(self) -> Lattice:
        return self.base.lattice

    @property
    def m(self) -> int:
        return self.base.m

    def at(self, state) -> SkewTensor:
        lat = self.base.lattice
        u = np.asarray(as_values(state, lat), dtype=float)
        out = SkewTensor(2, {}, lat, self.base.m, float(self.base.scale))
        for (a, b), c in self.base.entries.items():
            xi = lat.coords(a.l)
            disp = min(lat._min_image_candidates(a.l, b.l),
                       key=lambda d: float(np.linalg.norm(lat.offset_coords(d))))
            xj = xi + lat.offset_coords(disp)
            s = self.modulation.q(xi, xj, u[lat.wrap(a.l) + (a.alpha,)], u[lat.wrap(b.l) + (b.alpha,)])
            if s != 0:
                out.entries[(a, b)] = float(c) * float(s)
        return out


def modulate(t: SkewTensor, mod: SymmetricModulation, positive: bool = False) -> ModulatedTensor:
    if t.rank != 2:
        raise ValueError("modulation is defined for rank-2 tensors only")
    mod.check(d=t.lattice.dimension if t.lattice else 1, positive=positive)
    return ModulatedTensor(t, mod)


def divergence_residual(t: ModulatedTensor | SkewTensor, state, delta: float | None = None) -> float:
    """max_j |sum_i dK_ij/du_i| by central differences in the state."""
    if isinstance(t, SkewTensor):
        return 0.0
    lat = t.lattice
    u = np.asarray(as_values(state, lat), dtype=float)
    flat = u.reshape(-1)
    if delta is None:
        delta = max(1e-6, 1e-6 * float(np.max(np.abs(flat))))
    n = flat.size
    div = np.zeros(n)
    for i in range(n):
        up, dn = flat.copy(), flat.copy()
        up[i] += delta
        dn[i] -= delta
        kp = t.at(up.reshape(u.shape)).to_dense()
        km = t.at(dn.reshape(u.shape)).to_dense()
        div += (kp[i, :] - km[i, :]) / (2 * delta)
    return float(np.max(np.abs(div)))


# --- named modulations ----------------------------------------------------

def mean_modulation() -> SymmetricModulation:
    """s_ij = (u_i + u_j) / 2: discretizes u d/dx + d/dx u."""
    return SymmetricModulation(lambda xi, xj, ui, uj: 0.5 * (ui + uj), "mean")


def geometric_modulation() -> SymmetricModulation:
    """s_ij = sqrt(u_i u_j), for positive states."""
    return SymmetricModulation(lambda xi, xj, ui, uj: float(np.sqrt(ui * uj)), "geometric")


def upwind_left_modulation() -> SymmetricModulation:
    """s_ij = 2 u at the left point of the pair; applied to the central tensor
    this is the first-order operator with rows (-u_{i-1}, 0, u_i) / h."""
    def q(xi, xj, ui, uj):
        return 2.0 * (ui if float(np.sum(xj - xi)) > 0 else uj)
    return SymmetricModulation(q, "left")
