"""Symmetrized difference stencils in arrow form.

A stencil is the vector field of a symmetrized elementary tensor, read off
at the origin. Each :class:`Arrow` stands for one p x p determinant of the
argument values at its offsets, times a signed integer weight and (for m > 1
components) a relabelled copy of the coupling tensor ``T``::

    F[alpha0] = sum_arrows  sign * weight * sum_{gamma_1..gamma_p}
                T[label(alpha0, gamma)] * det( v^j at (o_k, gamma_k) )

Arrows come from :func:`~skewfd.symmetry.relocators`; identical arrows are
merged.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .lattice import Lattice, SiteIndex, as_values
from .skewtensor import GeneralTensor, SkewTensor, canonical
from .symmetry import (
    SignedSymmetry,
    SymmetryGroup,
    generate_group,
    multi_index,
    permutation_parity,
    point_group,
    relocators,
)

LETTERS = "abcdefghijklmnopqrstuvwxyz"


class CouplingSymmetryError(ValueError):
    pass


class EmptyStencilWarning(UserWarning):
    pass


class NotSkewError(ValueError):
    pass


@dataclass(frozen=True)
class Arrow:
    """One determinant term.

    ``label[j]`` names the column whose component index fills slot ``j`` of
    ``T`` (column 0 is the output component). ``component_map`` is the inverse
    component permutation of a nonspatial symmetry, applied to every slot.
    """

    offsets: tuple[tuple[int, ...], ...]
    sign: int
    weight: int | Fraction
    label: tuple[int, ...]
    component_map: tuple[int, ...] | None = None

    @property
    def coefficient(self) -> int | Fraction:
        return self.sign * self.weight

    def key(self):
        return (self.offsets, self.label, self.component_map)

    def label_text(self) -> str:
        return "".join(LETTERS[k] for k in self.label)


def _canonical_arrow(offsets, coef, label, cmap, m):
    """Sort the columns of an arrow, adjusting sign and label."""
    p = len(offsets)
    order = sorted(range(p), key=lambda k: offsets[k])
    srt = tuple(offsets[k] for k in order)
    if m == 1:
        if any(a == b for a, b in zip(srt, srt[1:])):
            return None
        label = tuple(range(p + 1))
    else:
        # new column c holds old column order[c]; map old column -> new column
        new_of_old = {0: 0}
        for c, k in enumerate(order):
            new_of_old[k + 1] = c + 1
        label = tuple(new_of_old[j] for j in label)
    return srt, coef * permutation_parity(order), label, cmap


@dataclass
class Stencil:
    p: int
    m: int
    kind: str
    arrows: list[Arrow]
    coupling: np.ndarray | None = None
    base: tuple[tuple[int, ...], ...] = ()
    group_preset: str = "translations"
    scale: Fraction = Fraction(1)
    h_power: int = 0
    name: str = ""

    def __post_init__(self):
        if self.coupling is not None:
            self.coupling = np.asarray(self.coupling, dtype=object)
            if self.coupling.shape != (self.m,) * (self.p + 1):
                raise ValueError("coupling shape must be (m,)*(p+1)")

    def __len__(self) -> int:
        return len(self.arrows)

    @property
    def term_count(self) -> int:
        """Distinct monomials in the expanded difference (m == 1)."""
        return len({m for m, _ in self.monomials()})

    def monomials(self):
        """(ordered offsets, coefficient) for each product term at the origin (m == 1)."""
        acc: dict = {}
        for a in self.arrows:
            for tau in itertools.permutations(range(self.p)):
                key = tuple(a.offsets[t] for t in tau)
                acc[key] = acc.get(key, 0) + a.coefficient * permutation_parity(tau)
        return [(k, v) for k, v in acc.items() if v != 0]

    def normalization(self, h: float) -> float:
        return float(self.scale) * h ** self.h_power

    def max_offset(self) -> int:
        return max((abs(x) for a in self.arrows for o in a.offsets for x in o), default=0)

    # --- evaluation -------------------------------------------------------

    def _coupling_terms(self, arrow: Arrow, alpha0: int):
        """[(gamma_1..gamma_p, T value)] for one output component."""
        if self.m == 1:
            c = 1 if self.coupling is None else self.coupling[(0,) * (self.p + 1)]
            return [((0,) * self.p, c)]
        out = []
        for gam in itertools.product(range(self.m), repeat=self.p):
            full = (alpha0,) + gam
            beta = tuple(full[k] for k in arrow.label)
            if arrow.component_map is not None:
                beta = tuple(arrow.component_map[b] for b in beta)
            t = self.coupling[beta]
            if t != 0:
                out.append((gam, t))
        return out

    def _combine(self, column: Callable[[int, tuple[int, ...]], list], alpha0: int):
        """Sum over arrows; ``column(k, offset)[j][gamma]`` is v^j at the k-th column."""
        total = 0
        perms = [(tau, permutation_parity(tau)) for tau in itertools.permutations(range(self.p))]
        for arrow in self.arrows:
            cols = [column(k, o) for k, o in enumerate(arrow.offsets)]
            acc = 0
            for gam, t in self._coupling_terms(arrow, alpha0):
                det = 0
                for tau, s in perms:
                    prod = s
                    for j in range(self.p):
                        prod = prod * cols[tau[j]][j][gam[tau[j]]]
                    det = det + prod
                acc = acc + t * det
            total = total + arrow.coefficient * acc
        return total

    def apply(self, v: Sequence, lattice: Lattice, normalized: bool = False) -> np.ndarray:
        """The stencil at every site of a periodic lattice; shape ``extent + (m,)``.

        Exact (integer/Fraction object) inputs stay exact.
        """
        if lattice.kind != self.kind:
            raise ValueError(f"stencil for {self.kind} applied on {lattice.kind}")
        if not all(lattice.periodic):
            raise ValueError("apply needs a periodic lattice; use evaluate for single sites")
        if len(v) != self.p:
            raise ValueError(f"stencil needs {self.p} arguments")
        d = lattice.dimension
        vals = [np.moveaxis(as_values(x, lattice), -1, 0) for x in v]
        for x in vals:
            if x.shape != (self.m,) + lattice.extent:
                raise ValueError("argument shape does not match the lattice")
        cache = {}

        def column(k, o):
            if o not in cache:
                shift = tuple(-x for x in o)
                cache[o] = [np.roll(x, shift, axis=tuple(range(1, d + 1))) for x in vals]
            return cache[o]

        exact = vals[0].dtype == object
        out = np.empty(lattice.extent + (self.m,), dtype=object if exact else float)
        for a0 in range(self.m):
            res = self._combine(column, a0)
            out[..., a0] = res if not np.isscalar(res) else np.full(lattice.extent, res)
        if lattice.kind == "fcc3d":
            mask = (np.indices(lattice.extent).sum(axis=0) % 2) == 1
            out[mask] = 0
        if normalized:
            out = out * self.normalization(lattice.h)
        return out

    def evaluate(self, v: Sequence, site, lattice: Lattice, state=None):
        """The stencil at one site (SiteIndex or lattice tuple)."""
        if not isinstance(site, SiteIndex):
            site = SiteIndex(tuple(site) if not isinstance(site, int) else (site,), 0)
        vals = [as_values(x, lattice) for x in v]

        def column(k, o):
            l = lattice.wrap(tuple(a + b for a, b in zip(site.l, o)))
            return [x[l] for x in vals]

        return self._combine(column, site.alpha)

    def evaluate_at_point(self, funcs: Sequence[Callable], x0, lattice: Lattice):
        """Apply to smooth functions sampled at ``x0 + coords(offset)``.

        Returns a scalar for m == 1, else an array over output components.
        """
        x0 = np.asarray(x0, dtype=float)
        cache = {}

        def column(k, o):
            if o not in cache:
                x = x0 + lattice.offset_coords(o)
                cache[o] = [np.atleast_1d(f(x)) for f in funcs]
            return cache[o]

        vals = [self._combine(column, a0) for a0 in range(self.m)]
        return vals[0] if self.m == 1 else np.array(vals)

    # --- transformations --------------------------------------------------

    def transformed(self, g: SignedSymmetry) -> "Stencil":
        """Image of the arrow set under a spatial point symmetry, times sgn(g)."""
        arrows = [
            Arrow(tuple(g.apply_l(o) for o in a.offsets), a.sign * g.sign, a.weight, a.label,
                  a.component_map)
            for a in self.arrows
        ]
        return replace(self, arrows=_merge(arrows, self.m))

    def same_arrows(self, other: "Stencil") -> bool:
        return {a.key(): a.coefficient for a in self.arrows} == {
            a.key(): a.coefficient for a in other.arrows}

    # --- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        def frac(x):
            x = Fraction(x)
            return x.numerator if x.denominator == 1 else [x.numerator, x.denominator]

        return {
            "name": self.name,
            "kind": self.kind,
            "p": self.p,
            "m": self.m,
            "base": [list(o) for o in self.base],
            "group_preset": self.group_preset,
            "arrows": [
                {
                    "offsets": [list(o) for o in a.offsets],
                    "sign": a.sign,
                    "weight": frac(a.weight),
                    "label": self._label_string(a),
                }
                for a in self.arrows
            ],
            "scale": {"num": self.scale.numerator, "den": self.scale.denominator,
                      "h_power": self.h_power},
            "coupling": None if self.coupling is None else
            [frac(x) for x in self.coupling.reshape(-1)],
        }

    def _label_string(self, a: Arrow) -> str:
        s = a.label_text()
        if a.component_map is not None:
            s += "|" + ",".join(str(k) for k in a.component_map)
        return s

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "Stencil":
        p, m = int(data["p"]), int(data.get("m", 1))
        arrows = []
        for a in data["arrows"]:
            label_s = a.get("label", LETTERS[: p + 1])
            cmap = None
            if "|" in label_s:
                label_s, cm = label_s.split("|")
                cmap = tuple(int(x) for x in cm.split(","))
            label = tuple(LETTERS.index(ch) for ch in label_s)
            w = a["weight"]
            w = Fraction(*w) if isinstance(w, list) else Fraction(w)
            if a["sign"] not in (1, -1) or w <= 0:
                raise ValueError(f"invalid arrow sign/weight: {a}")
            arrows.append(Arrow(tuple(tuple(o) for o in a["offsets"]), int(a["sign"]), w,
                                label, cmap))
        coupling = data.get("coupling")
        if coupling is not None:
            coupling = np.array([Fraction(*x) if isinstance(x, list) else Fraction(x)
                                 for x in coupling], dtype=object).reshape((m,) * (p + 1))
        sc = data.get("scale", {"num": 1, "den": 1, "h_power": 0})
        return cls(p, m, data["kind"], arrows, coupling,
                   tuple(tuple(o) for o in data.get("base", ())),
                   data.get("group_preset", "translations"),
                   Fraction(sc["num"], sc["den"]), int(sc.get("h_power", 0)),
                   data.get("name", ""))

    @classmethod
    def from_json(cls, text: str) -> "Stencil":
        return cls.from_dict(json.loads(text))


def _merge(arrows: list[Arrow], m: int) -> list[Arrow]:
    acc: dict = {}
    for a in arrows:
        canon = _canonical_arrow(a.offsets, a.coefficient, a.label, a.component_map, m)
        if canon is None:
            continue
        offs, coef, label, cmap = canon
        key = (offs, label, cmap)
        acc[key] = acc.get(key, 0) + coef
    out = []
    for (offs, label, cmap), coef in acc.items():
        if coef == 0:
            continue
        w = abs(coef)
        if isinstance(w, Fraction) and w.denominator == 1:
            w = int(w)
        out.append(Arrow(offs, 1 if coef > 0 else -1, w, label, cmap))
    out.sort(key=lambda a: (a.offsets, a.label))
    return out


def check_coupling(base_l: Sequence[tuple[int, ...]], coupling) -> None:
    """Raise unless T is antisymmetric under swaps of positions with equal offsets."""
    t = np.asarray(coupling, dtype=object)
    for a, b in itertools.combinations(range(len(base_l)), 2):
        if tuple(base_l[a]) != tuple(base_l[b]):
            continue
        swapped = np.swapaxes(t, a, b)
        if not all(x == -y for x, y in zip(t.reshape(-1), swapped.reshape(-1))):
            raise CouplingSymmetryError(
                f"coupling must be antisymmetric in slots {a} and {b} (equal offsets)")


def build_stencil(
    base: Sequence,
    group: SymmetryGroup | None = None,
    coupling=None,
    kind: str = "line1d",
    translations: bool = True,
    group_preset: str = "translations",
    name: str = "",
) -> Stencil:
    """Symmetrize the elementary tensor at ``base`` and read off the origin.

    ``base`` lists p+1 lattice offsets with the first at the origin (ints are
    accepted in 1D). ``group`` is the point group; translations are added
    implicitly. ``coupling`` is a rank-(p+1) array over m components.
    """
    base_l = tuple((b,) if isinstance(b, (int, np.integer)) else tuple(b) for b in base)
    p = len(base_l) - 1
    d = len(base_l[0])
    if any(x != 0 for x in base_l[0]):
        raise ValueError("base multi-index must start at the origin")
    if group is None:
        group = generate_group([], dimension=d)
    if coupling is None:
        m = 1
    else:
        coupling = np.asarray(coupling, dtype=object)
        m = coupling.shape[0] if coupling.ndim else 1
        if coupling.ndim == 0:
            coupling = np.full((1,) * (p + 1), coupling.item(), dtype=object)
        coupling = np.vectorize(lambda x: Fraction(x) if isinstance(x, (int, Fraction)) else x,
                                otypes=[object])(coupling)
    repeated = len(set(base_l)) < len(base_l)
    if repeated:
        if m == 1:
            warnings.warn(f"repeated sites in base {base_l} with one component: all arrows cancel",
                          EmptyStencilWarning, stacklevel=2)
            return Stencil(p, m, kind, [], coupling, base_l, group_preset, name=name)
        check_coupling(base_l, coupling)

    mi = multi_index(*base_l)
    arrows = []
    for g, sigma in relocators(group, mi, translations=translations):
        image = [g.apply_l(l) for l in base_l]
        moved = sigma(image)
        zeros = sum(1 for l in image if all(x == 0 for x in l))
        inv = sigma.inverse().sigma
        cmap = None
        if g.component_map is not None:
            gi = g.inverse().component_map
            cmap = gi
        arrows.append(Arrow(tuple(moved[1:]), sigma.sign * g.sign, zeros, inv, cmap))
    merged = _merge(arrows, m)
    if not merged:
        warnings.warn("all arrows cancel", EmptyStencilWarning, stacklevel=2)
    return Stencil(p, m, kind, merged, coupling, base_l, group_preset, name=name)


def combine(terms: Sequence[tuple], name: str = "") -> Stencil:
    """Linear combination ``sum c_k * stencil_k`` (same kind, p, m and coupling)."""
    first = terms[0][1]
    arrows = []
    for c, st in terms:
        if (st.p, st.m, st.kind) != (first.p, first.m, first.kind):
            raise ValueError("cannot combine stencils of different shape")
        if st.m > 1 and not np.array_equal(st.coupling, first.coupling):
            raise ValueError("cannot combine m > 1 stencils with different couplings")
        c = Fraction(c)
        for a in st.arrows:
            coef = c * a.coefficient
            arrows.append(Arrow(a.offsets, 1 if coef > 0 else -1, abs(coef), a.label,
                                a.component_map))
    return Stencil(first.p, first.m, first.kind, _merge(arrows, first.m), first.coupling,
                   first.base, first.group_preset, name=name)


# --- conversion to tensors ------------------------------------------------

def to_tensor(st: Stencil, lattice: Lattice) -> SkewTensor:
    """Global skew tensor whose contraction reproduces the stencil at every site.

    Raises :class:`NotSkewError` if the arrows do not come from an
    antisymmetric tensor, and ValueError if the lattice is too small.
    """
    if lattice.kind != st.kind or not all(lattice.periodic):
        raise ValueError("to_tensor needs a periodic lattice of the stencil's kind")
    reach = st.max_offset()
    if any(2 * reach >= n for n in lattice.extent):
        raise ValueError(f"lattice extent {lattice.extent} too small for stencil reach {reach}")
    full: dict = {}
    perms = [(tau, permutation_parity(tau)) for tau in itertools.permutations(range(st.p))]
    for l in lattice.sites():
        for a0 in range(st.m):
            for arrow in st.arrows:
                sites = [lattice.wrap(tuple(x + y for x, y in zip(l, o))) for o in arrow.offsets]
                for gam, t in st._coupling_terms(arrow, a0):
                    for tau, s in perms:
                        key = (SiteIndex(l, a0),) + tuple(
                            SiteIndex(sites[tau[j]], gam[tau[j]]) for j in range(st.p))
                        full[key] = full.get(key, 0) + arrow.coefficient * t * s
    out = SkewTensor(st.p + 1, {}, lattice, st.m)
    for key, c in full.items():
        if c == 0:
            continue
        srt, parity = canonical(key)
        if srt is None:
            raise NotSkewError(f"nonzero entry with repeated site {key}")
        stored = parity * c
        have = out.entries.get(srt)
        if have is None:
            out.entries[srt] = stored
        elif have != stored:
            raise NotSkewError(f"entries at permutations of {srt} are not antisymmetric")
    # every stored set must appear at each of its orderings
    for srt, c in out.entries.items():
        for perm in itertools.permutations(range(st.p + 1)):
            key = tuple(srt[k] for k in perm)
            if full.get(key, 0) != permutation_parity(perm) * c:
                raise NotSkewError(f"missing antisymmetric partner of {key}")
    return out


def general_to_skew(t: GeneralTensor) -> SkewTensor:
    from .skewtensor import is_skew

    rep = is_skew(t)
    if not rep:
        raise NotSkewError(rep.detail)
    out = SkewTensor(t.rank, {}, t.lattice, t.m)
    for mi, c in t.entries.items():
        srt, parity = canonical(mi)
        out.entries[srt] = parity * c
    return out


# --- diagrams -------------------------------------------------------------

def _fmt_offset(o) -> str:
    return str(o[0]) if len(o) == 1 else "(" + ",".join(str(x) for x in o) + ")"


def render_diagram(st: Stencil) -> str:
    """Plain-text arrow listing: sign, path through offsets, label, weight."""
    lines = [f"# {st.name or 'stencil'}: p={st.p} m={st.m} {st.kind} "
             f"base={[_fmt_offset(o) for o in st.base]} arrows={len(st.arrows)}"]
    for a in st.arrows:
        path = "→".join(_fmt_offset(o) for o in a.offsets)
        if st.p == 1:
            path = "0→" + path
        s = "+" if a.sign > 0 else "-"
        tail = ""
        if st.m > 1:
            tail = " " + a.label_text()
            if a.component_map is not None:
                tail += "|" + ",".join(str(k) for k in a.component_map)
        if a.weight != 1:
            tail += f"({a.weight})"
        lines.append(f"({s}) {path}{tail}")
    return "\n".join(lines)


# --- presets --------------------------------------------------------------

def central(k: int = 1) -> Stencil:
    """F(0, k) = v_k - v_{-k}; approximates 2 k h v_x."""
    st = build_stencil([0, k], name=f"central{k}" if k != 1 else "central")
    st.scale, st.h_power = Fraction(1, 2 * k), -1
    return st


def richardson() -> Stencil:
    """8 F(0,1) - F(0,2) = 12 h v_x + O(h^5)."""
    st = combine([(8, central(1)), (-1, central(2))], name="richardson")
    st.scale, st.h_power = Fraction(1, 12), -1
    return st


def third_derivative() -> Stencil:
    """F(0,2) - 2 F(0,1) = 2 h^3 v_xxx + O(h^5)."""
    st = combine([(1, central(2)), (-2, central(1))], name="third")
    st.scale, st.h_power = Fraction(1, 2), -3
    return st


def p2d1() -> Stencil:
    """Two integrals in 1D from base (0, 1, 2): three arrows 1→2, 1→-1, -2→-1."""
    return build_stencil([0, 1, 2], name="p2d1")


def coupled_pair(coupling) -> Stencil:
    """m-component, base l = (0, 0, 1); T must be antisymmetric in its first two slots."""
    return build_stencil([0, 0, 1], coupling=coupling, name="coupled_pair")


JAC_BASE_2D = ((0, 0), (1, 0), (0, 1))


def arakawa_quarter() -> Stencil:
    """Translations only (3 arrows); leading term 3 h^2 J(v, w)."""
    st = build_stencil(JAC_BASE_2D, kind="square2d", name="arakawa_quarter")
    st.scale, st.h_power = Fraction(1, 3), -2
    return st


def arakawa_half() -> Stencil:
    """Translations and l -> -l with sign +1 (6 arrows, 12 product terms)."""
    g = point_group("reflection", "square2d")
    st = build_stencil(JAC_BASE_2D, g, kind="square2d", group_preset="reflection",
                       name="arakawa_half")
    st.scale, st.h_power = Fraction(1, 6), -2
    return st


def arakawa() -> Stencil:
    """Translations and rotations by pi/2, sign +1: the classical 9-point Jacobian.

    Normalize by 1 / (12 h^2) to approximate v_x w_y - v_y w_x.
    """
    g = point_group("c4", "square2d")
    st = build_stencil(JAC_BASE_2D, g, kind="square2d", group_preset="c4", name="arakawa")
    st.scale, st.h_power = Fraction(1, 12), -2
    return st


def arakawa_triangular(coupling=None) -> Stencil:
    """Triangular grid, translations and l -> -l (sign +1): six arrows, graph bandwidth 1.

    The leading term is 3 sqrt(3) h^2 J(v, w); the irrational factor is left
    out of ``scale``.
    """
    g = point_group("reflection", "triangular2d")
    st = build_stencil(JAC_BASE_2D, g, coupling=coupling, kind="triangular2d",
                       group_preset="reflection", name="arakawa_triangular")
    st.scale, st.h_power = Fraction(1, 1), -2
    return st


SQUARE_P3_BASE = ((0, 0), (1, 0), (1, 1), (0, 1))


def square_p3() -> Stencil:
    """Three integrals on the square grid: the unit square over translations."""
    return build_stencil(SQUARE_P3_BASE, kind="square2d", name="square_p3")


FCC_BASE = ((0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0))
CUBIC_BASE = ((0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0))


def _jacobian3d(base, kind, name):
    # det(dv/dx) picks up det(A) under a point map A
    g = point_group("oh", kind, signs={"reflection": -1})
    return build_stencil(base, g, kind=kind, group_preset="oh", name=name)


def fcc_jacobian3d() -> Stencil:
    """Eight tetrahedra around a vertex, weight 24 each; leading term 384 h^3 det(dv/dx)."""
    st = _jacobian3d(FCC_BASE, "fcc3d", "fcc_jacobian3d")
    st.scale, st.h_power = Fraction(1, 384), -3
    return st


def cubic_jacobian3d() -> Stencil:
    """Corner tetrahedra of the cube lattice; leading term -192 h^3 det(dv/dx)."""
    st = _jacobian3d(CUBIC_BASE, "cubic3d", "cubic_jacobian3d")
    st.scale, st.h_power = Fraction(-1, 192), -3
    return st


def central_tensor(n: int) -> SkewTensor:
    """Rank-2 central difference on an n-ring with entries +-1 (scale 1/(2h) not applied)."""
    return to_tensor(central(), Lattice("line1d", (n,)))


def nonlocal_tensor(n: int) -> GeneralTensor:
    """Nonlocal skew 3-tensor on an n-ring whose contraction with ones is the central tensor.

    Trilinear form u v_x <w> - u w_x <v> + <u> <v w_x>, derivatives by raw
    central differences and <f> = sum(f) / n.
    """
    lat = Lattice("line1d", (n,))

    def dmat(i, j):
        return int((j - i) % n == 1) - int((i - j) % n == 1)

    t = GeneralTensor(3, {}, lat, 1)
    inv = Fraction(1, n)
    for i, j, k in itertools.product(range(n), repeat=3):
        c = (dmat(i, j) - dmat(i, k) + dmat(j, k)) * inv
        if c:
            t.add((SiteIndex((i,), 0), SiteIndex((j,), 0), SiteIndex((k,), 0)), c)
    return t


PRESETS: dict[str, Callable[[], Stencil]] = {
    "central": central,
    "central2": lambda: central(2),
    "richardson": richardson,
    "third": third_derivative,
    "p2d1": p2d1,
    "arakawa_quarter": arakawa_quarter,
    "arakawa_half": arakawa_half,
    "arakawa": arakawa,
    "arakawa_triangular": arakawa_triangular,
    "square_p3": square_p3,
    "fcc_jacobian3d": fcc_jacobian3d,
    "cubic_jacobian3d": cubic_jacobian3d,
}


# --- irregular grids --------------------------------------------------------

@dataclass
class NonuniformDerivative:
    """Antisymmetric derivative dv/dc on the mapped grid c(x_i), x_i = i h.

    The central tensor is modulated by a symmetric ``s_ij`` and applied to
    ``w = c' v``; ``variant`` is ``midpoint`` (analytic c') or ``secant``
    (c' estimated from the samples, bandwidth 2).
    """

    c: Callable[[np.ndarray], np.ndarray]
    dc: Callable[[np.ndarray], np.ndarray] | None = None
    variant: str = "midpoint"

    def __post_init__(self):
        if self.variant not in ("midpoint", "secant"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "midpoint" and self.dc is None:
            raise ValueError("midpoint variant needs the analytic derivative c'")

    def check_monotone(self, x: np.ndarray) -> None:
        cx = self.c(x)
        dif = np.diff(cx)
        if not (np.all(dif > 0) or np.all(dif < 0)):
            raise ValueError("grid map c must be strictly monotone")

    def pair_weight(self, x0, x1, h):
        """s for the pair of computational points x0, x1 (symmetric in them)."""
        if self.variant == "midpoint":
            return 0.5 / self.dc(0.5 * (x0 + x1)) ** 2
        return 0.5 * ((self.c(x1) - self.c(x0)) / h) ** -2

    def w(self, V: Callable, x, h):
        """Transformed argument at computational points x."""
        if self.variant == "midpoint":
            return self.dc(x) * V(self.c(x))
        cm, c0, cp = self.c(x - h), self.c(x), self.c(x + h)
        vm, v0, vp = V(cm), V(c0), V(cp)
        return ((v0 + vp) * (cp - c0) + (v0 + vm) * (c0 - cm)) / (4 * h)

    def at_point(self, V: Callable, x0: float, h: float) -> float:
        """Estimate of dV/dc at c(x0) from samples of V on the mapped grid."""
        self.check_monotone(np.array([x0 - 2 * h, x0 - h, x0, x0 + h, x0 + 2 * h]))
        sp = self.pair_weight(x0, x0 + h, h)
        sm = self.pair_weight(x0, x0 - h, h)
        return (sp * self.w(V, x0 + h, h) - sm * self.w(V, x0 - h, h)) / h

    def matrix(self, n: int, h: float, x0: float = 0.0):
        """Modulated skew matrix s_ij K_ij / h on a periodic ring of n points,
        the transform w -> derivative. Only meaningful when c - x is periodic."""
        x = x0 + h * np.arange(n)
        K = np.zeros((n, n))
        for i in range(n):
            j = (i + 1) % n
            s = self.pair_weight(x[i], x[i] + h, h)
            K[i, j] += s / h
            K[j, i] -= s / h
        return K
