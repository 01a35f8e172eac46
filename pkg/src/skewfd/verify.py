"""Order-of-accuracy studies, leading-term fits and conservation checks.

Test functions are sympy expressions so that analytic derivatives of any
order are available. Continuous targets are :class:`DiffOp` objects: a
multilinear differential operator stored as
``{(alpha^1, ..., alpha^p): coefficient}`` meaning
``sum c * prod_j d^{alpha^j} v^j``.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from .lattice import Lattice
from .skewtensor import SkewTensor, contract, contract_terms_abs
from .stencil import Stencil, to_tensor
from .symmetry import permutation_parity

MultiIdx = tuple[int, ...]


class SmoothFunction:
    """A sympy expression in d coordinates with cached numeric derivatives."""

    def __init__(self, expr, d: int):
        self.d = d
        self.symbols = sp.symbols(f"x0:{d}")
        self.expr = sp.sympify(expr)
        self._cache: dict = {}

    def deriv(self, alpha: MultiIdx) -> Callable:
        alpha = tuple(alpha)
        if alpha not in self._cache:
            e = self.expr
            for s, k in zip(self.symbols, alpha):
                if k:
                    e = sp.diff(e, s, k)
            self._cache[alpha] = sp.lambdify(self.symbols, e, "numpy")
        return self._cache[alpha]

    def __call__(self, x) -> float:
        return float(self.deriv((0,) * self.d)(*np.asarray(x, dtype=float)))

    def __repr__(self) -> str:
        return f"SmoothFunction({self.expr})"


def make_tests(d: int, p: int, count: int = 4, seed: int = 0) -> list[list[SmoothFunction]]:
    """Reproducible tuples of trig and low-degree polynomial test functions."""
    rng = np.random.default_rng(seed)
    xs = sp.symbols(f"x0:{d}")
    out = []
    for t in range(count):
        funcs = []
        for j in range(p):
            a = [sp.Rational(int(rng.integers(5, 15)), 10) for _ in range(d)]
            phi = sp.Rational(int(rng.integers(0, 30)), 10)
            trig = sp.sin(sum(ai * x for ai, x in zip(a, xs)) + phi)
            c = [sp.Rational(int(rng.integers(-9, 10)), 10) for _ in range(d)]
            poly = sum(ci * x ** (1 + (k + j + t) % 3) for k, (ci, x) in enumerate(zip(c, xs)))
            if (j + t) % 2:
                poly = poly + xs[j % d] * xs[(j + 1) % d] / 3
            funcs.append(SmoothFunction(trig + poly, d))
        out.append(funcs)
    return out


@dataclass(frozen=True)
class DiffOp:
    """Multilinear constant-coefficient differential operator in p arguments."""

    terms: tuple[tuple[tuple[MultiIdx, ...], object], ...]
    d: int
    name: str = ""

    @classmethod
    def from_dict(cls, terms: dict, d: int, name: str = "") -> "DiffOp":
        return cls(tuple(sorted(terms.items())), d, name)

    @property
    def as_dict(self) -> dict:
        return dict(self.terms)

    @property
    def p(self) -> int:
        return len(self.terms[0][0])

    @property
    def order(self) -> int:
        return max(sum(sum(a) for a in key) for key, _ in self.terms)

    def __call__(self, funcs: Sequence[SmoothFunction], x) -> float:
        x = np.asarray(x, dtype=float)
        total = 0.0
        for key, c in self.terms:
            prod = float(c)
            for f, a in zip(funcs, key):
                prod *= float(f.deriv(a)(*x))
            total += prod
        return total

    def scaled(self, c) -> "DiffOp":
        return DiffOp(tuple((k, v * c) for k, v in self.terms), self.d, self.name)


def _e(d: int, k: int, n: int = 1) -> MultiIdx:
    return tuple(n if i == k else 0 for i in range(d))


def derivative_op(n: int = 1) -> DiffOp:
    return DiffOp.from_dict({((n,),): 1}, 1, f"d{n}x")


def p2d1_basis() -> list[DiffOp]:
    """v'w'' - w'v''  and  v w''' - w v'''."""
    return [
        DiffOp.from_dict({((1,), (2,)): 1, ((2,), (1,)): -1}, 1, "v'w''-w'v''"),
        DiffOp.from_dict({((0,), (3,)): 1, ((3,), (0,)): -1}, 1, "vw'''-wv'''"),
    ]


def jacobian_op() -> DiffOp:
    """v_x w_y - v_y w_x."""
    return DiffOp.from_dict({((1, 0), (0, 1)): 1, ((0, 1), (1, 0)): -1}, 2, "J(v,w)")


def determinant_op(d: int = 3) -> DiffOp:
    """det(d v^i / d x_j) for d functions of d variables."""
    terms = {}
    for perm in itertools.permutations(range(d)):
        terms[tuple(_e(d, perm[i]) for i in range(d))] = permutation_parity(perm)
    return DiffOp.from_dict(terms, d, f"det{d}")


def cyclic_jacobian_op() -> DiffOp:
    """v^1 J(v^2, v^3) + v^2 J(v^3, v^1) + v^3 J(v^1, v^2)."""
    z = (0, 0)
    terms = {}
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        for (da, db), s in ((((1, 0), (0, 1)), 1), (((0, 1), (1, 0)), -1)):
            key = [None] * 3
            key[a], key[b], key[c] = z, da, db
            terms[tuple(key)] = terms.get(tuple(key), 0) + s
    return DiffOp.from_dict(terms, 2, "cyclic v1 J(v2,v3)")


# --- refinement studies -------------------------------------------------------

@dataclass
class RefinementStudy:
    hs: list[float]
    errors: list[float]
    slope: float
    residual: float
    name: str = ""
    residual_threshold: float = 1e-3

    @property
    def consistent(self) -> bool:
        return self.residual <= self.residual_threshold

    def passes(self, order: float, tol: float = 0.1) -> bool:
        return self.consistent and abs(self.slope - order) <= tol

    def report(self) -> str:
        if not self.consistent:
            return (f"inconsistent stencil/operator pair: log-log residual {self.residual:.2e} "
                    f"exceeds {self.residual_threshold:.0e}")
        return f"slope {self.slope:.4f} (residual {self.residual:.1e})"

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["h", "error"])
            for h, e in zip(self.hs, self.errors):
                w.writerow([repr(h), repr(e)])

    def summary(self, order: float | None = None, tol: float = 0.1) -> dict:
        out = {"name": self.name, "slope": self.slope, "residual": self.residual,
               "consistent": self.consistent}
        if order is not None:
            out["expected"] = order
            out["pass"] = self.passes(order, tol)
        return out


def fit_slope(hs: Sequence[float], errors: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of log(error) against log(h) and RMS residual (log10 units)."""
    x, y = np.log10(np.asarray(hs)), np.log10(np.asarray(errors))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(res ** 2)))


def h_levels(h0: float = 0.1, levels: int = 5) -> list[float]:
    if levels < 2:
        raise ValueError("a refinement study needs at least two levels")
    return [h0 / 2 ** k for k in range(levels)]


def sample_points(d: int, count: int = 3, seed: int = 1) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-0.5, 0.5, size=(count, d))


def order_estimate(
    st: Stencil,
    op: Callable,
    tests: Sequence[Sequence[Callable]] | None = None,
    scale_power: int | None = None,
    factor=None,
    hs: Sequence[float] | None = None,
    points: np.ndarray | None = None,
    name: str = "",
) -> RefinementStudy:
    """Refinement study of ``factor * F / h^scale_power`` against ``op``.

    Defaults take the factor and power from the stencil's declared
    normalization. Error at each h is the max over test tuples and points.
    """
    d = Lattice(st.kind, (8,)).dimension
    if tests is None:
        tests = make_tests(d, st.p)
    if len(tests) < 3:
        raise ValueError("need at least three test tuples")
    if scale_power is None:
        scale_power = -st.h_power
    if factor is None:
        factor = st.scale
    hs = list(hs or h_levels())
    if points is None:
        points = sample_points(d)
    exact = [[np.asarray(op(f, x), dtype=float) for x in points] for f in tests]
    errors = []
    for h in hs:
        lat = Lattice(st.kind, (8,), h=h)
        err = 0.0
        for f, ex in zip(tests, exact):
            for x, e in zip(points, ex):
                val = np.asarray(st.evaluate_at_point(f, x, lat), dtype=float) * float(factor)
                err = max(err, float(np.max(np.abs(val / h ** scale_power - e))))
        errors.append(err)
    slope, res = fit_slope(hs, errors)
    return RefinementStudy(hs, errors, slope, res, name or st.name)


# --- leading-term fits ------------------------------------------------------------

def _sym_basis(kind: str):
    if kind == "triangular2d":
        return sp.Matrix([[1, sp.Rational(1, 2)], [0, sp.sqrt(3) / 2]])
    d = Lattice(kind, (8,)).dimension
    return sp.eye(d)


def taylor_coefficients(st: Stencil, order: int) -> dict:
    """Exact coefficient of ``h^order prod_j d^{alpha^j} v^j(0)`` in the stencil (m == 1)."""
    if st.m != 1:
        raise ValueError("the Taylor oracle handles single-component stencils")
    B = _sym_basis(st.kind)
    d = B.shape[0]
    coeffs: dict = {}
    parts = [c for c in itertools.product(range(order + 1), repeat=st.p) if sum(c) == order]
    perms = [(tau, permutation_parity(tau)) for tau in itertools.permutations(range(st.p))]
    for arrow in st.arrows:
        ys = [list(B * sp.Matrix(o)) for o in arrow.offsets]
        for tau, s in perms:
            pts = [ys[tau[j]] for j in range(st.p)]
            for split in parts:
                for alphas in itertools.product(*(_multi(d, n) for n in split)):
                    term = sp.Integer(arrow.coefficient) * s
                    for y, a in zip(pts, alphas):
                        for yk, ak in zip(y, a):
                            term *= yk ** ak / sp.factorial(ak)
                    if term != 0:
                        coeffs[alphas] = coeffs.get(alphas, 0) + term
    return {k: sp.nsimplify(sp.simplify(v)) for k, v in coeffs.items() if sp.simplify(v) != 0}


@lru_cache(maxsize=None)
def _multi(d: int, n: int) -> tuple[MultiIdx, ...]:
    return tuple(a for a in itertools.product(range(n + 1), repeat=d) if sum(a) == n)


def leading_power(st: Stencil, max_order: int = 8) -> tuple[int, dict]:
    for n in range(max_order + 1):
        c = taylor_coefficients(st, n)
        if c:
            return n, c
    raise ValueError(f"no nonzero Taylor term up to order {max_order}")


@dataclass
class LeadingFit:
    h_power: int
    coefficients: list
    exact: list | None
    residual: float
    exact_residual: object = 0
    basis_names: list = field(default_factory=list)

    def as_floats(self) -> list[float]:
        return [float(c) for c in self.coefficients]


class RankDeficientBasis(ValueError):
    pass


def _exact_fit(coeffs: dict, basis: Sequence[DiffOp]):
    keys = sorted(set(coeffs) | {k for b in basis for k, _ in b.terms})
    A = sp.Matrix([[sp.nsimplify(b.as_dict.get(k, 0)) for b in basis] for k in keys])
    y = sp.Matrix([coeffs.get(k, 0) for k in keys])
    if A.rank() < len(basis):
        raise RankDeficientBasis("basis operators are linearly dependent")
    sol = (A.T * A).LUsolve(A.T * y)
    sol = sp.Matrix([sp.nsimplify(sp.simplify(s)) for s in sol])
    resid = sp.simplify((A * sol - y).norm())
    return list(sol), resid


def fit_leading_operator(
    st: Stencil,
    basis: Sequence[DiffOp],
    h_power: int | None = None,
    tests: Sequence[Sequence[SmoothFunction]] | None = None,
    hs: Sequence[float] = (0.04, 0.02, 0.01, 0.005, 0.0025),
    oracle: bool = True,
) -> LeadingFit:
    """Coefficients c with ``F ~ h^n sum_b c_b basis_b`` as h -> 0.

    Floating fit: least squares at each h, then polynomial extrapolation to
    h = 0. Exact fit: Taylor coefficients of the arrows matched in sympy.
    """
    d = basis[0].d
    exact = None
    exact_res = None
    if oracle and st.m == 1:
        n, coeffs = leading_power(st) if h_power is None else (h_power, taylor_coefficients(st, h_power))
        exact, exact_res = _exact_fit(coeffs, basis)
        h_power = n
    if h_power is None:
        raise ValueError("h_power must be given when the Taylor oracle is off")
    if tests is None:
        tests = make_tests(d, st.p, count=6, seed=3)
    pts = sample_points(d, count=4, seed=5)
    rows = [[b(f, x) for b in basis] for f in tests for x in pts]
    A = np.array(rows)
    if np.linalg.matrix_rank(A) < len(basis):
        raise RankDeficientBasis("basis is not independent on the sample set")
    per_h = []
    resid = 0.0
    for h in hs:
        lat = Lattice(st.kind, (8,), h=h)
        y = np.array([float(st.evaluate_at_point(f, x, lat)) / h ** h_power
                      for f in tests for x in pts])
        c, *_ = np.linalg.lstsq(A, y, rcond=None)
        per_h.append(c)
        resid = float(np.linalg.norm(A @ c - y) / max(1.0, np.linalg.norm(y)))
    per_h = np.array(per_h)
    deg = min(3, len(hs) - 1)
    V = np.vander(np.asarray(hs), deg + 1)
    extrap = np.linalg.lstsq(V, per_h, rcond=None)[0][-1]
    return LeadingFit(h_power, list(extrap), exact, resid, exact_res, [b.name for b in basis])


# --- conservation -------------------------------------------------------------------

@dataclass
class ConservationReport:
    residual: float | Fraction
    scale: float
    exact: bool

    def ok(self, rtol: float = 1e-12) -> bool:
        if self.exact:
            return self.residual == 0
        return float(self.residual) <= rtol * max(self.scale, np.finfo(float).tiny)


def conservation_residual(
    obj: Stencil | SkewTensor,
    grads: Sequence,
    lattice: Lattice | None = None,
    state=None,
) -> ConservationReport:
    """max_j |sum_i F_i grad^j_i| with F = K(grad^1, .., grad^p)."""
    if isinstance(obj, Stencil):
        if lattice is None:
            raise ValueError("a lattice is needed to apply a stencil")
        F = obj.apply(grads, lattice)
        p = obj.p
        tensor = None
    else:
        tensor = obj
        lattice = obj.lattice
        F = contract(obj, grads, state)
        p = len(grads)
    exact = F.dtype == object
    worst = Fraction(0) if exact else 0.0
    scale = 0.0
    for j in range(p):
        g = np.asarray(grads[j])
        if g.shape != F.shape:
            g = g.reshape(F.shape)
        prod = F * g
        s = prod.sum()
        worst = max(worst, abs(s))
        if not exact:
            if tensor is not None:
                ab = contract_terms_abs(tensor, grads) * np.abs(np.asarray(g, dtype=float))
                scale = max(scale, float(ab.sum()))
            else:
                scale = max(scale, _stencil_abs_terms(obj, grads, lattice, g))
    return ConservationReport(worst if exact else float(worst), scale, exact)


def _stencil_abs_terms(st: Stencil, grads, lattice, g) -> float:
    absst = Stencil(st.p, st.m, st.kind, st.arrows, st.coupling, st.base)
    # a crude bound: |F| computed from absolute values of every factor
    vals = [np.abs(np.asarray(x, dtype=float)) for x in grads]
    total = 0.0
    for a in absst.arrows:
        for tau in itertools.permutations(range(st.p)):
            prod = np.full(lattice.extent, float(a.weight))
            for j in range(st.p):
                o = a.offsets[tau[j]]
                v = vals[j].reshape(lattice.extent + (-1,))[..., 0]
                prod = prod * np.roll(v, tuple(-x for x in o), axis=tuple(range(lattice.dimension)))
            total += float((prod * np.abs(np.asarray(g, dtype=float)).reshape(prod.shape)).sum())
    return total


def random_rational(shape, rng: np.random.Generator, num: int = 9, den: int = 6) -> np.ndarray:
    """Object array of small random Fractions."""
    size = int(np.prod(shape))
    vals = [Fraction(int(a), int(b)) for a, b in
            zip(rng.integers(-num, num + 1, size=size), rng.integers(1, den + 1, size=size))]
    out = np.empty(size, dtype=object)
    out[:] = vals
    return out.reshape(shape)


def study_json(study: RefinementStudy, order: float | None = None, tol: float = 0.1) -> str:
    return json.dumps(study.summary(order, tol), indent=2)
