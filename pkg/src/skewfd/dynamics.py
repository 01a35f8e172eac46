"""Conservative ODEs du/dt = K(grad I^1, ..., grad I^p) and time stepping."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .lattice import Lattice, as_values
from .skewtensor import ModulatedTensor, SkewTensor, contract
from .stencil import Stencil, arakawa, central, p2d1


class GradientCheckError(ValueError):
    pass


class MidpointConvergenceError(RuntimeError):
    pass


class SingularPointError(ValueError):
    pass


@dataclass
class IntegralFunctional:
    """A functional with its analytic gradient; ``weight`` is the quadrature factor."""

    name: str
    eval: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    weight: float = 1.0
    quadratic: bool = False

    def __call__(self, u: np.ndarray) -> float:
        return float(self.eval(u))

    def check_gradient(self, u: np.ndarray, seed: int = 0, rtol: float = 1e-6) -> float:
        """Compare the directional derivative with a central difference."""
        rng = np.random.default_rng(seed)
        d = rng.standard_normal(u.shape)
        d /= np.linalg.norm(d)
        eps = 1e-5 * max(1.0, float(np.max(np.abs(u))))
        fd = (self.eval(u + eps * d) - self.eval(u - eps * d)) / (2 * eps)
        an = float(np.sum(self.grad(u) * d))
        err = abs(fd - an) / max(abs(an), abs(fd), 1e-300)
        if err > rtol and abs(fd - an) > 1e-10:
            raise GradientCheckError(f"gradient of {self.name!r} disagrees with finite "
                                     f"differences: {an} vs {fd}")
        return err


def quadratic_integral(name: str, matrix_apply: Callable[[np.ndarray], np.ndarray],
                       weight: float = 1.0) -> IntegralFunctional:
    """I(u) = weight/2 * u . S u for a symmetric S given by its action."""
    return IntegralFunctional(
        name,
        lambda u: 0.5 * weight * float(np.sum(u * matrix_apply(u))),
        lambda u: weight * matrix_apply(u),
        weight,
        quadratic=True,
    )


@dataclass
class ConservativeSystem:
    """``operator`` is a Stencil, a SkewTensor or a ModulatedTensor; ``scale``
    multiplies the raw operator output."""

    operator: object
    integrals: list[IntegralFunctional]
    lattice: Lattice
    scale: float = 1.0
    m: int = 1
    name: str = ""
    _checked: bool = field(default=False, init=False, repr=False)

    def __post_init__(self):
        rank = self.operator.p + 1 if isinstance(self.operator, Stencil) else self.operator.rank
        if len(self.integrals) != rank - 1:
            raise ValueError(f"rank-{rank} operator needs {rank - 1} integrals, "
                             f"got {len(self.integrals)}")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.lattice.extent + (self.m,)

    def grads(self, u: np.ndarray) -> list[np.ndarray]:
        return [np.asarray(I.grad(u), dtype=float) for I in self.integrals]

    def check_gradients(self, u: np.ndarray) -> None:
        for k, I in enumerate(self.integrals):
            I.check_gradient(u, seed=k)
        self._checked = True

    def values(self, u: np.ndarray) -> list[float]:
        return [I(u) for I in self.integrals]


def rhs(sys: ConservativeSystem, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float).reshape(sys.shape)
    g = sys.grads(u)
    op = sys.operator
    if isinstance(op, Stencil):
        out = op.apply(g, sys.lattice)
    elif isinstance(op, ModulatedTensor):
        out = contract(op, g, state=u)
    else:
        out = contract(op, g)
    return sys.scale * np.asarray(out, dtype=float).reshape(sys.shape)


def conservation_defect(sys: ConservativeSystem, u: np.ndarray) -> float:
    """max_j |F . grad I^j| relative to sum |F_i grad^j_i|."""
    F = rhs(sys, u)
    worst = 0.0
    for g in sys.grads(u):
        num = abs(float(np.sum(F * g)))
        den = float(np.sum(np.abs(F * g)))
        worst = max(worst, num / den if den > 0 else num)
    return worst


# --- steppers -----------------------------------------------------------------

def step_rk4(sys: ConservativeSystem, u: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(sys, u)
    k2 = rhs(sys, u + 0.5 * dt * k1)
    k3 = rhs(sys, u + 0.5 * dt * k2)
    k4 = rhs(sys, u + dt * k3)
    return u + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _midpoint_once(sys, u, dt, tol, max_iter):
    f = rhs(sys, u)
    new = u + dt * f
    tol_abs = tol * max(1.0, float(np.max(np.abs(u))))
    for _ in range(max_iter):
        nxt = u + dt * rhs(sys, 0.5 * (u + new))
        diff = float(np.max(np.abs(nxt - new)))
        new = nxt
        if diff <= tol_abs:
            return new
    # Newton-Krylov fallback on the same residual
    try:
        res = scipy.optimize.newton_krylov(
            lambda x: x - u - dt * rhs(sys, 0.5 * (u + x)), new, f_tol=tol_abs, maxiter=50)
        return res
    except (scipy.optimize.NoConvergence, ValueError):
        return None


def step_midpoint(sys: ConservativeSystem, u: np.ndarray, dt: float, tol: float = 1e-13,
                  max_iter: int = 200) -> np.ndarray:
    """Implicit midpoint rule; on failure retries with 2, 4, 8 substeps."""
    if dt == 0:
        return np.array(u, dtype=float, copy=True)
    for k in range(4):
        n = 2 ** k
        v = np.asarray(u, dtype=float)
        for _ in range(n):
            v = _midpoint_once(sys, v, dt / n, tol, max_iter)
            if v is None:
                break
        if v is not None:
            return v
    raise MidpointConvergenceError(f"midpoint solve failed at dt={dt} after 3 halvings")


STEPPERS = {"rk4": step_rk4, "midpoint": step_midpoint}


@dataclass
class TrajectoryRecord:
    times: list[float]
    integrals: list[list[float]]
    residuals: list[float]
    names: list[str]
    snapshots: list[tuple[float, np.ndarray]] = field(default_factory=list)
    error: str | None = None

    def drift(self) -> list[float]:
        """max_t |I(t) - I(0)| / |I(0)| per integral."""
        arr = np.array(self.integrals)
        if len(arr) == 0:
            return []
        ref = arr[0]
        d = np.max(np.abs(arr - ref), axis=0)
        return [float(x / abs(r)) if r != 0 else float(x) for x, r in zip(d, ref)]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + self.names + ["residual"])
            if len(self.times) == 1 and not self.residuals:
                return
            for t, vals, r in zip(self.times, self.integrals, self.residuals):
                w.writerow([repr(t)] + [repr(v) for v in vals] + [repr(r)])

    def summary(self) -> dict:
        return {
            "steps": len(self.times) - 1,
            "t_final": self.times[-1],
            "max_relative_drift": dict(zip(self.names, self.drift())),
            "max_residual": max(self.residuals) if self.residuals else 0.0,
            "error": self.error,
        }


def integrate(sys: ConservativeSystem, u0: np.ndarray, dt: float, n_steps: int,
              method: str = "midpoint", observers: Sequence[Callable] = (),
              stride: int = 0, **kw) -> TrajectoryRecord:
    """Advance ``n_steps``; integrals are recorded at every step."""
    if method not in STEPPERS:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(STEPPERS)}")
    step = STEPPERS[method]
    u = np.asarray(u0, dtype=float).reshape(sys.shape).copy()
    sys.check_gradients(u)
    rec = TrajectoryRecord([0.0], [sys.values(u)], [], [I.name for I in sys.integrals])
    if n_steps > 0:
        rec.residuals.append(conservation_defect(sys, u))
    if stride:
        rec.snapshots.append((0.0, u.copy()))
    for k in range(1, n_steps + 1):
        try:
            u = step(sys, u, dt, **kw)
        except MidpointConvergenceError as exc:
            rec.error = str(exc)
            break
        t = k * dt
        rec.times.append(t)
        rec.integrals.append(sys.values(u))
        rec.residuals.append(conservation_defect(sys, u))
        if stride and k % stride == 0:
            rec.snapshots.append((t, u.copy()))
        for obs in observers:
            obs(t, u)
    return rec


# --- systems ------------------------------------------------------------------

def periodic_laplacian(n: int, h: float) -> np.ndarray:
    """Dense 5-point Laplacian on an n x n torus (C-order flattening)."""
    N = n * n
    L = np.zeros((N, N))
    for i in range(n):
        for j in range(n):
            k = i * n + j
            L[k, k] = -4.0
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                L[k, ((i + di) % n) * n + (j + dj) % n] += 1.0
    return L / h ** 2


@dataclass
class InverseLaplacian:
    """psi = (-Lap)^+ q via Cholesky of (-Lap + 11^T / N), exact on mean-zero q."""

    n: int
    h: float

    def __post_init__(self):
        N = self.n * self.n
        M = -periodic_laplacian(self.n, self.h) + np.ones((N, N)) / N
        self._factor = scipy.linalg.cho_factor(M)

    def __call__(self, q: np.ndarray) -> np.ndarray:
        flat = np.asarray(q, dtype=float).reshape(-1)
        return scipy.linalg.cho_solve(self._factor, flat).reshape(np.shape(q))


def euler2d_system(n: int = 32, h: float | None = None, L: float = 2 * math.pi) -> ConservativeSystem:
    """Vorticity form of 2D incompressible Euler on a periodic n x n grid.

    I^1 = h^2/2 sum q^2 (enstrophy), I^2 = h^2/2 sum q psi (energy) with
    psi = (-Lap)^-1 q. The Arakawa stencil with scale -1/(12 h^6) turns
    K(grad I^1, grad I^2) into dq/dt = J(psi, q).
    """
    if h is None:
        h = L / n
    lat = Lattice("square2d", (n, n), h=h)
    inv = InverseLaplacian(n, h)
    w = h * h
    enstrophy = quadratic_integral("enstrophy", lambda q: q, w)
    energy = quadratic_integral("energy", inv, w)
    return ConservativeSystem(arakawa(), [enstrophy, energy], lat, -1.0 / (12 * h ** 6), 1,
                              "euler2d")


def check_mean_zero(q: np.ndarray, tol: float = 1e-12) -> None:
    mean = float(np.mean(q))
    if abs(mean) > tol * max(1.0, float(np.max(np.abs(q)))):
        raise ValueError(f"vorticity must have zero mean (got {mean:.3e})")


def random_vorticity(n: int, seed: int = 0, modes: int = 4) -> np.ndarray:
    """Smooth mean-zero field from random low Fourier modes, max |q| = 1."""
    rng = np.random.default_rng(seed)
    x = np.arange(n) * 2 * math.pi / n
    X, Y = np.meshgrid(x, x, indexing="ij")
    q = np.zeros((n, n))
    for kx in range(-modes, modes + 1):
        for ky in range(-modes, modes + 1):
            if kx == 0 and ky == 0:
                continue
            a, phi = rng.standard_normal(), rng.uniform(0, 2 * math.pi)
            q += a / (kx * kx + ky * ky) * np.cos(kx * X + ky * Y + phi)
    q -= q.mean()
    return (q / np.max(np.abs(q)))[..., None]


def ode1d_system(n: int = 32, h: float | None = None, integrals: int = 1) -> ConservativeSystem:
    """1D periodic test systems.

    integrals=1: central tensor with I = h/2 sum u^2 (linear advection).
    integrals=2: three-point rank-3 stencil with I^1 = 1/2 sum u^2 and
    I^2 = 1/2 sum u_i u_{i+1}.
    """
    if h is None:
        h = 1.0 / n
    lat = Lattice("line1d", (n,), h=h)
    if integrals == 1:
        I = quadratic_integral("energy", lambda u: u, h)
        return ConservativeSystem(central(), [I], lat, 1.0 / (2 * h * h), 1, "ode1d")
    if integrals == 2:
        I1 = quadratic_integral("I1", lambda u: u, 1.0)
        I2 = quadratic_integral(
            "I2", lambda u: 0.5 * (np.roll(u, -1, axis=0) + np.roll(u, 1, axis=0)), 1.0)
        return ConservativeSystem(p2d1(), [I1, I2], lat, 1.0, 1, "ode1d_p2")
    raise ValueError("ode1d supports one or two integrals")


# --- skew forms from vector fields --------------------------------------------------

@dataclass
class SkewForm:
    J: np.ndarray
    conservative: bool
    defect: float


def skew_form_from_field(f, gradH, z=None, tol: float = 1e-12) -> SkewForm:
    """J = (f z^T - z f^T) / (z . gradH), skew with J gradH = f when f . gradH = 0.

    ``z`` defaults to gradH.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(gradH, dtype=float)
    z = g if z is None else np.asarray(z, dtype=float)
    den = float(z @ g)
    if abs(den) <= tol * max(1.0, float(np.linalg.norm(z) * np.linalg.norm(g))):
        raise SingularPointError("z . gradH vanishes: J is singular here (critical point of H)")
    J = (np.outer(f, z) - np.outer(z, f)) / den
    defect = float(np.linalg.norm(J @ g - f))
    return SkewForm(J, defect <= 1e-10 * max(1.0, float(np.linalg.norm(f))), defect)
