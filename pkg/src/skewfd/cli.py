"""Command-line front end: build, verify and simulate.

Exit codes: 0 success, 1 a verification or simulation check failed,
2 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import dynamics, stencil as stencil_mod, verify
from .lattice import Lattice
from .skewtensor import contract
from .stencil import NotSkewError, Stencil, build_stencil, render_diagram, to_tensor
from .symmetry import GroupError, PRESETS as GROUP_PRESETS, generate_group, point_group

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

KIND_BY_DIM = {1: "line1d", 2: "square2d", 3: "cubic3d"}

TARGETS = {
    "dx": lambda: verify.derivative_op(1),
    "dxxx": lambda: verify.derivative_op(3),
    "jacobian": verify.jacobian_op,
    "det3": verify.determinant_op,
    "cyclic-jacobian": verify.cyclic_jacobian_op,
    "jacobian-basis": verify.p2d1_basis,
}

# expected slope, or (h power, leading coefficients) for basis fits
PRESET_CHECKS = {
    "central": ("dx", 2.0),
    "central2": ("dx", 2.0),
    "richardson": ("dx", 4.0),
    "third": ("dxxx", 2.0),
    "p2d1": ("jacobian-basis", (3, [3, 2])),
    "arakawa": ("jacobian", 2.0),
    "arakawa_half": ("jacobian", 2.0),
    "arakawa_quarter": ("jacobian", 1.0),
    "arakawa_triangular": ("jacobian", 2.0),
    "square_p3": ("cyclic-jacobian", (2, [4])),
    "fcc_jacobian3d": ("det3", 2.0),
    "cubic_jacobian3d": ("det3", 2.0),
}

SIMULATIONS = ("euler2d", "ode1d", "ode1d2")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    preset: str | None = None
    base: str | None = None
    group: str = "translations"
    dim: int = 1
    kind: str | None = None
    m: int = 1
    target: str | None = None
    order: float | None = None
    h: float | None = None
    levels: int = 5
    n: int = 32
    dt: float = 0.1
    steps: int = 100
    method: str = "midpoint"
    seed: int = 0
    tol: float = 1e-13
    drift_tol: float = 1e-10
    out: str | None = None

    def validate(self) -> None:
        if self.command == "build":
            if (self.preset is None) == (self.base is None):
                raise ConfigError("build needs exactly one of --preset or --base")
            if self.preset is not None and self.preset not in stencil_mod.PRESETS:
                raise ConfigError(f"unknown stencil preset {self.preset!r}")
        if self.command == "verify" and self.preset is None:
            raise ConfigError("verify needs --preset (name or stencil JSON path)")
        if self.command == "simulate" and self.preset not in SIMULATIONS:
            raise ConfigError(f"simulate needs --preset in {SIMULATIONS}")
        if self.group not in GROUP_PRESETS:
            raise ConfigError(f"unknown group preset {self.group!r}")
        if self.dim not in KIND_BY_DIM:
            raise ConfigError("--dim must be 1, 2 or 3")
        if self.m < 1:
            raise ConfigError("--m must be positive")
        if self.m > 1:
            raise ConfigError("--m > 1 needs a coupling tensor; use the Python API")
        if self.levels < 5 and self.command == "verify":
            raise ConfigError("refinement studies need at least 5 levels")
        if self.target is not None and self.target not in TARGETS:
            raise ConfigError(f"unknown target {self.target!r}; choose from {sorted(TARGETS)}")
        if self.method not in dynamics.STEPPERS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.steps < 0 or self.n < 4 or self.dt < 0:
            raise ConfigError("steps >= 0, n >= 4 and dt >= 0 required")
        if self.h is not None and not self.h > 0:
            raise ConfigError("--h must be positive")

    @property
    def lattice_kind(self) -> str:
        return self.kind or KIND_BY_DIM[self.dim]


def parse_base(text: str, dim: int) -> list[tuple[int, ...]]:
    """``0,1`` in 1D; sites separated by ``;`` otherwise (``0,0;1,0;0,1``)."""
    try:
        if dim == 1 and ";" not in text:
            return [(int(x),) for x in text.split(",")]
        sites = [tuple(int(x) for x in s.split(",")) for s in text.split(";")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse base {text!r}") from exc
    if any(len(s) != dim for s in sites):
        raise ConfigError(f"base sites must have {dim} coordinates")
    return sites


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_build(cfg: RunConfig) -> int:
    if cfg.preset is not None:
        st = stencil_mod.PRESETS[cfg.preset]()
    else:
        base = parse_base(cfg.base, cfg.dim)
        try:
            group = point_group(cfg.group, cfg.lattice_kind)
        except GroupError as exc:
            raise ConfigError(str(exc)) from exc
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            st = build_stencil(base, group, kind=cfg.lattice_kind, group_preset=cfg.group,
                               name="custom")
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    print(render_diagram(st))
    if st.m == 1 and st.arrows:
        print(f"# determinant terms: {st.term_count}")
    if cfg.out:
        _write(Path(cfg.out), st.to_json(indent=2) + "\n")
    return EXIT_OK


def _load_stencil(spec: str) -> tuple[Stencil, str | None]:
    if spec in stencil_mod.PRESETS:
        return stencil_mod.PRESETS[spec](), spec
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"{spec!r} is neither a preset nor a stencil file")
    try:
        return Stencil.from_json(path.read_text()), None
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad stencil file: {exc}") from exc


def _rational_conservation(st: Stencil, seed: int) -> bool:
    d = Lattice(st.kind, (8,)).dimension
    lat = Lattice(st.kind, (8,) * d)
    rng = np.random.default_rng(seed)
    grads = [verify.random_rational(lat.extent + (st.m,), rng) for _ in range(st.p)]
    return verify.conservation_residual(st, grads, lat).ok()


def cmd_verify(cfg: RunConfig) -> int:
    st, preset = _load_stencil(cfg.preset)
    summary: dict = {"stencil": st.name, "checks": {}}
    ok = True
    d = Lattice(st.kind, (8,)).dimension
    try:
        to_tensor(st, Lattice(st.kind, (8,) * d))
        summary["checks"]["skew"] = True
    except NotSkewError as exc:
        print(f"skewness violation: {exc}", file=sys.stderr)
        summary["checks"]["skew"] = False
        ok = False
    if ok:
        cons = _rational_conservation(st, cfg.seed)
        summary["checks"]["conservation"] = cons
        ok &= cons
    target = cfg.target
    expected = cfg.order
    if preset in PRESET_CHECKS:
        t, e = PRESET_CHECKS[preset]
        target = target or t
        if expected is None and target == t:
            expected = e
    if ok and target is not None and st.m == 1:
        op = TARGETS[target]()
        if isinstance(op, list) or isinstance(expected, tuple):
            basis = op if isinstance(op, list) else [op]
            power = expected[0] if isinstance(expected, tuple) else None
            fit = verify.fit_leading_operator(st, basis, h_power=power)
            coeffs = [str(c) for c in fit.exact]
            summary["leading"] = {"h_power": fit.h_power, "exact": coeffs,
                                  "float": fit.as_floats(), "basis": fit.basis_names}
            print(f"leading term h^{fit.h_power} * {coeffs} on {fit.basis_names}")
            if isinstance(expected, tuple):
                good = [float(c) for c in fit.exact] == [float(c) for c in expected[1]]
                summary["checks"]["leading"] = good
                ok &= good
        else:
            h0 = cfg.h or 0.1
            factor = None
            if st.kind == "triangular2d":
                factor = 1 / (3 * math.sqrt(3))
            study = verify.order_estimate(st, op, hs=verify.h_levels(h0, cfg.levels),
                                          factor=factor)
            print(study.report())
            summary["study"] = study.summary(expected)
            if expected is not None:
                good = study.passes(expected)
                summary["checks"]["order"] = good
                ok &= good
            if cfg.out:
                study.to_csv(Path(cfg.out) / "study.csv")
    summary["pass"] = bool(ok)
    print(json.dumps(summary["checks"]))
    if cfg.out:
        _write(Path(cfg.out) / "summary.json", json.dumps(summary, indent=2) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_simulate(cfg: RunConfig) -> int:
    if cfg.preset == "euler2d":
        system = dynamics.euler2d_system(cfg.n, cfg.h)
        u0 = dynamics.random_vorticity(cfg.n, cfg.seed)
    else:
        system = dynamics.ode1d_system(cfg.n, cfg.h, 1 if cfg.preset == "ode1d" else 2)
        rng = np.random.default_rng(cfg.seed)
        u0 = rng.standard_normal(system.shape)
    kw = {"tol": cfg.tol} if cfg.method == "midpoint" else {}
    rec = dynamics.integrate(system, u0, cfg.dt, cfg.steps, cfg.method, **kw)
    summary = {"preset": cfg.preset, "method": cfg.method, "n": cfg.n, "dt": cfg.dt,
               "seed": cfg.seed, **rec.summary()}
    ok = rec.error is None
    if cfg.method == "midpoint":
        summary["drift_ok"] = all(x <= cfg.drift_tol for x in rec.drift())
        ok &= summary["drift_ok"]
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        rec.to_csv(out / "trajectory.csv")
        _write(out / "summary.json", json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary["max_relative_drift"]))
    if rec.error:
        print(f"stepper failure: {rec.error}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"build": cmd_build, "verify": cmd_verify, "simulate": cmd_simulate}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewfd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--preset")
        p.add_argument("--base", help="multi-index, e.g. 0,1 or 0,0;1,0;0,1")
        p.add_argument("--group", default="translations", help="point-group preset")
        p.add_argument("--dim", type=int, default=1)
        p.add_argument("--kind", help="lattice kind, overrides --dim")
        p.add_argument("--m", type=int, default=1)
        p.add_argument("--target", help=f"one of {sorted(TARGETS)}")
        p.add_argument("--order", type=float, help="expected order of accuracy")
        p.add_argument("--h", type=float, help="coarsest h (verify) or grid spacing (simulate)")
        p.add_argument("--levels", type=int, default=5)
        p.add_argument("--n", type=int, default=32)
        p.add_argument("--dt", type=float, default=0.1)
        p.add_argument("--steps", type=int, default=100)
        p.add_argument("--method", default="midpoint")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-13)
        p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    cfg = RunConfig(**vars(args))
    try:
        if cfg.kind is not None and cfg.kind not in KIND_BY_DIM.values() and cfg.kind not in (
                "triangular2d", "fcc3d"):
            raise ConfigError(f"unknown lattice kind {cfg.kind!r}")
        if cfg.kind is not None:
            cfg.dim = Lattice(cfg.kind, (8,)).dimension
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
