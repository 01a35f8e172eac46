"""Long 2D Euler run comparing implicit midpoint with RK4.

Writes per-step energy/enstrophy traces and prints the relative drifts.
Usage: python3 scripts/euler_conservation.py [--n 32 --dt 0.1 --steps 500]
"""

import argparse
import json
import time
from pathlib import Path

from skewfd import dynamics


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--dt", type=float, default=0.1)
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/euler")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    system = dynamics.euler2d_system(args.n)
    q0 = dynamics.random_vorticity(args.n, args.seed)
    result = {}
    for method in ("midpoint", "rk4"):
        t0 = time.perf_counter()
        rec = dynamics.integrate(system, q0, args.dt, args.steps, method)
        rec.to_csv(out / f"{method}.csv")
        result[method] = {**rec.summary(), "seconds": time.perf_counter() - t0}
        print(method, json.dumps(result[method]["max_relative_drift"]))
    (out / "summary.json").write_text(json.dumps(result, indent=2) + "\n")


if __name__ == "__main__":
    main()
