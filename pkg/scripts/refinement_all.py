"""Refinement study for every preset; writes one CSV per preset plus a JSON summary.

Usage: python3 scripts/refinement_all.py [--out results/refinement]
"""

import argparse
import json
import warnings
from pathlib import Path

from skewfd import cli, verify
from skewfd.stencil import PRESETS


def run(name: str, out: Path) -> dict:
    st = PRESETS[name]()
    target, expected = cli.PRESET_CHECKS[name]
    op = cli.TARGETS[target]()
    if isinstance(expected, tuple):
        basis = op if isinstance(op, list) else [op]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fit = verify.fit_leading_operator(st, basis, h_power=expected[0])
        got = [str(c) for c in fit.exact]
        return {"kind": "leading", "h_power": fit.h_power, "exact": got,
                "expected": [str(c) for c in expected[1]],
                "pass": [float(c) for c in fit.exact] == [float(c) for c in expected[1]]}
    factor = 1 / (3 * 3 ** 0.5) if st.kind == "triangular2d" else None
    study = verify.order_estimate(st, op, factor=factor)
    study.to_csv(out / f"{name}.csv")
    print(study.report())
    return {"kind": "order", **study.summary(expected)}


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/refinement")
    ap.add_argument("--only", nargs="*", default=None)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = {}
    for name in args.only or cli.PRESET_CHECKS:
        summary[name] = run(name, out)
        print(f"{name:20s} {summary[name]}")
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")


if __name__ == "__main__":
    main()
