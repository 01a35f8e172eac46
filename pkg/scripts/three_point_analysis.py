"""Diagnostics for the two constructions whose behaviour is surprising.

1. Antisymmetrized square (p=3, D4): leading Taylor power and the D4 sign
   characters under which it is invariant.
2. 3D Jacobians: arrow and term counts of the cubic vs. fcc stencils under
   the rotation group and the full group with odd reflections.
"""

import warnings

from skewfd import build_stencil, is_g_invariant, to_tensor
from skewfd.lattice import Lattice
from skewfd.stencil import CUBIC_BASE, FCC_BASE, square_p3
from skewfd.symmetry import point_group
from skewfd.verify import leading_power


def square() -> None:
    st = square_p3()
    power, coeffs = leading_power(st, max_order=5)
    print(f"square p=3: arrows={len(st.arrows)} signs={[a.sign for a in st.arrows]}")
    print(f"  leading h power {power}, nonzero coefficients {len(coeffs)}")
    tensor = to_tensor(st, Lattice("square2d", (8, 8)))
    for rot in (1, -1):
        for mir in (1, -1):
            g = point_group("d4", "square2d", {"rotation": rot, "mirror": mir})
            print(f"  D4 invariant with rotation {rot:+d}, mirror {mir:+d}: "
                  f"{is_g_invariant(tensor, g).ok}")


def jacobians3d() -> None:
    for preset, signs in (("o", None), ("oh", {"reflection": -1})):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f = build_stencil(FCC_BASE, point_group(preset, "fcc3d", signs), kind="fcc3d")
            c = build_stencil(CUBIC_BASE, point_group(preset, "cubic3d", signs), kind="cubic3d")
        print(f"{preset} {signs}: fcc arrows={len(f.arrows)} terms={f.term_count}; "
              f"cubic arrows={len(c.arrows)} terms={c.term_count}; "
              f"ratio={len(c.arrows) / len(f.arrows):g}")


if __name__ == "__main__":
    square()
    jacobians3d()
