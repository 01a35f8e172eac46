"""Conservative finite differences from symmetrized skew tensors."""

from .lattice import GridFunction, Lattice, SiteIndex
from .skewtensor import (
    GeneralTensor,
    SkewTensor,
    bandwidth,
    contract,
    contract_partial,
    is_g_invariant,
    is_skew,
    modulate,
    symmetrize,
)
from .stencil import Arrow, Stencil, build_stencil, render_diagram, to_tensor
from .symmetry import SignedSymmetry, SymmetryGroup, generate_group, point_group

__all__ = [
    "Arrow", "GeneralTensor", "GridFunction", "Lattice", "SignedSymmetry", "SiteIndex",
    "SkewTensor", "Stencil", "SymmetryGroup", "bandwidth", "build_stencil", "contract",
    "contract_partial", "generate_group", "is_g_invariant", "is_skew", "modulate",
    "point_group", "render_diagram", "symmetrize", "to_tensor",
]
