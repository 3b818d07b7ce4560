"""Exact spectral invariants of action-filtered chain complexes over Z, Q and Z/m."""

from .abelian import (
    FgAbelianGroup,
    GroupHom,
    ext_map,
    ext_object,
    hom_cokernel,
    hom_image,
    hom_kernel,
    image_lattices_equal,
    normal_form,
)
from .complex import (
    INF,
    ComplexFormatError,
    FilteredComplex,
    Generator,
    RandomParams,
    dual_complex,
    fixture_e1,
    fixture_e2,
    random_complex,
    sublevel,
    validate,
)
from .homology import (
    HomologyClass,
    NotACycle,
    change_ring_class,
    class_from_chain,
    generator_classes,
    homology,
    induced_map,
)
from .linalg import IntMatrix, Matrix, kernel_basis, lattice_membership, smith_normal_form, solve_linear
from .rings import QQ, ZZ, Ring, Zmod, parse_ring
from .spectral import (
    pd_pairing,
    spectral_depth,
    spectral_invariant,
    spectral_norm,
    torsion_depth,
    torsion_depth_all,
)

__version__ = "0.1.0"
