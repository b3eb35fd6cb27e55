"""Slice regular functions of a quaternionic variable.

Quaternion arithmetic, star-polynomials, semiregular rational functions,
spherical Laurent expansions, Mittag-Leffler constructions and numerical
regularity checks.
"""

from .errors import (
    CenterMismatchError,
    DegreeCapError,
    DiscretenessError,
    FactorizationError,
    NotRegularError,
    OffSliceError,
    OrderBoundError,
    PoleError,
    SliceRegularError,
)
from .quaternion import (
    UNIT_I,
    UNIT_J,
    UNIT_K,
    ImaginaryUnit,
    Quaternion,
    SigmaBall,
    Sphere2,
    SymmetricShell,
    decompose,
    format_quaternion,
    omega,
    parse_quaternion,
    same_slice,
    sigma,
)
from .starpoly import StarPoly, evaluate, recenter, star_divide_linear, star_mul, star_pow
from .rational import PrincipalPart, SemiRational, principal_to_rational, taylor_truncate
from .spherical import (
    SphericalExpansion,
    extract_principal_part,
    probe_pole_order,
    r_operator_on_slice,
    spherical_coeffs,
    spherical_laurent,
)
from .mittag_leffler import (
    MLFunction,
    MLPrescription,
    build,
    eval_certified,
    example_paired,
    example_zsum,
)
from .verify import (
    check_affine_on_sphere,
    check_sigma_expansion,
    dbar_residual,
    regularity_report,
)

__version__ = "0.1.0"
