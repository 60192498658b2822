"""Finitely additive measures, partition integrals and certified Riemann integration."""
from .algebra import (
    Element,
    Filter,
    FiniteAlgebra,
    GroundSet,
    PreimageHom,
    enumerate_ultrafilters,
    make_algebra,
    preimage_hom,
)
from .errors import (
    AdditivityFailure,
    CoverageFailure,
    FamintError,
    HypothesisViolation,
    InvalidFunction,
    InvalidInput,
    NonTrivialityError,
    PreconditionFailure,
    ZeroMeasureError,
)
from .expr import Expression
from .extend import InnerUniverse, Universe, build_sandwich, extend_function, transfer_report, uniqueness_check
from .fam import (
    Fam,
    classify,
    conditional_fam,
    counting_fam,
    fam_leq,
    fam_to_filter,
    filter_to_fam,
    measure_identities,
    pushforward_fam,
    restrict_fam,
    sigma_centered_fam,
    uniform_fam,
    validate_fam,
)
from .function import BoundedFn
from .integral import FinitePartition, IntegralReport, darboux_sums, integrate
from .interval import Interval, Real
from .rect import Box, Lebesgue, RectAlgebra, RectUnion, canonicalize, parse_box, restricted_algebra
from .riemann import StepFunction, grid_box_check, rationalize_step, riemann_integrate, step_integral

__version__ = "0.1.0"
