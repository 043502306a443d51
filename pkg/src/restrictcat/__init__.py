"""Finite restriction categories and the constructions around them."""

from .builders import (
    Bounds,
    Built,
    build_finset,
    build_inverse_symmetric,
    build_par,
    build_set_p,
    build_stab_op,
    build_trivial,
    generated_subcategory,
    group_category,
    injective_morphisms,
    random_restriction_category,
)
from .core import (
    CategoryError,
    FinCat,
    FinFunctor,
    Span,
    ValidationReport,
    find_isomorphism,
    is_mono,
    pullback,
    validate_category,
    validate_functor,
)
from .cli import main as cli_main
from .fibration import (
    LocallyPosetal2Cat,
    TwoFunctor,
    gamma,
    gamma_functor,
    is_discrete_fibration_map,
    is_discrete_fibration_poset,
    is_local_discrete_fibration,
    lift_restriction,
)
from .fundamental import (
    FundamentalResult,
    TotalNatTransf,
    comparison_phi,
    diagonal_filler,
    factorize,
    fundamental_functor,
    is_hyperconnected,
    is_localic,
    lax_filler,
    terminal_transformation,
)
from .io import Document, ParseError, load, parse, read_file, serialize, write_file
from .join import (
    JoinStructure,
    is_cover,
    is_etale_map,
    is_join_functor,
    is_locally_etale,
    join_of,
    lift_join,
    verify_join,
)
from .ranges import (
    RangeStructure,
    derive_range,
    enumerate_range_operators,
    is_range_functor,
    range_preservation_via_bc,
    verify_range,
)
from .restriction import (
    AxiomReport,
    RestrictionCat,
    compatible,
    is_inverse_category,
    is_total,
    leq,
    partial_inverse,
    restriction_idempotents,
    verify_restriction,
)
from .semilattice import (
    MeetSemilattice,
    StableMap,
    StabSquare,
    beck_chevalley,
    is_frame,
    local_left_adjoint,
    preserves_joins,
    stab_op_bar,
    validate_semilattice,
    validate_stable,
)

__version__ = "0.1.0"
