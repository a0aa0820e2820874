"""Exact symbolic engine for flag Pfaffian systems."""

__version__ = "0.1.0"

from .algebra import (  # noqa: F401
    QQ,
    Chart,
    ChartMismatchError,
    CodeError,
    ContractViolation,
    DegenerateSystemError,
    DomainError,
    FlagError,
    Poly,
    PolyMatrix,
    TruncationError,
    parse_poly,
    solve_linear_rational,
)
from .calculus import (  # noqa: F401
    OneForm,
    TwoForm,
    VectorField,
    exterior_derivative,
    interior_product,
    lie_bracket,
    lie_derivative,
    parse_one_form,
    parse_vector_field,
    reduce_mod_system,
    wedge,
)
from .models import (  # noqa: F401
    FlagCode,
    PseudoNormalForm,
    SingularLocus,
    enumerate_codes,
    enumeration_report,
    generate_model,
    parse_code,
    singular_locus,
    to_elementary,
)
from .pfaffian import (  # noqa: F401
    CharReport,
    DerivedFlag,
    GrowthVector,
    PfaffianSystem,
    char_signature,
    char_system_generic,
    characteristic_report,
    derived_flag,
    derived_system,
    intersect,
    is_integrable,
    json_report,
    small_growth_vector,
)
