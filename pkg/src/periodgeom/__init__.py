"""Period-domain geometry toolkit.

Quadratic spaces with exact and floating arithmetic, oriented positive
2-planes and their null-vector correspondence, twistor curves and Cauchy
divisors, the indefinite Kähler structure of the period space, integral
lattice density experiments, and compatible complex structures on tori.
"""

__version__ = "0.1.0"

from .quadspace import (
    DEFAULT_TOL,
    DegenerateFormError,
    NullLineError,
    QuadraticSpace,
    Signature,
    Subspace,
    is_positive_definite,
    orthogonal_complement,
    orthogonal_frame,
    project_along,
    read_gram,
    restrict_form,
    restriction_is_nondegenerate,
    signature,
)
from .posgrass import (
    GraphChart,
    NonPositivePlaneError,
    OrientedPositivePlane,
    PositiveNullVector,
    disc_coords,
    disc_embed,
    graph_plane,
    null_to_plane,
    plane_to_null,
    random_positive_plane,
    retract,
    rotate90,
    standard_disc_frame,
)
from .perigeo import (
    CauchyDivisor,
    CauchyPencil,
    FujikiForm,
    IntersectionKind,
    NotFujikiError,
    TwistorCurve,
    bbf_explicit,
    cauchy_contains,
    cauchy_through,
    fujiki_polarize,
    is_period_point,
    monomial_form,
    period_image_rank,
    power_cup,
    power_form,
    random_twistor_curve,
    twistor_cauchy_intersection,
    twistor_point,
    twistor_through,
)
from .lorkahler import (
    FS_CONSTANT,
    FormSample,
    Isometry,
    NotImmersionWarning,
    TangentVector,
    closedness_residual,
    closedness_suite,
    fubini_study_ratio,
    fubini_study_suite,
    invariance_residual,
    invariance_suite,
    metric_at,
    omega_at,
    omega_matrix_at,
    pullback_form,
    random_isometry,
    tangent_space_signature,
)
from .lattice_density import (
    DiscContainedError,
    HolomorphicDisc,
    IntegralLattice,
    density_csv,
    density_report,
    disc_from_curve,
    disc_hits,
    enumerate_positive,
    primitive_test,
    random_disc,
    standard_lattice,
)
from .torusmod import (
    darboux_basis,
    is_cau_member,
    is_complex_structure,
    is_orthogonal_structure,
    orientation_class,
    siegel_point,
    standard_complex_structure,
    standard_symplectic,
    tangent_dimension,
    transversality_defect,
    two_out_of_three,
)
