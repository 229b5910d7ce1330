"""Weighted section integration for isometric actions on matrix spaces.

The package reduces integrals over a matrix space carrying an
isometric action of SO(n), SU(n) or Sp(n) to weighted integrals over a
minimal section, provides the weight function (generic and closed
form), exact Haar and ensemble sampling, deterministic Monte Carlo
engines for both sides of the reduction identity, and quotient-volume
bookkeeping.
"""

from .fields import ScalarField
from .matrices import (
    DimensionError,
    MatK,
    QrFactors,
    abs_det_between,
    det_modulus,
    eye,
    from_real_vector,
    gaussian,
    inner,
    mat,
    qr,
    realified_det,
    to_real_vector,
    zeros,
)
from .groups import (
    Family,
    GroupElement,
    GroupSpec,
    adjoint,
    algebra_basis,
    exp_map,
    haar_sample,
    torus_basis,
    torus_point,
)
from .actions import (
    ActionSpec,
    AlgebraSplit,
    ConjugationAction,
    DirectSumAction,
    RegularityClass,
    SectionFrame,
    act,
    action_from_json,
    action_to_json,
    algebra_split,
    canonical_coordinate,
    classify_point,
    embed_section,
    isotropy_algebra,
    killing_field,
    normalizer_sample,
    orbit_normal,
    orbit_tangent,
    random_ambient_point,
    random_regular_section_point,
    random_section_point,
    reduce_to_section,
    section_coordinate,
    section_frame,
    torus_angles,
)
from .weights import (
    OrbitMapDifferential,
    WeightValue,
    delta_d,
    delta_e_closed_form,
    delta_e_generic,
    orbit_map_differential,
    orbit_volume,
    orbit_volume_ratio,
    weight_value,
)
from .mc import McEstimate, agree, mc_run
from .integrate import (
    CalibrationReport,
    ContractViolation,
    LpIsometryReport,
    TestFunction,
    calibrate_vol_gn,
    check_invariance,
    custom_test_function,
    integrate_direct,
    integrate_reduced,
    lp_isometry_check,
    make_test_function,
)
from .volumes import (
    VolumeTable,
    group_volume,
    torus_volume,
    vol_gh_estimate,
    volume_table,
    w_group_volume,
    weyl_group_order,
)
from .ensembles import EnsembleSpec, HistogramComparison, compare_densities, sample_ensemble
from .checks import CheckResult, all_passed, run_action_checks

__version__ = "0.1.0"
