"""Vision applications: fundamental matrix, correspondence association, self-calibration."""

from .association import (
    AssociationProblem,
    build_association,
    count_correct,
    extract_matches,
    lambda_auto,
    simulate_association,
    solve_association,
    spectral_solution,
)
from .fundmat import (
    CorrespondenceSet,
    FundmatResult,
    build_fundmat_design,
    eight_point,
    epipolar_distance,
    gen_two_view,
    hartley_normalize,
    pgs_fundmat,
    reprojection_error,
)
from .geometry import NormalizationTransform, procrustes_error
from .selfcal import (
    ProjectiveCameraSet,
    SelfCalResult,
    build_selfcal_design,
    gen_cms_scene,
    quasi_euclidean_rectify,
    reconstruction_error,
    selfcal_solve,
)
