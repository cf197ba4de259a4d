"""Star-deformed self-dual Yang-Mills on heavenly backgrounds: exact series algebra,
charge hierarchies, Lax pairs, hidden symmetries and a numerical Riemann-Hilbert solver."""

__version__ = "0.1.0"

from .background import (
    KahlerBackground,
    build_background,
    cubic_background,
    flat_background,
    verify_asd_basis,
)
from .contour import Contour, ContourSeries
from .errors import *  # noqa: F401,F403
from .gauge import ConnectionData, curvature, gauge_transform, pure_gauge, sdym_residual, yang_residual
from .hierarchy import (
    ChargeTower,
    ThetaField,
    current_divergence,
    hierarchy_generate,
    integrate_alpha,
    lme_residual,
    master_residual_density,
    me_residual,
    theta_star,
)
from .hilbert import (
    birkhoff_factorize,
    cauchy_transform,
    extract_connection,
    extract_theta,
    hilbert_solve,
    plemelj_boundary,
)
from .lax import (
    dressing_extract,
    ell_apply,
    lax_defect,
    solve_underline_wavefunction,
    symmetry_bracket_check,
    symmetry_delta,
    transition_function,
    wavefunction,
)
from .ring import Poly, RingElement, gaussian
from .spectral import SpectralSeries, TwistorFunctionSpec
from .star import (
    MOYAL,
    GradedSeries,
    adjoint_action,
    series_exp,
    series_inverse,
    series_log,
    star_bracket,
    star_multiply,
)
