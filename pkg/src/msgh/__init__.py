"""Multiple scaled generalised hyperbolic and NIG distributions with EM fitting."""

__version__ = "0.1.0"

from .diagnostics import ChiCurve, chi_bounds, chi_q
from .distributions import (
    GhParams,
    MsghParams,
    canonicalize,
    canonicalize_gh,
    gh_cf,
    gh_cov,
    gh_log_density,
    gh_mean,
    gh_sample,
    marginal_pdf,
    msgh_cf,
    msgh_cov,
    msgh_log_density,
    msgh_mean,
    msgh_sample,
    msnig_log_density,
    rotation_2d,
)
from .em import (
    EmConfig,
    EStepStats,
    FitReport,
    MixtureModel,
    TildeParams,
    back_transform,
    bic,
    e_step,
    fit_mixture,
    fit_msnig,
    fit_nig_baseline,
    init_partition,
    n_parameters,
    responsibilities,
    to_tilde,
    trimmed_kmeans,
    update_gamma,
    update_location_skew,
    update_orientation,
    update_shape,
)
from .estimators import MSNIGMixture, NIGMixture
from .exceptions import (
    BoundaryParameterError,
    DegenerateDataError,
    DomainError,
    EmptyComponentError,
    UnsupportedOrderError,
)
from .gig import GigParams, gig_cf, gig_log_pdf, gig_moment, gig_pdf, gig_sample
from .special import bessel_k, bessel_k_ratio, log_bessel_k
