"""geflab: simulation and verification of the point statistics of Gaussian
entire functions and Gaussian-window white-noise spectrograms.

Two independent tracks are provided and cross-validated:

* direct Monte Carlo (sample the random field, locate and classify its zeros
  and critical points),
* closed forms and quadrature of the counting integrals for intensities and
  ordinate-value densities.

All intensities are reported per unit of the measure dz/pi, under which the
zero set of the base field has intensity exactly 1.
"""

__version__ = "0.1.0"

from .backend import BACKEND_NAME
from .special import (
    KernelId,
    UnsupportedOrderError,
    bi_entire,
    hermite_fn,
    kernel_eval,
    kernel_eval_log,
    laguerre,
    landau,
    weyl_heisenberg_hermite,
)
from .fields import (
    CoefficientDraw,
    FieldJet,
    eval_bientire,
    eval_jet,
    eval_raised,
    sample_coefficients,
    truncation_order,
)
from .stft import SampledSignal, TruncationWarning, bargmann, stft
from .points import (
    OracleFailure,
    PointRecord,
    argument_principle_count,
    classify,
    find_critical_points,
    find_holomorphic_critical,
    find_zeros,
)
from .kacrice import (
    JetCovariance,
    build_covariance,
    density_p,
    edelman_kostlan_profile,
    hermite_window_zero_intensity,
    intensity_quadrature,
    ordinate_density,
    ordinate_density_quadrature,
)
from .experiments import (
    DensityHistogram,
    IntensityEstimate,
    empirical_kernel_check,
    estimate_intensity,
    ordinate_histogram,
)
from .flow import BasinReport, basin_analysis

__all__ = [
    "BACKEND_NAME",
    "BasinReport",
    "CoefficientDraw",
    "DensityHistogram",
    "FieldJet",
    "IntensityEstimate",
    "JetCovariance",
    "KernelId",
    "OracleFailure",
    "PointRecord",
    "SampledSignal",
    "TruncationWarning",
    "UnsupportedOrderError",
    "argument_principle_count",
    "bargmann",
    "basin_analysis",
    "bi_entire",
    "build_covariance",
    "classify",
    "density_p",
    "edelman_kostlan_profile",
    "empirical_kernel_check",
    "estimate_intensity",
    "eval_bientire",
    "eval_jet",
    "eval_raised",
    "find_critical_points",
    "find_holomorphic_critical",
    "find_zeros",
    "hermite_fn",
    "hermite_window_zero_intensity",
    "intensity_quadrature",
    "kernel_eval",
    "kernel_eval_log",
    "laguerre",
    "landau",
    "ordinate_density",
    "ordinate_density_quadrature",
    "ordinate_histogram",
    "sample_coefficients",
    "stft",
    "truncation_order",
    "weyl_heisenberg_hermite",
    "__version__",
]
