"""Co-channel interference statistics and downlink spectral efficiency for OFDMA cellular systems.

Subpackages and modules
-----------------------
geometry
    Hexagonal layouts, mobile-station trajectories and link budgets.
cci
    Characteristic functions, closed-form densities and numerical inversion.
montecarlo
    Sampling of the received signal, histograms and binned KL distance.
capacity
    Full-CSI, Gaussian-approximation and mutual-information spectral efficiency.
cli
    The ``ccistat`` command-line harness.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .capacity import (
    CapacityReport,
    Estimate,
    capacity_report,
    diff_factors,
    i_csi,
    i_ga,
    i_p,
    i_p_mc_oracle,
)
from .cci import (
    CfEvaluator,
    GridSpec,
    InterferenceCf,
    NumericPdf,
    bessel_k0,
    cf_single_cci,
    cf_total,
    invert_cf,
    pdf_equal_power,
    pdf_single_cci,
    pdf_three_pair,
)
from .errors import (
    ConfigError,
    DegenerateGeometryError,
    InvalidArgumentError,
    InversionError,
    UndefinedRatioError,
)
from .geometry import LinkBudget, Scenario, edge_snr_noise, hex_layout, link_budget, trajectory
from .montecarlo import EmpiricalPdf, SampleBatch, empirical_pdf, kl_distance, sample

__all__ = [
    "BACKEND", "CapacityReport", "Estimate", "capacity_report", "diff_factors", "i_csi", "i_ga",
    "i_p", "i_p_mc_oracle", "CfEvaluator", "GridSpec", "InterferenceCf", "NumericPdf",
    "bessel_k0", "cf_single_cci", "cf_total", "invert_cf", "pdf_equal_power", "pdf_single_cci",
    "pdf_three_pair", "ConfigError", "DegenerateGeometryError", "InvalidArgumentError",
    "InversionError", "UndefinedRatioError", "LinkBudget", "Scenario", "edge_snr_noise",
    "hex_layout", "link_budget", "trajectory", "EmpiricalPdf", "SampleBatch", "empirical_pdf",
    "kl_distance", "sample",
]
