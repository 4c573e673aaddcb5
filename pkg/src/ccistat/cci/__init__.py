"""Interference laws: characteristic functions, inversion and closed forms."""

from .cf import CfEvaluator, InterferenceCf, cf_single_cci, cf_total, total_cf
from .closed_form import (
    equal_power_density,
    laplace_power_density,
    partial_fractions,
    pdf_equal_power,
    pdf_single_cci,
    pdf_three_pair,
    three_pair_coefficients,
    three_pair_density,
)
from .density import GridSpec, NumericPdf, default_grid
from .inversion import invert_cf
from .special import bessel_k0, k0_cell_average, k0_density, k0_integral

__all__ = [
    "CfEvaluator", "InterferenceCf", "cf_single_cci", "cf_total", "total_cf",
    "equal_power_density", "laplace_power_density", "partial_fractions",
    "pdf_equal_power", "pdf_single_cci", "pdf_three_pair", "three_pair_coefficients",
    "three_pair_density", "GridSpec", "NumericPdf", "default_grid", "invert_cf",
    "bessel_k0", "k0_cell_average", "k0_density", "k0_integral",
]
