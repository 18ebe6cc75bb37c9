"""Numerical study of generalized Hilbert operators induced by measures on [0, 1)."""
from .analytic import PowerSeries, test_function_log, test_function_power
from .measure import AtomList, Mixture, PowerLogDensity, carleson_report, moment_table
from .operator import HankelOperator, apply_coeff, apply_integral, essnorm_bracket

__all__ = [
    "AtomList", "HankelOperator", "Mixture", "PowerLogDensity", "PowerSeries",
    "apply_coeff", "apply_integral", "carleson_report", "essnorm_bracket",
    "moment_table", "test_function_log", "test_function_power",
]
