"""CDF-based scheduling over random beamforming in a multicell downlink.

Analytic per-beam SINR laws, the exact individual sum rate, a Monte Carlo
scheduler and large-K0 scaling checks.
"""

__version__ = "0.1.0"

from .analytic import SinrDistribution, cdf_sinr, pdf_sinr, solve_level
from .rate import individual_sum_rate, individual_sum_rate_closed, individual_sum_rate_quadrature
from .scenario import Scenario, ScenarioError, load_scenario
from .scheduler import schedule, simulate

__all__ = [
    "Scenario",
    "ScenarioError",
    "SinrDistribution",
    "cdf_sinr",
    "individual_sum_rate",
    "individual_sum_rate_closed",
    "individual_sum_rate_quadrature",
    "load_scenario",
    "pdf_sinr",
    "schedule",
    "simulate",
    "solve_level",
]
