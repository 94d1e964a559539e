"""Pricing games between wireless access points coupled by interference."""

__version__ = "0.1.0"

from .equilibria import (
    EquilibriumReport,
    best_response,
    br_iterate,
    duopoly,
    monopoly_pd,
    monopoly_search,
    monopoly_uniform,
    unilateral_gain,
)
from .errors import ConfigError, HypothesisViolated, ParseError, PricingError, ValidationError
from .lcp import LcpInstance, LcpSolution, assemble_lcp, is_p_matrix, solve_lcp, solve_lcp_enumerate, solve_lcp_lemke
from .market import DemandCurve, InterferenceMatrix, Market, RawChannelModel, build_market, from_sinr, weak_interference_check
from .metrics import efficiency, pocp, pocp_closed_form, pocs, pocs_closed_form, verify_bounds, welfare
from .wardrop import (
    classify_region,
    count_equilibria,
    demand_branches,
    demand_crossings,
    total_demand,
    wardrop_equilibrium,
    wardrop_residual,
)
