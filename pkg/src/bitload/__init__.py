"""Robust bit loading over parallel Gaussian channels.

Greedy margin and BER optimizers, a Lagrangian continuous solver with
integer completion, robustness metrics and an exhaustive reference search.
"""
from .analytic import ContinuousSolution, asymptotic_rates, clipped_rates, generalized_secant, solve_continuous
from .ber import erfc, in_convex_domain, qam_ber, qam_ber_from_gap, snr_gap
from .channel import (
    ChannelSpec,
    SnrProfile,
    multipath_profile,
    profile_from_config,
    psdnr_db,
    rayleigh_profile,
    snr_profile,
    target_bitrate,
)
from .completion import CompletionReport, complete_by_greedy, complete_by_root, staircase_rate
from .greedy import Constraints, GreedyTrace, greedy_ber, greedy_margin, greedy_min_peak_power
from .metrics import (
    Allocation,
    RobustnessReport,
    dissimilarity,
    inverse_margin,
    peak_power,
    robustness_report,
    system_margin,
    weighted_ber,
)
from .oracle import OracleResult, exhaustive

__version__ = "0.1.0"
