"""Convex subproblems, the SCA loops and the alternating optimizer."""

from .algorithms import (
    ScaConfig,
    SlotDecision,
    SlotTrace,
    SolveRecord,
    algorithm1_phase_schedule,
    algorithm2_beamforming,
    alternating_optimize,
    beamforming_only,
    feasible_start,
    finalize_schedule,
    initial_beamformers,
    mrt_directions,
    round_schedule,
    unit_modulus,
)
from .problems import SlotProblem, build_margin_beam, build_margin_phase, build_p5, build_p6, eh_values, margins, snr_values
from .surrogates import AffineMagnitude
from .verify import SurrogateReport, verify_surrogate

__all__ = [
    "AffineMagnitude",
    "ScaConfig",
    "SlotDecision",
    "SlotProblem",
    "SlotTrace",
    "SolveRecord",
    "SurrogateReport",
    "algorithm1_phase_schedule",
    "algorithm2_beamforming",
    "alternating_optimize",
    "beamforming_only",
    "build_margin_beam",
    "build_margin_phase",
    "build_p5",
    "build_p6",
    "eh_values",
    "feasible_start",
    "finalize_schedule",
    "initial_beamformers",
    "margins",
    "mrt_directions",
    "round_schedule",
    "snr_values",
    "unit_modulus",
    "verify_surrogate",
]
