"""Pricing downward-closed cones, coding games and their solvers."""

from ._kernels import BACKEND
from .capacity import CapacityResult, blahut_arimoto, info_capacity, minimax, requirement_value
from .channels import (
    AVCFKernel, BipartiteGraph, DMCKernel, GameChannel, adversarial, adversarial_feedback, avcf, bsc,
    build_channel, covering_channel, dmc, dmc_feedback, dual_channel, erasure, n_use_cone,
    requirement_cone,
)
from .cones import (
    Alphabet, Cell, ConeKernel, DCCone, contains_cone, contains_portfolio, degraded, dual, empty,
    equals_cone, from_generators, full, halfspace, intersection, is_informative, lazy_membership,
    minplus, noiseless, nonpositive, pushforward, robustify, semidirect_explicit, union,
)
from .errors import (
    DCGamesError, DualityViolation, InputError, NumericError, PreconditionError, ResourceError,
    SolverError, SynthesisError, UnsupportedRepresentation,
)
from .games import (
    CodingScheme, GameSpec, MartingaleTable, TeamStrategy, VerifyReport, check_zero_error_code,
    coding_feasible_by_degradedness, consistency_decoder, mail_insurance, synthesize_strategy,
    transform_acccg, verify_game, worst_case_error,
)
from .lp import LinearProgram, solve_lp
from .source import (
    SourceGameSpec, SourceStrategy, entropy, sanov_scheme, synthesize_source_strategy,
    verify_source_game,
)

__version__ = "0.1.0"
