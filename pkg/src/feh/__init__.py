"""A workbench for a fine-grained call-by-value calculus with deep effect
handlers: parsing and printing, small-step evaluation, a simple type system,
an answer-type-modification type system with checkable derivations, the
derivation-directed CPS transformation into a handler-free language,
reachability checking, and two-register Minsky machines.
"""

from .atm import (
    AtmTypeError,
    Deriv,
    SubDeriv,
    check_atm,
    check_atm_or_raise,
    check_program_atm,
    subtype,
    validate_derivation,
    validate_sub,
)
from .cps import CpsError, cps_program, cps_sub, cps_term, cps_type, static_apply
from .errors import DynamicTypeError, RouteDisagreement
from .evaluator import (
    KERNEL,
    BudgetExhausted,
    CycleDetected,
    EvalStats,
    Returned,
    Stuck,
    evaluate,
    step,
    trace,
)
from .library import load_machine, load_program
from .minsky import Machine, compile_mm, parse_machine, simulate
from .parser import ParseError, ProgramFile, parse, parse_file, parse_term, parse_type
from .printer import print_program, print_term
from .reach import ReachVerdict, decide_reachability, typability_matrix
from .simple_check import StTypeError, check_st, check_st_or_raise
from .terms import alpha_equivalent, free_vars, substitute

__version__ = "0.1.0"

__all__ = [
    "AtmTypeError",
    "BudgetExhausted",
    "CpsError",
    "CycleDetected",
    "Deriv",
    "DynamicTypeError",
    "EvalStats",
    "KERNEL",
    "Machine",
    "ParseError",
    "ProgramFile",
    "ReachVerdict",
    "Returned",
    "RouteDisagreement",
    "StTypeError",
    "Stuck",
    "SubDeriv",
    "alpha_equivalent",
    "check_atm",
    "check_atm_or_raise",
    "check_program_atm",
    "check_st",
    "check_st_or_raise",
    "compile_mm",
    "cps_program",
    "cps_sub",
    "cps_term",
    "cps_type",
    "decide_reachability",
    "evaluate",
    "free_vars",
    "load_machine",
    "load_program",
    "parse",
    "parse_file",
    "parse_machine",
    "parse_term",
    "parse_type",
    "print_program",
    "print_term",
    "simulate",
    "static_apply",
    "step",
    "subtype",
    "substitute",
    "trace",
    "typability_matrix",
    "validate_derivation",
    "validate_sub",
]
