"""Deterministic submodular maximization via explicit state distributions."""
from .card import run as maximize_cardinality
from .distribution import WeightedDistribution, expectation, prob_not_containing, unify
from .errors import (
    AdversarialTraceError,
    CapacityError,
    InfeasibleError,
    InvalidInputError,
    SubmaxError,
    UnboundedError,
)
from .instances import load_instance, oracle_from_dict, random_submodular_table
from .oracle import (
    ValueOracle,
    brute_force_opt,
    check_nonnegative,
    check_submodular,
    make_coverage_function,
    make_cut_function,
    make_modular,
    make_table_function,
)
from .usm import run as maximize_unconstrained

__version__ = "0.1.0"
