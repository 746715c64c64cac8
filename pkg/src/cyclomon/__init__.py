"""Extension of n-cyclically monotone operators on finite graphs in R^d."""

__version__ = "0.1.0"

from .core import (BudgetExceeded, CyclomonError, DimensionError, ExtensionInstance,
                   LinearOperator, OperatorGraph, PreconditionWarning, Tolerances,
                   pairing, weight_matrix)
from .monotonicity import (MaxAffineFunction, MonotonicityReport, NotCyclicallyMonotone,
                           is_cyclically_monotone, is_n_monotone, rockafellar_potential,
                           verify_potential)
from .fitzpatrick import FitzEvaluation, candidate_test, eval_fitz, translate
from .conjugate import (AffinePieceSet, ConjugateValue, domain_sandwich_check,
                        duality_gap_report, enumerate_pieces, eval_conjugate, eval_f_star,
                        pairing_dominance_scan)
from .extension import (ExtensionResult, HypothesisReport, IterationLimit,
                        certify_extension, check_hypotheses, solve_extension)
from .serialize import InstanceError, load_instance, write_report

__all__ = [
    "BudgetExceeded", "CyclomonError", "DimensionError", "ExtensionInstance",
    "LinearOperator", "OperatorGraph", "PreconditionWarning", "Tolerances",
    "pairing", "weight_matrix",
    "MaxAffineFunction", "MonotonicityReport", "NotCyclicallyMonotone",
    "is_cyclically_monotone", "is_n_monotone", "rockafellar_potential", "verify_potential",
    "FitzEvaluation", "candidate_test", "eval_fitz", "translate",
    "AffinePieceSet", "ConjugateValue", "domain_sandwich_check", "duality_gap_report",
    "enumerate_pieces", "eval_conjugate", "eval_f_star", "pairing_dominance_scan",
    "ExtensionResult", "HypothesisReport", "IterationLimit", "certify_extension",
    "check_hypotheses", "solve_extension",
    "InstanceError", "load_instance", "write_report",
]
