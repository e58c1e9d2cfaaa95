"""Valuation networks over precise PMFs and interval credal sets."""

from .algebra import (combine, combine_credal, combine_credal_vacuous, combine_pmf, eliminate,
                      extend, extend_credal, extend_pmf, identity, marginalize,
                      marginalize_credal, marginalize_pmf, vacuous)
from .core import (Domain, IntervalValuation, PmfValuation, Variable, check_coherence,
                   config_decode, config_encode, enumerate_vertices, make_domain, make_variable,
                   tighten_to_reachable)
from .errors import (CoherenceError, CredalNetError, DomainError, EmptyCredalSet, InvalidRule,
                     InvalidState, KindMismatch, OrderError, ParseError, SolverError,
                     ThresholdExceeded, TotalConflict, UnsatisfiableRule)
from .evaluation import MarginalReport, compare, containment, distance_D
from .fileformat import format_network, parse_network, read_intervals
from .network import ValuationNetwork, build_join_tree, default_order, fuse
from .optim import SolverConfig
from .rules import RuleSpec, compile_rule, satisfying_set

__version__ = "0.1.0"
