"""Active learning of complete finite-state abstractions for finite-domain transition systems."""

__version__ = "0.1.0"

from .system import (CapacityError, Domain, FsaLearnError, SystemDefinitionError, TransitionSystem,
                     Valuation, VariableDecl, eval_predicate, initial_valuations, reachable_states,
                     step, successors)
from .dsl import DslError, SystemFile, load_system, parse_expr, parse_system, render_system
from .automaton import SymbolicNFA, Transition, accepts, equivalent_labels, to_dot
from .traces import (Provenance, TraceFormatError, TraceSet, generate_trace_set, read_traces, replays,
                     simulate, write_traces)
from .learner import LearnerConfig, abstract_alphabet, learn
from .conditions import (Condition, ConditionResult, alpha, condition_count, extract_conditions,
                         invariant_report, strengthen)
from .checker import (CheckerConfig, Inconclusive, Reachable, Spurious, check_condition, default_k,
                      is_spurious, trace_inclusion_oracle)
from .loop import LoopConfig, LoopReport, baseline_random, build_counterexample_traces, run, score_d

__all__ = [n for n in dir() if not n.startswith("_")]
