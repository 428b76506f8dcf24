"""Chase engine for existential rules and a k-boundedness decision procedure.

Implements the oblivious, semi-oblivious, restricted and equivalent chase
variants with full rank/ancestor bookkeeping, restriction and breadth-first
completion of derivations, and a sound-and-complete decider for k-boundedness
under the oblivious, semi-oblivious and restricted chases with witness
extraction.
"""

from .boundedness import (
    BoundednessVerdict,
    BoundedQuery,
    Witness,
    check_k_bounded,
    enumerate_representative_factbases,
    oracle_check_k_bounded,
    shrink_witness,
)
from .budget import Budget
from .dot import export_dot
from .engine import (
    ChaseResult,
    ChaseVariant,
    Derivation,
    DerivationStep,
    HaltReason,
    NamingMode,
    Trigger,
    VerifyReport,
    ancestors,
    breadth_first_completion,
    depth,
    enumerate_breadth_first_derivations,
    enumerate_triggers,
    extend,
    is_applicable,
    restrict,
    run_breadth_first,
    run_random_exhaustive,
    safe_extension,
    verify_derivation,
)
from .errors import (
    BudgetExceededError,
    ChaseError,
    KeepNotSubsetError,
    NotApplicableError,
    ReplayFailureError,
    UnknownTargetError,
    UnknownTriggerError,
    VariantUnsupportedError,
    VersionMismatchError,
)
from .homomorphism import (
    all_homomorphisms,
    canonical_form,
    core,
    find_homomorphism,
    homomorphic_equivalent,
    is_isomorphic,
)
from .parser import ParseResult, parse_atom, parse_kb, parse_term, serialize_kb
from .rules import (
    Diagnostic,
    KnowledgeBase,
    Rule,
    RuleSet,
    derive_rule_metadata,
    ruleset_stats,
    validate_kb,
)
from .terms import (
    Atom,
    Constant,
    FrontierKey,
    GeneratedNull,
    InitialNull,
    Null,
    Substitution,
    Term,
    TriggerKey,
    Variable,
    atom,
)
from .trace import deserialize_trace, serialize_trace, serialize_witness

__all__ = [name for name in dir() if not name.startswith("_")]
