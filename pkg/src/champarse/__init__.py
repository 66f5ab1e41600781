"""Concurrent categorial assembly.

Lexical items are typed lambda molecules; verbs spawn membranes that scope
case domination; molecules bind into sentence structures by cost-scored
feature unification, with binder-reordering combinators keeping the order of
composition free and a strict cost/tie-break guard keeping it terminating.
"""

from .cost import Cost, CostModel, DEFAULT_TABLE, INF, ONE, ZERO, lookup_cost
from .dag import (
    AvmError,
    FeatureStructure,
    UnifierRecord,
    UnifyResult,
    subsumes,
    undo,
    unify,
)
from .engine import (
    Engine,
    EngineConfig,
    EngineError,
    Membrane,
    MigrationError,
    Molecule,
    RunResult,
    Solution,
    TraceEvent,
    final_assignment,
    render_configuration,
    render_membrane,
    render_solution,
    render_state,
    replay,
    run,
    total_cost,
)
from .lexicon import (
    Lexicon,
    LexiconEntry,
    LexiconError,
    SegmentationError,
    SemConstant,
    join,
    load,
    load_core,
    load_derived,
    lookup,
    molecules_for_sentence,
    segment,
)
from .oracle import OracleAssignment, OracleBudgetError, minimal_complete, oracle_enumerate
from .terms import (
    App,
    ApplicationTypeError,
    ArityError,
    CatType,
    Const,
    DecompositionError,
    Lam,
    TArrow,
    TAtom,
    TVar,
    TypeContext,
    TypeInferenceError,
    Var,
    abstract_argument,
    alpha_eq,
    arrow,
    comb_B,
    comb_C,
    infer,
    infer_abs,
    infer_app,
    normalize,
    term_from_text,
    term_to_text,
    unify_types,
)
from .cli import NoAnswerError, answer_agent, control_applied, main, run_sentence

__version__ = "0.1.0"
