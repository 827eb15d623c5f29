"""Unit testing, solving and mutation analysis for answer set programs."""

__version__ = "0.1.0"

from .model import (
    Assertion,
    Atom,
    BestModelCost,
    Comparison,
    Constant,
    ConstraintForAll,
    ConstraintInAtLeast,
    ConstraintInAtMost,
    ConstraintInExactly,
    CountAggregate,
    Integer,
    Literal,
    NoAnswerSet,
    Program,
    Rule,
    TestSpec,
    TestSuite,
    TrueInAll,
    TrueInAtLeast,
    TrueInAtMost,
    TrueInExactly,
    Variable,
    WeakConstraint,
    fresh_predicate,
    herbrand_universe,
    is_safe,
)
from .parser import (
    ParseError,
    ParseFailure,
    SourceUnit,
    merge_units,
    parse_assertion_list,
    parse_unit,
)
from .serialize import atom_to_text, rule_to_text, serialize_program
from .oracle import (
    AnswerSet,
    CapacityExceeded,
    GroundProgram,
    SolveResult,
    UnsupportedAggregate,
    enumerate_answer_sets,
    ground,
    is_answer_set,
    optimal_answer_sets,
    penalty,
    reduct,
)
from .solver import (
    AutoBackend,
    BackendConfig,
    ExternalBackend,
    InternalBackend,
    RawRun,
    SpawnFailure,
    parse_competition_output,
    select_backend,
    solve,
)
from .engine import (
    AssertionResult,
    DanglingReference,
    SuiteReport,
    TesterProgram,
    TestResult,
    build_tester,
    evaluate,
    resolve_scope,
    run_suite,
    run_test,
)
from .mutate import (
    ExhaustedLoci,
    KillReport,
    Mutant,
    MutationOp,
    apply_op,
    generate_mutants,
    mutation_analysis,
)
