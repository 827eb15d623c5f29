
import pytest

from asp_testkit.model import Program
from asp_testkit.mutate import (
    ExhaustedLoci,
    InapplicableOp,
    MutationOp,
    OPERATOR_KINDS,
    UnsafeMutant,
    apply_op,
    enumerate_loci,
    generate_mutants,
    mutation_analysis,
    mutation_base_program,
)
from asp_testkit.parser import parse_unit
from asp_testkit.serialize import rule_to_text, serialize_program
from asp_testkit.solver import InternalBackend
from helpers import fixture_text

BACKEND = InternalBackend()


def coloring_rules() -> Program:
    unit = parse_unit("c.lp", fixture_text("coloring.lp"))
    return mutation_base_program(unit)


# ---------------------------------------------------------------------------
# Single operators
# ---------------------------------------------------------------------------

def test_delete_rule():
    p = coloring_rules()
    mutated = apply_op(p, MutationOp("deleteRule", 1))
    assert len(mutated.rules) == 1
    assert mutated.rules[0] == p.rules[0]


def test_delete_literal_keeps_safety_or_raises():
    p = parse_unit("t.lp", "q(1). p(X) :- q(X), r(X).").program
    mutated = apply_op(p, MutationOp("deleteLiteral", 1, "body", 1))
    assert rule_to_text(mutated.rules[1]) == "p(X) :- q(X)."
    with pytest.raises(UnsafeMutant):
        # removing q(X) from p(X) :- q(X) leaves X unbound
        apply_op(parse_unit("t.lp", "p(X) :- q(X).").program,
                 MutationOp("deleteLiteral", 0, "body", 0))


def test_swap_terms_on_coloring_constraint():
    p = coloring_rules()
    mutated = apply_op(p, MutationOp("swapTerms", 1, "body", 1, (0, 1)))
    assert rule_to_text(mutated.rules[1]) == ":- edge(X,Y), col(C,X), col(Y,C)."
    # the result still parses back to the same AST
    assert parse_unit("rt.lp", serialize_program(mutated)).program == mutated


def test_add_default_negation_unsafe_is_rejected():
    p = parse_unit("t.lp", "reached(Y) :- reached(X), inCycle(X,Y).").program
    with pytest.raises(UnsafeMutant):
        apply_op(p, MutationOp("addDefaultNegation", 0, "body", 1))


def test_add_default_negation_on_ground_atom():
    p = parse_unit("t.lp", "a. b :- a.").program
    mutated = apply_op(p, MutationOp("addDefaultNegation", 1, "body", 0))
    assert rule_to_text(mutated.rules[1]) == "b :- not a."


def test_swap_default_negation_flips_both_ways():
    p = parse_unit("t.lp", "a. b :- not a.").program
    mutated = apply_op(p, MutationOp("swapDefaultNegation", 1, "body", 0))
    assert rule_to_text(mutated.rules[1]) == "b :- a."


def test_change_math_operator_adjacency():
    p = parse_unit("t.lp", ":- q(X), q(Y), X <> Y. q(1).").program
    mutated = apply_op(p, MutationOp("changeMathOperators", 0, "body", 2))
    assert rule_to_text(mutated.rules[0]) == ":- q(X), q(Y), X = Y."


def test_change_aggregate_guard_adjacency():
    p = parse_unit("t.lp", "q(1). :- #count{X : q(X)} = 0.").program
    mutated = apply_op(p, MutationOp("changeAggregates", 1, "body", 0))
    assert rule_to_text(mutated.rules[1]) == ":- #count{X : q(X)} != 0."


def test_rename_predicate_same_arity_target():
    p = coloring_rules()
    mutated = apply_op(p, MutationOp("renamePredicates", 1, "body", 1, ("edge",)))
    assert rule_to_text(mutated.rules[1]) == ":- edge(X,Y), edge(X,C), col(Y,C)."


def test_rename_predicate_fresh_when_no_peer():
    p = parse_unit("t.lp", "only(1,2).").program
    loci = enumerate_loci(p, ["renamePredicates"])
    assert loci == [MutationOp("renamePredicates", 0, "head", 0, ("only_m0",))]


def test_inapplicable_locus():
    p = parse_unit("t.lp", "a.").program
    with pytest.raises(InapplicableOp):
        apply_op(p, MutationOp("deleteLiteral", 0, "body", 0))


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def test_generate_delete_rule_mutants_cover_both_loci():
    p = coloring_rules()
    mutants = generate_mutants(p, ["deleteRule"], 2, seed=7)
    programs = {m.program for m in mutants}
    assert programs == {Program((p.rules[0],)), Program((p.rules[1],))}


def test_generate_is_deterministic():
    p = coloring_rules()
    a = generate_mutants(p, list(OPERATOR_KINDS), 6, seed=99)
    b = generate_mutants(p, list(OPERATOR_KINDS), 6, seed=99)
    assert [serialize_program(m.program) for m in a] == \
           [serialize_program(m.program) for m in b]
    assert [m.ops for m in a] == [m.ops for m in b]


def test_generate_exhausted_loci():
    p = parse_unit("t.lp", "a.").program  # aggregate-free
    with pytest.raises(ExhaustedLoci) as exc:
        generate_mutants(p, ["changeAggregates"], 1, seed=1)
    assert exc.value.mutants == []


def test_generated_mutants_are_valid_and_distinct():
    p = mutation_base_program(parse_unit("h.lp", fixture_text("hamiltonian_mutation.lp")))
    for seed in (1, 5, 23):
        mutants = generate_mutants(p, list(OPERATOR_KINDS), 10, seed=seed)
        seen = {serialize_program(p)}
        for m in mutants:
            text = serialize_program(m.program)
            assert text not in seen
            seen.add(text)
            reparsed = parse_unit("m.lp", text).program  # parses and is safe
            assert reparsed == m.program


def test_higher_order_mutants():
    p = coloring_rules()
    mutants = generate_mutants(p, ["swapTerms", "renamePredicates"], 3, seed=4,
                               ops_per_mutant=2)
    assert all(len(m.ops) == 2 for m in mutants)


# ---------------------------------------------------------------------------
# Kill analysis
# ---------------------------------------------------------------------------

def test_original_program_is_never_killed():
    unit = parse_unit("c.lp", fixture_text("coloring_mutation.lp"))
    report = mutation_analysis(unit, [], BACKEND)
    assert report.baseline_passed


def test_baseline_failure_refuses_analysis():
    unit = parse_unit("h.lp", fixture_text("hamiltonian_bug.lp"))
    base = mutation_base_program(unit)
    mutants = generate_mutants(base, ["deleteRule"], 1, seed=1)
    report = mutation_analysis(unit, mutants, BACKEND)
    assert not report.baseline_passed
    assert report.outcomes == []


def test_deleting_edge_constraint_is_killed_by_exact_count():
    unit = parse_unit("c.lp", fixture_text("coloring_mutation.lp"))
    base = mutation_base_program(unit)
    # rule index 1 is the edge constraint
    mutants = [m for m in generate_mutants(base, ["deleteRule"], 2, seed=7)
               if len(m.program.rules) == 1 and not m.program.rules[0].is_constraint()]
    report = mutation_analysis(unit, mutants, BACKEND)
    (outcome,) = report.outcomes
    assert outcome.status == "killed"
    assert any("trueInExactly" in label for label in outcome.killed_by)


def test_shipped_mutants_all_killed():
    configs = [
        ("coloring_mutation.lp",
         ["deleteRule", "deleteLiteral", "addDefaultNegation", "swapTerms",
          "renamePredicates"], 3),
        ("hamiltonian_mutation.lp", list(OPERATOR_KINDS), 19),
    ]
    for name, kinds, seed in configs:
        unit = parse_unit(name, fixture_text(name))
        base = mutation_base_program(unit)
        mutants = generate_mutants(base, kinds, 8, seed=seed)
        report = mutation_analysis(unit, mutants, BACKEND)
        assert report.baseline_passed
        assert report.all_killed(), [o.mutant.describe_ops() for o in report.outcomes
                                     if o.status != "killed"]
