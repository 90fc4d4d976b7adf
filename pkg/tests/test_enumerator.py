"""Tests for the match graph and the constant-delay span enumeration."""

import random

import pytest

from spanex.compiler import compile_regex, union_vsa
from spanex.enumerator import (
    EnumerationStats, build_match_graph, enumerate_graph, enumerate_spans,
)
from spanex.formula import parse_formula
from spanex.model import EMPTY_TUPLE, Span, SpanTuple
from spanex.vsa import NotFunctionalAutomaton

from helpers import (
    marker_automaton, diamond_automaton, loop_automaton, random_doc,
    random_functional_formula, relation_of, span_set,
)


def spans_of(automaton, doc, var="x"):
    return [str(t[var]) for t in enumerate_spans(automaton, doc)]


# ---------------------------------------------------------------------------
# Match graph construction
# ---------------------------------------------------------------------------


def test_graph_size_for_marker_automaton_on_aa():
    """The layered graph for the a*-marker automaton on "aa": one virtual
    start node plus the per-position survivors, and every surviving edge."""
    graph = build_match_graph(marker_automaton(), "aa")
    assert not graph.empty
    assert graph.doc_len == 2
    assert graph.variables == ("x",)
    assert graph.node_count == 8
    assert graph.edge_count == 12


def test_graph_flags_empty_when_no_match():
    graph = build_match_graph(marker_automaton(), "ab")
    assert graph.empty
    assert list(enumerate_graph(graph)) == []


def test_graph_rejects_non_functional_automaton():
    with pytest.raises(NotFunctionalAutomaton):
        build_match_graph(loop_automaton(), "a")


def test_graph_prunes_branches_that_cannot_finish():
    # a run that opens x too late can never close it before the end
    a = compile_regex(parse_formula(".* x{aa} .*"))
    graph = build_match_graph(a, "ba")
    assert graph.empty


# ---------------------------------------------------------------------------
# Enumeration order (pinned)
# ---------------------------------------------------------------------------


def test_marker_automaton_order_on_aa():
    assert spans_of(marker_automaton(), "aa") == [
        "3..3", "2..3", "2..2", "1..3", "1..2", "1..1",
    ]


def test_all_substrings_order_on_aaa():
    a = compile_regex(parse_formula("a* x{a*} a*"))
    assert spans_of(a, "aaa") == [
        "4..4", "3..4", "3..3",
        "2..4", "2..3", "2..2",
        "1..4", "1..3", "1..2", "1..1",
    ]


def test_enumeration_is_deterministic():
    a = compile_regex(parse_formula(".* x{.*} .* y{.*} .*"))
    first = list(enumerate_spans(a, "abab"))
    second = list(enumerate_spans(a, "abab"))
    assert first == second
    assert len(first) == len(set(first))


# ---------------------------------------------------------------------------
# Exponentially ambiguous automata yield each tuple once
# ---------------------------------------------------------------------------


def test_diamond_automaton_single_tuple():
    """Two interleaving accepting paths per letter, one tuple out."""
    assert spans_of(diamond_automaton(), "aaa") == ["1..4"]
    assert spans_of(diamond_automaton(), "") == ["1..1"]


def test_diamond_automaton_on_longer_document():
    doc = "a" * 12  # 2**12 accepting paths
    assert spans_of(diamond_automaton(), doc) == ["1..13"]


def test_self_union_yields_no_duplicates():
    a = compile_regex(parse_formula(".* x{.*} .*"))
    rows = list(enumerate_spans(union_vsa(a, a), "aba"))
    assert len(rows) == len(set(rows))
    assert set(rows) == relation_of(a, "aba")


# ---------------------------------------------------------------------------
# Edge cases
# ---------------------------------------------------------------------------


def test_empty_document_with_empty_span():
    a = compile_regex(parse_formula("x{ε}"))
    assert list(enumerate_spans(a, "")) == [SpanTuple({"x": Span(1, 1)})]


def test_empty_document_without_match():
    a = compile_regex(parse_formula("a x{ε}"))
    assert list(enumerate_spans(a, "")) == []


def test_variable_free_automaton_yields_empty_tuple():
    a = compile_regex(parse_formula("a*"))
    assert list(enumerate_spans(a, "aa")) == [EMPTY_TUPLE]
    assert list(enumerate_spans(a, "")) == [EMPTY_TUPLE]


def test_variable_free_automaton_without_match():
    a = compile_regex(parse_formula("b"))
    assert list(enumerate_spans(a, "aa")) == []


def test_empty_language_automaton():
    a = compile_regex(parse_formula("∅ x{a}"))
    assert list(enumerate_spans(a, "a")) == []


# ---------------------------------------------------------------------------
# Work counters
# ---------------------------------------------------------------------------


def test_stats_counts_tuples_and_accumulates():
    a = compile_regex(parse_formula("a* x{a*} a*"))
    stats = EnumerationStats()
    assert len(list(enumerate_spans(a, "aaa", stats))) == 10
    assert stats.tuples == 10
    assert stats.max_node_set >= 1
    assert stats.fill_steps > 0
    list(enumerate_spans(a, "aaa", stats))
    assert stats.tuples == 20


def test_no_cold_transitions_after_first_result():
    """On documents the pre-warm allowance covers, every frontier transition
    is memoized before the first tuple is handed out."""
    a = compile_regex(parse_formula(".* x{.*} .* y{.*} .*"))
    stats = EnumerationStats()
    gen = enumerate_spans(a, "abab", stats)
    next(gen)
    cold_at_first = stats.cold_transitions
    rest = list(gen)
    assert rest  # the stream had more to say
    assert stats.cold_transitions == cold_at_first


# ---------------------------------------------------------------------------
# Random battery against the ref-word oracle
# ---------------------------------------------------------------------------


def test_enumeration_matches_relation_semantics():
    rng = random.Random(90210)
    for _ in range(60):
        formula = random_functional_formula(rng, depth=3)
        a = compile_regex(formula)
        doc = random_doc(rng, 5)
        rows = list(enumerate_spans(a, doc))
        assert len(rows) == len(set(rows)), (formula, doc)
        for row in rows:
            assert set(row.variables) == a.variables


def test_every_reported_span_is_within_the_document():
    rng = random.Random(555)
    for _ in range(40):
        formula = random_functional_formula(rng, depth=3, require_vars=True)
        doc = random_doc(rng, 6)
        for row in enumerate_spans(compile_regex(formula), doc):
            for v in row.variables:
                s = row[v]
                assert 1 <= s.begin <= s.end <= len(doc) + 1, (formula, doc)
