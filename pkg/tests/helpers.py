"""Shared generators and oracles for the test suite.

Everything here is deliberately independent of the engine internals: random
formula trees are built straight from the AST constructors, relations are
recomputed with plain set algebra over materialized tuples, and ref-word
languages are unrolled from the grammar with a bounded star depth.
"""

import itertools
import random

from spanex.formula import (
    Alt, Any, Bind, Cat, Empty, Epsilon, Formula, Star, Sym,
    check_functional, formula_variables,
)
from spanex.model import Span, SpanTuple, all_spans, is_valid_ref_word, open_op, close_op
from spanex.vsa import VSA
from spanex.enumerator import enumerate_spans


# ---------------------------------------------------------------------------
# Random formula trees
# ---------------------------------------------------------------------------


def random_formula(rng: random.Random, depth: int = 4,
                   variables=("x", "y"), alphabet="ab") -> Formula:
    """A random formula tree of the given maximum depth.

    Bindings draw from ``variables`` without replacement along a branch, so
    shallow trees are usually functional, but no functionality is enforced.
    """
    return _random_node(rng, depth, list(variables), alphabet)


def _random_node(rng, depth, pool, alphabet):
    if depth <= 0:
        kind = rng.choice(("sym", "sym", "sym", "eps", "any", "empty"))
        if kind == "sym":
            return Sym(rng.choice(alphabet))
        if kind == "eps":
            return Epsilon()
        if kind == "any":
            return Any()
        return Empty()
    kind = rng.choice(("sym", "any", "eps", "alt", "cat", "cat", "star", "bind", "bind"))
    if kind == "sym":
        return Sym(rng.choice(alphabet))
    if kind == "any":
        return Any()
    if kind == "eps":
        return Epsilon()
    if kind == "alt":
        return Alt(_random_node(rng, depth - 1, pool, alphabet),
                   _random_node(rng, depth - 1, pool, alphabet))
    if kind == "cat":
        return Cat(_random_node(rng, depth - 1, pool, alphabet),
                   _random_node(rng, depth - 1, pool, alphabet))
    if kind == "star":
        return Star(_random_node(rng, depth - 1, pool, alphabet))
    if pool:
        var = rng.choice(pool)
        rest = [v for v in pool if v != var]
        return Bind(var, _random_node(rng, depth - 1, rest, alphabet))
    return _random_node(rng, depth - 1, pool, alphabet)


def random_functional_formula(rng: random.Random, depth: int = 4,
                              variables=("x", "y"), alphabet="ab",
                              require_nonempty: bool = True,
                              require_vars: bool = False) -> Formula:
    """Rejection-sample random trees until one passes the functionality check."""
    while True:
        formula = random_formula(rng, depth, variables, alphabet)
        if not check_functional(formula):
            continue
        if require_vars and not formula_variables(formula):
            continue
        if require_nonempty and _is_empty_language(formula):
            continue
        return formula


def _is_empty_language(node: Formula) -> bool:
    if isinstance(node, Empty):
        return True
    if isinstance(node, (Epsilon, Sym, Any)):
        return False
    if isinstance(node, Alt):
        return _is_empty_language(node.left) and _is_empty_language(node.right)
    if isinstance(node, Cat):
        return _is_empty_language(node.left) or _is_empty_language(node.right)
    if isinstance(node, Star):
        return False
    return _is_empty_language(node.inner)


def random_doc(rng: random.Random, max_len: int = 6, alphabet="ab") -> str:
    length = rng.randint(0, max_len)
    return "".join(rng.choice(alphabet) for _ in range(length))


def all_docs(alphabet: str, max_len: int):
    """Every document over the alphabet up to the given length, short first."""
    for length in range(max_len + 1):
        for letters in itertools.product(alphabet, repeat=length):
            yield "".join(letters)


# ---------------------------------------------------------------------------
# Ref-word language unrolling (independent of the Glushkov matcher)
# ---------------------------------------------------------------------------


def ref_words_up_to(node: Formula, star_cap: int = 2, limit: int = 4000):
    """The ref-word language of a formula, stars unrolled at most star_cap
    times.  Returns a set of tuples; raises if the cap yields > limit words.
    Violations of functionality always show up within two unrollings of any
    star, so the truncated language is enough for cross-checking verdicts.
    """
    words = _unroll(node, star_cap, limit)
    return words


def _unroll(node, cap, limit):
    if isinstance(node, Empty):
        return set()
    if isinstance(node, Epsilon):
        return {()}
    if isinstance(node, Sym):
        return {(node.char,)}
    if isinstance(node, Any):
        return {("a",), ("b",)}
    if isinstance(node, Alt):
        out = _unroll(node.left, cap, limit) | _unroll(node.right, cap, limit)
        _check_budget(out, limit)
        return out
    if isinstance(node, Cat):
        lefts = _unroll(node.left, cap, limit)
        rights = _unroll(node.right, cap, limit)
        out = {l + r for l in lefts for r in rights}
        _check_budget(out, limit)
        return out
    if isinstance(node, Star):
        inner = _unroll(node.inner, cap, limit)
        out = {()}
        layer = {()}
        for _ in range(cap):
            layer = {w + x for w in layer for x in inner}
            out |= layer
            _check_budget(out, limit)
        return out
    out = {(open_op(node.var),) + w + (close_op(node.var),)
           for w in _unroll(node.inner, cap, limit)}
    _check_budget(out, limit)
    return out


def _check_budget(words, limit):
    if len(words) > limit:
        raise AssertionError(f"unrolled language too large ({len(words)} words)")


def brute_force_functional(node: Formula, star_cap: int = 2) -> bool:
    """True when every (bounded) ref-word of the formula is valid for its
    syntactic variable set."""
    variables = formula_variables(node)
    return all(is_valid_ref_word(word, variables)
               for word in ref_words_up_to(node, star_cap))


# ---------------------------------------------------------------------------
# Relational oracles over materialized relations
# ---------------------------------------------------------------------------


def relation_of(automaton: VSA, doc: str) -> set[SpanTuple]:
    return set(enumerate_spans(automaton, doc))


def project_rows(rows, keep) -> set[SpanTuple]:
    keep = frozenset(keep)
    return {row.restrict(keep) for row in rows}


def join_rows(left_rows, right_rows) -> set[SpanTuple]:
    out = set()
    for left in left_rows:
        left_map = left.as_dict()
        for right in right_rows:
            right_map = right.as_dict()
            if all(left_map[v] == right_map[v]
                   for v in left_map.keys() & right_map.keys()):
                out.add(left.merge(right))
    return out


def filter_rows(rows, selections, doc: str) -> set[SpanTuple]:
    def text(span: Span) -> str:
        return doc[span.begin - 1:span.end - 1]

    return {row for row in rows
            if all(text(row[a]) == text(row[b]) for a, b in selections)}


def brute_force_key(automaton: VSA, var: str, docs) -> bool:
    """A variable is a key when no document has two tuples sharing its span."""
    for doc in docs:
        seen: dict[Span, SpanTuple] = {}
        for row in enumerate_spans(automaton, doc):
            value = row[var]
            if value in seen and seen[value] != row:
                return False
            seen[value] = row
    return True


# ---------------------------------------------------------------------------
# Fixtures used across modules
# ---------------------------------------------------------------------------


def marker_automaton() -> VSA:
    """Three states: a-loop, open x, a-loop, close x, a-loop."""
    return VSA({"x"}, 3, 0, 2, [
        (0, "a", 0),
        (0, frozenset([open_op("x")]), 1),
        (1, "a", 1),
        (1, frozenset([close_op("x")]), 2),
        (2, "a", 2),
    ])


def diamond_automaton() -> VSA:
    """Exponentially many accepting paths, all denoting x = whole document."""
    return VSA({"x"}, 4, 0, 3, [
        (0, frozenset([open_op("x")]), 1),
        (0, frozenset([open_op("x")]), 2),
        (1, "a", 1),
        (1, "a", 2),
        (2, "a", 1),
        (2, "a", 2),
        (1, frozenset([close_op("x")]), 3),
        (2, frozenset([close_op("x")]), 3),
    ])


def loop_automaton() -> VSA:
    """Single state with open/close/a loops: accepts invalid ref-words."""
    return VSA({"x"}, 1, 0, 0, [
        (0, frozenset([open_op("x")]), 0),
        (0, frozenset([close_op("x")]), 0),
        (0, "a", 0),
    ])


def span_set(rows, var: str = "x") -> set[tuple[int, int]]:
    return {(row[var].begin, row[var].end) for row in rows}
