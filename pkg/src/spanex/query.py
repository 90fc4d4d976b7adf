"""Conjunctive and union queries over capture formulas: parsing, planning,
and the two evaluation strategies.

Query text grammar (usually stored in ``.spq`` files)::

    query     :=  cq ( "UNION" cq )*
    cq        :=  "SELECT" projection "FROM" atom ("," atom)*
                  [ "WHERE" equality ("AND" equality)* ]
    projection:=  "(" ")"  |  variable ("," variable)*
    atom      :=  "/" formula-source "/"        (\\/ for a literal slash)
    equality  :=  variable "==" variable

A query's answer on a document is the natural join of its atoms' span
relations, filtered so equated variables span equal substrings, projected
onto the selected variables; ``UNION`` takes the set union of such answers,
which is why all branches must project the same variable set.  ``SELECT ()``
is the Boolean form: the answer is either empty or the single empty tuple.

Two evaluation routes exist.  The canonical one materialises every atom and
runs hash joins plus filters; the compiled one builds one automaton for the
whole query and streams its enumeration (duplicate-free, ordered, polynomial
delay).  ``eval_query`` picks per-branch routes based on plan options, since
compiling a join of many atoms can blow up the automaton product.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .compiler import (
    EqualityBudgetError,
    apply_selections,
    compile_regex,
    join_many,
    project,
    union_vsa,
)
from .enumerator import enumerate_spans
from .formula import (
    Formula,
    FormulaSyntaxError,
    formula_to_source,
    formula_variables,
    parse_formula,
)
from .model import SpanTuple, span_text


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)
        self.position = position


# ---------------------------------------------------------------------------
# Query types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConjunctiveQuery:
    """One SELECT…FROM…WHERE block."""

    projection: tuple[str, ...]
    atoms: tuple[Formula, ...]
    equalities: tuple[tuple[str, str], ...] = ()

    @property
    def variables(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for atom in self.atoms:
            out |= formula_variables(atom)
        return out

    @property
    def projected_set(self) -> frozenset[str]:
        return frozenset(self.projection)

    def validate(self) -> None:
        if not self.atoms:
            raise QuerySyntaxError("a query needs at least one atom")
        seen: set[str] = set()
        for var in self.projection:
            if var in seen:
                raise QuerySyntaxError(f"duplicate projection variable {var!r}")
            seen.add(var)
        atom_vars = self.variables
        for var in self.projection:
            if var not in atom_vars:
                raise QuerySyntaxError(
                    f"projected variable {var!r} does not occur in any atom")
        for x, y in self.equalities:
            for var in (x, y):
                if var not in atom_vars:
                    raise QuerySyntaxError(
                        f"equality variable {var!r} does not occur in any atom")


@dataclass(frozen=True)
class UnionQuery:
    disjuncts: tuple[ConjunctiveQuery, ...]

    @property
    def projection(self) -> tuple[str, ...]:
        return self.disjuncts[0].projection

    @property
    def projected_set(self) -> frozenset[str]:
        return self.disjuncts[0].projected_set

    def validate(self) -> None:
        if not self.disjuncts:
            raise QuerySyntaxError("empty union")
        for cq in self.disjuncts:
            cq.validate()
        first = self.disjuncts[0].projected_set
        for cq in self.disjuncts[1:]:
            if cq.projected_set != first:
                raise QuerySyntaxError(
                    "union branches must project the same variable set: "
                    f"{sorted(first)} vs {sorted(cq.projected_set)}")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_KEYWORDS = {"SELECT", "FROM", "WHERE", "AND", "UNION"}
_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CHARS = _IDENT_START | set("0123456789")


def _tokenize_query(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "/":
            start = i
            i += 1
            buf: list[str] = []
            while i < n and text[i] != "/":
                if text[i] == "\\" and i + 1 < n:
                    if text[i + 1] == "/":
                        buf.append("/")
                    else:
                        buf.append(text[i])
                        buf.append(text[i + 1])
                    i += 2
                else:
                    buf.append(text[i])
                    i += 1
            if i >= n:
                raise QuerySyntaxError("unterminated formula literal", start)
            tokens.append(("regex", "".join(buf), start))
            i += 1
            continue
        if ch == ",":
            tokens.append(("comma", ",", i))
            i += 1
            continue
        if ch == "(":
            tokens.append(("lparen", "(", i))
            i += 1
            continue
        if ch == ")":
            tokens.append(("rparen", ")", i))
            i += 1
            continue
        if ch == "=" and i + 1 < n and text[i + 1] == "=":
            tokens.append(("eq", "==", i))
            i += 2
            continue
        if ch in _IDENT_START:
            start = i
            while i < n and text[i] in _IDENT_CHARS:
                i += 1
            word = text[start:i]
            tokens.append(("kw" if word in _KEYWORDS else "ident", word, start))
            continue
        raise QuerySyntaxError(f"unexpected character {ch!r}", i)
    return tokens


class _QueryParser:
    def __init__(self, tokens: list[tuple[str, str, int]]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, str, int]:
        token = self.peek()
        if token is None:
            raise QuerySyntaxError("unexpected end of query")
        self.pos += 1
        return token

    def expect_kw(self, word: str) -> None:
        token = self.take()
        if token[0] != "kw" or token[1] != word:
            raise QuerySyntaxError(f"expected {word}, found {token[1]!r}", token[2])

    def at_kw(self, word: str) -> bool:
        token = self.peek()
        return token is not None and token[0] == "kw" and token[1] == word

    def parse_variable(self) -> str:
        token = self.take()
        if token[0] != "ident":
            raise QuerySyntaxError(f"expected a variable name, found {token[1]!r}",
                                   token[2])
        return token[1]

    def parse_projection(self) -> tuple[str, ...]:
        token = self.peek()
        if token is not None and token[0] == "lparen":
            self.take()
            closing = self.take()
            if closing[0] != "rparen":
                raise QuerySyntaxError("expected ) after ( in projection", closing[2])
            return ()
        names = [self.parse_variable()]
        while self.peek() is not None and self.peek()[0] == "comma":
            self.take()
            names.append(self.parse_variable())
        return tuple(names)

    def parse_atom(self) -> Formula:
        token = self.take()
        if token[0] != "regex":
            raise QuerySyntaxError(f"expected /formula/, found {token[1]!r}", token[2])
        try:
            return parse_formula(token[1])
        except FormulaSyntaxError as err:
            raise QuerySyntaxError(f"bad formula atom: {err}", token[2]) from err

    def parse_cq(self) -> ConjunctiveQuery:
        self.expect_kw("SELECT")
        projection = self.parse_projection()
        self.expect_kw("FROM")
        atoms = [self.parse_atom()]
        while self.peek() is not None and self.peek()[0] == "comma":
            self.take()
            atoms.append(self.parse_atom())
        equalities: list[tuple[str, str]] = []
        if self.at_kw("WHERE"):
            self.take()
            while True:
                x = self.parse_variable()
                eq = self.take()
                if eq[0] != "eq":
                    raise QuerySyntaxError("expected == in equality", eq[2])
                y = self.parse_variable()
                equalities.append((x, y))
                if self.at_kw("AND"):
                    self.take()
                    continue
                break
        return ConjunctiveQuery(projection, tuple(atoms), tuple(equalities))

    def parse_query(self) -> UnionQuery:
        disjuncts = [self.parse_cq()]
        while self.at_kw("UNION"):
            self.take()
            disjuncts.append(self.parse_cq())
        trailing = self.peek()
        if trailing is not None:
            raise QuerySyntaxError(f"unexpected trailing input {trailing[1]!r}",
                                   trailing[2])
        return UnionQuery(tuple(disjuncts))


def parse_query(text: str) -> UnionQuery:
    """Parse and validate query text into its union-of-conjunctive form."""
    query = _QueryParser(_tokenize_query(text)).parse_query()
    query.validate()
    return query


def query_to_source(query: UnionQuery) -> str:
    """Render a query back to grammar text (parses to an equal query)."""
    blocks = []
    for cq in query.disjuncts:
        projection = ", ".join(cq.projection) if cq.projection else "()"
        atoms = ", ".join(
            "/" + formula_to_source(atom).replace("/", "\\/") + "/"
            for atom in cq.atoms)
        text = f"SELECT {projection} FROM {atoms}"
        if cq.equalities:
            text += " WHERE " + " AND ".join(
                f"{x} == {y}" for x, y in cq.equalities)
        blocks.append(text)
    return " UNION ".join(blocks)


# ---------------------------------------------------------------------------
# Relational skeleton
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelationalAtom:
    name: str
    attributes: tuple[str, ...]


@dataclass(frozen=True)
class RelationalSkeleton:
    atoms: tuple[RelationalAtom, ...]
    projection: tuple[str, ...]
    equalities: tuple[tuple[str, str], ...]

    @property
    def variables(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for atom in self.atoms:
            out |= frozenset(atom.attributes)
        return out


def map_to_relational(cq: ConjunctiveQuery) -> RelationalSkeleton:
    """The query's shape as a relational CQ: one fresh relation symbol per
    atom, attributes = the atom's variables.  Used for planning statistics
    and by tests that compare against relational evaluation."""
    atoms = tuple(
        RelationalAtom(f"R{i + 1}", tuple(sorted(formula_variables(atom))))
        for i, atom in enumerate(cq.atoms))
    return RelationalSkeleton(atoms, cq.projection, cq.equalities)


# ---------------------------------------------------------------------------
# Planning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanOptions:
    """Knobs for the automatic strategy choice.

    ``max_join_compile``: largest atom count still compiled into one product
    automaton (the product can reach n^(2k) states, so keep this small).
    ``max_eq_compile``: largest number of equality selections still compiled.
    ``eq_path_budget``: hard cap on equality-automaton assignment paths; when
    the estimate exceeds it, evaluation falls back to the canonical route.
    """

    max_join_compile: int = 3
    max_eq_compile: int = 2
    eq_path_budget: int | None = 20000


CANONICAL = "canonical"
COMPILED = "compiled"


def plan_query(query: UnionQuery, options: PlanOptions | None = None) -> list[str]:
    """Per-disjunct strategy decisions under the given options."""
    options = options or PlanOptions()
    decisions = []
    for cq in query.disjuncts:
        small_join = len(cq.atoms) <= options.max_join_compile
        small_eq = len(cq.equalities) <= options.max_eq_compile
        decisions.append(COMPILED if small_join and small_eq else CANONICAL)
    return decisions


# ---------------------------------------------------------------------------
# Evaluation: canonical relational route
# ---------------------------------------------------------------------------


def _hash_join(left_vars, left_rows, right_vars, right_rows):
    shared = sorted(left_vars & right_vars)
    merged_vars = left_vars | right_vars
    out = []
    if shared:
        index: dict[tuple, list[SpanTuple]] = {}
        for row in right_rows:
            index.setdefault(tuple(row[v] for v in shared), []).append(row)
        for row in left_rows:
            for other in index.get(tuple(row[v] for v in shared), ()):
                out.append(row.merge(other))
    else:
        for row, other in itertools.product(left_rows, right_rows):
            out.append(row.merge(other))
    return merged_vars, out


def eval_canonical(cq: ConjunctiveQuery, doc: str) -> list[SpanTuple]:
    """Materialise every atom, hash-join them smallest-first, filter the
    equalities by substring comparison, project, dedup.  Returns the answer
    sorted (so output is deterministic across plans)."""
    relations = []
    for atom in cq.atoms:
        rows = list(enumerate_spans(compile_regex(atom), doc))
        relations.append((formula_variables(atom), rows))
    relations.sort(key=lambda pair: len(pair[1]))
    variables, rows = relations[0]
    for other_vars, other_rows in relations[1:]:
        variables, rows = _hash_join(variables, rows, other_vars, other_rows)
    for x, y in cq.equalities:
        rows = [row for row in rows
                if span_text(doc, row[x]) == span_text(doc, row[y])]
    projected = cq.projected_set
    return sorted({row.restrict(projected) for row in rows})


# ---------------------------------------------------------------------------
# Evaluation: compiled route
# ---------------------------------------------------------------------------


def compile_cq(cq: ConjunctiveQuery, doc: str, *,
               path_budget: int | None = None):
    """One automaton whose enumeration on ``doc`` is exactly the answer:
    join of the compiled atoms, equality selection, projection."""
    joined = join_many(compile_regex(atom) for atom in cq.atoms)
    if cq.equalities:
        joined = apply_selections(joined, cq.equalities, doc,
                                  path_budget=path_budget)
    return project(joined, cq.projected_set)


def eval_compiled(cq: ConjunctiveQuery, doc: str, *,
                  path_budget: int | None = None):
    """Stream the answer through one compiled automaton: duplicate-free and
    in the enumerator's canonical order."""
    yield from enumerate_spans(compile_cq(cq, doc, path_budget=path_budget), doc)


# ---------------------------------------------------------------------------
# Evaluation: strategy dispatch
# ---------------------------------------------------------------------------


def _eval_all_compiled(query: UnionQuery, doc: str,
                       path_budget: int | None):
    automata = [compile_cq(cq, doc, path_budget=path_budget)
                for cq in query.disjuncts]
    united = automata[0] if len(automata) == 1 else union_vsa(*automata)
    return enumerate_spans(united, doc)


def _eval_mixed(query: UnionQuery, doc: str, decisions: list[str],
                options: PlanOptions):
    seen: set[SpanTuple] = set()
    for cq, decision in zip(query.disjuncts, decisions):
        rows = None
        if decision == COMPILED:
            try:
                automaton = compile_cq(cq, doc,
                                       path_budget=options.eq_path_budget)
            except EqualityBudgetError:
                rows = eval_canonical(cq, doc)
            else:
                rows = enumerate_spans(automaton, doc)
        if rows is None:
            rows = eval_canonical(cq, doc)
        for row in rows:
            if row not in seen:
                seen.add(row)
                yield row


def eval_query(query: UnionQuery, doc: str,
               options: PlanOptions | None = None,
               strategy: str = "auto"):
    """Evaluate a union query: a stream of distinct projected span tuples.

    ``strategy`` is ``auto`` (plan per disjunct), ``canonical``, or
    ``compiled`` (force one automaton; ignores the plan limits).
    """
    options = options or PlanOptions()
    if strategy == COMPILED:
        yield from _eval_all_compiled(query, doc, None)
        return
    if strategy == CANONICAL:
        seen: set[SpanTuple] = set()
        for cq in query.disjuncts:
            for row in eval_canonical(cq, doc):
                if row not in seen:
                    seen.add(row)
                    yield row
        return
    if strategy != "auto":
        raise ValueError(f"unknown strategy {strategy!r}")
    decisions = plan_query(query, options)
    if all(decision == COMPILED for decision in decisions):
        try:
            stream = _eval_all_compiled(query, doc, options.eq_path_budget)
        except EqualityBudgetError:
            stream = None
        if stream is not None:
            yield from stream
            return
    yield from _eval_mixed(query, doc, decisions, options)
