"""Core data model: documents, spans, span tuples, ref-words, variable states.

A *document* is a plain string; positions are 1-based.  A *span* ``(i, j)``
with ``1 <= i <= j <= len(doc) + 1`` selects the half-open slice between
positions ``i`` and ``j`` (so ``(i, i)`` is the empty span sitting in front of
position ``i``, and ``(1, len(doc) + 1)`` covers the whole document).

A *span tuple* assigns a span to every variable of a fixed variable set.

A *ref-word* is a string over the document alphabet extended with per-variable
open/close markers.  Erasing the markers gives back a document; the marker
positions encode a span tuple.  Ref-words are the semantic glue between regex
formulas, variable-set automata and span relations, and everything downstream
leans on the encoding/decoding helpers collected here.
"""

from __future__ import annotations

from typing import Iterable, Iterator, NamedTuple

# ---------------------------------------------------------------------------
# Variable states
# ---------------------------------------------------------------------------

# The life cycle of a capture variable while scanning a document: it waits,
# is opened once, and is closed once.  Kept as small ints so that state
# sequences order and compare fast; WAITING < OPEN < CLOSED is the canonical
# order used by the enumerator.
WAITING = 0
OPEN = 1
CLOSED = 2

STATE_NAMES = ("w", "o", "c")

# Variable operations, as they appear on automaton transitions and inside
# ref-words: ("open", x) marks the start of x's span, ("close", x) its end.
OP_OPEN = "open"
OP_CLOSE = "close"


def open_op(var: str) -> tuple[str, str]:
    return (OP_OPEN, var)


def close_op(var: str) -> tuple[str, str]:
    return (OP_CLOSE, var)


# ---------------------------------------------------------------------------
# Spans
# ---------------------------------------------------------------------------


class Span(NamedTuple):
    """Half-open 1-based span ``(begin, end)`` with ``begin <= end``."""

    begin: int
    end: int

    def __str__(self) -> str:
        return f"{self.begin}..{self.end}"


def is_valid_span(span: Span, doc_len: int) -> bool:
    return 1 <= span.begin <= span.end <= doc_len + 1


def span_text(doc: str, span: Span) -> str:
    """The substring of ``doc`` selected by ``span`` (empty for ``(i, i)``)."""
    return doc[span.begin - 1 : span.end - 1]


def all_spans(doc_len: int) -> Iterator[Span]:
    """All spans of a document of the given length, (l+1)(l+2)/2 of them."""
    for begin in range(1, doc_len + 2):
        for end in range(begin, doc_len + 2):
            yield Span(begin, end)


# ---------------------------------------------------------------------------
# Span tuples
# ---------------------------------------------------------------------------


class SpanTuple:
    """An immutable assignment from variable names to spans.

    Hashable and comparable so result sets behave like relations; ordering is
    by the (variable, span) items sorted by variable name.
    """

    __slots__ = ("_items", "_hash")

    def __init__(self, assignment: dict[str, Span] | Iterable[tuple[str, Span]]):
        if isinstance(assignment, dict):
            items = sorted(assignment.items())
        else:
            items = sorted(assignment)
        self._items: tuple[tuple[str, Span], ...] = tuple(
            (var, Span(*span)) for var, span in items
        )
        self._hash = hash(self._items)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(var for var, _ in self._items)

    def items(self) -> tuple[tuple[str, Span], ...]:
        return self._items

    def as_dict(self) -> dict[str, Span]:
        return dict(self._items)

    def __getitem__(self, var: str) -> Span:
        for name, span in self._items:
            if name == var:
                return span
        raise KeyError(var)

    def __contains__(self, var: str) -> bool:
        return any(name == var for name, _ in self._items)

    def restrict(self, variables: Iterable[str]) -> "SpanTuple":
        keep = set(variables)
        return SpanTuple([(v, s) for v, s in self._items if v in keep])

    def merge(self, other: "SpanTuple") -> "SpanTuple":
        """Union of two tuples; overlapping variables must agree."""
        combined = dict(self._items)
        for var, span in other.items():
            if var in combined and combined[var] != span:
                raise ValueError(f"conflicting span for variable {var!r}")
            combined[var] = span
        return SpanTuple(combined)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SpanTuple) and self._items == other._items

    def __lt__(self, other: "SpanTuple") -> bool:
        return self._items < other._items

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}={s}" for v, s in self._items)
        return f"SpanTuple({inner})"


EMPTY_TUPLE = SpanTuple({})


# ---------------------------------------------------------------------------
# Ref-words
# ---------------------------------------------------------------------------

# A ref-word is a tuple whose entries are either 1-character strings
# (document symbols) or ("open"/"close", var) operation pairs.


def clean(ref_word: Iterable) -> str:
    """Erase all variable markers, leaving the document string."""
    return "".join(sym for sym in ref_word if isinstance(sym, str))


def is_valid_ref_word(ref_word: Iterable, variables: Iterable[str]) -> bool:
    """Check that every variable is opened exactly once and closed exactly
    once afterwards, and that no foreign markers occur."""
    states = {v: WAITING for v in variables}
    for sym in ref_word:
        if isinstance(sym, str):
            continue
        kind, var = sym
        if var not in states:
            return False
        if kind == OP_OPEN:
            if states[var] != WAITING:
                return False
            states[var] = OPEN
        else:
            if states[var] != OPEN:
                return False
            states[var] = CLOSED
    return all(state == CLOSED for state in states.values())


def ref_word_span_tuple(ref_word: Iterable, variables: Iterable[str]) -> SpanTuple:
    """Decode the span tuple a valid ref-word denotes.

    A variable's span begins right after the document symbols preceding its
    open marker and extends over the symbols up to its close marker.  A
    marker pair with no symbols in between denotes an empty span *at the
    position following the preceding symbols* — e.g. markers after the whole
    document denote (len+1, len+1), not a span touching the last symbol.
    """
    variables = list(variables)
    opens: dict[str, int] = {}
    closes: dict[str, int] = {}
    pos = 1  # 1-based position of the next document symbol
    for sym in ref_word:
        if isinstance(sym, str):
            pos += 1
            continue
        kind, var = sym
        if kind == OP_OPEN:
            opens[var] = pos
        else:
            closes[var] = pos
    missing = [v for v in variables if v not in opens or v not in closes]
    if missing:
        raise ValueError(f"ref-word does not bind variables: {missing}")
    return SpanTuple({v: Span(opens[v], closes[v]) for v in variables})


def tuple_ref_words(tup: SpanTuple, doc: str) -> Iterator[tuple]:
    """All ref-words over ``doc`` that denote ``tup``.

    Markers attached to the same position can interleave in any order, except
    that a variable's open marker must precede its own close marker.  Used by
    the brute-force oracle; the count is small for small variable sets.
    """
    from itertools import permutations

    doc_len = len(doc)
    blocks: list[list[tuple[str, str]]] = [[] for _ in range(doc_len + 2)]
    for var, span in tup.items():
        blocks[span.begin].append(open_op(var))
        blocks[span.end].append(close_op(var))

    def block_orders(ops: list[tuple[str, str]]) -> list[tuple]:
        seen = set()
        orders = []
        for perm in permutations(ops):
            if perm in seen:
                continue
            seen.add(perm)
            pending = set()
            ok = True
            for kind, var in perm:
                if kind == OP_OPEN:
                    pending.add(var)
                elif var in pending:
                    pending.discard(var)
                elif (OP_OPEN, var) in ops:
                    ok = False  # close before its own open in the same block
                    break
            if ok:
                orders.append(perm)
        return orders

    choices = [block_orders(blocks[pos]) for pos in range(1, doc_len + 2)]

    def rec(pos: int, acc: list) -> Iterator[tuple]:
        if pos > doc_len + 1:
            yield tuple(acc)
            return
        for order in choices[pos - 1]:
            acc2 = acc + list(order)
            if pos <= doc_len:
                acc2.append(doc[pos - 1])
            yield from rec(pos + 1, acc2)

    yield from rec(1, [])


# ---------------------------------------------------------------------------
# Variable state sequences <-> span tuples
# ---------------------------------------------------------------------------
#
# Scanning a document of length l, the situation of a variable just before
# reading symbol number p (p = 1..l+1, the last "position" sits after the
# final symbol) is WAITING, OPEN or CLOSED.  A span tuple corresponds to
# exactly one such state sequence per variable, and vice versa — this
# bijection is what makes span tuples enumerable as strings.


def tuple_to_state_sequence(
    tup: SpanTuple, doc_len: int, variables: Iterable[str]
) -> list[tuple[int, ...]]:
    """Per-position variable states, one tuple per position 1..doc_len+1.

    States inside each entry follow ``sorted(variables)`` order.
    """
    ordered = sorted(variables)
    seq = []
    for pos in range(1, doc_len + 2):
        entry = []
        for var in ordered:
            span = tup[var]
            if pos < span.begin:
                entry.append(WAITING)
            elif pos < span.end:
                entry.append(OPEN)
            else:
                entry.append(CLOSED)
        seq.append(tuple(entry))
    return seq


def state_sequence_to_tuple(
    seq: list[tuple[int, ...]], variables: Iterable[str]
) -> SpanTuple:
    """Inverse of :func:`tuple_to_state_sequence`.

    ``seq[p-1]`` holds the states before reading symbol p; a variable's span
    begins at the first position where it is no longer WAITING and ends at
    the first position where it is CLOSED.
    """
    ordered = sorted(variables)
    assignment = {}
    for idx, var in enumerate(ordered):
        begin = end = None
        for pos0, entry in enumerate(seq):
            state = entry[idx]
            if begin is None and state != WAITING:
                begin = pos0 + 1
            if end is None and state == CLOSED:
                end = pos0 + 1
                break
        if begin is None or end is None:
            raise ValueError(f"state sequence never closes variable {var!r}")
        assignment[var] = Span(begin, end)
    return SpanTuple(assignment)


def is_valid_state_sequence(seq: list[tuple[int, ...]]) -> bool:
    """Monotone per variable (w* o* c*), ending all-CLOSED."""
    if not seq:
        return False
    width = len(seq[0])
    for idx in range(width):
        prev = WAITING
        for entry in seq:
            state = entry[idx]
            if state < prev:
                return False
            prev = state
        if prev != CLOSED:
            return False
    return True
