"""Regex formulas: regular expressions extended with capture-variable bindings.

The abstract syntax is the usual regex algebra (empty language, empty string,
single symbol, any-symbol wildcard, alternation, concatenation, star) plus a
binding form ``x{inner}`` that wraps whatever ``inner`` matches in the open
and close markers of variable ``x``.  A formula therefore describes a set of
ref-words (see :mod:`spanex.model`); applied to a document it yields the span
tuples of all its ref-words whose marker-free projection equals the document.

A formula is *functional* when every ref-word it generates opens and closes
every variable of the formula exactly once — only those formulas denote
total span tuples, and only those are accepted by the compiler.

Concrete syntax (used by ``parse_formula`` and the ``.spq`` query files):

* juxtaposition concatenates, ``|`` (or ``∨``) alternates, ``*``/``+`` are
  postfix repetition, parentheses group;
* ``name{...}`` binds variable ``name`` (``[A-Za-z0-9_]+`` directly followed
  by ``{``);
* ``.`` or ``Σ`` match any single symbol, ``ε`` matches the empty string,
  ``∅`` matches nothing;
* a backslash escapes any character (needed for ``{ } ( ) | * + . \\`` and
  for a literal space — unescaped whitespace is ignored).
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import OP_CLOSE, OP_OPEN


# ---------------------------------------------------------------------------
# Abstract syntax
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Empty(Formula):
    """Matches nothing at all."""


@dataclass(frozen=True)
class Epsilon(Formula):
    """Matches the empty string."""


@dataclass(frozen=True)
class Sym(Formula):
    char: str


@dataclass(frozen=True)
class Any(Formula):
    """Matches any single document symbol (never a variable marker)."""


@dataclass(frozen=True)
class Alt(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Cat(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Star(Formula):
    inner: Formula


@dataclass(frozen=True)
class Bind(Formula):
    var: str
    inner: Formula


def formula_variables(formula: Formula) -> frozenset[str]:
    """All variable names occurring syntactically in the formula."""
    acc: set[str] = set()
    stack = [formula]
    while stack:
        node = stack.pop()
        if isinstance(node, Bind):
            acc.add(node.var)
            stack.append(node.inner)
        elif isinstance(node, (Alt, Cat)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Star):
            stack.append(node.inner)
    return frozenset(acc)


def formula_size(formula: Formula) -> int:
    """Number of syntax-tree nodes."""
    count = 0
    stack = [formula]
    while stack:
        node = stack.pop()
        count += 1
        if isinstance(node, (Alt, Cat)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Star):
            stack.append(node.inner)
        elif isinstance(node, Bind):
            stack.append(node.inner)
    return count


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_SPECIALS = set("{}()|*+.\\") | {"∨", "Σ", "ε", "∅"}
_IDENT_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")


class FormulaSyntaxError(ValueError):
    pass


def _tokenize(text: str) -> list[tuple]:
    tokens: list[tuple] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\":
            if i + 1 >= n:
                raise FormulaSyntaxError("dangling backslash")
            tokens.append(("sym", text[i + 1]))
            i += 2
            continue
        if ch.isspace():
            i += 1
            continue
        if ch in ("|", "∨"):
            tokens.append(("alt",))
        elif ch == "*":
            tokens.append(("star",))
        elif ch == "+":
            tokens.append(("plus",))
        elif ch == "(":
            tokens.append(("lparen",))
        elif ch == ")":
            tokens.append(("rparen",))
        elif ch in (".", "Σ"):
            tokens.append(("any",))
        elif ch == "ε":
            tokens.append(("eps",))
        elif ch == "∅":
            tokens.append(("empty",))
        elif ch == "}":
            tokens.append(("rbrace",))
        elif ch == "{":
            raise FormulaSyntaxError("'{' must follow a variable name (or be escaped)")
        elif ch in _IDENT_CHARS:
            j = i
            while j < n and text[j] in _IDENT_CHARS:
                j += 1
            if j < n and text[j] == "{":
                tokens.append(("bind", text[i:j]))
                i = j + 1
                continue
            tokens.append(("sym", ch))
        else:
            tokens.append(("sym", ch))
        i += 1
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> tuple | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple:
        tok = self.peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of formula")
        self.pos += 1
        return tok

    def parse_alternation(self) -> Formula:
        node = self.parse_concatenation()
        while self.peek() == ("alt",):
            self.take()
            node = Alt(node, self.parse_concatenation())
        return node

    def parse_concatenation(self) -> Formula:
        parts = []
        while True:
            tok = self.peek()
            if tok is None or tok[0] in ("alt", "rparen", "rbrace"):
                break
            parts.append(self.parse_postfix())
        if not parts:
            raise FormulaSyntaxError("empty (sub)formula; write ε for the empty string")
        node = parts[0]
        for part in parts[1:]:
            node = Cat(node, part)
        return node

    def parse_postfix(self) -> Formula:
        node = self.parse_atom()
        while True:
            tok = self.peek()
            if tok == ("star",):
                self.take()
                node = Star(node)
            elif tok == ("plus",):
                self.take()
                node = Cat(node, Star(node))
            else:
                return node

    def parse_atom(self) -> Formula:
        tok = self.take()
        kind = tok[0]
        if kind == "sym":
            return Sym(tok[1])
        if kind == "any":
            return Any()
        if kind == "eps":
            return Epsilon()
        if kind == "empty":
            return Empty()
        if kind == "lparen":
            node = self.parse_alternation()
            if self.take() != ("rparen",):
                raise FormulaSyntaxError("expected ')'")
            return node
        if kind == "bind":
            inner = self.parse_alternation()
            if self.take() != ("rbrace",):
                raise FormulaSyntaxError("expected '}' closing binding of " + tok[1])
            return Bind(tok[1], inner)
        raise FormulaSyntaxError(f"unexpected token {tok}")


def parse_formula(text: str) -> Formula:
    parser = _Parser(_tokenize(text))
    node = parser.parse_alternation()
    if parser.peek() is not None:
        raise FormulaSyntaxError(f"trailing input at token {parser.peek()}")
    return node


def formula_to_source(formula: Formula) -> str:
    """Render a formula back to concrete syntax; parses back to an equal tree."""

    def escape(ch: str) -> str:
        if ch in _SPECIALS or ch.isspace():
            return "\\" + ch
        return ch

    def fuses(left: str, right: str) -> bool:
        # would "<left><right>" re-tokenize the seam as one bind name?
        if not left or left[-1] not in _IDENT_CHARS:
            return False
        i = 0
        while i < len(right) and right[i] in _IDENT_CHARS:
            i += 1
        return 0 < i < len(right) and right[i] == "{"

    def render(node: Formula, min_prec: int) -> str:
        # precedence: alternation 0, concatenation 1, postfix 2, atoms 3
        if isinstance(node, Alt):
            text = render(node.left, 0) + "|" + render(node.right, 1)
            prec = 0
        elif isinstance(node, Cat):
            left = render(node.left, 1)
            right = render(node.right, 2)
            text = left + (" " if fuses(left, right) else "") + right
            prec = 1
        elif isinstance(node, Star):
            text = render(node.inner, 3) + "*"
            prec = 2
        elif isinstance(node, Bind):
            text = node.var + "{" + render(node.inner, 0) + "}"
            prec = 3
        elif isinstance(node, Sym):
            text = escape(node.char)
            prec = 3
        elif isinstance(node, Any):
            text, prec = ".", 3
        elif isinstance(node, Epsilon):
            text, prec = "ε", 3
        elif isinstance(node, Empty):
            text, prec = "∅", 3
        else:  # pragma: no cover
            raise TypeError(f"not a formula node: {node!r}")
        if prec < min_prec:
            return "(" + text + ")"
        return text

    return render(formula, 0)


# ---------------------------------------------------------------------------
# Functionality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str  # "rebound" | "branch-mismatch" | "under-star" | "unbound"
    variable: str | None


@dataclass(frozen=True)
class FunctionalityReport:
    ok: bool
    violation: Violation | None = None

    def __bool__(self) -> bool:
        return self.ok


class NotFunctionalError(ValueError):
    def __init__(self, violation: Violation):
        super().__init__(f"formula is not functional: {violation.kind}"
                         + (f" ({violation.variable})" if violation.variable else ""))
        self.violation = violation


# Internal summary of a subformula's ref-word language:
#   None                      -> the language is empty
#   frozenset of variables B  -> nonempty, and every ref-word binds exactly B
# A Violation is raised as soon as some generated ref-word must be invalid.

_EMPTY_LANG = None


def _bound_vars(node: Formula) -> frozenset[str] | None:
    if isinstance(node, Empty):
        return _EMPTY_LANG
    if isinstance(node, (Epsilon, Sym, Any)):
        return frozenset()
    if isinstance(node, Alt):
        left = _bound_vars(node.left)
        right = _bound_vars(node.right)
        if left is _EMPTY_LANG:
            return right
        if right is _EMPTY_LANG:
            return left
        if left != right:
            diff = sorted(left.symmetric_difference(right))
            raise NotFunctionalError(Violation("branch-mismatch", diff[0]))
        return left
    if isinstance(node, Cat):
        left = _bound_vars(node.left)
        right = _bound_vars(node.right)
        if left is _EMPTY_LANG or right is _EMPTY_LANG:
            return _EMPTY_LANG
        overlap = left & right
        if overlap:
            raise NotFunctionalError(Violation("rebound", min(overlap)))
        return left | right
    if isinstance(node, Star):
        inner = _bound_vars(node.inner)
        if inner is _EMPTY_LANG or not inner:
            return frozenset()
        raise NotFunctionalError(Violation("under-star", min(inner)))
    if isinstance(node, Bind):
        inner = _bound_vars(node.inner)
        if inner is _EMPTY_LANG:
            return _EMPTY_LANG
        if node.var in inner:
            raise NotFunctionalError(Violation("rebound", node.var))
        return inner | {node.var}
    raise TypeError(f"not a formula node: {node!r}")  # pragma: no cover


def check_functional(formula: Formula) -> FunctionalityReport:
    """Decide whether every ref-word of the formula is valid for its variables.

    Runs in one bottom-up pass (linear in the tree size, up to set handling on
    the variables).  Subtrees with an empty language are neutral: they cannot
    contribute invalid ref-words, so e.g. ``x{a} | ∅`` is functional, while a
    variable that survives only in dead branches (``x{a} | y{∅}``) is not.
    """
    try:
        bound = _bound_vars(formula)
    except NotFunctionalError as err:
        return FunctionalityReport(False, err.violation)
    if bound is _EMPTY_LANG:
        return FunctionalityReport(True)
    missing = formula_variables(formula) - bound
    if missing:
        return FunctionalityReport(False, Violation("unbound", min(missing)))
    return FunctionalityReport(True)


def require_functional(formula: Formula) -> None:
    report = check_functional(formula)
    if not report.ok:
        raise NotFunctionalError(report.violation)


# ---------------------------------------------------------------------------
# Ref-word matching (position-automaton simulation)
# ---------------------------------------------------------------------------
#
# Used by the brute-force test oracle.  Deliberately does NOT share machinery
# with the compiler: the formula tree is linearised into its leaf occurrences
# (terminals plus the open/close markers contributed by bindings) and matched
# with the classic first/last/follow position sets, so oracle and engine can
# only agree because they implement the same semantics.


class RefWordMatcher:
    """Matches ref-words (tuples of symbols and markers) against a formula."""

    def __init__(self, formula: Formula):
        self._leaves: list[tuple] = []  # ("sym", ch) | ("any",) | ("op", kind, var)
        self._follow: list[set[int]] = []
        self._nullable, self._first, _last = self._build(formula)
        self._last = _last

    def _leaf(self, spec: tuple) -> tuple[bool, set[int], set[int]]:
        idx = len(self._leaves)
        self._leaves.append(spec)
        self._follow.append(set())
        return False, {idx}, {idx}

    def _build(self, node: Formula) -> tuple[bool, set[int], set[int]]:
        if isinstance(node, Empty):
            return False, set(), set()
        if isinstance(node, Epsilon):
            return True, set(), set()
        if isinstance(node, Sym):
            return self._leaf(("sym", node.char))
        if isinstance(node, Any):
            return self._leaf(("any",))
        if isinstance(node, Alt):
            n1, f1, l1 = self._build(node.left)
            n2, f2, l2 = self._build(node.right)
            return n1 or n2, f1 | f2, l1 | l2
        if isinstance(node, Cat):
            n1, f1, l1 = self._build(node.left)
            n2, f2, l2 = self._build(node.right)
            for p in l1:
                self._follow[p] |= f2
            first = f1 | f2 if n1 else f1
            last = l2 | l1 if n2 else l2
            return n1 and n2, first, last
        if isinstance(node, Star):
            n1, f1, l1 = self._build(node.inner)
            for p in l1:
                self._follow[p] |= f1
            return True, f1, l1
        if isinstance(node, Bind):
            no, fo, lo = self._leaf(("op", OP_OPEN, node.var))
            ni, fi, li = self._build(node.inner)
            nc, fc, lc = self._leaf(("op", OP_CLOSE, node.var))
            # open · inner · close
            for p in lo:
                self._follow[p] |= fi
            mid_last = li | lo if ni else li
            for p in mid_last:
                self._follow[p] |= fc
            return False, fo, lc
        raise TypeError(f"not a formula node: {node!r}")  # pragma: no cover

    @staticmethod
    def _leaf_matches(spec: tuple, symbol) -> bool:
        if spec[0] == "sym":
            return isinstance(symbol, str) and symbol == spec[1]
        if spec[0] == "any":
            return isinstance(symbol, str)
        _, kind, var = spec
        return not isinstance(symbol, str) and symbol == (kind, var)

    def matches(self, ref_word) -> bool:
        symbols = tuple(ref_word)
        if not symbols:
            return self._nullable
        current = {p for p in self._first if self._leaf_matches(self._leaves[p], symbols[0])}
        for symbol in symbols[1:]:
            if not current:
                return False
            candidates = set()
            for p in current:
                candidates |= self._follow[p]
            current = {p for p in candidates if self._leaf_matches(self._leaves[p], symbol)}
        return bool(current & self._last)


def match_ref_word(formula: Formula, ref_word) -> bool:
    """One-shot ref-word membership test (builds a fresh matcher)."""
    return RefWordMatcher(formula).matches(ref_word)
