"""Variable-set automata: NFAs over documents extended with capture markers.

States are ints ``0..n-1`` with a single initial and a single final state.
Transition labels are one of

* ``None`` — an ε-move,
* a 1-character string — consume that document symbol,
* :data:`ANY` — consume any one document symbol (kept symbolic so compiled
  automata stay independent of any particular document alphabet),
* a nonempty ``frozenset`` of variable operations ``("open"|"close", var)`` —
  perform all of them at once without consuming input.

An automaton is *functional* when every accepted marker sequence opens and
closes every variable exactly once.  For trimmed automata this is equivalent
to a local condition: every state is reached with one well-defined tuple of
per-variable states (its *configuration*), and the final state's
configuration has closed everything.  Configurations are the workhorse of
this module — the enumerator's output alphabet, the join's compatibility
relation and the key test all speak configurations.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import (
    CLOSED,
    OPEN,
    OP_CLOSE,
    OP_OPEN,
    STATE_NAMES,
    WAITING,
    SpanTuple,
    state_sequence_to_tuple,
)


class _AnySymbol:
    """Singleton wildcard label."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ANY"


ANY = _AnySymbol()

Ops = frozenset
Transition = tuple  # (src, label, dst)


class VSA:
    """A variable-set automaton.  Treat instances as immutable."""

    __slots__ = ("variables", "ordered_variables", "n_states", "initial", "final",
                 "transitions", "_adj")

    def __init__(self, variables: Iterable[str], n_states: int, initial: int,
                 final: int, transitions: Iterable[Transition]):
        self.variables = frozenset(variables)
        self.ordered_variables = tuple(sorted(self.variables))
        self.n_states = n_states
        self.initial = initial
        self.final = final
        self.transitions = tuple(transitions)
        self._adj = None
        if not (0 <= initial < n_states and 0 <= final < n_states):
            raise ValueError("initial/final state out of range")
        for src, label, dst in self.transitions:
            if not (0 <= src < n_states and 0 <= dst < n_states):
                raise ValueError(f"transition endpoint out of range: {(src, label, dst)}")
            if isinstance(label, frozenset):
                if not label:
                    raise ValueError("empty operation set; use an eps transition")
                for kind, var in label:
                    if kind not in (OP_OPEN, OP_CLOSE) or var not in self.variables:
                        raise ValueError(f"bad operation {(kind, var)}")
            elif isinstance(label, str):
                if len(label) != 1:
                    raise ValueError(f"terminal label must be one symbol: {label!r}")
            elif label is not None and label is not ANY:
                raise ValueError(f"bad label: {label!r}")

    # -- adjacency views ---------------------------------------------------

    def _adjacency(self):
        if self._adj is None:
            eps = [[] for _ in range(self.n_states)]
            ops = [[] for _ in range(self.n_states)]
            sym = [{} for _ in range(self.n_states)]
            anyy = [[] for _ in range(self.n_states)]
            for src, label, dst in self.transitions:
                if label is None:
                    eps[src].append(dst)
                elif label is ANY:
                    anyy[src].append(dst)
                elif isinstance(label, str):
                    sym[src].setdefault(label, []).append(dst)
                else:
                    ops[src].append((label, dst))
            self._adj = (eps, ops, sym, anyy)
        return self._adj

    @property
    def eps_out(self):
        return self._adjacency()[0]

    @property
    def ops_out(self):
        return self._adjacency()[1]

    @property
    def sym_out(self):
        return self._adjacency()[2]

    @property
    def any_out(self):
        return self._adjacency()[3]

    def concrete_symbols(self) -> frozenset[str]:
        return frozenset(label for _, label, _ in self.transitions
                         if isinstance(label, str))

    def has_wildcard(self) -> bool:
        return any(label is ANY for _, label, _ in self.transitions)

    def __repr__(self) -> str:
        return (f"VSA(vars={sorted(self.variables)}, n={self.n_states}, "
                f"init={self.initial}, final={self.final}, "
                f"{len(self.transitions)} transitions)")


def empty_vsa(variables: Iterable[str]) -> VSA:
    """The canonical automaton with an empty ref-word language."""
    return VSA(variables, 2, 0, 1, ())


def is_empty_language(vsa: VSA) -> bool:
    """True when the final state cannot be reached from the initial state."""
    seen = {vsa.initial}
    stack = [vsa.initial]
    succ = [[] for _ in range(vsa.n_states)]
    for src, _, dst in vsa.transitions:
        succ[src].append(dst)
    while stack:
        state = stack.pop()
        if state == vsa.final:
            return False
        for nxt in succ[state]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return True


# ---------------------------------------------------------------------------
# Trimming
# ---------------------------------------------------------------------------


def trim(vsa: VSA) -> VSA:
    """Restrict to states that lie on some initial→final path.

    If the initial or final state would die, the language is empty and the
    canonical empty automaton (over the same variables) is returned.
    """
    fwd = [[] for _ in range(vsa.n_states)]
    bwd = [[] for _ in range(vsa.n_states)]
    for src, _, dst in vsa.transitions:
        fwd[src].append(dst)
        bwd[dst].append(src)

    def reach(start: int, succ) -> set[int]:
        seen = {start}
        stack = [start]
        while stack:
            state = stack.pop()
            for nxt in succ[state]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    alive = reach(vsa.initial, fwd) & reach(vsa.final, bwd)
    if vsa.initial not in alive or vsa.final not in alive:
        return empty_vsa(vsa.variables)
    if len(alive) == vsa.n_states:
        return vsa
    remap = {}
    for state in range(vsa.n_states):
        if state in alive:
            remap[state] = len(remap)
    transitions = [(remap[src], label, remap[dst])
                   for src, label, dst in vsa.transitions
                   if src in alive and dst in alive]
    return VSA(vsa.variables, len(remap), remap[vsa.initial], remap[vsa.final],
               transitions)


# ---------------------------------------------------------------------------
# Configurations and functionality
# ---------------------------------------------------------------------------


class NotFunctionalAutomaton(ValueError):
    def __init__(self, reason: str, state: int | None = None,
                 variable: str | None = None):
        detail = reason
        if variable is not None:
            detail += f" (variable {variable!r}"
            detail += f", state {state})" if state is not None else ")"
        super().__init__(detail)
        self.reason = reason
        self.state = state
        self.variable = variable


def apply_ops(config: tuple[int, ...], ops: Ops, var_index: dict[str, int],
              state: int | None = None) -> tuple[int, ...]:
    """Apply an operation set to a configuration; opens act before closes so
    a set containing both markers of a variable steps it straight w→c."""
    out = list(config)
    opens = [var for kind, var in ops if kind == OP_OPEN]
    closes = [var for kind, var in ops if kind == OP_CLOSE]
    for var in opens:
        i = var_index[var]
        if out[i] != WAITING:
            raise NotFunctionalAutomaton("variable opened twice", state, var)
        out[i] = OPEN
    for var in closes:
        i = var_index[var]
        if out[i] != OPEN:
            raise NotFunctionalAutomaton("variable closed while not open", state, var)
        out[i] = CLOSED
    return tuple(out)


def compute_state_configs(vsa: VSA) -> list[tuple[int, ...]]:
    """Unique per-state variable configuration, by search from the initial state.

    Requires a trimmed automaton (every state reachable).  Raises
    :class:`NotFunctionalAutomaton` if two paths disagree on some state's
    configuration, or an operation is applied out of order.
    """
    ordered = vsa.ordered_variables
    var_index = {var: i for i, var in enumerate(ordered)}
    configs: list[tuple[int, ...] | None] = [None] * vsa.n_states
    configs[vsa.initial] = (WAITING,) * len(ordered)
    queue = deque([vsa.initial])
    out_edges = [[] for _ in range(vsa.n_states)]
    for src, label, dst in vsa.transitions:
        out_edges[src].append((label, dst))
    while queue:
        state = queue.popleft()
        config = configs[state]
        for label, dst in out_edges[state]:
            if isinstance(label, frozenset):
                target = apply_ops(config, label, var_index, state)
            else:
                target = config
            if configs[dst] is None:
                configs[dst] = target
                queue.append(dst)
            elif configs[dst] != target:
                bad = next(ordered[i] for i in range(len(ordered))
                           if configs[dst][i] != target[i])
                raise NotFunctionalAutomaton("conflicting configurations", dst, bad)
    missing = [s for s in range(vsa.n_states) if configs[s] is None]
    if missing:
        raise ValueError(f"automaton not trimmed; unreachable states {missing}")
    return configs  # type: ignore[return-value]


@dataclass(frozen=True)
class VsaReport:
    ok: bool
    reason: str | None = None
    state: int | None = None
    variable: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_functional_vsa(vsa: VSA) -> VsaReport:
    """Functionality test: trim, propagate configurations, require the final
    configuration to have every variable closed.

    An automaton with an empty ref-word language is vacuously functional.
    """
    trimmed = trim(vsa)
    if is_empty_language(trimmed):
        return VsaReport(True)
    try:
        configs = compute_state_configs(trimmed)
    except NotFunctionalAutomaton as err:
        return VsaReport(False, err.reason, err.state, err.variable)
    final_config = configs[trimmed.final]
    for var, state in zip(trimmed.ordered_variables, final_config):
        if state != CLOSED:
            return VsaReport(False, "variable not closed at the final state",
                             trimmed.final, var)
    return VsaReport(True)


def require_functional_vsa(vsa: VSA) -> None:
    report = check_functional_vsa(vsa)
    if not report.ok:
        raise NotFunctionalAutomaton(report.reason or "not functional",
                                     report.state, report.variable)


def config_to_str(config: Sequence[int]) -> str:
    return "(" + ",".join(STATE_NAMES[s] for s in config) + ")"


# ---------------------------------------------------------------------------
# Closures
# ---------------------------------------------------------------------------


def _closure(n_states: int, succ: list[list[int]]) -> list[frozenset[int]]:
    """Reflexive-transitive closure per state, as frozensets."""
    result: list[frozenset[int]] = [frozenset()] * n_states
    for start in range(n_states):
        seen = {start}
        stack = [start]
        while stack:
            state = stack.pop()
            for nxt in succ[state]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        result[start] = frozenset(seen)
    return result


def eps_closure(vsa: VSA) -> list[frozenset[int]]:
    """States reachable via ε-moves only."""
    return _closure(vsa.n_states, vsa.eps_out)


def var_eps_closure(vsa: VSA) -> list[frozenset[int]]:
    """States reachable via ε-moves and variable-operation moves."""
    succ = [list(eps) for eps in vsa.eps_out]
    for state, edges in enumerate(vsa.ops_out):
        succ[state].extend(dst for _, dst in edges)
    return _closure(vsa.n_states, succ)


def symbol_step(vsa: VSA, state: int, symbol: str,
                closure: list[frozenset[int]]) -> frozenset[int]:
    """Consume ``symbol`` from ``state`` (concrete or wildcard edges), then
    close off with the supplied closure."""
    targets: set[int] = set()
    for dst in vsa.sym_out[state].get(symbol, ()):
        targets |= closure[dst]
    for dst in vsa.any_out[state]:
        targets |= closure[dst]
    return frozenset(targets)


def wildcard_step(vsa: VSA, state: int,
                  closure: list[frozenset[int]]) -> frozenset[int]:
    """Like :func:`symbol_step` but through wildcard edges only."""
    targets: set[int] = set()
    for dst in vsa.any_out[state]:
        targets |= closure[dst]
    return frozenset(targets)


# ---------------------------------------------------------------------------
# Ref-word acceptance (single-operation automata)
# ---------------------------------------------------------------------------


def accepts_ref_word(vsa: VSA, ref_word) -> bool:
    """NFA membership for automata whose operation sets are singletons.

    Used by the brute-force oracle (after canonical expansion); operation
    sets of size > 1 are rejected to keep the oracle's semantics plain.
    """
    closure = eps_closure(vsa)
    current = set(closure[vsa.initial])
    for symbol in ref_word:
        nxt: set[int] = set()
        if isinstance(symbol, str):
            for state in current:
                for dst in vsa.sym_out[state].get(symbol, ()):
                    nxt |= closure[dst]
                for dst in vsa.any_out[state]:
                    nxt |= closure[dst]
        else:
            want = frozenset({symbol})
            for state in current:
                for ops, dst in vsa.ops_out[state]:
                    if len(ops) > 1:
                        raise ValueError("expand the automaton before oracle matching")
                    if ops == want:
                        nxt |= closure[dst]
        current = nxt
        if not current:
            return False
    return vsa.final in current


# ---------------------------------------------------------------------------
# Key attribute
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KeyReport:
    is_key: bool
    witness: tuple[str, SpanTuple, SpanTuple] | None = None

    def __bool__(self) -> bool:
        return self.is_key


def _fresh_symbol(used: frozenset[str]) -> str:
    for code in range(ord("a"), ord("a") + 26):
        if chr(code) not in used:
            return chr(code)
    code = 0x100
    while chr(code) in used:
        code += 1
    return chr(code)


def is_key_attribute(vsa: VSA, var: str) -> KeyReport:
    """Decide whether ``var`` determines the whole tuple in every result.

    Two accepting runs on the same document denote tuples that agree on
    ``var`` exactly when their per-position configurations agree on ``var``
    at every "checkpoint" (just before each symbol, and at acceptance), and
    the tuples are equal when the configurations fully agree everywhere.  So
    the test runs two synchronized copies of the automaton over checkpoint
    states, with a bit remembering whether a full-configuration difference
    has been seen; the attribute fails to be a key exactly when the pair can
    accept with the bit set.  On failure the path is decoded into a witness
    ``(document, tuple1, tuple2)``.
    """
    if var not in vsa.variables:
        raise ValueError(f"unknown variable {var!r}")
    trimmed = trim(vsa)
    if is_empty_language(trimmed):
        return KeyReport(True)
    configs = compute_state_configs(trimmed)
    final_config = configs[trimmed.final]
    if any(state != CLOSED for state in final_config):
        raise NotFunctionalAutomaton("key test requires a functional automaton")
    if len(vsa.variables) <= 1:
        # the single variable trivially determines the tuple
        return KeyReport(True)

    ordered = trimmed.ordered_variables
    var_pos = ordered.index(var)
    closure = var_eps_closure(trimmed)
    symbols = sorted(trimmed.concrete_symbols())
    if trimmed.has_wildcard():
        symbols.append(_fresh_symbol(trimmed.concrete_symbols()))

    step_cache: dict[tuple[int, str], frozenset[int]] = {}

    def step(state: int, symbol: str) -> frozenset[int]:
        key = (state, symbol)
        if key not in step_cache:
            step_cache[key] = symbol_step(trimmed, state, symbol, closure)
        return step_cache[key]

    # product states: (bit, state1, state2); parents for witness decoding
    parents: dict[tuple[int, int, int], tuple[tuple[int, int, int] | None, str | None]] = {}
    queue: deque[tuple[int, int, int]] = deque()
    for p1 in closure[trimmed.initial]:
        for p2 in closure[trimmed.initial]:
            c1, c2 = configs[p1], configs[p2]
            if c1[var_pos] != c2[var_pos]:
                continue
            node = (0 if c1 == c2 else 1, p1, p2)
            if node not in parents:
                parents[node] = (None, None)
                queue.append(node)

    goal = None
    while queue and goal is None:
        node = queue.popleft()
        bit, p1, p2 = node
        if bit == 1 and p1 == trimmed.final and p2 == trimmed.final:
            goal = node
            break
        for symbol in symbols:
            targets1 = step(p1, symbol)
            if not targets1:
                continue
            targets2 = step(p2, symbol)
            for q1 in targets1:
                c1 = configs[q1]
                for q2 in targets2:
                    c2 = configs[q2]
                    if c1[var_pos] != c2[var_pos]:
                        continue
                    nxt = (bit or (0 if c1 == c2 else 1), q1, q2)
                    if nxt not in parents:
                        parents[nxt] = (node, symbol)
                        queue.append(nxt)

    if goal is None:
        return KeyReport(True)

    # walk the parent chain back to an initial pair
    path: list[tuple[tuple[int, int, int], str | None]] = []
    node = goal
    while node is not None:
        parent, symbol = parents[node]
        path.append((node, symbol))
        node = parent
    path.reverse()
    doc = "".join(symbol for _, symbol in path if symbol is not None)
    seq1 = [configs[n[1]] for n, _ in path]
    seq2 = [configs[n[2]] for n, _ in path]
    tup1 = state_sequence_to_tuple(seq1, ordered)
    tup2 = state_sequence_to_tuple(seq2, ordered)
    return KeyReport(False, (doc, tup1, tup2))


# ---------------------------------------------------------------------------
# Text dump format
# ---------------------------------------------------------------------------
#
#   vsa v=<name,name,...> n=<states>
#   init <q>
#   final <q>
#   <from> <label> <to>      with label: eps | sym:<symbol> | any | ops:[...]
#
# Operation lists use ⊢x for open and ⊣x for close, opens first, each group
# sorted by variable name.

_OPEN_MARK = "⊢"
_CLOSE_MARK = "⊣"


def _ops_label(ops: Ops) -> str:
    opens = sorted(var for kind, var in ops if kind == OP_OPEN)
    closes = sorted(var for kind, var in ops if kind == OP_CLOSE)
    parts = [_OPEN_MARK + var for var in opens] + [_CLOSE_MARK + var for var in closes]
    return "ops:[" + ",".join(parts) + "]"


def _label_sort_key(label) -> tuple:
    if label is None:
        return (0, "")
    if isinstance(label, str):
        return (1, label)
    if label is ANY:
        return (2, "")
    return (3, _ops_label(label))


def dump_vsa(vsa: VSA) -> str:
    lines = [f"vsa v={','.join(vsa.ordered_variables)} n={vsa.n_states}",
             f"init {vsa.initial}",
             f"final {vsa.final}"]
    for src, label, dst in sorted(
            vsa.transitions, key=lambda t: (t[0], _label_sort_key(t[1]), t[2])):
        if label is None:
            text = "eps"
        elif label is ANY:
            text = "any"
        elif isinstance(label, str):
            text = "sym:" + label
        else:
            text = _ops_label(label)
        lines.append(f"{src} {text} {dst}")
    return "\n".join(lines) + "\n"


class VsaFormatError(ValueError):
    pass


def load_vsa(text: str) -> VSA:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("vsa "):
        raise VsaFormatError("missing 'vsa' header")
    header = lines[0].split()
    fields = dict(part.split("=", 1) for part in header[1:] if "=" in part)
    if "n" not in fields or "v" not in fields:
        raise VsaFormatError("header needs v=<vars> and n=<states>")
    variables = [v for v in fields["v"].split(",") if v]
    n_states = int(fields["n"])
    initial = final = None
    transitions = []
    for line in lines[1:]:
        if line.startswith("init "):
            initial = int(line.split()[1])
            continue
        if line.startswith("final "):
            final = int(line.split()[1])
            continue
        src_text, rest = line.split(" ", 1)
        label_text, dst_text = rest.rsplit(" ", 1)
        src, dst = int(src_text), int(dst_text)
        if label_text == "eps":
            label = None
        elif label_text == "any":
            label = ANY
        elif label_text.startswith("sym:"):
            symbol = label_text[4:]
            if len(symbol) != 1:
                raise VsaFormatError(f"bad symbol label: {label_text!r}")
            label = symbol
        elif label_text.startswith("ops:[") and label_text.endswith("]"):
            body = label_text[5:-1]
            ops = set()
            for item in body.split(",") if body else []:
                if item.startswith(_OPEN_MARK):
                    ops.add((OP_OPEN, item[1:]))
                elif item.startswith(_CLOSE_MARK):
                    ops.add((OP_CLOSE, item[1:]))
                else:
                    raise VsaFormatError(f"bad operation: {item!r}")
            label = frozenset(ops)
        else:
            raise VsaFormatError(f"bad label: {label_text!r}")
        transitions.append((src, label, dst))
    if initial is None or final is None:
        raise VsaFormatError("missing init/final lines")
    return VSA(variables, n_states, initial, final, transitions)
