"""Reward machines: deterministic finite-state transducers over label sets.

A machine reads labels (sets of proposition names), follows the unique
outgoing edge of the current state whose guard formula is satisfied, and
emits the scalar reward attached to that edge.  Machines are loaded from a
small text DSL (see ``parse_rm``) and are immutable after construction, so
they can be shared freely across rollout workers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

Label = frozenset[str]

# Determinism is checked by enumerating all 2^|alphabet| labels per state;
# the cap keeps that enumeration trivial.
MAX_ALPHABET = 16

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class RMError(Exception):
    """Base class for reward-machine errors."""


class RMParseError(RMError):
    """Malformed DSL text; carries the 1-based line/column of the offender."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class RMValidationError(RMError):
    """A structurally parsed machine violates a machine invariant."""


class DeterminismError(RMValidationError):
    """Some state has zero or multiple satisfied guards for a label."""

    def __init__(self, state: str, label: Label, n_matching: int):
        props = "{" + ",".join(sorted(label)) + "}"
        super().__init__(
            f"state {state}: label {props} satisfies {n_matching} guards "
            "(exactly one required)"
        )
        self.state = state
        self.label = label
        self.n_matching = n_matching


# ---------------------------------------------------------------------------
# Guard formulas
# ---------------------------------------------------------------------------


class Guard:
    """Propositional formula over proposition names; immutable AST node."""

    def evaluate(self, label: Label) -> bool:
        raise NotImplementedError

    def atoms(self) -> frozenset[str]:
        raise NotImplementedError


@dataclass(frozen=True)
class TrueGuard(Guard):
    def evaluate(self, label: Label) -> bool:
        return True

    def atoms(self) -> frozenset[str]:
        return frozenset()


@dataclass(frozen=True)
class FalseGuard(Guard):
    def evaluate(self, label: Label) -> bool:
        return False

    def atoms(self) -> frozenset[str]:
        return frozenset()


@dataclass(frozen=True)
class Atom(Guard):
    name: str

    def evaluate(self, label: Label) -> bool:
        return self.name in label

    def atoms(self) -> frozenset[str]:
        return frozenset((self.name,))


@dataclass(frozen=True)
class Not(Guard):
    child: Guard

    def evaluate(self, label: Label) -> bool:
        return not self.child.evaluate(label)

    def atoms(self) -> frozenset[str]:
        return self.child.atoms()


@dataclass(frozen=True)
class And(Guard):
    left: Guard
    right: Guard

    def evaluate(self, label: Label) -> bool:
        return self.left.evaluate(label) and self.right.evaluate(label)

    def atoms(self) -> frozenset[str]:
        return self.left.atoms() | self.right.atoms()


@dataclass(frozen=True)
class Or(Guard):
    left: Guard
    right: Guard

    def evaluate(self, label: Label) -> bool:
        return self.left.evaluate(label) or self.right.evaluate(label)

    def atoms(self) -> frozenset[str]:
        return self.left.atoms() | self.right.atoms()


def eval_guard(guard: Guard, label: Label) -> bool:
    """Standard propositional semantics with atom(p) = (p in label). Total."""
    return guard.evaluate(label)


def format_guard(guard: Guard) -> str:
    """Render a guard in DSL syntax with minimal parentheses (! > & > |)."""

    def prec(g: Guard) -> int:
        if isinstance(g, Or):
            return 0
        if isinstance(g, And):
            return 1
        return 2  # !, atoms, constants

    def render(g: Guard, parent_prec: int) -> str:
        if isinstance(g, TrueGuard):
            s, p = "true", 2
        elif isinstance(g, FalseGuard):
            s, p = "false", 2
        elif isinstance(g, Atom):
            s, p = g.name, 2
        elif isinstance(g, Not):
            s, p = "!" + render(g.child, 2), 2
        elif isinstance(g, And):
            s, p = render(g.left, 1) + " & " + render(g.right, 1), 1
        elif isinstance(g, Or):
            s, p = render(g.left, 0) + " | " + render(g.right, 0), 0
        else:
            raise TypeError(f"unknown guard node {g!r}")
        if p < parent_prec:
            s = "(" + s + ")"
        return s

    return render(guard, 0)


# ---------------------------------------------------------------------------
# Machine
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Edge:
    source: str
    guard: Guard
    target: str
    reward: float


class RewardMachine:
    """Guarded-edge reward machine; validated exhaustively at construction.

    Invariants enforced here:
    - the initial state and all edge endpoints belong to the state set;
    - every guard atom is a declared proposition, alphabet size <= 16;
    - for every state and every label over the alphabet, exactly one
      outgoing guard is satisfied (so step/run are total and deterministic).
    """

    def __init__(
        self,
        states: Sequence[str],
        initial: str,
        alphabet: Sequence[str],
        edges: Iterable[tuple[str, Guard, str, float]],
        accepting: Iterable[str] = (),
    ):
        self.states: tuple[str, ...] = tuple(states)
        self.initial = initial
        self.alphabet: tuple[str, ...] = tuple(alphabet)
        self.edges: tuple[Edge, ...] = tuple(Edge(s, g, t, float(r)) for s, g, t, r in edges)
        self.accepting: frozenset[str] = frozenset(accepting)
        self._outgoing: dict[str, tuple[Edge, ...]] = {
            q: tuple(e for e in self.edges if e.source == q) for q in self.states
        }
        self._validate()

    # -- validation --------------------------------------------------------

    def _validate(self) -> None:
        if len(set(self.states)) != len(self.states):
            raise RMValidationError("duplicate state names")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise RMValidationError("duplicate propositions in alphabet")
        for p in self.alphabet:
            if not _IDENT_RE.match(p) or not p.isascii():
                raise RMValidationError(f"invalid proposition id {p!r}")
        if len(self.alphabet) > MAX_ALPHABET:
            raise RMValidationError(
                f"alphabet has {len(self.alphabet)} propositions "
                f"(maximum {MAX_ALPHABET})"
            )
        state_set = set(self.states)
        if self.initial not in state_set:
            raise RMValidationError(f"initial state {self.initial!r} not declared")
        for q in self.accepting:
            if q not in state_set:
                raise RMValidationError(f"accepting state {q!r} not declared")
        declared = set(self.alphabet)
        for e in self.edges:
            if e.source not in state_set or e.target not in state_set:
                raise RMValidationError(
                    f"edge {e.source} -> {e.target} references undeclared state"
                )
            undeclared = e.guard.atoms() - declared
            if undeclared:
                raise RMValidationError(
                    f"edge {e.source} -> {e.target} uses undeclared "
                    f"proposition(s) {sorted(undeclared)}"
                )
        # Exhaustive determinism/completeness check over 2^|alphabet| labels.
        for q in self.states:
            outgoing = self._outgoing[q]
            for label in enumerate_labels(self.alphabet):
                n = sum(1 for e in outgoing if e.guard.evaluate(label))
                if n != 1:
                    raise DeterminismError(q, label, n)

    # -- run semantics ------------------------------------------------------

    def step(self, q: str, label: Label) -> tuple[str, float]:
        """Return (next state, reward) for consuming ``label`` in ``q``."""
        if q not in self._outgoing:
            raise RMError(f"unknown state {q!r}")
        unknown = label - set(self.alphabet)
        if unknown:
            raise RMError(f"label uses propositions outside alphabet: {sorted(unknown)}")
        for e in self._outgoing[q]:
            if e.guard.evaluate(label):
                return e.target, e.reward
        raise AssertionError("unreachable: determinism invariant guarantees a match")

    def run(self, labels: Iterable[Label]) -> list[float]:
        """Rewards produced by consuming a label sequence from the initial state."""
        q = self.initial
        rewards = []
        for label in labels:
            q, r = self.step(q, label)
            rewards.append(r)
        return rewards


def rm_step(machine: RewardMachine, q: str, label: Label) -> tuple[str, float]:
    return machine.step(q, label)


def rm_run(machine: RewardMachine, labels: Iterable[Label]) -> list[float]:
    return machine.run(labels)


def enumerate_labels(alphabet: Sequence[str]) -> Iterator[Label]:
    """All subsets of the alphabet, in bitmask order of declaration positions."""
    n = len(alphabet)
    for mask in range(1 << n):
        yield frozenset(alphabet[i] for i in range(n) if mask >> i & 1)


def same_step_table(a: RewardMachine, b: RewardMachine) -> bool:
    """Semantic equality: identical step tables over all labels and states."""
    if set(a.states) != set(b.states) or a.initial != b.initial:
        return False
    if set(a.alphabet) != set(b.alphabet):
        return False
    for q in a.states:
        for label in enumerate_labels(a.alphabet):
            if a.step(q, label) != b.step(q, label):
                return False
    return True


# ---------------------------------------------------------------------------
# DSL
# ---------------------------------------------------------------------------
#
# machine  := "alphabet" ":" ident ("," ident)* decl+
# decl     := "state" ident ["initial"] ["accepting"]
#           | "edge" ident "->" ident "on" formula "reward" number
# formula  := "true" | "false" | ident | "!" formula
#           | formula "&" formula | formula "|" formula | "(" formula ")"
#
# Precedence: ! > & > |.  Comments run from "#" to end of line; one
# declaration per line.

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t]+)"
    r"|(?P<arrow>->)"
    r"|(?P<punct>[:,()!&|])"
    r"|(?P<number>[-+]?\d+(\.\d*)?([eE][-+]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # arrow | punct | number | ident | eol
    text: str
    line: int
    col: int


def _tokenize_line(text: str, line_no: int) -> list[_Token]:
    text = text.split("#", 1)[0]
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise RMParseError(f"unexpected character {text[pos]!r}", line_no, pos + 1)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), line_no, pos + 1))
        pos = m.end()
    return tokens


class _LineParser:
    def __init__(self, tokens: list[_Token], line_no: int):
        self.tokens = tokens
        self.line_no = line_no
        self.pos = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            last_col = self.tokens[-1].col + len(self.tokens[-1].text) if self.tokens else 1
            raise RMParseError("unexpected end of line", self.line_no, last_col)
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise RMParseError(f"expected {want!r}, got {tok.text!r}", tok.line, tok.col)
        return tok

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    # formula := or_expr
    def parse_formula(self) -> Guard:
        return self._parse_or()

    def _parse_or(self) -> Guard:
        node = self._parse_and()
        while (tok := self.peek()) is not None and tok.text == "|":
            self.next()
            node = Or(node, self._parse_and())
        return node

    def _parse_and(self) -> Guard:
        node = self._parse_not()
        while (tok := self.peek()) is not None and tok.text == "&":
            self.next()
            node = And(node, self._parse_not())
        return node

    def _parse_not(self) -> Guard:
        tok = self.peek()
        if tok is not None and tok.text == "!":
            self.next()
            return Not(self._parse_not())
        return self._parse_atom()

    def _parse_atom(self) -> Guard:
        tok = self.next()
        if tok.text == "(":
            node = self._parse_or()
            self.expect("punct", ")")
            return node
        if tok.kind == "ident":
            if tok.text == "true":
                return TrueGuard()
            if tok.text == "false":
                return FalseGuard()
            return Atom(tok.text)
        raise RMParseError(f"expected formula, got {tok.text!r}", tok.line, tok.col)


def parse_rm(text: str) -> RewardMachine:
    """Parse DSL text into a validated RewardMachine.

    Raises RMParseError for malformed text (position-reported),
    RMValidationError for undeclared propositions or malformed structure,
    and DeterminismError (with offending state and label) when some state
    does not have exactly one satisfied guard for every label.
    """
    alphabet: list[str] = []
    states: list[str] = []
    initial: str | None = None
    accepting: list[str] = []
    edges: list[tuple[str, Guard, str, float]] = []
    # (source token) kept so undeclared-proposition errors can cite a position
    edge_positions: list[_Token] = []

    lines = text.splitlines()
    saw_alphabet = False
    for line_no, raw in enumerate(lines, start=1):
        tokens = _tokenize_line(raw, line_no)
        if not tokens:
            continue
        p = _LineParser(tokens, line_no)
        head = p.next()
        if head.kind != "ident":
            raise RMParseError(f"expected declaration, got {head.text!r}", head.line, head.col)
        if head.text == "alphabet":
            if saw_alphabet:
                raise RMParseError("duplicate alphabet declaration", head.line, head.col)
            saw_alphabet = True
            p.expect("punct", ":")
            alphabet.append(p.expect("ident").text)
            while not p.at_end():
                p.expect("punct", ",")
                alphabet.append(p.expect("ident").text)
        elif head.text == "state":
            if not saw_alphabet:
                raise RMParseError("alphabet must be declared first", head.line, head.col)
            name = p.expect("ident").text
            states.append(name)
            while not p.at_end():
                flag = p.expect("ident")
                if flag.text == "initial":
                    if initial is not None:
                        raise RMParseError("multiple initial states", flag.line, flag.col)
                    initial = name
                elif flag.text == "accepting":
                    accepting.append(name)
                else:
                    raise RMParseError(
                        f"unknown state flag {flag.text!r}", flag.line, flag.col
                    )
        elif head.text == "edge":
            if not saw_alphabet:
                raise RMParseError("alphabet must be declared first", head.line, head.col)
            src = p.expect("ident")
            p.expect("arrow")
            dst = p.expect("ident").text
            kw = p.expect("ident")
            if kw.text != "on":
                raise RMParseError(f"expected 'on', got {kw.text!r}", kw.line, kw.col)
            guard = p.parse_formula()
            kw = p.expect("ident")
            if kw.text != "reward":
                raise RMParseError(f"expected 'reward', got {kw.text!r}", kw.line, kw.col)
            num = p.expect("number")
            if not p.at_end():
                tok = p.peek()
                raise RMParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
            edges.append((src.text, guard, dst, float(num.text)))
            edge_positions.append(src)
        else:
            raise RMParseError(f"unknown declaration {head.text!r}", head.line, head.col)

    if not saw_alphabet:
        raise RMParseError("missing alphabet declaration", 1, 1)
    if not states:
        raise RMParseError("no states declared", len(lines) or 1, 1)
    if initial is None:
        raise RMParseError("no initial state declared", len(lines) or 1, 1)

    declared = set(alphabet)
    for (src, guard, dst, _), tok in zip(edges, edge_positions):
        undeclared = guard.atoms() - declared
        if undeclared:
            raise RMParseError(
                f"edge {src} -> {dst} uses undeclared proposition(s) "
                f"{sorted(undeclared)}",
                tok.line,
                tok.col,
            )

    return RewardMachine(states, initial, alphabet, edges, accepting)


def rm_to_text(machine: RewardMachine) -> str:
    """Render a machine back to DSL text; parse(rm_to_text(m)) is
    semantically equal to m (same step table)."""
    out = ["alphabet: " + ", ".join(machine.alphabet)]
    for q in machine.states:
        flags = ""
        if q == machine.initial:
            flags += " initial"
        if q in machine.accepting:
            flags += " accepting"
        out.append(f"state {q}{flags}")
    for e in machine.edges:
        out.append(
            f"edge {e.source} -> {e.target} on {format_guard(e.guard)} reward {e.reward:g}"
        )
    return "\n".join(out) + "\n"
