"""Identifier context parameters: which context dimensions determine the
machine successor of a given (q, s, a, s') transition.

The continuous "for all contexts" quantifier is replaced by a finite grid
over the box context space.  For the shipped environments labels depend on
contexts only through a per-dimension quantization (door columns, flag
cells), so a grid containing one context per quantized cell is exhaustive;
for other environments the default 5-point grid is a documented soundness
caveat.

Dimension indices are 1-based throughout (c[1], ..., c[Gamma]).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .cmdp import Action, BoxContextSpace, Context, LabeledCMDP, State
from .envs import RMContextMapping
from .reward_machine import RewardMachine


@dataclass(frozen=True)
class ContextGrid:
    """Finite per-dimension sample sets whose Cartesian product stands in
    for the full box context space."""

    points: tuple[tuple[float, ...], ...]  # points[i] = samples for dim i+1

    def __post_init__(self):
        for dim_points in self.points:
            if len(dim_points) == 0:
                raise ValueError("each dimension needs at least one sample")

    @staticmethod
    def uniform(space: BoxContextSpace, points_per_dim: int = 5) -> "ContextGrid":
        """Evenly spaced samples per dimension, endpoints included."""
        return ContextGrid(
            tuple(
                tuple(np.linspace(lo, hi, points_per_dim))
                for lo, hi in space.bounds
            )
        )

    @property
    def dim(self) -> int:
        return len(self.points)

    def contexts(self) -> list[Context]:
        return [tuple(c) for c in itertools.product(*self.points)]


def is_identifier_set(
    env: LabeledCMDP,
    rm: RewardMachine,
    grid: ContextGrid,
    dims: frozenset[int],
    q: str,
    s: State,
    a: Action,
    s_next: State,
) -> bool:
    """True iff fixing the context coordinates in ``dims`` fixes the machine
    successor of (q, s, a, s') across the grid."""
    successors = _successors_by_context(env, rm, grid, q, s, a, s_next)
    return _is_identifier(successors, dims, grid.dim)


def compute_hmin(
    env: LabeledCMDP,
    rm: RewardMachine,
    grid: ContextGrid,
    q: str,
    s: State,
    a: Action,
    s_next: State,
) -> frozenset[int]:
    """Smallest identifier set for the transition.

    Uses the single-dimension-removal characterization: dimension i belongs
    to the minimum iff dropping i from the full set breaks identification.
    (Identifier sets are closed under supersets and intersections, so the
    O(Gamma) test equals the exhaustive-subset minimum; the exhaustive
    version lives in the test suite as an oracle.)
    """
    successors = _successors_by_context(env, rm, grid, q, s, a, s_next)
    full = frozenset(range(1, grid.dim + 1))
    return frozenset(
        i for i in full if not _is_identifier(successors, full - {i}, grid.dim)
    )


def _successors_by_context(
    env: LabeledCMDP,
    rm: RewardMachine,
    grid: ContextGrid,
    q: str,
    s: State,
    a: Action,
    s_next: State,
) -> list[tuple[Context, str]]:
    return [
        (c, rm.step(q, env.label(c, s, a, s_next))[0]) for c in grid.contexts()
    ]


def _is_identifier(
    successors: list[tuple[Context, str]], dims: frozenset[int], total_dims: int
) -> bool:
    idx = sorted(i - 1 for i in dims)
    groups: dict[tuple[float, ...], str] = {}
    for c, q_next in successors:
        key = tuple(c[i] for i in idx)
        seen = groups.setdefault(key, q_next)
        if seen != q_next:
            return False
    return True


def enumerate_env_transitions(
    env: LabeledCMDP, grid: ContextGrid
) -> list[tuple[State, Action, State]]:
    """All (s, a, s') with nonzero transition probability for some grid context."""
    transitions: list[tuple[State, Action, State]] = []
    seen: set[tuple[State, Action, State]] = set()
    contexts = grid.contexts()
    for s in env.states():
        for a in range(env.n_actions):
            for c in contexts:
                for s_next, p in env.transition_support(c, s, a):
                    if p > 0.0 and (s, a, s_next) not in seen:
                        seen.add((s, a, s_next))
                        transitions.append((s, a, s_next))
    return transitions


def compute_F(
    env: LabeledCMDP, rm: RewardMachine, grid: ContextGrid | None = None
) -> RMContextMapping:
    """Brute-force reward-machine/context mapping.

    For every machine state q and environment transition (s, a, s'), the
    smallest identifier set of (q, s, a, s') is unioned into F(q, q') for
    each successor q' the transition reaches under some grid context.  Keys
    are exactly the (q, q') pairs realized by at least one transition.
    """
    if grid is None:
        grid = ContextGrid.uniform(env.context_space)
    contexts = grid.contexts()
    full = frozenset(range(1, grid.dim + 1))
    table: dict[tuple[str, str], set[int]] = {}

    for s, a, s_next in enumerate_env_transitions(env, grid):
        # labels are context-dependent but machine-independent: share them
        # across machine states
        labels = [env.label(c, s, a, s_next) for c in contexts]
        for q in rm.states:
            successors = [(c, rm.step(q, lab)[0]) for c, lab in zip(contexts, labels)]
            hmin = frozenset(
                i for i in full if not _is_identifier(successors, full - {i}, grid.dim)
            )
            for _, q_next in successors:
                table.setdefault((q, q_next), set()).update(hmin)

    return {pair: frozenset(dims) for pair, dims in table.items()}


class Verdict(Enum):
    EXACT = "EXACT"
    SOUND_NOT_MINIMAL = "SOUND-NOT-MINIMAL"
    UNSOUND = "UNSOUND"


@dataclass
class MappingValidationReport:
    """Per-key comparison of an expert table against the brute-forced one.

    A declared superset of the computed set is still a valid identifier
    set (supersets of identifier sets identify), hence SOUND-NOT-MINIMAL;
    a declared set missing computed dimensions is UNSOUND.
    """

    verdicts: dict[tuple[str, str], Verdict] = field(default_factory=dict)
    declared: RMContextMapping = field(default_factory=dict)
    computed: RMContextMapping = field(default_factory=dict)
    missing_keys: frozenset[tuple[str, str]] = frozenset()  # computed only
    extra_keys: frozenset[tuple[str, str]] = frozenset()  # declared only

    @property
    def all_exact(self) -> bool:
        return (
            not self.missing_keys
            and not self.extra_keys
            and all(v is Verdict.EXACT for v in self.verdicts.values())
        )

    @property
    def has_unsound(self) -> bool:
        return any(v is Verdict.UNSOUND for v in self.verdicts.values())

    def lines(self) -> list[str]:
        def fmt(dims: frozenset[int]) -> str:
            return "{" + ",".join(f"c{i}" for i in sorted(dims)) + "}" if dims else "{}"

        out = []
        for pair in sorted(self.verdicts):
            q, q_next = pair
            out.append(
                f"({q},{q_next}): declared {fmt(self.declared[pair])} "
                f"computed {fmt(self.computed[pair])} -> {self.verdicts[pair].value}"
            )
        for pair in sorted(self.missing_keys):
            out.append(f"({pair[0]},{pair[1]}): missing from declared table")
        for pair in sorted(self.extra_keys):
            out.append(f"({pair[0]},{pair[1]}): declared but never realized")
        return out


def validate_declared_F(
    declared: RMContextMapping, computed: RMContextMapping
) -> MappingValidationReport:
    """Compare an expert table against a computed one, key by key."""
    report = MappingValidationReport(declared=dict(declared), computed=dict(computed))
    report.missing_keys = frozenset(computed.keys() - declared.keys())
    report.extra_keys = frozenset(declared.keys() - computed.keys())
    for pair in declared.keys() & computed.keys():
        d, c = declared[pair], computed[pair]
        if d == c:
            report.verdicts[pair] = Verdict.EXACT
        elif d > c:
            report.verdicts[pair] = Verdict.SOUND_NOT_MINIMAL
        else:
            report.verdicts[pair] = Verdict.UNSOUND
    return report
