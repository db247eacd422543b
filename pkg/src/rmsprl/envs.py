"""Concrete labeled contextual MDPs: the two-door grid world and a 1-D
flag corridor, with their expert context-parameter tables.

Conventions shared by both environments:
- transitions are deterministic; moves that would leave the grid are
  no-ops and emit the empty label (boundary walls are not events);
- stepping onto a wall cell is allowed and emits {w}, leaving failure
  semantics entirely to the reward machine;
- context-dimension indices in the expert tables are 1-based, matching
  the c[1], ..., c[Gamma] notation used throughout.
"""

from __future__ import annotations

import math
from importlib import resources

from .cmdp import Action, BoxContextSpace, Context, LabeledCMDP, State
from .reward_machine import Label, RewardMachine, parse_rm

RMContextMapping = dict[tuple[str, str], frozenset[int]]

# row delta, col delta for up/down/left/right
GRID_MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))
ACTION_NAMES = ("up", "down", "left", "right")
UP, DOWN, LEFT, RIGHT = range(4)

_EMPTY: Label = frozenset()


def _round_half_up(x: float) -> int:
    # round() would round half to even; door placement needs half-up.
    return math.floor(x + 0.5)


def door_column(c_i: float, n_cols: int = 40) -> int:
    """Map a context coordinate in [-4, 4] to a door column on the grid."""
    col = _round_half_up((c_i + 4.0) / 8.0 * (n_cols - 1))
    return min(max(col, 0), n_cols - 1)


class TwoDoorEnv(LabeledCMDP):
    """Square grid with two horizontal walls; the context places one door
    in each wall.  The agent starts top-center and has to pass door 1,
    visit the box, pass door 2 and reach the goal, in that order.

    ``size=40`` is the full-scale instance (walls at rows 13/26, box at
    (20, 5), goal at (39, 20), start at (0, 20)); ``size=8`` is the
    reduced instance used for exhaustive mapping checks.
    """

    def __init__(self, size: int = 40, horizon: int | None = None):
        if size < 6:
            raise ValueError("grid too small to host two walls, box and goal")
        self.size = size
        self.wall_rows = (size // 3, (2 * size) // 3)
        # Full-scale keeps the box far off-axis; on small grids that makes
        # finding it by exploration hopeless, so the reduced instance puts it
        # one column off the start/goal axis instead.
        self.box = (size // 2, size // 8 if size >= 16 else size // 2 - 1)
        self.goal = (size - 1, size // 2)
        self.start = (0, size // 2)
        self.name = f"two_door_{size}"
        if horizon is None:
            # small grids get proportionally more slack for exploration
            horizon = 5 * size if size >= 16 else 10 * size
        self._horizon = horizon
        if self.box[0] in self.wall_rows or self.goal[0] in self.wall_rows:
            raise ValueError("box/goal may not sit on a wall row")

    @property
    def context_space(self) -> BoxContextSpace:
        return BoxContextSpace(((-4.0, 4.0), (-4.0, 4.0)))

    @property
    def n_actions(self) -> int:
        return 4

    @property
    def horizon(self) -> int:
        return self._horizon

    @property
    def gamma(self) -> float:
        return 0.95

    @property
    def terminal_rm_states(self) -> frozenset[str]:
        return frozenset(("q4", "q5"))

    def states(self):
        return ((r, c) for r in range(self.size) for c in range(self.size))

    def initial_support(self, c: Context) -> list[tuple[State, float]]:
        return [(self.start, 1.0)]

    def _move(self, s: State, a: Action) -> State:
        dr, dc = GRID_MOVES[a]
        r, c = s[0] + dr, s[1] + dc
        if 0 <= r < self.size and 0 <= c < self.size:
            return (r, c)
        return s  # off-grid moves are no-ops

    def transition_support(self, c: Context, s: State, a: Action) -> list[tuple[State, float]]:
        return [(self._move(s, a), 1.0)]

    def door_columns(self, c: Context) -> tuple[int, int]:
        return door_column(c[0], self.size), door_column(c[1], self.size)

    def label(self, c: Context, s: State, a: Action, s_next: State) -> Label:
        if self._move(s, a) == s and s_next == s:
            return _EMPTY  # blocked boundary move, no event
        row, col = s_next
        d1, d2 = self.door_columns(c)
        if row == self.wall_rows[0]:
            return frozenset(("d1",)) if col == d1 else frozenset(("w",))
        if row == self.wall_rows[1]:
            return frozenset(("d2",)) if col == d2 else frozenset(("w",))
        if s_next == self.box:
            return frozenset(("b",))
        if s_next == self.goal:
            return frozenset(("g",))
        return _EMPTY

    def context_cell(self, c: Context) -> tuple[int, int]:
        """Finest context distinction the dynamics can see: the door columns."""
        return self.door_columns(c)

    @property
    def declared_context_mapping(self) -> RMContextMapping:
        """Expert table: which context parameters identify each machine
        transition.  Door-1 events depend on c[1] only, door-2 events on
        c[2] only; box/goal events are context-independent."""
        return {
            ("q0", "q0"): frozenset(),
            ("q0", "q1"): frozenset((1,)),
            ("q0", "q5"): frozenset((1,)),
            ("q1", "q1"): frozenset((1,)),
            ("q1", "q2"): frozenset(),
            ("q1", "q5"): frozenset((1,)),
            ("q2", "q2"): frozenset((1,)),
            ("q2", "q3"): frozenset((2,)),
            ("q2", "q5"): frozenset((1, 2)),
            ("q3", "q3"): frozenset((2,)),
            ("q3", "q4"): frozenset(),
            ("q3", "q5"): frozenset((2,)),
            ("q4", "q4"): frozenset(),
            ("q5", "q5"): frozenset(),
        }


class FlagCorridorEnv(LabeledCMDP):
    """1-D corridor of 41 cells (-20..20).  The context places flag 1 on the
    negative side and flag 2 on the positive side; the agent starts at 0 and
    has to touch flag 1, then flag 2."""

    name = "flag_corridor"

    def __init__(self, horizon: int = 60):
        self.lo, self.hi = -20, 20
        self.start = 0
        self._horizon = horizon

    @property
    def context_space(self) -> BoxContextSpace:
        return BoxContextSpace(((-10.0, -1.0), (1.0, 10.0)))

    @property
    def n_actions(self) -> int:
        return 2  # 0 = left, 1 = right

    @property
    def horizon(self) -> int:
        return self._horizon

    @property
    def gamma(self) -> float:
        return 0.95

    @property
    def terminal_rm_states(self) -> frozenset[str]:
        return frozenset(("q2",))

    def states(self):
        return range(self.lo, self.hi + 1)

    def initial_support(self, c: Context) -> list[tuple[State, float]]:
        return [(self.start, 1.0)]

    def _move(self, s: State, a: Action) -> State:
        s_next = s + (1 if a == 1 else -1)
        if self.lo <= s_next <= self.hi:
            return s_next
        return s

    def transition_support(self, c: Context, s: State, a: Action) -> list[tuple[State, float]]:
        return [(self._move(s, a), 1.0)]

    def flag_cells(self, c: Context) -> tuple[int, int]:
        return _round_half_up(c[0]), _round_half_up(c[1])

    def label(self, c: Context, s: State, a: Action, s_next: State) -> Label:
        if self._move(s, a) == s and s_next == s:
            return _EMPTY
        f1, f2 = self.flag_cells(c)
        if s_next == f1:
            return frozenset(("f1",))
        if s_next == f2:
            return frozenset(("f2",))
        return _EMPTY

    def context_cell(self, c: Context) -> tuple[int, int]:
        return self.flag_cells(c)

    @property
    def declared_context_mapping(self) -> RMContextMapping:
        return {
            ("q0", "q0"): frozenset((1,)),
            ("q0", "q1"): frozenset((1,)),
            ("q1", "q1"): frozenset((2,)),
            ("q1", "q2"): frozenset((2,)),
            ("q2", "q2"): frozenset(),
        }


def declared_F(env: LabeledCMDP) -> RMContextMapping:
    """The environment's expert reward-machine/context table."""
    return env.declared_context_mapping


_ENV_FACTORIES = {
    "two_door_40": lambda: TwoDoorEnv(size=40),
    "two_door_8": lambda: TwoDoorEnv(size=8),
    "flag_corridor": lambda: FlagCorridorEnv(),
}

_BUILTIN_MACHINES = {
    "two_door_40": "two_door.rm",
    "two_door_8": "two_door.rm",
    "flag_corridor": "flag_corridor.rm",
}


def env_names() -> list[str]:
    return sorted(_ENV_FACTORIES)


def make_env(name: str) -> LabeledCMDP:
    try:
        return _ENV_FACTORIES[name]()
    except KeyError:
        raise ValueError(f"unknown environment {name!r}; known: {env_names()}") from None


def builtin_machine_text(env_name: str) -> str:
    try:
        fname = _BUILTIN_MACHINES[env_name]
    except KeyError:
        raise ValueError(f"no builtin machine for environment {env_name!r}") from None
    return resources.files("rmsprl").joinpath("machines", fname).read_text()


def builtin_machine(env_name: str) -> RewardMachine:
    return parse_rm(builtin_machine_text(env_name))
