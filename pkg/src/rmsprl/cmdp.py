"""Labeled contextual MDPs and their synchronous product with a reward machine.

The product runs the environment dynamics and the reward machine side by
side: each environment transition emits a label, the machine consumes it,
and the machine's output is the reward of the product step.  Consequently
the reward sequence of any product trajectory equals the machine's run on
the trajectory's label sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, NamedTuple, Sequence

import numpy as np

from .reward_machine import Label, RewardMachine

Context = tuple[float, ...]
State = Hashable
Action = int


@dataclass(frozen=True)
class BoxContextSpace:
    """Axis-aligned box of context vectors; one closed interval per dimension."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for i, (lo, hi) in enumerate(self.bounds):
            if not lo < hi:
                raise ValueError(f"dimension {i + 1}: need lo < hi, got [{lo}, {hi}]")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def contains(self, c: Sequence[float]) -> bool:
        if len(c) != self.dim:
            return False
        return all(lo <= x <= hi for x, (lo, hi) in zip(c, self.bounds))

    def clip(self, c: Sequence[float]) -> Context:
        """Project a vector onto the box, coordinate-wise."""
        return tuple(
            float(min(max(x, lo), hi)) for x, (lo, hi) in zip(c, self.bounds)
        )

    @property
    def lows(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def highs(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])


class LabeledCMDP:
    """Interface for a finite labeled contextual MDP.

    Implementations provide enumerable state/action spaces, a context
    space, context-dependent transition and initial distributions, and a
    total labeling function over (s, a, s').  Instances must be immutable;
    all dynamics are pure functions of (context, state, action, rng).
    """

    name: str = "labeled_cmdp"

    @property
    def context_space(self) -> BoxContextSpace:
        raise NotImplementedError

    @property
    def n_actions(self) -> int:
        raise NotImplementedError

    @property
    def horizon(self) -> int:
        raise NotImplementedError

    @property
    def gamma(self) -> float:
        raise NotImplementedError

    @property
    def terminal_rm_states(self) -> frozenset[str]:
        """Machine states that end an episode (a simulation choice; the
        shipped environments name their machine's absorbing sinks)."""
        return frozenset()

    def states(self) -> Iterable[State]:
        raise NotImplementedError

    def initial_support(self, c: Context) -> list[tuple[State, float]]:
        """Support of the initial state distribution; probabilities sum to 1."""
        raise NotImplementedError

    def transition_support(self, c: Context, s: State, a: Action) -> list[tuple[State, float]]:
        """Support of p_c(. | s, a); probabilities sum to 1."""
        raise NotImplementedError

    def label(self, c: Context, s: State, a: Action, s_next: State) -> Label:
        raise NotImplementedError

    # -- sampling helpers ----------------------------------------------------

    def sample_initial(self, c: Context, rng: np.random.Generator) -> State:
        return _sample_support(self.initial_support(c), rng)

    def sample_transition(
        self, c: Context, s: State, a: Action, rng: np.random.Generator
    ) -> State:
        return _sample_support(self.transition_support(c, s, a), rng)


def _sample_support(support: list[tuple[State, float]], rng: np.random.Generator) -> State:
    if len(support) == 1:
        return support[0][0]
    probs = np.array([p for _, p in support])
    idx = rng.choice(len(support), p=probs / probs.sum())
    return support[idx][0]


class ProductState(NamedTuple):
    env_state: State
    rm_state: str


class Step(NamedTuple):
    state: ProductState
    action: Action
    reward: float
    next_state: ProductState


@dataclass
class ProductTrajectory:
    """Context-tagged rollout on the product of an environment and a machine.

    ``labels[t]`` is the label emitted by step ``t``; it is recorded so the
    machine run can be replayed (e.g. for counterfactual policy updates)
    without re-querying the environment.
    """

    context: Context
    steps: list[Step] = field(default_factory=list)
    labels: list[Label] = field(default_factory=list)
    terminated: bool = False

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def rewards(self) -> list[float]:
        return [s.reward for s in self.steps]

    @property
    def rm_pairs(self) -> list[tuple[str, str]]:
        """(q_t, q_{t+1}) machine-state pair of each step."""
        return [(s.state.rm_state, s.next_state.rm_state) for s in self.steps]

    @property
    def final_state(self) -> ProductState | None:
        return self.steps[-1].next_state if self.steps else None


Policy = Callable[[ProductState, Context, np.random.Generator], Action]


def product_initial(
    env: LabeledCMDP, rm: RewardMachine, c: Context, rng: np.random.Generator
) -> ProductState:
    """Initial product state: environment state drawn from phi_c, machine
    state at its initial state."""
    return ProductState(env.sample_initial(c, rng), rm.initial)


def product_step(
    env: LabeledCMDP,
    rm: RewardMachine,
    c: Context,
    state: ProductState,
    action: Action,
    rng: np.random.Generator,
) -> tuple[ProductState, float, Label]:
    """One synchronous step: env transition, label emission, machine step."""
    s_next = env.sample_transition(c, state.env_state, action, rng)
    label = env.label(c, state.env_state, action, s_next)
    q_next, reward = rm.step(state.rm_state, label)
    return ProductState(s_next, q_next), reward, label


def rollout(
    env: LabeledCMDP,
    rm: RewardMachine,
    c: Context,
    policy: Policy,
    rng: np.random.Generator,
    horizon: int | None = None,
) -> ProductTrajectory:
    """Roll the policy out on the product for at most ``horizon`` steps.

    The episode ends early as soon as the machine enters one of the
    environment's declared terminal machine states.
    """
    T = env.horizon if horizon is None else horizon
    traj = ProductTrajectory(context=tuple(float(x) for x in c))
    state = product_initial(env, rm, c, rng)
    terminal = env.terminal_rm_states
    for _ in range(T):
        action = policy(state, traj.context, rng)
        next_state, reward, label = product_step(env, rm, c, state, action, rng)
        traj.steps.append(Step(state, action, reward, next_state))
        traj.labels.append(label)
        state = next_state
        if state.rm_state in terminal:
            traj.terminated = True
            break
    return traj


def discounted_return(traj: ProductTrajectory, gamma: float) -> float:
    """sum_t gamma^t * r_{t+1} over the trajectory's steps."""
    total = 0.0
    g = 1.0
    for step in traj.steps:
        total += g * step.reward
        g *= gamma
    return total
