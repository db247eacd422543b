"""Tabular Q-learning over product states with context quantization.

This is the pluggable policy-update step of the training loop.  Product
methods key the Q-table on (context cell, environment state, machine state,
action) and can replay each experienced environment transition against
every machine state (the labels are recorded in the trajectory, so the
machine's reaction from any state is known without touching the
environment).  Flat baselines collapse the machine-state component of the
key and so face the non-Markovian reward directly.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Callable, Iterable, Sequence

import numpy as np

from .cmdp import Context, LabeledCMDP, ProductState, ProductTrajectory, rollout
from .curriculum import GaussianContextDistribution, sample
from .reward_machine import RewardMachine


class ContextQuantizer:
    """Total map from contexts to discrete cells.

    Environments that expose ``context_cell`` (the finest distinction their
    dynamics can see, e.g. door columns) use it directly; otherwise the box
    is cut into uniform bins per dimension.
    """

    def __init__(self, cell_fn: Callable[[Context], tuple]):
        self._cell_fn = cell_fn

    def __call__(self, c: Context) -> tuple:
        return self._cell_fn(c)

    @staticmethod
    def for_env(env: LabeledCMDP, bins: int = 8) -> "ContextQuantizer":
        if hasattr(env, "context_cell"):
            return ContextQuantizer(env.context_cell)
        return ContextQuantizer.uniform(env, bins)

    @staticmethod
    def uniform(env: LabeledCMDP, bins: int = 8) -> "ContextQuantizer":
        bounds = env.context_space.bounds

        def cell(c: Context) -> tuple:
            out = []
            for x, (lo, hi) in zip(c, bounds):
                i = int((x - lo) / (hi - lo) * bins)
                out.append(min(max(i, 0), bins - 1))
            return tuple(out)

        return ContextQuantizer(cell)


class TabularPolicy:
    """Epsilon-greedy tabular Q policy.

    use_rm_state=False collapses the machine-state key component (flat
    baselines); counterfactual replay is only meaningful with the machine
    state in the key and is ignored otherwise.
    """

    def __init__(
        self,
        n_actions: int,
        gamma: float,
        quantizer: ContextQuantizer,
        terminal_rm_states: frozenset[str] = frozenset(),
        use_rm_state: bool = True,
        learning_rate: float = 0.1,
        epsilon_explore: float = 0.1,
    ):
        if not 0.0 <= epsilon_explore <= 1.0:
            raise ValueError("epsilon_explore must lie in [0, 1]")
        self.n_actions = n_actions
        self.gamma = gamma
        self.quantizer = quantizer
        self.terminal_rm_states = terminal_rm_states
        self.use_rm_state = use_rm_state
        self.learning_rate = learning_rate
        self.epsilon_explore = epsilon_explore
        self.q_table: dict[tuple, float] = defaultdict(float)

    def _key(self, cell: tuple, state: ProductState, action: int) -> tuple:
        q = state.rm_state if self.use_rm_state else None
        return (cell, state.env_state, q, action)

    def q_values(self, cell: tuple, state: ProductState) -> list[float]:
        return [self.q_table[self._key(cell, state, a)] for a in range(self.n_actions)]

    def _greedy(self, cell: tuple, state: ProductState) -> int:
        values = self.q_values(cell, state)
        best = 0
        for a in range(1, self.n_actions):
            if values[a] > values[best]:  # ties go to the lowest action index
                best = a
        return best

    def act(
        self,
        state: ProductState,
        c: Context,
        greedy: bool,
        rng: np.random.Generator,
    ) -> int:
        """Greedy mode: argmax with deterministic lowest-index tie-breaking.
        Behavior mode: epsilon-greedy whose exploit branch draws uniformly
        among the argmax set, so untrained regions are explored as a random
        walk instead of a frozen deterministic loop."""
        cell = self.quantizer(c)
        if greedy:
            return self._greedy(cell, state)
        if rng.random() < self.epsilon_explore:
            return int(rng.integers(self.n_actions))
        values = self.q_values(cell, state)
        top = max(values)
        ties = [a for a, v in enumerate(values) if v == top]
        return ties[0] if len(ties) == 1 else int(ties[rng.integers(len(ties))])

    def greedy_policy(self) -> Callable:
        return lambda state, c, rng: self.act(state, c, greedy=True, rng=rng)

    def behavior_policy(self) -> Callable:
        return lambda state, c, rng: self.act(state, c, greedy=False, rng=rng)

    # -- learning ------------------------------------------------------------

    def _bootstrap(self, cell: tuple, state: ProductState) -> float:
        if state.rm_state in self.terminal_rm_states:
            return 0.0
        return max(self.q_values(cell, state))

    def _apply(self, key: tuple, target: float) -> None:
        self.q_table[key] += self.learning_rate * (target - self.q_table[key])

    def update(
        self,
        batch: Iterable[ProductTrajectory],
        rm: RewardMachine,
        counterfactual: bool = False,
    ) -> None:
        """One-step Q-learning over every step of the batch.

        With counterfactual replay, each environment step (s, a, s') with
        recorded label l is additionally replayed against every machine
        state: the machine says which successor and reward (s, a, s') would
        have produced there, so one step updates one entry per machine
        state.  The replay at the actually-experienced state coincides with
        the plain update.
        """
        counterfactual = counterfactual and self.use_rm_state
        for traj in batch:
            cell = self.quantizer(traj.context)
            # steps are replayed newest-first so a reward found at the end of
            # an episode propagates along its whole path in a single update
            for step, label in zip(reversed(traj.steps), reversed(traj.labels)):
                if counterfactual:
                    s, s_next = step.state.env_state, step.next_state.env_state
                    for q_hat in rm.states:
                        q_next, reward = rm.step(q_hat, label)
                        ps = ProductState(s, q_hat)
                        ps_next = ProductState(s_next, q_next)
                        target = reward + self.gamma * self._bootstrap(cell, ps_next)
                        self._apply(self._key(cell, ps, step.action), target)
                else:
                    target = step.reward + self.gamma * self._bootstrap(
                        cell, step.next_state
                    )
                    self._apply(self._key(cell, step.state, step.action), target)


def update_policy(
    policy: TabularPolicy,
    batch: Iterable[ProductTrajectory],
    rm: RewardMachine,
    counterfactual: bool = False,
) -> TabularPolicy:
    policy.update(batch, rm, counterfactual)
    return policy


def evaluate(
    policy,
    env: LabeledCMDP,
    rm: RewardMachine,
    target: GaussianContextDistribution,
    n_eval: int,
    gamma: float,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Greedy evaluation on n_eval contexts drawn from the target
    distribution (clipped to the context space).  Returns the mean
    discounted return and the fraction of episodes ending in an accepting
    machine state."""
    if n_eval < 1:
        raise ValueError("n_eval must be >= 1")
    contexts = sample(target, rng, n_eval)
    act = policy.greedy_policy() if hasattr(policy, "greedy_policy") else policy
    total = 0.0
    successes = 0
    for row in contexts:
        c = env.context_space.clip(row)
        traj = rollout(env, rm, c, act, rng)
        g = 1.0
        for step in traj.steps:
            total += g * step.reward
            g *= gamma
        final = traj.final_state
        if final is not None and final.rm_state in rm.accepting:
            successes += 1
    return total / n_eval, successes / n_eval
