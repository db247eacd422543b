"""Self-paced curriculum machinery: diagonal-Gaussian context distributions,
KL-regularized importance-weighted objectives, and the trust-region
distribution update.

Three objective modes share one implementation:

- "spdl" and "intermediate" weight every reward of trajectory i by the
  whole-trajectory density ratio rho(c_i | nu) / rho(c_i | nu_prev);
- "rm_guided" weights the reward of step t by the ratio of the marginal
  densities over the identifier context parameters F(q_t, q_{t+1}) of the
  machine transition taken at t, with weight exactly 1 when that set is
  empty.

Since the joint density of a diagonal Gaussian equals its marginal over
all dimensions, "intermediate" is computed as "rm_guided" with a table
mapping every transition to the full dimension set; the two modes are
therefore bit-identical whenever F maps everything to the full set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cmdp import ProductTrajectory

MODES = ("spdl", "intermediate", "rm_guided")

W_MAX = 1e6  # importance-weight clamp for vanishing previous densities
A_MAX = 1e6  # cap for the KL-penalty coefficient alpha
_LOG_W_MAX = math.log(W_MAX)

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GaussianContextDistribution:
    """Diagonal-covariance Gaussian over the context space."""

    mean: tuple[float, ...]
    var: tuple[float, ...]

    def __post_init__(self):
        if len(self.mean) != len(self.var):
            raise ValueError("mean and var must have the same dimension")
        if any(v <= 0 for v in self.var):
            raise ValueError("variances must be positive")

    @staticmethod
    def of(mean: Sequence[float], var: Sequence[float]) -> "GaussianContextDistribution":
        return GaussianContextDistribution(
            tuple(float(x) for x in mean), tuple(float(v) for v in var)
        )

    @property
    def dim(self) -> int:
        return len(self.mean)

    @property
    def mean_array(self) -> np.ndarray:
        return np.array(self.mean)

    @property
    def var_array(self) -> np.ndarray:
        return np.array(self.var)


@dataclass(frozen=True)
class CurriculumConfig:
    """Knobs of the distribution-update step.

    epsilon   -- KL trust-region radius per update
    zeta      -- proportionality constant of the adaptive KL penalty
    k_alpha   -- number of initial iterations with zero KL-to-target penalty
    dkl_lb    -- KL-to-target threshold below which the curriculum snaps to
                 the target (also the convergence threshold for reporting)
    sigma_lb  -- per-dimension standard-deviation floor
    mean_bounds -- optional per-dimension box for the distribution mean,
                 normally the context-space bounds
    """

    epsilon: float = 0.25
    zeta: float = 1.0
    k_alpha: int = 70
    dkl_lb: float = 0.05
    sigma_lb: float = 0.1
    mean_bounds: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.zeta < 0 or self.k_alpha < 0 or self.dkl_lb < 0:
            raise ValueError("zeta, k_alpha and dkl_lb must be nonnegative")
        if self.sigma_lb <= 0:
            raise ValueError("sigma_lb must be positive")


# ---------------------------------------------------------------------------
# Densities, KL, marginals
# ---------------------------------------------------------------------------


def log_pdf(d: GaussianContextDistribution, c: Sequence[float]) -> float:
    x = np.asarray(c, dtype=float)
    mu, var = d.mean_array, d.var_array
    return float(np.sum(-0.5 * (_LOG_2PI + np.log(var)) - (x - mu) ** 2 / (2.0 * var)))


def pdf(d: GaussianContextDistribution, c: Sequence[float]) -> float:
    """Product of per-dimension normal densities at c."""
    return math.exp(log_pdf(d, c))


def _kl_arrays(mp: np.ndarray, vp: np.ndarray, mq: np.ndarray, vq: np.ndarray) -> float:
    return float(
        np.sum(0.5 * np.log(vq / vp) + (vp + (mp - mq) ** 2) / (2.0 * vq) - 0.5)
    )


def gaussian_kl(p: GaussianContextDistribution, q: GaussianContextDistribution) -> float:
    """Closed-form KL(p || q) for diagonal Gaussians."""
    if p.dim != q.dim:
        raise ValueError("dimension mismatch")
    return _kl_arrays(p.mean_array, p.var_array, q.mean_array, q.var_array)


def marginal(
    d: GaussianContextDistribution, dims: Iterable[int]
) -> GaussianContextDistribution:
    """Marginal over the 1-based dimensions in ``dims``; exact coordinate
    projection for diagonal Gaussians.  Empty ``dims`` is rejected: callers
    handle the empty identifier set separately (weight 1)."""
    idx = sorted(set(dims))
    if not idx:
        raise ValueError("dims must be nonempty")
    if idx[0] < 1 or idx[-1] > d.dim:
        raise ValueError(f"dims out of range 1..{d.dim}: {idx}")
    return GaussianContextDistribution(
        tuple(d.mean[i - 1] for i in idx), tuple(d.var[i - 1] for i in idx)
    )


def sample(
    d: GaussianContextDistribution, rng: np.random.Generator, n: int
) -> np.ndarray:
    """n independent draws, shape (n, dim)."""
    return rng.normal(d.mean_array, np.sqrt(d.var_array), size=(n, d.dim))


# ---------------------------------------------------------------------------
# Importance-weighted objective
# ---------------------------------------------------------------------------


def _marginal_log_pdf_batch(
    d: GaussianContextDistribution, contexts: np.ndarray, idx0: np.ndarray
) -> np.ndarray:
    """Log marginal density of rows of ``contexts`` over 0-based dims idx0."""
    mu = d.mean_array[idx0]
    var = d.var_array[idx0]
    x = contexts[:, idx0]
    return np.sum(-0.5 * (_LOG_2PI + np.log(var)) - (x - mu) ** 2 / (2.0 * var), axis=1)


def full_dimension_table(dim: int) -> Mapping[tuple[str, str], frozenset[int]]:
    """A table assigning the full dimension set to every machine transition."""

    class _Full(dict):
        def __missing__(self, key):
            return frozenset(range(1, dim + 1))

    return _Full()


def step_weights(
    traj: ProductTrajectory,
    nu: GaussianContextDistribution,
    nu_prev: GaussianContextDistribution,
    F: Mapping[tuple[str, str], frozenset[int]],
) -> np.ndarray:
    """Per-step importance weights of a product trajectory under F."""
    weights = np.ones(len(traj.steps))
    c = np.asarray(traj.context, dtype=float).reshape(1, -1)
    for t, pair in enumerate(traj.rm_pairs):
        dims = F[pair]
        if not dims:
            continue
        idx0 = np.array(sorted(dims)) - 1
        logw = float(
            _marginal_log_pdf_batch(nu, c, idx0)[0]
            - _marginal_log_pdf_batch(nu_prev, c, idx0)[0]
        )
        weights[t] = W_MAX if logw >= _LOG_W_MAX else math.exp(logw)
    return weights


class _BatchEvaluator:
    """Precomputed view of a batch for fast repeated objective evaluation.

    Rewards of each trajectory are grouped by the identifier set of their
    step's machine transition; the discounted reward mass of a group is a
    constant, so evaluating the objective at a new nu only needs one
    density ratio per (trajectory, group).  Zero-reward steps carry no
    objective mass and are dropped.
    """

    def __init__(
        self,
        batch: Sequence[ProductTrajectory],
        gamma: float,
        f_table: Mapping[tuple[str, str], frozenset[int]],
        nu_prev: GaussianContextDistribution,
        target: GaussianContextDistribution,
    ):
        self.n = len(batch)
        self.nu_prev = nu_prev
        self.target = target
        self.clamped = 0
        per_traj: list[dict[tuple[int, ...], float]] = []
        self.const_mass = 0.0  # empty-identifier-set rewards, weight exactly 1
        for traj in batch:
            groups: dict[tuple[int, ...], float] = {}
            g = 1.0
            for step, pair in zip(traj.steps, traj.rm_pairs):
                if step.reward != 0.0:
                    dims = tuple(sorted(f_table[pair]))
                    if dims:
                        groups[dims] = groups.get(dims, 0.0) + g * step.reward
                    else:
                        self.const_mass += g * step.reward
                g *= gamma
            per_traj.append(groups)

        # flatten to one (contexts, rewards) block per distinct dims tuple
        contexts = np.array([t.context for t in batch], dtype=float)
        blocks: dict[tuple[int, ...], tuple[list[int], list[float]]] = {}
        for i, groups in enumerate(per_traj):
            for dims, mass in groups.items():
                rows, masses = blocks.setdefault(dims, ([], []))
                rows.append(i)
                masses.append(mass)
        self.blocks: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []
        for dims, (rows, masses) in sorted(blocks.items()):
            idx0 = np.array(dims) - 1
            ctx = contexts[rows]
            prev_logpdf = _marginal_log_pdf_batch(nu_prev, ctx, idx0)
            self.blocks.append((idx0, ctx, prev_logpdf, np.array(masses)))

    def value(self, nu: GaussianContextDistribution, alpha: float) -> float:
        return self.value_arrays(nu.mean_array, nu.var_array, alpha)

    def value_arrays(self, mean: np.ndarray, var: np.ndarray, alpha: float) -> float:
        """Objective at the distribution given by raw parameter arrays; the
        solver's hot path, so no distribution objects are materialized."""
        total = self.const_mass
        for idx0, ctx, prev_logpdf, masses in self.blocks:
            mu_g = mean[idx0]
            var_g = var[idx0]
            logw = (
                np.sum(
                    -0.5 * (_LOG_2PI + np.log(var_g))
                    - (ctx - mu_g) ** 2 / (2.0 * var_g),
                    axis=1,
                )
                - prev_logpdf
            )
            weights = np.exp(np.minimum(logw, _LOG_W_MAX))
            clamped = logw >= _LOG_W_MAX
            if clamped.any():
                self.clamped += int(clamped.sum())
                weights[clamped] = W_MAX
            total += float(weights @ masses)
        value = total / self.n
        if alpha != 0.0:
            value -= alpha * _kl_arrays(
                mean, var, self.target.mean_array, self.target.var_array
            )
        return value


def _resolve_table(
    mode: str, F, dim: int
) -> Mapping[tuple[str, str], frozenset[int]]:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if mode == "rm_guided":
        if F is None:
            raise ValueError("rm_guided mode requires a reward-machine/context table")
        return F
    return full_dimension_table(dim)


def objective(
    nu: GaussianContextDistribution,
    batch: Sequence[ProductTrajectory],
    nu_prev: GaussianContextDistribution,
    target: GaussianContextDistribution,
    alpha: float,
    mode: str,
    gamma: float,
    F: Mapping[tuple[str, str], frozenset[int]] | None = None,
) -> float:
    """Importance-weighted mean discounted return minus alpha * KL to target."""
    table = _resolve_table(mode, F, nu.dim)
    return _BatchEvaluator(batch, gamma, table, nu_prev, target).value(nu, alpha)


def alpha_schedule(
    k: int,
    config: CurriculumConfig,
    nu_prev: GaussianContextDistribution,
    batch: Sequence[ProductTrajectory],
    target: GaussianContextDistribution,
    gamma: float,
) -> float:
    """Penalty coefficient of iteration k: zero during the offset phase,
    afterwards proportional to the clipped mean discounted return over the
    current distance to the target."""
    if k <= config.k_alpha:
        return 0.0
    mean_return = 0.0
    for traj in batch:
        g = gamma  # rewards indexed from t=1 in the schedule's convention
        for step in traj.steps:
            mean_return += g * step.reward
            g *= gamma
    mean_return /= max(len(batch), 1)
    numerator = config.zeta * max(0.0, mean_return)
    if numerator == 0.0:
        return 0.0
    kl = gaussian_kl(nu_prev, target)
    if kl < 1e-10:
        return A_MAX
    return min(numerator / kl, A_MAX)


# ---------------------------------------------------------------------------
# Trust-region update
# ---------------------------------------------------------------------------


@dataclass
class UpdateResult:
    nu: GaussianContextDistribution
    status: str  # ok | snapped | fallback
    info: dict = field(default_factory=dict)


_FD_STEP = 1e-5
_MAX_ITERS = 200
_MAX_BACKTRACKS = 30
_KL_TOL = 1e-4


def _pack(d: GaussianContextDistribution) -> np.ndarray:
    return np.concatenate([d.mean_array, 0.5 * np.log(d.var_array)])


def _unpack(x: np.ndarray, dim: int) -> GaussianContextDistribution:
    return GaussianContextDistribution(
        tuple(float(v) for v in x[:dim]),
        tuple(float(math.exp(2.0 * v)) for v in x[dim:]),
    )


def _project(x: np.ndarray, dim: int, config: CurriculumConfig) -> np.ndarray:
    x = x.copy()
    if config.mean_bounds is not None:
        for i, (lo, hi) in enumerate(config.mean_bounds):
            x[i] = min(max(x[i], lo), hi)
    log_sigma_lb = math.log(config.sigma_lb)
    x[dim:] = np.maximum(x[dim:], log_sigma_lb)
    return x


def update_distribution(
    nu_prev: GaussianContextDistribution,
    batch: Sequence[ProductTrajectory],
    target: GaussianContextDistribution,
    alpha: float,
    config: CurriculumConfig,
    mode: str,
    gamma: float,
    F: Mapping[tuple[str, str], frozenset[int]] | None = None,
) -> UpdateResult:
    """Maximize the selected objective inside the KL trust region around
    nu_prev, with variances floored at sigma_lb^2 and the mean kept inside
    the configured box.

    The solver works on (mean, log sigma) with the constraint folded into a
    quadratic penalty whose coefficient doubles until the result is
    feasible; ascent directions come from central finite differences with a
    backtracking line search.  The accepted point never degrades the
    objective relative to nu_prev (the search starts there); if the solver
    cannot produce a feasible improvement, nu_prev is returned unchanged.
    Finally, a result within dkl_lb of the target snaps to the target
    exactly, provided the target itself lies inside the trust region.
    """
    if not batch:
        raise ValueError("batch must be nonempty")
    dim = nu_prev.dim
    table = _resolve_table(mode, F, dim)
    evaluator = _BatchEvaluator(batch, gamma, table, nu_prev, target)
    prev_mean, prev_var = nu_prev.mean_array, nu_prev.var_array

    def obj(x: np.ndarray) -> float:
        return evaluator.value_arrays(x[:dim], np.exp(2.0 * x[dim:]), alpha)

    def kl_to_prev(x: np.ndarray) -> float:
        return _kl_arrays(x[:dim], np.exp(2.0 * x[dim:]), prev_mean, prev_var)

    x0 = _project(_pack(nu_prev), dim, config)
    base_value = obj(x0)
    lam = 100.0 * max(1.0, abs(base_value))
    x_best = x0
    total_iters = 0
    penalty_rounds = 0
    for _ in range(20):
        penalty_rounds += 1

        def penalized(x: np.ndarray) -> float:
            excess = kl_to_prev(x) - config.epsilon
            return obj(x) - (lam * excess * excess if excess > 0.0 else 0.0)

        x_best, iters = _ascend(penalized, x_best, dim, config)
        total_iters += iters
        if kl_to_prev(x_best) <= config.epsilon + _KL_TOL:
            break
        lam *= 2.0
    else:
        x_best = x0  # could not regain feasibility

    candidate = _unpack(x_best, dim)
    kl_step = gaussian_kl(candidate, nu_prev)
    status = "ok"
    if kl_step > config.epsilon + _KL_TOL or obj(x_best) < base_value - 1e-9:
        candidate, status = nu_prev, "fallback"
        kl_step = 0.0

    # convergence snap: adopt the target exactly once we are close enough,
    # as long as the jump itself respects the trust region
    if (
        gaussian_kl(candidate, target) < config.dkl_lb
        and gaussian_kl(target, nu_prev) <= config.epsilon + _KL_TOL
    ):
        candidate, status = target, "snapped"
        kl_step = gaussian_kl(target, nu_prev)

    return UpdateResult(
        candidate,
        status,
        info={
            "iterations": total_iters,
            "penalty_rounds": penalty_rounds,
            "clamped_weights": evaluator.clamped,
            "kl_step": kl_step,
        },
    )


def _ascend(f, x0: np.ndarray, dim: int, config: CurriculumConfig) -> tuple[np.ndarray, int]:
    """Projected gradient ascent with central finite differences and a
    backtracking line search; returns (argmax estimate, iterations used).

    Stops early once accepted improvements become negligible relative to
    the objective scale."""
    x = x0
    fx = f(x)
    step = 0.5
    n = len(x)
    small_gains = 0
    for it in range(_MAX_ITERS):
        grad = np.empty(n)
        for j in range(n):
            e = np.zeros(n)
            e[j] = _FD_STEP
            grad[j] = (f(x + e) - f(x - e)) / (2.0 * _FD_STEP)
        norm = float(np.linalg.norm(grad))
        if norm < 1e-12:
            return x, it
        direction = grad / norm
        improved = False
        trial_step = step
        for _ in range(_MAX_BACKTRACKS):
            x_new = _project(x + trial_step * direction, dim, config)
            f_new = f(x_new)
            if f_new > fx + 1e-14:
                gain = f_new - fx
                x, fx = x_new, f_new
                step = trial_step * 2.0
                improved = True
                small_gains = small_gains + 1 if gain < 1e-9 * max(1.0, abs(fx)) else 0
                break
            trial_step *= 0.5
        if not improved or step < 1e-10 or small_gains >= 3:
            return x, it + 1
    return x, _MAX_ITERS
