"""Experiment loop, configuration, metrics and CSV emission.

A run executes K iterations of: sample N contexts from the current
curriculum distribution (or from the target for the non-curriculum
baselines), roll out the exploring policy on the product of the
environment and its reward machine, update the policy, update the
curriculum distribution inside the KL trust region, and evaluate greedily
on target contexts.

Methods:
- default       flat policy, target contexts, no curriculum
- default_star  product policy, target contexts, no curriculum
- spdl          flat policy, curriculum with whole-trajectory ratios
- intermediate  product policy, curriculum with whole-trajectory ratios
- rm_guided     product policy, curriculum with marginal ratios over the
                reward-machine/context table

Runs are fully deterministic given (config, seed): every random draw comes
from a generator keyed on (seed, iteration, stream index).
"""

from __future__ import annotations

import json
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import agent as agent_mod
from . import curriculum as cur
from .agent import ContextQuantizer, TabularPolicy
from .cmdp import LabeledCMDP, ProductTrajectory, discounted_return, rollout
from .curriculum import CurriculumConfig, GaussianContextDistribution, gaussian_kl
from .envs import RMContextMapping, builtin_machine_text, declared_F, make_env
from .mapping import ContextGrid, compute_F, validate_declared_F
from .reward_machine import RewardMachine, parse_rm

METHODS = ("default", "default_star", "spdl", "intermediate", "rm_guided")
PRODUCT_METHODS = frozenset(("default_star", "intermediate", "rm_guided"))
CURRICULUM_METHODS = frozenset(("spdl", "intermediate", "rm_guided"))

CSV_STATUSES = ("ok", "snapped", "fallback", "skipped")


@dataclass(frozen=True)
class AgentConfig:
    learning_rate: float = 0.1
    epsilon_explore: float = 0.1
    epsilon_explore_final: float = 0.01
    counterfactual: bool = True
    context_bins: int = 8  # only used by envs without a native context cell


@dataclass(frozen=True)
class ExperimentConfig:
    method: str = "rm_guided"
    env: str = "two_door_8"
    rm: str = "builtin"  # "builtin" or a path to a machine file
    f_source: str = "declared"  # declared | computed
    iterations: int = 60  # K
    rollouts_per_iteration: int = 32  # N
    eval_rollouts: int = 50
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    output_dir: str = "out"
    grid_points: int = 5  # context grid used when f_source = computed
    curriculum: CurriculumConfig = field(default_factory=lambda: CurriculumConfig(k_alpha=15))
    agent: AgentConfig = field(default_factory=AgentConfig)
    init_mean: tuple[float, ...] = (0.0, 0.0)
    init_var: tuple[float, ...] = (0.25, 0.25)
    target_mean: tuple[float, ...] = (2.0, 2.0)
    target_var: tuple[float, ...] = (1.0, 1.0)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.f_source not in ("declared", "computed"):
            raise ValueError("f_source must be 'declared' or 'computed'")
        if self.iterations < 1 or self.rollouts_per_iteration < 1:
            raise ValueError("iterations and rollouts_per_iteration must be >= 1")
        if self.eval_rollouts < 1:
            raise ValueError("eval_rollouts must be >= 1")
        if len(self.init_mean) != len(self.init_var) or len(self.target_mean) != len(
            self.target_var
        ):
            raise ValueError("distribution mean/var dimension mismatch")

    @property
    def init_distribution(self) -> GaussianContextDistribution:
        return GaussianContextDistribution.of(self.init_mean, self.init_var)

    @property
    def target_distribution(self) -> GaussianContextDistribution:
        return GaussianContextDistribution.of(self.target_mean, self.target_var)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    mu: tuple[float, ...]
    var: tuple[float, ...]
    alpha: float
    batch_return: float
    eval_return: float
    success_ratio: float
    kl_to_target: float
    kl_step: float
    solver_status: str


@dataclass
class RunLog:
    records: list[IterationRecord]
    meta: dict


# ---------------------------------------------------------------------------
# Config file parsing ("TOML-like": flat [section] blocks of key = value)
# ---------------------------------------------------------------------------


def _parse_value(text: str, line_no: int):
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        if not inner:
            return []
        return [_parse_value(part, line_no) for part in inner.split(",")]
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"config line {line_no}: cannot parse value {text!r}") from None


def parse_config_text(text: str) -> dict[str, dict]:
    """Parse the flat-section key/value config format into nested dicts."""
    sections: dict[str, dict] = {}
    current: dict | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ValueError(f"config line {line_no}: expected 'key = value'")
        if current is None:
            raise ValueError(f"config line {line_no}: key outside any [section]")
        key, value = line.split("=", 1)
        current[key.strip()] = _parse_value(value, line_no)
    return sections


def load_config(path: str | Path) -> ExperimentConfig:
    sections = parse_config_text(Path(path).read_text())
    exp = sections.get("experiment", {})
    curc = sections.get("curriculum", {})
    agc = sections.get("agent", {})
    init = sections.get("init", {})
    target = sections.get("target", {})

    curriculum = CurriculumConfig(
        epsilon=float(curc.get("epsilon", 0.25)),
        zeta=float(curc.get("zeta", 1.0)),
        k_alpha=int(curc.get("k_alpha", 15)),
        dkl_lb=float(curc.get("kl_convergence_threshold", 0.05)),
        sigma_lb=float(curc.get("sigma_lower_bound", 0.1)),
    )
    agent_cfg = AgentConfig(
        learning_rate=float(agc.get("learning_rate", 0.1)),
        epsilon_explore=float(agc.get("epsilon_explore", 0.1)),
        epsilon_explore_final=float(agc.get("epsilon_explore_final", 0.01)),
        counterfactual=bool(agc.get("counterfactual", True)),
        context_bins=int(agc.get("context_bins", 8)),
    )
    kwargs = dict(
        method=exp.get("method", "rm_guided"),
        env=exp.get("env", "two_door_8"),
        rm=exp.get("rm", "builtin"),
        f_source=exp.get("f_source", "declared"),
        iterations=int(exp.get("iterations", 60)),
        rollouts_per_iteration=int(exp.get("rollouts_per_iteration", 32)),
        eval_rollouts=int(exp.get("eval_rollouts", 50)),
        output_dir=exp.get("output_dir", "out"),
        grid_points=int(exp.get("grid_points", 5)),
        curriculum=curriculum,
        agent=agent_cfg,
    )
    if "seeds" in exp:
        kwargs["seeds"] = tuple(int(s) for s in exp["seeds"])
    if "mean" in init:
        kwargs["init_mean"] = tuple(float(x) for x in init["mean"])
    if "variance" in init:
        kwargs["init_var"] = tuple(float(x) for x in init["variance"])
    if "mean" in target:
        kwargs["target_mean"] = tuple(float(x) for x in target["mean"])
    if "variance" in target:
        kwargs["target_var"] = tuple(float(x) for x in target["variance"])
    return ExperimentConfig(**kwargs)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------


def desk_preset(method: str = "rm_guided") -> ExperimentConfig:
    """Desk-scale two-door benchmark: finishes a five-method, five-seed
    sweep in minutes on a laptop while preserving the method separation."""
    return ExperimentConfig(
        method=method,
        env="two_door_8",
        iterations=60,
        rollouts_per_iteration=32,
        eval_rollouts=50,
        seeds=(0, 1, 2, 3, 4),
        curriculum=CurriculumConfig(
            epsilon=0.4, zeta=6.0, k_alpha=15, dkl_lb=0.05, sigma_lb=0.35
        ),
        agent=AgentConfig(
            learning_rate=1.0, epsilon_explore=0.05, epsilon_explore_final=0.02
        ),
        init_mean=(0.5, 0.5),
        init_var=(0.1225, 0.1225),
        target_mean=(2.0, 2.0),
        target_var=(0.1225, 0.1225),
        output_dir="out/two_door_8",
    )


def full_scale_preset(method: str = "rm_guided") -> ExperimentConfig:
    """Full 40x40 grid with the long penalty offset; hours, not minutes."""
    return ExperimentConfig(
        method=method,
        env="two_door_40",
        iterations=150,
        rollouts_per_iteration=32,
        eval_rollouts=50,
        seeds=(0, 1, 2, 3, 4),
        curriculum=CurriculumConfig(
            epsilon=0.4, zeta=6.0, k_alpha=70, dkl_lb=0.05, sigma_lb=0.35
        ),
        agent=AgentConfig(
            learning_rate=1.0, epsilon_explore=0.05, epsilon_explore_final=0.02
        ),
        init_mean=(0.5, 0.5),
        init_var=(0.1225, 0.1225),
        target_mean=(2.0, 2.0),
        target_var=(1.0, 1.0),
        output_dir="out/two_door_40",
    )


def corridor_preset(method: str = "rm_guided") -> ExperimentConfig:
    return ExperimentConfig(
        method=method,
        env="flag_corridor",
        iterations=40,
        rollouts_per_iteration=32,
        eval_rollouts=50,
        seeds=(0, 1, 2, 3, 4),
        curriculum=CurriculumConfig(
            epsilon=0.4, zeta=4.0, k_alpha=10, dkl_lb=0.05, sigma_lb=0.35
        ),
        agent=AgentConfig(
            learning_rate=1.0, epsilon_explore=0.05, epsilon_explore_final=0.02
        ),
        init_mean=(-2.0, 2.0),
        init_var=(0.1225, 0.1225),
        target_mean=(-8.0, 8.0),
        target_var=(0.1225, 0.1225),
        output_dir="out/flag_corridor",
    )


PRESETS = {
    "two_door_8": desk_preset,
    "two_door_40": full_scale_preset,
    "flag_corridor": corridor_preset,
}


# ---------------------------------------------------------------------------
# Experiment loop
# ---------------------------------------------------------------------------


def load_machine(config: ExperimentConfig) -> RewardMachine:
    if config.rm == "builtin":
        return parse_rm(builtin_machine_text(config.env))
    return parse_rm(Path(config.rm).read_text())


def resolve_F(
    config: ExperimentConfig, env: LabeledCMDP, rm: RewardMachine
) -> RMContextMapping:
    if config.f_source == "declared":
        return declared_F(env)
    grid = ContextGrid.uniform(env.context_space, config.grid_points)
    return compute_F(env, rm, grid)


def _rng(seed: int, k: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, k, stream])


def _clipped_contexts(
    dist: GaussianContextDistribution,
    env: LabeledCMDP,
    n: int,
    rng: np.random.Generator,
) -> list[tuple[float, ...]]:
    rows = cur.sample(dist, rng, n)
    return [env.context_space.clip(row) for row in rows]


def run_experiment(config: ExperimentConfig, seed: int) -> RunLog:
    """Execute one seeded run and return its per-iteration log."""
    env = make_env(config.env)
    rm = load_machine(config)
    method = config.method
    gamma = env.gamma
    target = config.target_distribution
    curriculum_on = method in CURRICULUM_METHODS
    f_table = resolve_F(config, env, rm) if method == "rm_guided" else None
    cconf = replace(config.curriculum, mean_bounds=env.context_space.bounds)

    policy = TabularPolicy(
        n_actions=env.n_actions,
        gamma=gamma,
        quantizer=ContextQuantizer.for_env(env, config.agent.context_bins),
        terminal_rm_states=env.terminal_rm_states,
        use_rm_state=method in PRODUCT_METHODS,
        learning_rate=config.agent.learning_rate,
        epsilon_explore=config.agent.epsilon_explore,
    )
    counterfactual = config.agent.counterfactual and method in PRODUCT_METHODS

    nu = config.init_distribution if curriculum_on else target
    K = config.iterations
    N = config.rollouts_per_iteration
    records: list[IterationRecord] = []

    for k in range(1, K + 1):
        frac = (k - 1) / (K - 1) if K > 1 else 0.0
        policy.epsilon_explore = config.agent.epsilon_explore + frac * (
            config.agent.epsilon_explore_final - config.agent.epsilon_explore
        )

        sampling_dist = nu if curriculum_on else target
        contexts = _clipped_contexts(sampling_dist, env, N, _rng(seed, k, 0))
        batch: list[ProductTrajectory] = [
            rollout(env, rm, c, policy.behavior_policy(), _rng(seed, k, 1000 + i))
            for i, c in enumerate(contexts)
        ]
        policy.update(batch, rm, counterfactual=counterfactual)
        batch_return = float(np.mean([discounted_return(t, gamma) for t in batch]))

        if curriculum_on:
            nu_prev = nu
            alpha = cur.alpha_schedule(k, cconf, nu_prev, batch, target, gamma)
            result = cur.update_distribution(
                nu_prev, batch, target, alpha, cconf, method, gamma, F=f_table
            )
            nu = result.nu
            status = result.status
            kl_step = gaussian_kl(nu, nu_prev)
        else:
            alpha, status, kl_step = 0.0, "skipped", 0.0

        eval_return, success = agent_mod.evaluate(
            policy, env, rm, target, config.eval_rollouts, gamma, _rng(seed, k, 2)
        )
        records.append(
            IterationRecord(
                iteration=k,
                mu=nu.mean,
                var=nu.var,
                alpha=alpha,
                batch_return=batch_return,
                eval_return=eval_return,
                success_ratio=success,
                kl_to_target=gaussian_kl(nu, target),
                kl_step=kl_step,
                solver_status=status,
            )
        )

    meta = {
        "method": method,
        "env": config.env,
        "seed": seed,
        "k_alpha": config.curriculum.k_alpha,
        "dkl_lb": config.curriculum.dkl_lb,
        "epsilon": config.curriculum.epsilon,
        "sigma_lb": config.curriculum.sigma_lb,
        "gamma": gamma,
        "dim": len(config.target_mean),
    }
    return RunLog(records, meta)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def curriculum_length(log: RunLog, dkl_lb: float) -> int | None:
    """First iteration whose distribution lies within dkl_lb of the target;
    None if the curriculum never converges."""
    for rec in log.records:
        if rec.kl_to_target < dkl_lb:
            return rec.iteration
    return None


def stat_names(dim: int) -> list[str]:
    return [f"mu_{i}" for i in range(1, dim + 1)] + [
        f"var_{i}" for i in range(1, dim + 1)
    ]


@dataclass
class VarianceReport:
    """Within-run variance of each curriculum statistic over the iterations
    between the penalty offset and convergence, per seed and averaged.

    Runs that never converge are measured up to the final iteration and
    listed in nonconverged_seeds."""

    per_seed: dict[int, dict[str, float]]
    average: dict[str, float]
    nonconverged_seeds: list[int]


def curricula_variance(
    logs: Mapping[int, RunLog], k_alpha: int, dkl_lb: float
) -> VarianceReport:
    per_seed: dict[int, dict[str, float]] = {}
    nonconverged: list[int] = []
    names: list[str] = []
    for seed, log in sorted(logs.items()):
        dim = len(log.records[0].mu) if log.records else 0
        names = stat_names(dim)
        conv = curriculum_length(log, dkl_lb)
        if conv is None:
            nonconverged.append(seed)
        lo = k_alpha + 1
        hi = conv if conv is not None and conv >= lo else (
            log.records[-1].iteration if log.records else 0
        )
        window = [r for r in log.records if lo <= r.iteration <= hi]
        stats: dict[str, float] = {}
        for j, name in enumerate(names):
            if window:
                series = [
                    (r.mu[j] if j < dim else r.var[j - dim]) for r in window
                ]
                stats[name] = float(np.var(series))
            else:
                stats[name] = 0.0
        per_seed[seed] = stats
    average = {
        name: float(np.mean([stats[name] for stats in per_seed.values()]))
        for name in names
    }
    return VarianceReport(per_seed, average, nonconverged)


# ---------------------------------------------------------------------------
# CSV emission / parsing
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def csv_header(dim: int) -> str:
    mu = ",".join(f"mu_{i}" for i in range(1, dim + 1))
    var = ",".join(f"var_{i}" for i in range(1, dim + 1))
    return (
        f"iter,{mu},{var},alpha,batch_return,eval_return,success_ratio,"
        "kl_to_target,kl_step,solver_status"
    )


def emit_run_csv(log: RunLog, path: str | Path) -> None:
    """Write one run as CSV; numeric fields round-trip at 17 significant
    digits, '.' decimal separator, LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dim = log.meta.get("dim", len(log.records[0].mu) if log.records else 0)
    lines = [csv_header(dim)]
    for r in log.records:
        fields = (
            [str(r.iteration)]
            + [_fmt(x) for x in r.mu]
            + [_fmt(x) for x in r.var]
            + [
                _fmt(r.alpha),
                _fmt(r.batch_return),
                _fmt(r.eval_return),
                _fmt(r.success_ratio),
                _fmt(r.kl_to_target),
                _fmt(r.kl_step),
                r.solver_status,
            ]
        )
        lines.append(",".join(fields))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_run_csv(path: str | Path, meta: dict | None = None) -> RunLog:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    header = lines[0].split(",")
    mu_cols = [i for i, h in enumerate(header) if re.fullmatch(r"mu_\d+", h)]
    var_cols = [i for i, h in enumerate(header) if re.fullmatch(r"var_\d+", h)]
    col = {h: i for i, h in enumerate(header)}
    records = []
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split(",")
        records.append(
            IterationRecord(
                iteration=int(parts[col["iter"]]),
                mu=tuple(float(parts[i]) for i in mu_cols),
                var=tuple(float(parts[i]) for i in var_cols),
                alpha=float(parts[col["alpha"]]),
                batch_return=float(parts[col["batch_return"]]),
                eval_return=float(parts[col["eval_return"]]),
                success_ratio=float(parts[col["success_ratio"]]),
                kl_to_target=float(parts[col["kl_to_target"]]),
                kl_step=float(parts[col["kl_step"]]),
                solver_status=parts[col["solver_status"]],
            )
        )
    return RunLog(records, dict(meta or {}))


def run_output_path(out_dir: str | Path, method: str, seed: int) -> Path:
    return Path(out_dir) / method / f"seed_{seed}.csv"


def emit_run(log: RunLog, out_dir: str | Path) -> Path:
    """Write a run CSV under <out>/<method>/ plus the method's meta.json."""
    method = log.meta["method"]
    path = run_output_path(out_dir, method, log.meta["seed"])
    emit_run_csv(log, path)
    meta = {k: v for k, v in log.meta.items() if k != "seed"}
    meta_path = path.parent / "meta.json"
    with open(meta_path, "w", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _run_job(args: tuple[ExperimentConfig, int, str]) -> tuple[int, str]:
    config, seed, out_dir = args
    log = run_experiment(config, seed)
    path = emit_run(log, out_dir)
    return seed, str(path)


def worker_count() -> int:
    env_value = os.environ.get("RMSPRL_THREADS", "")
    if env_value.strip():
        return max(1, int(env_value))
    return os.cpu_count() or 1


def sweep(
    config: ExperimentConfig,
    seeds: Sequence[int] | None = None,
    out_dir: str | Path | None = None,
    workers: int | None = None,
) -> dict[int, Path]:
    """Run all seeds (parallel jobs), writing one CSV per (method, seed)."""
    seeds = list(config.seeds if seeds is None else seeds)
    out = str(config.output_dir if out_dir is None else out_dir)
    workers = worker_count() if workers is None else workers
    jobs = [(config, seed, out) for seed in seeds]
    results: dict[int, Path] = {}
    if workers <= 1 or len(jobs) <= 1:
        for job in jobs:
            seed, path = _run_job(job)
            results[seed] = Path(path)
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            for seed, path in pool.map(_run_job, jobs):
                results[seed] = Path(path)
    return results


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


def load_sweep_dir(in_dir: str | Path) -> dict[str, dict[int, RunLog]]:
    """Load <in>/<method>/seed_*.csv into {method: {seed: RunLog}}."""
    in_dir = Path(in_dir)
    out: dict[str, dict[int, RunLog]] = {}
    for method_dir in sorted(p for p in in_dir.iterdir() if p.is_dir()):
        if method_dir.name == "report":
            continue
        meta = {}
        meta_path = method_dir / "meta.json"
        if meta_path.exists():
            meta = json.loads(meta_path.read_text())
        runs: dict[int, RunLog] = {}
        for csv_path in sorted(method_dir.glob("seed_*.csv")):
            seed = int(csv_path.stem.split("_", 1)[1])
            runs[seed] = parse_run_csv(csv_path, {**meta, "seed": seed})
        if runs:
            out[method_dir.name] = runs
    return out


def write_report(
    in_dir: str | Path,
    k_alpha: int | None = None,
    dkl_lb: float | None = None,
) -> tuple[Path, list[str]]:
    """Compute curriculum lengths and curricula variances for every method
    found under in_dir; write report CSVs and return (report dir, text lines)."""
    in_dir = Path(in_dir)
    sweep_logs = load_sweep_dir(in_dir)
    if not sweep_logs:
        raise ValueError(f"no run CSVs found under {in_dir}")
    report_dir = in_dir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)

    length_rows = ["method,seed,curriculum_length,converged"]
    var_rows = ["method,seed,statistic,variance"]
    text: list[str] = []
    for method, runs in sorted(sweep_logs.items()):
        meta = next(iter(runs.values())).meta
        ka = int(meta.get("k_alpha", 0)) if k_alpha is None else k_alpha
        lb = float(meta.get("dkl_lb", 0.05)) if dkl_lb is None else dkl_lb
        lengths = {}
        for seed, log in sorted(runs.items()):
            length = curriculum_length(log, lb)
            lengths[seed] = length
            length_rows.append(
                f"{method},{seed},{'' if length is None else length},"
                f"{'true' if length is not None else 'false'}"
            )
        var_report = curricula_variance(runs, ka, lb)
        for seed, stats in sorted(var_report.per_seed.items()):
            for name, value in stats.items():
                var_rows.append(f"{method},{seed},{name},{_fmt(value)}")
        finite = [v for v in lengths.values() if v is not None]
        median_len = float(np.median(finite)) if finite else float("nan")
        text.append(f"[{method}]")
        text.append(
            f"  curriculum length: median {median_len:g} "
            f"({len(finite)}/{len(lengths)} converged)"
        )
        for name, value in var_report.average.items():
            text.append(f"  avg variance {name}: {value:.3e}")
        if var_report.nonconverged_seeds:
            text.append(
                f"  non-converged seeds (measured to K): "
                f"{var_report.nonconverged_seeds}"
            )

    with open(report_dir / "curriculum_length.csv", "w", newline="\n") as fh:
        fh.write("\n".join(length_rows) + "\n")
    with open(report_dir / "curricula_variance.csv", "w", newline="\n") as fh:
        fh.write("\n".join(var_rows) + "\n")
    return report_dir, text


# ---------------------------------------------------------------------------
# Mapping validation entry point (CLI `validate-mapping`)
# ---------------------------------------------------------------------------


def validate_mapping(
    env_name: str, rm_path: str | None = None, grid_points: int = 5
):
    """Brute-force the reward-machine/context table of an environment and
    compare it against the environment's expert table."""
    env = make_env(env_name)
    if rm_path is None or rm_path == "builtin":
        rm = parse_rm(builtin_machine_text(env_name))
    else:
        rm = parse_rm(Path(rm_path).read_text())
    grid = ContextGrid.uniform(env.context_space, grid_points)
    computed = compute_F(env, rm, grid)
    return validate_declared_F(declared_F(env), computed)
