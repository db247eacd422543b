"""Curriculum reinforcement learning with reward machines on contextual MDPs."""

from .reward_machine import (
    DeterminismError,
    Label,
    RewardMachine,
    RMParseError,
    RMValidationError,
    eval_guard,
    parse_rm,
    rm_run,
    rm_step,
    rm_to_text,
)
from .cmdp import (
    BoxContextSpace,
    LabeledCMDP,
    ProductState,
    ProductTrajectory,
    discounted_return,
    product_initial,
    product_step,
    rollout,
)
from .envs import FlagCorridorEnv, TwoDoorEnv, builtin_machine, declared_F, make_env
from .mapping import (
    ContextGrid,
    Verdict,
    compute_F,
    compute_hmin,
    is_identifier_set,
    validate_declared_F,
)
from .curriculum import (
    CurriculumConfig,
    GaussianContextDistribution,
    alpha_schedule,
    gaussian_kl,
    marginal,
    objective,
    pdf,
    step_weights,
    update_distribution,
)
from .agent import ContextQuantizer, TabularPolicy, evaluate, update_policy
from .harness import (
    ExperimentConfig,
    RunLog,
    curricula_variance,
    curriculum_length,
    emit_run_csv,
    load_config,
    run_experiment,
    sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
