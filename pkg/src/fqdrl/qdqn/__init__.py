"""DQN agent parameterized over a Q-function approximator (PQC or MLP)."""

from .agent import (
    AgentConfig,
    DQNAgent,
    bellman_targets,
    epsilon_at,
    make_optimizer,
    select_action,
    sync_target,
    train_step,
)
from .approximators import Approximator, MlpApproximator, PqcApproximator, mlp_backward, mlp_forward
from .optim import Adam, GradientDescent
from .replay import Batch, ReplayBuffer, Transition

__all__ = [
    "Adam",
    "AgentConfig",
    "Approximator",
    "Batch",
    "DQNAgent",
    "GradientDescent",
    "MlpApproximator",
    "PqcApproximator",
    "ReplayBuffer",
    "Transition",
    "bellman_targets",
    "epsilon_at",
    "make_optimizer",
    "mlp_backward",
    "mlp_forward",
    "select_action",
    "sync_target",
    "train_step",
]
