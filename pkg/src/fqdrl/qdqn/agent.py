"""DQN training loop pieces and the agent that ties them together."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from ..errors import ConfigurationError, TrainingDivergenceError, UsageError
from .approximators import Approximator
from .optim import Adam
from .replay import Batch, ReplayBuffer, Transition


@dataclass
class AgentConfig:
    gamma: float = 0.99
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay: float = 0.995  # multiplicative, per agent step
    batch_size: int = 32
    target_sync_interval: int = 50  # agent steps
    lr_theta: float = 1e-3
    lr_lambda: float = 1e-3
    lr_w: float = 1e-2
    lr_mlp: float = 1e-3
    buffer_capacity: int = 10_000
    train_start_size: int = 200
    train_every: int = 1  # agent steps between gradient updates
    gradient_method: str = "adjoint"  # or "parameter_shift"
    bootstrap_on_truncation: bool = True

    def validate(self, prefix: str = "agent") -> None:
        def bad(name, msg):
            raise ConfigurationError(msg, f"{prefix}.{name}")

        if not 0 <= self.gamma < 1:
            bad("gamma", f"must be in [0, 1), got {self.gamma}")
        for name in ("epsilon_start", "epsilon_end"):
            if not 0 <= getattr(self, name) <= 1:
                bad(name, f"must be in [0, 1], got {getattr(self, name)}")
        if self.epsilon_end > self.epsilon_start:
            bad("epsilon_end", "must not exceed epsilon_start")
        if not 0 < self.epsilon_decay <= 1:
            bad("epsilon_decay", f"must be in (0, 1], got {self.epsilon_decay}")
        for name in ("batch_size", "target_sync_interval", "buffer_capacity", "train_start_size", "train_every"):
            if getattr(self, name) < 1:
                bad(name, f"must be >= 1, got {getattr(self, name)}")
        if self.batch_size > self.train_start_size:
            bad("batch_size", "must not exceed train_start_size")
        if self.train_start_size > self.buffer_capacity:
            bad("train_start_size", "must not exceed buffer_capacity")
        for name in ("lr_theta", "lr_lambda", "lr_w", "lr_mlp"):
            if getattr(self, name) < 0:
                bad(name, f"must be >= 0, got {getattr(self, name)}")
        if self.gradient_method not in ("adjoint", "parameter_shift"):
            bad("gradient_method", f"unknown method {self.gradient_method!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in fields(cls)}


def epsilon_at(config: AgentConfig, step: int) -> float:
    return max(config.epsilon_end, config.epsilon_start * config.epsilon_decay**step)


def select_action(q: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy; greedy ties go to the lowest index."""
    q = np.asarray(q)
    if rng.random() < epsilon:
        return int(rng.integers(len(q)))
    return int(np.argmax(q))


def bellman_targets(batch: Batch, target_net: Approximator, gamma: float) -> np.ndarray:
    if len(batch) == 0:
        raise UsageError("batch must be nonempty")
    q_next = target_net.q_batch(batch.s_next).max(axis=1)
    return batch.r + gamma * np.where(batch.done, 0.0, q_next)


def train_step(approx: Approximator, batch: Batch, targets: np.ndarray, optimizer) -> float:
    """One squared-error regression step on the taken actions; returns the loss."""
    q = approx.q_batch(batch.s)
    n = len(batch)
    rows = np.arange(n)
    err = q[rows, batch.a] - targets
    loss = float(np.mean(err**2))
    if not np.isfinite(loss):
        raise TrainingDivergenceError(f"non-finite loss {loss}")
    upstream = np.zeros_like(q)
    upstream[rows, batch.a] = 2.0 * err / n
    grads = approx.grad(batch.s, upstream)
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingDivergenceError(f"non-finite gradient in group {name}")
    optimizer.step(approx.groups(), grads)
    return loss


def sync_target(online: Approximator, target: Approximator) -> Approximator:
    """Hard copy of the online parameters into ``target``."""
    src, dst = online.groups(), target.groups()
    if src.keys() != dst.keys() or any(src[k].shape != dst[k].shape for k in src):
        raise UsageError("online and target networks have different shapes")
    for k in src:
        dst[k][...] = src[k]
    return target


def make_optimizer(approx: Approximator, config: AgentConfig) -> Adam:
    if approx.kind == "pqc":
        lrs = {"theta": config.lr_theta, "lambda": config.lr_lambda, "w": config.lr_w}
    else:
        lrs = {k: config.lr_mlp for k in approx.groups()}
    return Adam(lrs)


class DQNAgent:
    """One DQN learner: online and target networks, replay, and exploration state.

    ``rng`` drives exploration and replay sampling; ``env_rng`` is handed to the
    environment on every reset.
    """

    def __init__(self, online: Approximator, config: AgentConfig, rng: np.random.Generator,
                 env_rng: np.random.Generator, agent_id: int = 0):
        config.validate()
        self.config = config
        self.online = online
        self.target = online.copy()
        self.optimizer = make_optimizer(online, config)
        self.rng = rng
        self.env_rng = env_rng
        self.agent_id = agent_id
        self.steps = 0
        self.episodes = 0
        self.buffer: ReplayBuffer | None = None
        self.last_loss = float("nan")

    @property
    def epsilon(self) -> float:
        return epsilon_at(self.config, self.steps)

    def act(self, state: np.ndarray) -> int:
        return select_action(self.online.q_values(state), self.epsilon, self.rng)

    def learn(self) -> float:
        batch = self.buffer.sample(self.config.batch_size, self.rng)
        targets = bellman_targets(batch, self.target, self.config.gamma)
        self.last_loss = train_step(self.online, batch, targets, self.optimizer)
        return self.last_loss

    def run_episode(self, env, trace: list | None = None) -> float:
        """Play one episode, training online; returns the undiscounted return.

        If ``trace`` is given, (step, state, action, reward, done) rows are appended to it.
        """
        if self.buffer is None:
            self.buffer = ReplayBuffer(self.config.buffer_capacity, env.state_dim)
        cfg = self.config
        s = env.reset(self.env_rng)
        total = 0.0
        while True:
            a = self.act(s)
            s_next, r, done = env.step(a)
            if trace is not None:
                trace.append((env.t - 1, s, a, r, done))
            terminal = done and not (cfg.bootstrap_on_truncation and env.truncated)
            self.buffer.push(Transition(s, a, r, s_next, terminal))
            self.steps += 1
            if len(self.buffer) >= cfg.train_start_size and self.steps % cfg.train_every == 0:
                try:
                    self.learn()
                except TrainingDivergenceError as exc:
                    raise TrainingDivergenceError(str(exc), self.agent_id, self.episodes + 1) from exc
            if self.steps % cfg.target_sync_interval == 0:
                sync_target(self.online, self.target)
            total += r
            s = s_next
            if done:
                break
        self.episodes += 1
        return total

    def set_parameters(self, vector: np.ndarray, scope: list[str] | None = None, reset_optimizer: bool = True) -> None:
        """Overwrite online and target parameters (optionally only some groups)."""
        for net in (self.online, self.target):
            if scope is None:
                net.load_flat(vector)
            else:
                groups, slices = net.groups(), net.group_slices()
                for name in scope:
                    groups[name][...] = vector[slices[name]].reshape(groups[name].shape)
        if reset_optimizer:
            self.optimizer.reset()

    def checkpoint(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "architecture": self.online.descriptor(),
            "parameters": self.online.flatten().tolist(),
            "optimizer": self.optimizer.state_dict(),
            "steps": self.steps,
            "episodes": self.episodes,
        }
