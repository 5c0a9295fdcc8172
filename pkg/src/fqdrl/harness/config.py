"""Experiment configuration: JSON schema, defaults and validation.

A config file is a JSON object. Every key is optional except ``name``; unknown
keys anywhere are rejected so typos fail loudly. See README.md for the schema.
"""

from __future__ import annotations

import copy
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from ..envs import SlicingConfig
from ..errors import ConfigurationError
from ..federation import FederationConfig
from ..qdqn import AgentConfig

MANIFEST_KIND = "fqdrl-manifest"
ENV_KINDS = ("cartpole", "slicing")
APPROXIMATORS = ("pqc", "mlp")


@dataclass
class PqcSection:
    n_qubits: int = 3
    n_layers: int = 5
    observables: list[list[int]] | None = None  # one Pauli-Z product per action
    encoding_map: list[int] | None = None  # feature -> qubit; default i mod n_qubits


@dataclass
class MlpSection:
    hidden: int = 128


@dataclass
class CartPoleSection:
    kind: str = "cartpole"
    max_episode_steps: int = 200


@dataclass
class SlicingSection(SlicingConfig):
    kind: str = "slicing"
    # optional per-agent [lo, hi] ranges per slice; agent k uses entry k mod len
    agent_arrival_rate_ranges: list[list[list[float]]] | None = None

    def __post_init__(self):
        if self.max_arrival_rate is None:
            # one observation scale for every agent, so federated models see comparable inputs
            tables = [self.arrival_rate_ranges, *(self.agent_arrival_rate_ranges or [])]
            self.max_arrival_rate = [
                float(max(t[i][1] for t in tables if i < len(t))) for i in range(len(self.arrival_rate_ranges))
            ]

    def for_agent(self, k: int) -> SlicingConfig:
        base = {f.name: copy.deepcopy(getattr(self, f.name)) for f in dataclasses.fields(SlicingConfig)}
        if self.agent_arrival_rate_ranges:
            base["arrival_rate_ranges"] = copy.deepcopy(
                self.agent_arrival_rate_ranges[k % len(self.agent_arrival_rate_ranges)]
            )
        return SlicingConfig(**base)


@dataclass
class ExperimentConfig:
    name: str
    approximator: str = "pqc"
    environment: CartPoleSection | SlicingSection = field(default_factory=CartPoleSection)
    n_agents: int = 3
    episodes: int = 500
    seed: int = 0
    federation: FederationConfig = field(default_factory=FederationConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    pqc: PqcSection = field(default_factory=PqcSection)
    mlp: MlpSection = field(default_factory=MlpSection)
    output_dir: str | None = None
    parallel: bool = False
    checkpoints: bool = False
    traces: bool = False

    def resolved_output_dir(self) -> Path:
        return Path(self.output_dir or Path("runs") / self.name)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise ConfigurationError("must be a nonempty string", "name")
        if self.approximator not in APPROXIMATORS:
            raise ConfigurationError(f"must be one of {APPROXIMATORS}, got {self.approximator!r}", "approximator")
        if self.n_agents < 1:
            raise ConfigurationError(f"must be >= 1, got {self.n_agents}", "n_agents")
        if self.episodes < 1:
            raise ConfigurationError(f"must be >= 1, got {self.episodes}", "episodes")
        if self.seed < 0:
            raise ConfigurationError(f"must be >= 0, got {self.seed}", "seed")
        self.agent.validate("agent")
        self.federation.validate(self.n_agents, "federation")
        if self.pqc.n_qubits < 1 or self.pqc.n_qubits > 12:
            raise ConfigurationError(f"must be in 1..12, got {self.pqc.n_qubits}", "pqc.n_qubits")
        if self.pqc.n_layers < 1:
            raise ConfigurationError(f"must be >= 1, got {self.pqc.n_layers}", "pqc.n_layers")
        if self.mlp.hidden < 1:
            raise ConfigurationError(f"must be >= 1, got {self.mlp.hidden}", "mlp.hidden")
        env = self.environment
        if isinstance(env, SlicingSection):
            env.validate("environment")
            if env.agent_arrival_rate_ranges is not None:
                if not env.agent_arrival_rate_ranges:
                    raise ConfigurationError("must be null or nonempty", "environment.agent_arrival_rate_ranges")
                for k in range(len(env.agent_arrival_rate_ranges)):
                    env.for_agent(k).validate(f"environment.agent_arrival_rate_ranges[{k}]")
        elif env.max_episode_steps < 1:
            raise ConfigurationError(f"must be >= 1, got {env.max_episode_steps}", "environment.max_episode_steps")


def _check_type(value: Any, default: Any, path: str) -> Any:
    if default is None or isinstance(default, (list, dict)):
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigurationError(f"expected a boolean, got {value!r}", path)
    elif isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"expected an integer, got {value!r}", path)
    elif isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"expected a number, got {value!r}", path)
        return float(value)
    elif isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigurationError(f"expected a string, got {value!r}", path)
    return value


def _build(cls, data: Any, path: str, skip: tuple[str, ...] = ()):
    if not isinstance(data, Mapping):
        raise ConfigurationError(f"expected an object, got {type(data).__name__}", path)
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        where = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ConfigurationError(f"unknown key {unknown[0]!r}", where)
    template = cls()
    kwargs = {}
    for key, value in data.items():
        if key in skip:
            continue
        kwargs[key] = _check_type(value, getattr(template, key), f"{path}.{key}" if path else key)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc), path) from None


def config_from_dict(data: Mapping) -> ExperimentConfig:
    if not isinstance(data, Mapping):
        raise ConfigurationError("top level must be a JSON object")
    if data.get("kind") == MANIFEST_KIND:
        data = data["config"]
    data = dict(data)
    if "name" not in data:
        raise ConfigurationError("is required", "name")
    unknown = sorted(set(data) - {f.name for f in dataclasses.fields(ExperimentConfig)})
    if unknown:
        raise ConfigurationError(f"unknown key {unknown[0]!r}", unknown[0])

    env_data = data.pop("environment", {"kind": "cartpole"})
    if not isinstance(env_data, Mapping):
        raise ConfigurationError("expected an object", "environment")
    kind = env_data.get("kind", "cartpole")
    if kind not in ENV_KINDS:
        raise ConfigurationError(f"must be one of {ENV_KINDS}, got {kind!r}", "environment.kind")
    env_cls = CartPoleSection if kind == "cartpole" else SlicingSection
    environment = _build(env_cls, env_data, "environment")

    sections = {
        "federation": FederationConfig,
        "agent": AgentConfig,
        "pqc": PqcSection,
        "mlp": MlpSection,
    }
    built = {key: _build(cls, data.pop(key, {}), key) for key, cls in sections.items()}

    template = ExperimentConfig(name="_")
    top = {}
    for key, value in data.items():
        top[key] = _check_type(value, getattr(template, key), key)
    cfg = ExperimentConfig(environment=environment, **built, **top)
    cfg.validate()
    return cfg


def load_config(source: str | Path | Mapping) -> ExperimentConfig:
    """Parse and validate a config file (or an already-parsed mapping).

    A run manifest is accepted too; its embedded config is used.
    """
    if isinstance(source, Mapping):
        return config_from_dict(source)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON: {exc}") from None
    return config_from_dict(data)
