"""Episodic environments: cart-pole benchmark and RAN slice scheduler."""

from .base import Env
from .cartpole import CartPoleEnv, cartpole_accelerations, cartpole_reset, cartpole_step
from .slicing import (
    SliceEnvState,
    SlicingConfig,
    SlicingEnv,
    allocation_table,
    n_allocations,
    observe,
    slice_reset,
    slice_step,
)
from .trace import record_trajectory, write_trace

__all__ = [
    "CartPoleEnv",
    "Env",
    "SliceEnvState",
    "SlicingConfig",
    "SlicingEnv",
    "allocation_table",
    "cartpole_accelerations",
    "cartpole_reset",
    "cartpole_step",
    "n_allocations",
    "observe",
    "record_trajectory",
    "slice_reset",
    "slice_step",
    "write_trace",
]
