"""Classic cart-pole balancing task, Euler-integrated."""

from __future__ import annotations

import math

import numpy as np

from .base import Env

GRAVITY = 9.8
CART_MASS = 1.0
POLE_MASS = 0.1
TOTAL_MASS = CART_MASS + POLE_MASS
HALF_LENGTH = 0.5
POLE_MASS_LENGTH = POLE_MASS * HALF_LENGTH
FORCE_MAG = 10.0
TAU = 0.02
X_LIMIT = 2.4
ANGLE_LIMIT = 12 * 2 * math.pi / 360
MAX_STEPS = 200


def cartpole_reset(rng: np.random.Generator) -> np.ndarray:
    """State (x, x_dot, phi, phi_dot), each uniform in (-0.05, 0.05)."""
    return rng.uniform(-0.05, 0.05, size=4)


def cartpole_accelerations(state, action: int) -> tuple[float, float]:
    """(x_acc, phi_acc) for the given state; action 1 pushes right."""
    _, _, phi, phi_dot = state
    force = FORCE_MAG if action == 1 else -FORCE_MAG
    cos, sin = math.cos(phi), math.sin(phi)
    temp = (force + POLE_MASS_LENGTH * phi_dot**2 * sin) / TOTAL_MASS
    phi_acc = (GRAVITY * sin - cos * temp) / (
        HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos**2 / TOTAL_MASS)
    )
    x_acc = temp - POLE_MASS_LENGTH * phi_acc * cos / TOTAL_MASS
    return x_acc, phi_acc


def cartpole_step(state, action: int) -> tuple[np.ndarray, float, bool]:
    """One Euler step. ``done`` here covers the position/angle bounds only."""
    x, x_dot, phi, phi_dot = state
    x_acc, phi_acc = cartpole_accelerations(state, action)
    x = x + TAU * x_dot
    x_dot = x_dot + TAU * x_acc
    phi = phi + TAU * phi_dot
    phi_dot = phi_dot + TAU * phi_acc
    out = np.array([x, x_dot, phi, phi_dot])
    done = bool(abs(x) > X_LIMIT or abs(phi) > ANGLE_LIMIT)
    return out, 1.0, done


class CartPoleEnv(Env):
    state_dim = 4
    n_actions = 2

    def __init__(self, max_episode_steps: int = MAX_STEPS):
        super().__init__()
        self.max_episode_steps = max_episode_steps
        self.state = np.zeros(4)

    def _reset(self, rng):
        self.state = cartpole_reset(rng)
        return self.state.copy()

    def _step(self, action):
        self.state, reward, terminal = cartpole_step(self.state, action)
        return self.state.copy(), reward, terminal
