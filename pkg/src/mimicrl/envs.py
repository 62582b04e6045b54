"""Deterministic continuous-control environments with scripted experts.

Two desk-scale tasks with bounded action spaces:

* ``linereacher-v0`` — a point mass on a line, driven to the origin.
* ``pendulum-v0`` — torque-limited pendulum; theta = 0 is upright.

Dynamics are pure functions of (state, action); a full trajectory
replays bit-identically from (seed, action sequence). Rewards exist
only for evaluation and expert filtering — the imitation learner never
reads them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ActionBoundsError, EpisodeFinished, UnknownEnvError


@dataclass(frozen=True)
class EnvSpec:
    env_id: str
    obs_dim: int
    act_dim: int
    action_low: np.ndarray
    action_high: np.ndarray
    horizon: int
    dt: float


@dataclass
class EnvState:
    env_id: str
    phys: np.ndarray      # environment-specific coordinates
    step_index: int = 0


_SPECS = {
    "linereacher-v0": EnvSpec(
        env_id="linereacher-v0",
        obs_dim=2,
        act_dim=1,
        action_low=np.array([-1.0]),
        action_high=np.array([1.0]),
        horizon=200,
        dt=0.05,
    ),
    "pendulum-v0": EnvSpec(
        env_id="pendulum-v0",
        obs_dim=3,
        act_dim=1,
        action_low=np.array([-2.0]),
        action_high=np.array([2.0]),
        horizon=200,
        dt=0.05,
    ),
}

# pendulum constants
_G = 10.0
_M = 1.0
_L = 1.0
_MAX_SPEED = 8.0

# linereacher constants
_MAX_VEL = 2.0

ENV_IDS = tuple(sorted(_SPECS))


def env_spec(env_id):
    try:
        return _SPECS[env_id]
    except KeyError:
        raise UnknownEnvError(f"unknown env_id {env_id!r}; known: {ENV_IDS}") from None


def wrap_angle(theta):
    """Wrap an angle into (-pi, pi]."""
    w = math.fmod(theta, 2.0 * math.pi)
    if w > math.pi:
        w -= 2.0 * math.pi
    elif w <= -math.pi:
        w += 2.0 * math.pi
    return w


def _observe(env_id, phys):
    if env_id == "linereacher-v0":
        return phys.copy()
    theta, theta_dot = phys
    return np.array([math.cos(theta), math.sin(theta), theta_dot])


def reset(env_id, seed):
    """Start an episode. Same seed, same initial state, always."""
    spec = env_spec(env_id)
    rng = np.random.default_rng(seed)
    if env_id == "linereacher-v0":
        x = rng.uniform(-1.5, -0.5)
        phys = np.array([x, 0.0])
    else:
        theta = rng.uniform(-math.pi, math.pi)
        theta_dot = rng.uniform(-1.0, 1.0)
        phys = np.array([theta, theta_dot])
    state = EnvState(env_id=spec.env_id, phys=phys, step_index=0)
    return state, _observe(env_id, phys)


def _check_action(spec, action):
    action = np.asarray(action, dtype=np.float64)
    if action.shape != (spec.act_dim,):
        raise ActionBoundsError(
            f"action shape {action.shape} does not match act_dim {spec.act_dim}"
        )
    if np.any(action < spec.action_low) or np.any(action > spec.action_high):
        raise ActionBoundsError(
            f"action {action} outside bounds [{spec.action_low}, {spec.action_high}]"
        )
    return action


def step(state, action):
    """Advance one step: (next_state, observation, reward, done).

    The reward is evaluation-only. Raises on out-of-bounds actions and
    on stepping a finished episode; nothing is clipped silently.
    """
    spec = env_spec(state.env_id)
    if state.step_index >= spec.horizon:
        raise EpisodeFinished(
            f"episode already finished at step {state.step_index}/{spec.horizon}"
        )
    action = _check_action(spec, action)
    if state.env_id == "linereacher-v0":
        x, v = state.phys
        a = action[0]
        reward = -(x * x + 0.1 * v * v + 0.001 * a * a)
        x_new = x + v * spec.dt
        v_new = min(max(v + a * spec.dt, -_MAX_VEL), _MAX_VEL)
        phys = np.array([x_new, v_new])
    else:
        theta, theta_dot = state.phys
        u = action[0]
        theta_acc = (3.0 * _G / (2.0 * _L)) * math.sin(theta) + (3.0 / (_M * _L * _L)) * u
        theta_dot_new = min(max(theta_dot + theta_acc * spec.dt, -_MAX_SPEED), _MAX_SPEED)
        theta_new = theta + theta_dot_new * spec.dt
        reward = -(
            wrap_angle(theta_new) ** 2
            + 0.1 * theta_dot_new * theta_dot_new
            + 0.001 * u * u
        )
        phys = np.array([theta_new, theta_dot_new])
    nxt = EnvState(env_id=state.env_id, phys=phys, step_index=state.step_index + 1)
    done = nxt.step_index == spec.horizon
    return nxt, _observe(state.env_id, phys), float(reward), done


def expert_action(env_id, observation):
    """Scripted near-optimal controller for env_id; always in bounds."""
    spec = env_spec(env_id)
    obs = np.asarray(observation, dtype=np.float64)
    if obs.shape != (spec.obs_dim,):
        raise ActionBoundsError(
            f"observation shape {obs.shape} does not match obs_dim {spec.obs_dim}"
        )
    if env_id == "linereacher-v0":
        x, v = obs
        a = -4.0 * x - 3.0 * v
        return np.array([min(max(a, -1.0), 1.0)])
    cos_t, sin_t, theta_dot = obs
    theta = wrap_angle(math.atan2(sin_t, cos_t))
    scale = 3.0 * _G / (2.0 * _L)
    if abs(theta) < 0.3 and abs(theta_dot) < 2.0:
        u = -16.0 * theta - 4.0 * theta_dot
    else:
        energy = 0.5 * theta_dot * theta_dot - scale * cos_t
        u = 6.0 * theta_dot * (scale - energy)
    return np.array([min(max(u, -2.0), 2.0)])


def rollout(env_id, seed, action_fn):
    """Roll one full episode with action_fn(obs) -> action.

    Returns (transitions, total_return) where each transition is the
    tuple (obs, act, next_obs, reward, done).
    """
    state, obs = reset(env_id, seed)
    transitions = []
    total = 0.0
    done = False
    while not done:
        act = action_fn(obs)
        state, next_obs, reward, done = step(state, act)
        transitions.append((obs, act, next_obs, reward, done))
        total += reward
        obs = next_obs
    return transitions, total
