"""Reference objectives: the tabular reward oracle and a BC baseline.

The reward objective exists to validate, by brute force, the analytic
optimum (expert probability 1, non-expert probability 0.5) that the
critic's Bellman targets hard-code. It is deliberately tabular; there
is no trained discriminator anywhere in this library.

Behavior cloning is the supervised baseline: a Gaussian policy whose
mean network is fit by maximum likelihood on expert state-action pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import net
from .critic import bernoulli_entropy
from .errors import DimensionMismatch, NonFiniteError

LOG_TWO_PI = float(np.log(2.0 * np.pi))


@dataclass
class RewardTable:
    """Per-sample reward probabilities on expert and non-expert pairs."""

    r_expert: np.ndarray
    r_beta: np.ndarray

    def __post_init__(self):
        self.r_expert = np.asarray(self.r_expert, dtype=np.float64)
        self.r_beta = np.asarray(self.r_beta, dtype=np.float64)
        for name, arr in (("r_expert", self.r_expert), ("r_beta", self.r_beta)):
            if arr.size == 0:
                raise ValueError(f"{name} must be nonempty")
            if np.any(arr < 0.0) or np.any(arr > 1.0):
                raise ValueError(f"{name} entries must lie in [0, 1]")


def reward_objective(table):
    """mean expert likelihood + mean non-expert Bernoulli entropy (nats).

    Maximized by r_expert = 1 and r_beta = 0.5, giving 1 + ln 2.
    """
    return float(np.mean(table.r_expert) + np.mean(bernoulli_entropy(table.r_beta)))


@dataclass
class GaussianBCPolicy:
    """Diagonal Gaussian over actions: mean from a network, fixed log-std."""

    mean_net: net.NetworkParams   # obs_dim -> act_dim
    log_std: np.ndarray           # (act_dim,), state-independent
    action_low: np.ndarray
    action_high: np.ndarray
    env_id: str = ""

    def eval_action(self, obs):
        return bc_act(self, obs)


def make_bc_policy(spec, rng, hidden=(64, 64), log_std_init=0.0):
    dims = net.mlp_dims(spec.obs_dim, spec.act_dim, hidden)
    params = net.init_network(dims, net.mlp_activations(len(hidden), "identity"), rng)
    return GaussianBCPolicy(
        mean_net=params,
        log_std=np.full(spec.act_dim, float(log_std_init)),
        action_low=np.asarray(spec.action_low, dtype=np.float64),
        action_high=np.asarray(spec.action_high, dtype=np.float64),
        env_id=spec.env_id,
    )


def bc_nll_and_grads(policy, obs, act):
    """Mean negative Gaussian log-likelihood of expert actions, with grads.

    Returns (nll, mean_net flat gradient, log_std gradient).
    """
    obs = np.asarray(obs, dtype=np.float64)
    act = np.asarray(act, dtype=np.float64)
    if obs.ndim != 2 or act.ndim != 2 or obs.shape[0] != act.shape[0]:
        raise DimensionMismatch("obs and act must be matching (n, dim) batches")
    n = obs.shape[0]
    if n == 0:
        raise ValueError("expert batch must be nonempty")
    mu, cache = net.forward_batch(policy.mean_net, obs, want_cache=True)
    std = np.exp(policy.log_std)
    z = (act - mu) / std
    nll = float(
        0.5 * np.mean(np.sum(z * z, axis=1))
        + np.sum(policy.log_std)
        + 0.5 * act.shape[1] * LOG_TWO_PI
    )
    if not np.isfinite(nll):
        raise NonFiniteError(f"non-finite BC loss {nll}")
    up_mu = (mu - act) / (std * std) / n
    g_net, _ = net.backward_batch(policy.mean_net, obs, up_mu, cache=cache)
    g_log_std = np.mean(1.0 - z * z, axis=0)
    return nll, g_net, g_log_std


def bc_act(policy, obs):
    """Deterministic evaluation action: network mean clamped to bounds."""
    obs = np.asarray(obs, dtype=np.float64)
    mu = net.forward(policy.mean_net, obs)
    return np.clip(mu, policy.action_low, policy.action_high)


@dataclass
class BCConfig:
    env_id: str
    seed: int
    steps: int = 3000
    lr: float = 1e-3
    batch: int = 128
    hidden: tuple = (64, 64)
    log_std_init: float = 0.0


def train_bc(config, dataset):
    """Fit a GaussianBCPolicy to an expert dataset by Adam on the NLL.

    Returns (policy, history) where history is a list of
    (step, nll) pairs sampled every 100 steps and at the end.
    """
    if dataset.spec.env_id != config.env_id:
        raise ValueError(
            f"dataset env {dataset.spec.env_id!r} does not match config "
            f"env {config.env_id!r}"
        )
    rng = np.random.default_rng(config.seed)
    policy = make_bc_policy(
        dataset.spec, rng, hidden=tuple(config.hidden),
        log_std_init=config.log_std_init,
    )
    views = dataset.training_arrays()
    n_net = policy.mean_net.n_params
    opt = net.AdamState.for_params(n_net + policy.log_std.size, lr=config.lr)
    history = []
    for step_i in range(config.steps):
        idx = rng.integers(0, len(views), size=config.batch)
        nll, g_net, g_std = bc_nll_and_grads(policy, views.obs[idx], views.act[idx])
        # single flat vector so one Adam state covers net and log_std
        joint = _JointParams(policy)
        joint, opt = net.adam_step(opt, joint, np.concatenate([g_net, g_std]))
        if step_i % 100 == 0 or step_i == config.steps - 1:
            history.append((step_i, nll))
    return policy, history


class _JointParams:
    """Adapter presenting (mean_net, log_std) as one flat parameter vector."""

    def __init__(self, policy):
        self.policy = policy

    @property
    def n_params(self):
        return self.policy.mean_net.n_params + self.policy.log_std.size

    def get_flat(self):
        return np.concatenate([self.policy.mean_net.get_flat(), self.policy.log_std])

    def set_flat(self, flat):
        n = self.policy.mean_net.n_params
        self.policy.mean_net.set_flat(flat[:n])
        self.policy.log_std = flat[n:].copy()


def save_bc_policy(policy, path):
    net.save_checkpoint(policy.mean_net, path, extra={"log_std": policy.log_std.tolist()})


def load_bc_policy(path, spec):
    """Load a BC checkpoint; action bounds come from the EnvSpec."""
    params, doc = net.load_checkpoint(path)
    return GaussianBCPolicy(
        mean_net=params,
        log_std=np.asarray(doc["log_std"], dtype=np.float64),
        action_low=np.asarray(spec.action_low, dtype=np.float64),
        action_high=np.asarray(spec.action_high, dtype=np.float64),
        env_id=spec.env_id,
    )
