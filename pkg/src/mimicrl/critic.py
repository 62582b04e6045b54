"""Probabilistic Q-critic trained by a Jensen-Shannon Bellman objective.

The critic is a sigmoid-output network q(s, a) in (0, 1) whose natural
log is the Q-value. Because rewards live in log space too, Bellman
targets become products of probabilities: an expert-branch target
q'^gamma (the optimal reward contributes a factor of 1) and a
non-expert-branch target q'^gamma / 2 (the optimal reward for pairs the
policy produced is 1/2). Each prediction and its target define
two-outcome Bernoulli distributions over {expert, non-expert}; the loss
is the Jensen-Shannon divergence between them, summed over two
independently initialized critics whose common bootstrap uses the
minimum of two slowly tracking target networks.

A "Bernoulli probability" throughout this module is the plain float (or
array) probability of the expert outcome, kept in
[clamp_eps, 1 - clamp_eps] so every log stays finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import net
from .errors import DimensionMismatch, NonFiniteError


@dataclass
class CriticNet:
    params: net.NetworkParams   # (obs_dim + act_dim) -> 1, final sigmoid
    clamp_eps: float = 1e-6

    def copy(self):
        return CriticNet(self.params.copy(), self.clamp_eps)


def make_critic(spec, rng, clamp_eps=1e-6, hidden=(64, 64)):
    dims = net.mlp_dims(spec.obs_dim + spec.act_dim, 1, hidden)
    params = net.init_network(dims, net.mlp_activations(len(hidden), "sigmoid"), rng)
    return CriticNet(params, clamp_eps)


def q_batch(critic, sa, want_cache=False):
    """Clamped q for a (n, obs_dim + act_dim) batch.

    Returns q of shape (n,), plus the forward cache and the in-range
    mask (1.0 where the clamp is inactive, hence where gradients flow)
    when want_cache is set.
    """
    eps = critic.clamp_eps
    if want_cache:
        out, cache = net.forward_batch(critic.params, sa, want_cache=True)
        raw = out[:, 0]
        q = np.clip(raw, eps, 1.0 - eps)
        in_range = ((raw > eps) & (raw < 1.0 - eps)).astype(np.float64)
        return q, cache, in_range
    raw = net.forward_batch(critic.params, sa)[:, 0]
    return np.clip(raw, eps, 1.0 - eps)


def q_prob(critic, obs, act):
    """q(s, a) = clamp(sigmoid(raw), eps, 1 - eps) for one pair."""
    obs = np.asarray(obs, dtype=np.float64)
    act = np.asarray(act, dtype=np.float64)
    sa = np.concatenate([obs, act])
    if sa.shape != (critic.params.n_in,):
        raise DimensionMismatch(
            f"state-action dim {sa.shape[0]} does not match critic input "
            f"{critic.params.n_in}"
        )
    return float(q_batch(critic, sa[None, :])[0])


def bernoulli_entropy(p):
    """H(p) = -p ln p - (1-p) ln(1-p), natural log; exact 0 at p in {0, 1}."""
    p = np.asarray(p, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = p * np.log(p) + (1.0 - p) * np.log1p(-p)
    out = -np.where(np.isfinite(terms), terms, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def bernoulli_jsd(a, b):
    """Jensen-Shannon divergence between Bernoulli(a) and Bernoulli(b).

    Symmetric, in [0, ln 2], zero exactly when a == b.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m = 0.5 * (a + b)
    out = bernoulli_entropy(m) - 0.5 * (bernoulli_entropy(a) + bernoulli_entropy(b))
    if np.ndim(out) == 0:
        return float(out)
    return out


def _entropy_slope(p):
    # dH/dp = ln((1-p)/p); callers guarantee p strictly inside (0, 1)
    return np.log((1.0 - p) / p)


def target_base_batch(target1, target2, next_obs, next_act, gamma, done,
                      include_gamma=True):
    """Bootstrap factor exp(gamma * min Q') per row; 1 where done.

    Uses the minimum of the two target critics (clipped double Q) and
    produces plain constants: no gradient ever flows back into target
    parameters.
    """
    sa = np.concatenate([next_obs, next_act], axis=1)
    q1 = q_batch(target1, sa)
    q2 = q_batch(target2, sa)
    q_min = np.minimum(q1, q2)
    base = q_min ** gamma if include_gamma else q_min
    return np.where(np.asarray(done, dtype=bool), 1.0, base)


def branch_target(base, branch, clamp_eps):
    """Clamp the bootstrap base into a branch target probability.

    expert: the optimal reward factor is 1; beta: it is 1/2.
    """
    if branch == "expert":
        scaled = base
    elif branch == "beta":
        scaled = base / 2.0
    else:
        raise ValueError(f"unknown branch {branch!r}")
    return np.clip(scaled, clamp_eps, 1.0 - clamp_eps)


def target_prob(target1, target2, next_obs, next_act, gamma, done, branch,
                include_gamma=True):
    """Single-transition target probability (see target_base_batch)."""
    next_obs = np.asarray(next_obs, dtype=np.float64)[None, :]
    next_act = np.asarray(next_act, dtype=np.float64)[None, :]
    base = target_base_batch(
        target1, target2, next_obs, next_act, gamma, [done], include_gamma
    )
    return float(branch_target(base, branch, target1.clamp_eps)[0])


def critic_loss_and_grads(critic1, critic2, expert_obs, expert_act, expert_targets,
                          beta_obs, beta_act, beta_targets):
    """JSD Bellman loss over both critics, with exact gradients.

    loss = sum over critics of
        mean_expert JSD(q(s,a) || expert_target)
      + mean_beta   JSD(q(s,a) || beta_target)

    Targets enter as constants. Returns (loss, grads1, grads2, diag)
    where diag holds q_mean_expert / q_mean_beta from critic 1.
    """
    n_e = expert_obs.shape[0]
    n_b = beta_obs.shape[0]
    # one concatenated pass per critic; per-row weights keep the two
    # batch means separate
    sa = np.concatenate([
        np.concatenate([expert_obs, expert_act], axis=1),
        np.concatenate([beta_obs, beta_act], axis=1),
    ], axis=0)
    targets = np.concatenate([expert_targets, beta_targets])
    weights = np.concatenate([np.full(n_e, 1.0 / n_e), np.full(n_b, 1.0 / n_b)])
    loss = 0.0
    grads = []
    diag = {}
    for i, critic in enumerate((critic1, critic2)):
        q, cache, in_range = q_batch(critic, sa, want_cache=True)
        jsd = bernoulli_jsd(q, targets)
        loss += float(jsd @ weights)
        m = 0.5 * (q + targets)
        d_jsd_dp = 0.5 * (_entropy_slope(m) - _entropy_slope(q))
        upstream = (d_jsd_dp * in_range * weights)[:, None]
        g, _ = net.backward_batch(critic.params, sa, upstream, cache=cache)
        grads.append(g)
        if i == 0:
            diag["q_mean_expert"] = float(np.mean(q[:n_e]))
            diag["q_mean_beta"] = float(np.mean(q[n_e:]))
    if not np.isfinite(loss):
        raise NonFiniteError(f"non-finite critic loss {loss}; aborting update")
    return loss, grads[0], grads[1], diag


def soft_update(main, target, tau):
    """target <- tau * main + (1 - tau) * target (flat views); returns target."""
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must be in (0, 1], got {tau}")
    main_flat = main.params.get_flat()
    target_flat = target.params.get_flat()
    if main_flat.shape != target_flat.shape:
        raise DimensionMismatch("main and target critics have different shapes")
    target.params.set_flat(tau * main_flat + (1.0 - tau) * target_flat)
    return target


def bellman_log_residual(critic, reward_log, transition, next_act, gamma):
    """Single-sample residual of the log-space Bellman equation.

    residual = [reward_log + gamma * log q(s', a') * (not done)]
               - log q(s, a)

    Diagnostic only; reward_log is 0 at the expert optimum and -ln 2 at
    the non-expert optimum.
    """
    q_sa = q_prob(critic, transition.obs, transition.act)
    residual = reward_log - np.log(q_sa)
    if not transition.done:
        q_next = q_prob(critic, transition.next_obs, next_act)
        residual += gamma * np.log(q_next)
    return float(residual)


def save_critic(critic, path):
    net.save_checkpoint(critic.params, path, extra={"clamp_eps": critic.clamp_eps})


def load_critic(path):
    params, doc = net.load_checkpoint(path)
    return CriticNet(params=params, clamp_eps=float(doc["clamp_eps"]))
