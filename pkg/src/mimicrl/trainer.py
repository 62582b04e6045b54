"""End-to-end training loop: collect, update, evaluate, persist.

Each episode is rolled with the stochastic policy into the replay
buffer; then exactly as many gradient updates run as the episode had
steps. One update is, in order: sample an expert and a behavior batch,
compute next actions with the current policy for the union of next
states, build clipped-double bootstrap targets, take one Adam step on
both critics under the JSD loss, take one Adam ascent step on the actor
through critic 1 on a freshly sampled behavior batch, and softly update
both target networks.

Everything downstream of the config seed is deterministic: a fixed
(config, dataset) pair reproduces metrics and checkpoints byte for
byte. Rewards stored in buffers are never read by any update; they feed
only evaluation and expert-data filtering.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import actor as actor_mod
from . import critic as critic_mod
from . import net
from .data import ExpertDataset, ReplayBuffer, Transition, save_dataset
from .envs import env_spec, expert_action, reset, rollout, step
from .errors import ExpertGenerationError, NonFiniteError

UPDATE_COLUMNS = ("global_step", "episode", "critic_loss", "actor_obj",
                  "q_mean_expert", "q_mean_beta")
EVAL_COLUMNS = ("episode", "mean_return", "std_return")

# offset separating evaluation episode seeds from everything derived
# from the root seed during training
EVAL_SEED_OFFSET = 100_000


@dataclass
class TrainConfig:
    env_id: str
    seed: int
    max_episodes: int = 500
    gamma: float = 0.99
    tau: float = 0.001
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    batch_expert: int = 128
    batch_beta: int = 128
    noise_dim: int | None = None        # None resolves to act_dim
    clamp_eps: float = 1e-6
    k_next_samples: int = 1
    eval_every: int = 10
    eval_episodes: int = 20
    buffer_capacity: int = 1_000_000
    include_gamma_in_target: bool = True
    early_stop_return: float | None = None   # stop once an eval reaches this

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        # tau = 0 freezes the targets entirely (soft updates are skipped)
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must be in [0, 1], got {self.tau}")
        for name in ("actor_lr", "critic_lr"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.batch_expert < 1 or self.batch_beta < 1:
            raise ValueError("batch sizes must be >= 1")

    @classmethod
    def from_dict(cls, doc):
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        if "env_id" not in doc or "seed" not in doc:
            raise ValueError("config requires at least env_id and seed")
        return cls(**doc)

    def to_dict(self):
        return asdict(self)


@dataclass
class RunMetrics:
    update_rows: list = field(default_factory=list)
    eval_rows: list = field(default_factory=list)


@dataclass
class LearnerState:
    actor: actor_mod.ActorPolicy
    critic1: critic_mod.CriticNet
    critic2: critic_mod.CriticNet
    target1: critic_mod.CriticNet
    target2: critic_mod.CriticNet
    opt_actor: net.AdamState
    opt_critic1: net.AdamState
    opt_critic2: net.AdamState
    global_step: int = 0


@dataclass
class TrainResult:
    actor: actor_mod.ActorPolicy
    critic1: critic_mod.CriticNet
    critic2: critic_mod.CriticNet
    metrics: RunMetrics
    env_steps: int


def build_learner(config, rng):
    """Networks and optimizers in a fixed initialization order."""
    spec = env_spec(config.env_id)
    noise_dim = spec.act_dim if config.noise_dim is None else config.noise_dim
    policy = actor_mod.make_actor(spec, rng, noise_dim=noise_dim)
    critic1 = critic_mod.make_critic(spec, rng, clamp_eps=config.clamp_eps)
    critic2 = critic_mod.make_critic(spec, rng, clamp_eps=config.clamp_eps)
    return LearnerState(
        actor=policy,
        critic1=critic1,
        critic2=critic2,
        target1=critic1.copy(),
        target2=critic2.copy(),
        opt_actor=net.AdamState.for_params(policy.params.n_params, config.actor_lr),
        opt_critic1=net.AdamState.for_params(critic1.params.n_params, config.critic_lr),
        opt_critic2=net.AdamState.for_params(critic2.params.n_params, config.critic_lr),
    )


def collect_episode(env_id, policy, buffer, rng, traj_id=0):
    """Roll one full episode with sampled noise; push every transition."""
    ep_seed = int(rng.integers(0, 2**63))
    state, obs = reset(env_id, ep_seed)
    t = 0
    done = False
    while not done:
        z = actor_mod.sample_noise(rng, policy.noise_dim)
        action = actor_mod.act(policy, obs, z)
        state, next_obs, reward, done = step(state, action)
        buffer.push(Transition(
            obs=obs, act=action, next_obs=next_obs, done=done,
            reward=reward, traj_id=traj_id, t=t,
        ))
        obs = next_obs
        t += 1
    return t


def _compute_targets(state, config, next_obs, done, n_expert, rng):
    """Branch targets for the union batch (expert rows first)."""
    n = next_obs.shape[0]
    base = np.zeros(n)
    for _ in range(config.k_next_samples):
        z = rng.standard_normal((n, state.actor.noise_dim))
        next_act = actor_mod.act_batch(state.actor, next_obs, z)
        base += critic_mod.target_base_batch(
            state.target1, state.target2, next_obs, next_act,
            config.gamma, done, config.include_gamma_in_target,
        )
    base /= config.k_next_samples
    eps = state.critic1.clamp_eps
    expert_targets = critic_mod.branch_target(base[:n_expert], "expert", eps)
    beta_targets = critic_mod.branch_target(base[n_expert:], "beta", eps)
    return expert_targets, beta_targets


def update_step(state, expert_views, buffer, config, rng, episode=0,
                on_targets=None):
    """One gradient update; returns the metrics row as a dict.

    Mutates state in place (parameters, optimizer moments, global_step).
    on_targets, when given, is called with (expert_targets, beta_targets)
    right after target computation and before any parameter changes.
    """
    n_expert_total = len(expert_views)
    expert_idx = rng.integers(0, n_expert_total, size=config.batch_expert)
    e_obs = expert_views.obs[expert_idx]
    e_act = expert_views.act[expert_idx]
    e_next = expert_views.next_obs[expert_idx]
    e_done = expert_views.done[expert_idx]
    beta = buffer.sample_arrays(config.batch_beta, rng)

    union_next = np.concatenate([e_next, beta.next_obs], axis=0)
    union_done = np.concatenate([e_done, beta.done], axis=0)
    expert_targets, beta_targets = _compute_targets(
        state, config, union_next, union_done, config.batch_expert, rng,
    )
    if on_targets is not None:
        on_targets(expert_targets, beta_targets)

    try:
        loss, g1, g2, diag = critic_mod.critic_loss_and_grads(
            state.critic1, state.critic2, e_obs, e_act, expert_targets,
            beta.obs, beta.act, beta_targets,
        )
        state.critic1.params, state.opt_critic1 = net.adam_step(
            state.opt_critic1, state.critic1.params, g1)
        state.critic2.params, state.opt_critic2 = net.adam_step(
            state.opt_critic2, state.critic2.params, g2)

        beta_pi = buffer.sample_arrays(config.batch_beta, rng)
        ascent, actor_obj = actor_mod.policy_gradient(
            state.actor, state.critic1, beta_pi.obs, rng)
        state.actor.params, state.opt_actor = net.adam_step(
            state.opt_actor, state.actor.params, -ascent)
    except NonFiniteError as e:
        e.batch_dump = {
            "episode": episode,
            "global_step": state.global_step + 1,
            "expert_obs": e_obs.tolist(),
            "expert_act": e_act.tolist(),
            "beta_obs": beta.obs.tolist(),
            "beta_act": beta.act.tolist(),
        }
        raise

    if config.tau > 0.0:
        critic_mod.soft_update(state.critic1, state.target1, config.tau)
        critic_mod.soft_update(state.critic2, state.target2, config.tau)

    state.global_step += 1
    return {
        "global_step": state.global_step,
        "episode": episode,
        "critic_loss": loss,
        "actor_obj": actor_obj,
        "q_mean_expert": diag["q_mean_expert"],
        "q_mean_beta": diag["q_mean_beta"],
    }


def evaluate(policy, env_id, n_episodes, seed):
    """Deterministic evaluation: episode seeds seed..seed+n-1, noise at 0.

    Returns (mean_return, std_return, returns). std is the population
    standard deviation (0 for a single episode).
    """
    returns = []
    for i in range(n_episodes):
        _, total = rollout(env_id, seed + i, policy.eval_action)
        returns.append(total)
    arr = np.asarray(returns)
    return float(arr.mean()), float(arr.std()), returns


class _CsvWriter:
    def __init__(self, path, columns):
        self.path = path
        self.columns = columns
        with open(path, "w", encoding="utf-8") as f:
            f.write(",".join(columns) + "\n")

    def append(self, row):
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c])
                             for c in self.columns) + "\n")


def _write_checkpoints(state, out_dir):
    actor_mod.save_actor(state.actor, os.path.join(out_dir, "actor.ckpt"))
    critic_mod.save_critic(state.critic1, os.path.join(out_dir, "critic1.ckpt"))
    critic_mod.save_critic(state.critic2, os.path.join(out_dir, "critic2.ckpt"))


def train(config, dataset, out_dir=None, verbose=False):
    """Run the full loop for config.max_episodes episodes.

    When out_dir is given, writes config.json up front, appends
    metrics.csv / eval.csv incrementally, and refreshes checkpoints at
    every evaluation and at the end.
    """
    if dataset.spec.env_id != config.env_id:
        raise ValueError(
            f"dataset env {dataset.spec.env_id!r} does not match config env "
            f"{config.env_id!r}"
        )
    spec = env_spec(config.env_id)
    rng = np.random.default_rng(config.seed)
    state = build_learner(config, rng)
    buffer = ReplayBuffer(config.buffer_capacity, spec.obs_dim, spec.act_dim)
    expert_views = dataset.training_arrays()
    metrics = RunMetrics()

    update_csv = eval_csv = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "config.json"), "w", encoding="utf-8") as f:
            json.dump(config.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        update_csv = _CsvWriter(os.path.join(out_dir, "metrics.csv"), UPDATE_COLUMNS)
        eval_csv = _CsvWriter(os.path.join(out_dir, "eval.csv"), EVAL_COLUMNS)

    env_steps = 0
    eval_seed = config.seed + EVAL_SEED_OFFSET
    try:
        for episode in range(1, config.max_episodes + 1):
            t = collect_episode(config.env_id, state.actor, buffer, rng,
                                traj_id=episode)
            env_steps += t
            for _ in range(t):
                row = update_step(state, expert_views, buffer, config, rng,
                                  episode=episode)
                metrics.update_rows.append(row)
                if update_csv is not None:
                    update_csv.append(row)
            if episode % config.eval_every == 0 or episode == config.max_episodes:
                mean_ret, std_ret, _ = evaluate(
                    state.actor, config.env_id, config.eval_episodes, eval_seed)
                eval_row = {"episode": episode, "mean_return": mean_ret,
                            "std_return": std_ret}
                metrics.eval_rows.append(eval_row)
                if eval_csv is not None:
                    eval_csv.append(eval_row)
                if out_dir is not None:
                    _write_checkpoints(state, out_dir)
                if verbose:
                    print(f"episode {episode}: env_steps={env_steps} "
                          f"eval_return={mean_ret:.3f} +- {std_ret:.3f}")
                if config.early_stop_return is not None \
                        and mean_ret >= config.early_stop_return:
                    break
    except NonFiniteError as e:
        if out_dir is not None and getattr(e, "batch_dump", None) is not None:
            dump_path = os.path.join(out_dir, "abort_dump.json")
            with open(dump_path, "w", encoding="utf-8") as f:
                json.dump(e.batch_dump, f)
        raise

    if out_dir is not None:
        _write_checkpoints(state, out_dir)
    return TrainResult(
        actor=state.actor, critic1=state.critic1, critic2=state.critic2,
        metrics=metrics, env_steps=env_steps,
    )


def generate_expert(env_id, n_target, threshold, seed, out_path=None):
    """Roll scripted-expert episodes until n_target pass the return filter.

    Episode seeds increment from seed. Fails with pass-rate diagnostics
    if fewer than n_target of 100 * n_target attempts clear threshold.
    """
    spec = env_spec(env_id)
    max_attempts = 100 * n_target
    kept = []
    attempts = 0
    ep_seed = seed
    while len(kept) < n_target and attempts < max_attempts:
        raw, total = rollout(env_id, ep_seed,
                             lambda obs: expert_action(env_id, obs))
        attempts += 1
        ep_seed += 1
        if total > threshold:
            traj_id = len(kept)
            kept.append([
                Transition(obs=o, act=a, next_obs=n, done=d, reward=r,
                           traj_id=traj_id, t=i)
                for i, (o, a, n, r, d) in enumerate(raw)
            ])
    if len(kept) < n_target:
        rate = len(kept) / attempts if attempts else 0.0
        raise ExpertGenerationError(
            f"only {len(kept)}/{n_target} trajectories exceeded return "
            f"{threshold} after {attempts} attempts (pass rate {rate:.2%}); "
            f"threshold too high for {env_id}?"
        )
    transitions = [tr for traj in kept for tr in traj]
    dataset = ExpertDataset(spec, transitions, threshold)
    if out_path is not None:
        save_dataset(dataset, out_path)
    return dataset
