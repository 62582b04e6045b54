"""Transition storage: replay buffer, expert datasets, JSONL files.

The expert dataset file format is one JSON object per line. The first
line is metadata::

    {"env_id", "obs_dim", "act_dim", "action_low", "action_high",
     "horizon", "n_trajectories", "filter_threshold",
     "return_mean", "return_min", "return_max"}

and every following line is one transition::

    {"traj_id", "t", "obs", "act", "next_obs", "done", "reward"}

json round-trips float64 exactly (repr encoding), so save followed by
load reproduces every value bit for bit.

Rewards are carried for evaluation and filtering only. Training code
receives TransitionArrays views, which do not expose rewards at all.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .envs import EnvSpec, env_spec
from .errors import DatasetFormatError, DimensionMismatch

METADATA_KEYS = (
    "env_id", "obs_dim", "act_dim", "action_low", "action_high", "horizon",
    "n_trajectories", "filter_threshold", "return_mean", "return_min", "return_max",
)
TRANSITION_KEYS = ("traj_id", "t", "obs", "act", "next_obs", "done", "reward")


@dataclass
class Transition:
    obs: np.ndarray
    act: np.ndarray
    next_obs: np.ndarray
    done: bool
    reward: float          # evaluation-only; never read by the trainer
    traj_id: int = 0
    t: int = 0


@dataclass
class TransitionArrays:
    """Reward-stripped batch view handed to training code."""

    obs: np.ndarray        # (n, obs_dim)
    act: np.ndarray        # (n, act_dim)
    next_obs: np.ndarray   # (n, obs_dim)
    done: np.ndarray       # (n,) bool

    def __len__(self):
        return self.obs.shape[0]


class ReplayBuffer:
    """Fixed-capacity FIFO ring over transitions.

    Once full, the oldest entry is overwritten first. Sampling is
    uniform with replacement and reproducible from the generator state.
    """

    def __init__(self, capacity, obs_dim, act_dim):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self._obs = np.zeros((capacity, obs_dim))
        self._act = np.zeros((capacity, act_dim))
        self._next_obs = np.zeros((capacity, obs_dim))
        self._done = np.zeros(capacity, dtype=bool)
        self._reward = np.zeros(capacity)
        self._traj_id = np.zeros(capacity, dtype=np.int64)
        self._t = np.zeros(capacity, dtype=np.int64)
        self._write = 0
        self._size = 0

    def __len__(self):
        return self._size

    def push(self, tr):
        obs = np.asarray(tr.obs, dtype=np.float64)
        act = np.asarray(tr.act, dtype=np.float64)
        next_obs = np.asarray(tr.next_obs, dtype=np.float64)
        if obs.shape != (self.obs_dim,) or next_obs.shape != (self.obs_dim,):
            raise DimensionMismatch(
                f"observation shape {obs.shape}/{next_obs.shape} does not match "
                f"obs_dim {self.obs_dim}"
            )
        if act.shape != (self.act_dim,):
            raise DimensionMismatch(
                f"action shape {act.shape} does not match act_dim {self.act_dim}"
            )
        i = self._write
        self._obs[i] = obs
        self._act[i] = act
        self._next_obs[i] = next_obs
        self._done[i] = bool(tr.done)
        self._reward[i] = float(tr.reward)
        self._traj_id[i] = tr.traj_id
        self._t[i] = tr.t
        self._write = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def _draw(self, batch_size, rng):
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        return rng.integers(0, self._size, size=batch_size)

    def sample(self, batch_size, rng):
        """Uniform-with-replacement sample as Transition objects."""
        idx = self._draw(batch_size, rng)
        return [
            Transition(
                obs=self._obs[i].copy(),
                act=self._act[i].copy(),
                next_obs=self._next_obs[i].copy(),
                done=bool(self._done[i]),
                reward=float(self._reward[i]),
                traj_id=int(self._traj_id[i]),
                t=int(self._t[i]),
            )
            for i in idx
        ]

    def sample_arrays(self, batch_size, rng):
        """Reward-free batch view for the trainer."""
        idx = self._draw(batch_size, rng)
        return TransitionArrays(
            obs=self._obs[idx],
            act=self._act[idx],
            next_obs=self._next_obs[idx],
            done=self._done[idx].copy(),
        )

    def contents(self):
        """Current transitions, oldest first (eviction-order oracle)."""
        order = (np.arange(self._size) + (self._write - self._size)) % self.capacity \
            if self._size == self.capacity else np.arange(self._size)
        return [
            Transition(
                obs=self._obs[i].copy(),
                act=self._act[i].copy(),
                next_obs=self._next_obs[i].copy(),
                done=bool(self._done[i]),
                reward=float(self._reward[i]),
                traj_id=int(self._traj_id[i]),
                t=int(self._t[i]),
            )
            for i in order
        ]


def trajectory_return(trajectory):
    return sum(tr.reward for tr in trajectory)


def filter_by_return(trajectories, threshold):
    """Keep exactly the trajectories whose total return is > threshold."""
    return [traj for traj in trajectories if trajectory_return(traj) > threshold]


def group_trajectories(transitions):
    """Group a flat transition list by traj_id, each sorted by t."""
    by_id = {}
    for tr in transitions:
        by_id.setdefault(tr.traj_id, []).append(tr)
    return [sorted(by_id[k], key=lambda tr: tr.t) for k in sorted(by_id)]


class ExpertDataset:
    """Static buffer of filtered expert trajectories plus env metadata."""

    def __init__(self, spec, transitions, filter_threshold):
        self.spec = spec
        self.transitions = list(transitions)
        self.filter_threshold = float(filter_threshold)
        trajs = group_trajectories(self.transitions)
        if not trajs:
            raise DatasetFormatError("dataset contains no trajectories")
        for traj in trajs:
            ts = [tr.t for tr in traj]
            if ts != list(range(spec.horizon)):
                raise DatasetFormatError(
                    f"trajectory {traj[0].traj_id} is incomplete: expected "
                    f"t = 0..{spec.horizon - 1}, got {len(ts)} steps"
                )
            for tr in traj:
                if tr.done != (tr.t == spec.horizon - 1):
                    raise DatasetFormatError(
                        f"trajectory {tr.traj_id}: done flag at t={tr.t} "
                        f"inconsistent with horizon {spec.horizon}"
                    )
        returns = [trajectory_return(traj) for traj in trajs]
        if min(returns) <= self.filter_threshold:
            raise DatasetFormatError(
                f"trajectory return {min(returns)} does not exceed the recorded "
                f"filter threshold {self.filter_threshold}"
            )
        self.n_trajectories = len(trajs)
        self.return_stats = (
            float(np.mean(returns)), float(min(returns)), float(max(returns)),
        )
        self._obs = np.array([tr.obs for tr in self.transitions])
        self._act = np.array([tr.act for tr in self.transitions])
        self._next_obs = np.array([tr.next_obs for tr in self.transitions])
        self._done = np.array([tr.done for tr in self.transitions], dtype=bool)
        if self._obs.shape[1] != spec.obs_dim or self._act.shape[1] != spec.act_dim:
            raise DatasetFormatError(
                f"transition dims {self._obs.shape[1]}/{self._act.shape[1]} do not "
                f"match spec dims {spec.obs_dim}/{spec.act_dim}"
            )

    def __len__(self):
        return len(self.transitions)

    def training_arrays(self):
        """Reward-stripped view of every transition."""
        return TransitionArrays(
            obs=self._obs, act=self._act, next_obs=self._next_obs, done=self._done,
        )


def save_dataset(dataset, path):
    spec = dataset.spec
    mean, lo, hi = dataset.return_stats
    meta = {
        "env_id": spec.env_id,
        "obs_dim": spec.obs_dim,
        "act_dim": spec.act_dim,
        "action_low": spec.action_low.tolist(),
        "action_high": spec.action_high.tolist(),
        "horizon": spec.horizon,
        "n_trajectories": dataset.n_trajectories,
        "filter_threshold": dataset.filter_threshold,
        "return_mean": mean,
        "return_min": lo,
        "return_max": hi,
    }
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(meta) + "\n")
        for tr in dataset.transitions:
            rec = {
                "traj_id": tr.traj_id,
                "t": tr.t,
                "obs": np.asarray(tr.obs).tolist(),
                "act": np.asarray(tr.act).tolist(),
                "next_obs": np.asarray(tr.next_obs).tolist(),
                "done": bool(tr.done),
                "reward": float(tr.reward),
            }
            f.write(json.dumps(rec) + "\n")


def _parse_line(raw, line_no, keys):
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as e:
        raise DatasetFormatError(f"malformed JSON ({e.msg})", line=line_no) from None
    if not isinstance(doc, dict):
        raise DatasetFormatError("expected a JSON object", line=line_no)
    missing = [k for k in keys if k not in doc]
    if missing:
        raise DatasetFormatError(f"missing keys {missing}", line=line_no)
    return doc


def load_dataset(path):
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise DatasetFormatError("empty dataset file", line=1)
    meta = _parse_line(lines[0], 1, METADATA_KEYS)
    try:
        spec = env_spec(meta["env_id"])
    except KeyError:
        # datasets for unregistered envs still load if metadata is complete
        spec = EnvSpec(
            env_id=meta["env_id"],
            obs_dim=int(meta["obs_dim"]),
            act_dim=int(meta["act_dim"]),
            action_low=np.asarray(meta["action_low"], dtype=np.float64),
            action_high=np.asarray(meta["action_high"], dtype=np.float64),
            horizon=int(meta["horizon"]),
            dt=0.0,
        )
    if spec.obs_dim != meta["obs_dim"] or spec.act_dim != meta["act_dim"] \
            or spec.horizon != meta["horizon"]:
        raise DatasetFormatError(
            f"metadata dims {(meta['obs_dim'], meta['act_dim'], meta['horizon'])} do not "
            f"match registered env {meta['env_id']}", line=1,
        )
    transitions = []
    for line_no, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            raise DatasetFormatError("blank line inside dataset", line=line_no)
        rec = _parse_line(raw, line_no, TRANSITION_KEYS)
        obs = np.asarray(rec["obs"], dtype=np.float64)
        act = np.asarray(rec["act"], dtype=np.float64)
        next_obs = np.asarray(rec["next_obs"], dtype=np.float64)
        if obs.shape != (spec.obs_dim,) or next_obs.shape != (spec.obs_dim,):
            raise DatasetFormatError(
                f"obs length {obs.shape} does not match obs_dim {spec.obs_dim}",
                line=line_no,
            )
        if act.shape != (spec.act_dim,):
            raise DatasetFormatError(
                f"act length {act.shape} does not match act_dim {spec.act_dim}",
                line=line_no,
            )
        transitions.append(
            Transition(
                obs=obs, act=act, next_obs=next_obs,
                done=bool(rec["done"]), reward=float(rec["reward"]),
                traj_id=int(rec["traj_id"]), t=int(rec["t"]),
            )
        )
    dataset = ExpertDataset(spec, transitions, meta["filter_threshold"])
    if dataset.n_trajectories != meta["n_trajectories"]:
        raise DatasetFormatError(
            f"file holds {dataset.n_trajectories} trajectories, metadata says "
            f"{meta['n_trajectories']}", line=1,
        )
    mean, lo, hi = dataset.return_stats
    for key, value in (("return_mean", mean), ("return_min", lo), ("return_max", hi)):
        if abs(meta[key] - value) > 1e-9:
            raise DatasetFormatError(
                f"{key} {meta[key]} does not match recomputed value {value}", line=1,
            )
    return dataset
