import json

import numpy as np
import pytest

from mimicrl import data
from mimicrl.envs import env_spec
from mimicrl.errors import DatasetFormatError, DimensionMismatch
from mimicrl.trainer import generate_expert


def make_tr(i, obs_dim=2, act_dim=1, horizon=4, reward=0.0, traj_id=0):
    t = i % horizon
    return data.Transition(
        obs=np.full(obs_dim, float(i)),
        act=np.full(act_dim, 0.1 * i),
        next_obs=np.full(obs_dim, float(i) + 1),
        done=(t == horizon - 1),
        reward=reward,
        traj_id=traj_id,
        t=t,
    )


def test_push_grows_to_one():
    buf = data.ReplayBuffer(10, 2, 1)
    buf.push(make_tr(0))
    assert len(buf) == 1


def test_fifo_eviction_order():
    buf = data.ReplayBuffer(2, 2, 1)
    for i in range(3):
        buf.push(make_tr(i))
    assert len(buf) == 2
    kept = [tr.obs[0] for tr in buf.contents()]
    assert kept == [1.0, 2.0]  # first push evicted, order oldest-first


def test_fifo_eviction_longer_sequence():
    buf = data.ReplayBuffer(5, 2, 1)
    for i in range(13):
        buf.push(make_tr(i))
    assert [tr.obs[0] for tr in buf.contents()] == [8.0, 9.0, 10.0, 11.0, 12.0]


def test_push_dimension_mismatch():
    buf = data.ReplayBuffer(10, 2, 1)
    bad = make_tr(0, obs_dim=3)
    with pytest.raises(DimensionMismatch):
        buf.push(bad)


def test_sample_single_element_repeats():
    buf = data.ReplayBuffer(10, 2, 1)
    buf.push(make_tr(5))
    batch = buf.sample(4, np.random.default_rng(0))
    assert len(batch) == 4
    for tr in batch:
        assert tr.obs[0] == 5.0


def test_sample_reproducible_from_rng_seed():
    buf = data.ReplayBuffer(10, 2, 1)
    for i in range(8):
        buf.push(make_tr(i))
    a = buf.sample_arrays(16, np.random.default_rng(42))
    b = buf.sample_arrays(16, np.random.default_rng(42))
    assert np.array_equal(a.obs, b.obs)
    assert np.array_equal(a.act, b.act)


def test_sample_empty_buffer_rejected():
    buf = data.ReplayBuffer(10, 2, 1)
    with pytest.raises(ValueError):
        buf.sample(1, np.random.default_rng(0))


def test_sample_uniformity_binomial_bound():
    # each of 10 elements should be drawn ~10% of 1e5 draws; 5 sigma of
    # Binomial(1e5, 0.1) is ~474
    buf = data.ReplayBuffer(10, 2, 1)
    for i in range(10):
        buf.push(make_tr(i))
    rng = np.random.default_rng(7)
    batch = buf.sample_arrays(100_000, rng)
    counts = np.bincount(batch.obs[:, 0].astype(int), minlength=10)
    sigma = np.sqrt(100_000 * 0.1 * 0.9)
    assert np.all(np.abs(counts - 10_000) < 5 * sigma)


def test_sample_arrays_has_no_reward_field():
    buf = data.ReplayBuffer(10, 2, 1)
    buf.push(make_tr(0, reward=123.0))
    batch = buf.sample_arrays(2, np.random.default_rng(0))
    assert not hasattr(batch, "reward")


def expert_fixture(tmp_path, n=3, threshold=-100.0):
    return generate_expert("linereacher-v0", n, threshold, seed=50,
                           out_path=tmp_path / "exp.jsonl")


def test_save_load_round_trip_bit_identical(tmp_path):
    ds = expert_fixture(tmp_path)
    loaded = data.load_dataset(tmp_path / "exp.jsonl")
    assert loaded.n_trajectories == ds.n_trajectories
    assert loaded.return_stats == ds.return_stats
    assert loaded.filter_threshold == ds.filter_threshold
    assert len(loaded.transitions) == len(ds.transitions)
    for a, b in zip(ds.transitions, loaded.transitions):
        assert np.array_equal(a.obs, b.obs)
        assert np.array_equal(a.act, b.act)
        assert np.array_equal(a.next_obs, b.next_obs)
        assert (a.done, a.reward, a.traj_id, a.t) == (b.done, b.reward, b.traj_id, b.t)


def test_save_load_second_round_trip_identical_bytes(tmp_path):
    expert_fixture(tmp_path)
    first = (tmp_path / "exp.jsonl").read_bytes()
    loaded = data.load_dataset(tmp_path / "exp.jsonl")
    data.save_dataset(loaded, tmp_path / "again.jsonl")
    assert (tmp_path / "again.jsonl").read_bytes() == first


def test_truncated_line_names_line_number(tmp_path):
    expert_fixture(tmp_path)
    lines = (tmp_path / "exp.jsonl").read_text().splitlines()
    lines[5] = lines[5][: len(lines[5]) // 2]
    (tmp_path / "bad.jsonl").write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetFormatError) as exc:
        data.load_dataset(tmp_path / "bad.jsonl")
    assert exc.value.line == 6
    assert "line 6" in str(exc.value)


def test_metadata_dimension_mismatch_rejected(tmp_path):
    expert_fixture(tmp_path)
    lines = (tmp_path / "exp.jsonl").read_text().splitlines()
    meta = json.loads(lines[0])
    meta["obs_dim"] = 3
    lines[0] = json.dumps(meta)
    (tmp_path / "bad.jsonl").write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetFormatError):
        data.load_dataset(tmp_path / "bad.jsonl")


def test_record_with_wrong_obs_length_rejected(tmp_path):
    expert_fixture(tmp_path)
    lines = (tmp_path / "exp.jsonl").read_text().splitlines()
    rec = json.loads(lines[3])
    rec["obs"] = rec["obs"] + [0.0]
    lines[3] = json.dumps(rec)
    (tmp_path / "bad.jsonl").write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetFormatError) as exc:
        data.load_dataset(tmp_path / "bad.jsonl")
    assert exc.value.line == 4


def test_missing_key_rejected_with_line(tmp_path):
    expert_fixture(tmp_path)
    lines = (tmp_path / "exp.jsonl").read_text().splitlines()
    rec = json.loads(lines[2])
    del rec["reward"]
    lines[2] = json.dumps(rec)
    (tmp_path / "bad.jsonl").write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetFormatError) as exc:
        data.load_dataset(tmp_path / "bad.jsonl")
    assert exc.value.line == 3


def synthetic_trajectories(returns, horizon=4):
    trajs = []
    for k, total in enumerate(returns):
        per_step = total / horizon
        trajs.append([make_tr(i, horizon=horizon, reward=per_step, traj_id=k)
                      for i in range(horizon)])
    return trajs


def test_filter_threshold_extremes():
    trajs = synthetic_trajectories([1.0, -2.0, 5.0])
    assert data.filter_by_return(trajs, float("-inf")) == trajs
    assert data.filter_by_return(trajs, float("inf")) == []


def test_filter_matches_brute_force_sums():
    rng = np.random.default_rng(11)
    returns = rng.uniform(-10, 10, size=20)
    trajs = synthetic_trajectories(list(returns))
    threshold = 0.0
    kept = data.filter_by_return(trajs, threshold)
    expected = [traj for traj, r in zip(trajs, returns)
                if sum(tr.reward for tr in traj) > threshold]
    assert kept == expected


def test_filter_is_strictly_greater():
    trajs = synthetic_trajectories([1.0])
    assert data.filter_by_return(trajs, 1.0 - 1e-12) == trajs
    assert data.filter_by_return(trajs, sum(tr.reward for tr in trajs[0])) == []


def test_dataset_rejects_incomplete_trajectory():
    spec = env_spec("linereacher-v0")
    partial = [make_tr(i, horizon=200, traj_id=0) for i in range(100)]
    with pytest.raises(DatasetFormatError):
        data.ExpertDataset(spec, partial, -1000.0)


def test_dataset_rejects_return_below_threshold():
    spec = env_spec("linereacher-v0")
    traj = [make_tr(i, horizon=200, reward=-1.0, traj_id=0) for i in range(200)]
    with pytest.raises(DatasetFormatError):
        data.ExpertDataset(spec, traj, -100.0)  # total return -200 < -100


def test_dataset_training_arrays_strip_reward(tmp_path):
    ds = expert_fixture(tmp_path)
    views = ds.training_arrays()
    assert not hasattr(views, "reward")
    assert views.obs.shape == (len(ds), 2)
    assert views.done.sum() == ds.n_trajectories  # one terminal per trajectory
