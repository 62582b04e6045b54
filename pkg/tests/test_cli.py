import json

import numpy as np
import pytest

from mimicrl import cli, objectives, trainer
from mimicrl.data import load_dataset
from mimicrl.envs import env_spec


@pytest.fixture(scope="module")
def expert_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "expert.jsonl"
    rc = cli.main(["gen-expert", "--env", "linereacher-v0", "--n", "5",
                   "--threshold", "-100", "--seed", "11", "--out", str(path)])
    assert rc == 0
    return path


def test_gen_expert_writes_dataset_and_config_echo(expert_file):
    ds = load_dataset(expert_file)
    assert ds.n_trajectories == 5
    assert ds.filter_threshold == -100.0
    echo = json.loads(open(str(expert_file) + ".config.json").read())
    assert echo["env_id"] == "linereacher-v0"
    assert echo["n"] == 5
    assert echo["seed"] == 11


def test_gen_expert_default_n_mirrors_dataset_size(tmp_path):
    # --n defaults to 100 kept trajectories
    path = tmp_path / "big.jsonl"
    rc = cli.main(["gen-expert", "--env", "linereacher-v0",
                   "--threshold", "-1000", "--seed", "0", "--out", str(path)])
    assert rc == 0
    meta = json.loads(open(path).readline())
    assert meta["n_trajectories"] == 100


def test_gen_expert_missing_out_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["gen-expert", "--env", "linereacher-v0", "--threshold", "-100"])
    assert exc.value.code == 2


def test_unknown_flag_rejected():
    with pytest.raises(SystemExit) as exc:
        cli.main(["inspect", "--data", "x.jsonl", "--verbose"])
    assert exc.value.code == 2


def test_inspect_human_and_json(expert_file, capsys):
    assert cli.main(["inspect", "--data", str(expert_file)]) == 0
    out = capsys.readouterr().out
    assert "linereacher-v0" in out
    assert "threshold" in out

    assert cli.main(["inspect", "--data", str(expert_file), "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_trajectories"] == 5
    assert doc["return_min"] > doc["filter_threshold"]
    assert doc["config"]["command"] == "inspect"


def test_inspect_corrupt_file_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"not": "a dataset"}\n')
    assert cli.main(["inspect", "--data", str(bad)]) == 1
    assert "line 1" in capsys.readouterr().err


def write_config(tmp_path, **kw):
    doc = {"env_id": "linereacher-v0", "seed": 5, "max_episodes": 2,
           "batch_expert": 16, "batch_beta": 16,
           "eval_every": 2, "eval_episodes": 2, **kw}
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


def test_train_minimal_config_applies_defaults(tmp_path):
    # a config of just identity fields parses with documented defaults
    cfg = trainer.TrainConfig.from_dict({"env_id": "linereacher-v0", "seed": 7})
    assert cfg.max_episodes == 500 and cfg.batch_expert == 128


def test_train_runs_and_writes_run_dir(expert_file, tmp_path, capsys):
    cfg_path = write_config(tmp_path)
    out = tmp_path / "run"
    rc = cli.main(["train", "--config", str(cfg_path),
                   "--expert", str(expert_file), "--out", str(out)])
    assert rc == 0
    for name in ("config.json", "metrics.csv", "eval.csv", "actor.ckpt",
                 "critic1.ckpt", "critic2.ckpt"):
        assert (out / name).exists()
    echoed = json.loads((out / "config.json").read_text())
    assert echoed["seed"] == 5
    header = (out / "metrics.csv").read_text().splitlines()[0]
    assert header == "global_step,episode,critic_loss,actor_obj,q_mean_expert,q_mean_beta"
    assert (out / "eval.csv").read_text().splitlines()[0] == \
        "episode,mean_return,std_return"


def test_train_same_invocation_reproduces_bytes(expert_file, tmp_path):
    cfg_path = write_config(tmp_path)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["train", "--config", str(cfg_path),
                     "--expert", str(expert_file), "--out", str(out_a)]) == 0
    assert cli.main(["train", "--config", str(cfg_path),
                     "--expert", str(expert_file), "--out", str(out_b)]) == 0
    for name in ("metrics.csv", "eval.csv", "actor.ckpt"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_train_env_mismatch_exit_1_prints_both_ids(expert_file, tmp_path, capsys):
    cfg_path = write_config(tmp_path, env_id="pendulum-v0")
    rc = cli.main(["train", "--config", str(cfg_path),
                   "--expert", str(expert_file), "--out", str(tmp_path / "x")])
    assert rc == 1
    err = capsys.readouterr().err
    assert "pendulum-v0" in err and "linereacher-v0" in err


def test_train_unknown_config_key_exit_1(expert_file, tmp_path, capsys):
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps({"env_id": "linereacher-v0", "seed": 1,
                                    "bogus_knob": 3}))
    rc = cli.main(["train", "--config", str(cfg_path),
                   "--expert", str(expert_file), "--out", str(tmp_path / "x")])
    assert rc == 1
    assert "bogus_knob" in capsys.readouterr().err


def test_train_bc_and_eval_match_trainer_evaluate(expert_file, tmp_path, capsys):
    bc_cfg = tmp_path / "bc.json"
    bc_cfg.write_text(json.dumps({"env_id": "linereacher-v0", "seed": 2,
                                  "steps": 300}))
    out = tmp_path / "bc_run"
    rc = cli.main(["train-bc", "--config", str(bc_cfg),
                   "--expert", str(expert_file), "--out", str(out)])
    assert rc == 0
    assert (out / "bc.ckpt").exists()
    capsys.readouterr()

    rc = cli.main(["eval", "--actor", str(out / "bc.ckpt"),
                   "--env", "linereacher-v0", "--episodes", "3",
                   "--seed", "21", "--json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)

    policy = objectives.load_bc_policy(out / "bc.ckpt", env_spec("linereacher-v0"))
    mean, std, returns = trainer.evaluate(policy, "linereacher-v0", 3, 21)
    assert doc["mean_return"] == mean
    assert doc["std_return"] == std
    assert doc["returns"] == returns


def test_eval_actor_checkpoint_human_output(expert_file, tmp_path, capsys):
    cfg_path = write_config(tmp_path)
    out = tmp_path / "run_eval"
    assert cli.main(["train", "--config", str(cfg_path),
                     "--expert", str(expert_file), "--out", str(out)]) == 0
    capsys.readouterr()
    rc = cli.main(["eval", "--actor", str(out / "actor.ckpt"),
                   "--env", "linereacher-v0", "--episodes", "2", "--seed", "0"])
    assert rc == 0
    assert "mean return" in capsys.readouterr().out


def test_eval_unreadable_checkpoint_exit_1(tmp_path, capsys):
    missing = tmp_path / "nope.ckpt"
    rc = cli.main(["eval", "--actor", str(missing), "--env", "linereacher-v0"])
    assert rc == 1
    assert "error" in capsys.readouterr().err
