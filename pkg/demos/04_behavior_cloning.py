"""Behavior cloning baseline: supervised imitation from expert pairs.

Generates a filtered expert dataset, fits the Gaussian BC policy by
maximum likelihood, and evaluates it against the expert and a
random-initialization policy.
"""

import numpy as np

from mimicrl import actor, envs, objectives, trainer

print("== expert dataset ==")
dataset = trainer.generate_expert("linereacher-v0", n_target=10,
                                  threshold=-50.0, seed=100)
mean, lo, hi = dataset.return_stats
print(f"{dataset.n_trajectories} trajectories, {len(dataset)} transitions, "
      f"returns mean {mean:.2f} min {lo:.2f} max {hi:.2f}")

print("\n== fitting the BC policy ==")
config = objectives.BCConfig(env_id="linereacher-v0", seed=0, steps=2000)
policy, history = objectives.train_bc(config, dataset)
for step_i, nll in history[::5]:
    print(f"step {step_i:5d}  nll {nll:8.4f}")
print(f"final log_std: {policy.log_std}")

print("\n== evaluation (20 deterministic episodes each) ==")
bc_mean, bc_std, _ = trainer.evaluate(policy, "linereacher-v0", 20, 7000)
expert_returns = [envs.rollout("linereacher-v0", 7000 + i,
                               lambda o: envs.expert_action("linereacher-v0", o))[1]
                  for i in range(20)]
rng = np.random.default_rng(0)
random_policy = actor.make_actor(envs.env_spec("linereacher-v0"), rng)
rand_mean, rand_std, _ = trainer.evaluate(random_policy, "linereacher-v0", 20, 7000)

print(f"scripted expert : {np.mean(expert_returns):8.2f}")
print(f"behavior cloning: {bc_mean:8.2f} +- {bc_std:.2f}")
print(f"random init     : {rand_mean:8.2f} +- {rand_std:.2f}")
