"""The full off-policy imitation loop on linereacher, end to end.

Trains the noise-input actor against the JSD critic pair from a
20-trajectory expert dataset and prints the evaluation curve. The
learner never sees a reward: it matches the expert's state-action
distribution through the critic alone. Stops at 90% of the expert's
normalized performance (a couple of minutes on a desktop CPU).
"""

import numpy as np

from mimicrl import envs, trainer

expert_returns = [envs.rollout("linereacher-v0", s,
                               lambda o: envs.expert_action("linereacher-v0", o))[1]
                  for s in range(100)]
zero_returns = [envs.rollout("linereacher-v0", s, lambda o: np.zeros(1))[1]
                for s in range(100)]
expert_mean, zero_mean = float(np.mean(expert_returns)), float(np.mean(zero_returns))
bar = zero_mean + 0.9 * (expert_mean - zero_mean)
print(f"expert mean {expert_mean:.2f}, zero-action mean {zero_mean:.2f}, "
      f"target (90% normalized) {bar:.2f}")

dataset = trainer.generate_expert("linereacher-v0", n_target=20,
                                  threshold=-50.0, seed=1000)
print(f"dataset: {dataset.n_trajectories} trajectories, "
      f"{len(dataset)} transitions\n")

config = trainer.TrainConfig(
    env_id="linereacher-v0",
    seed=0,
    max_episodes=500,          # up to 100k environment steps
    early_stop_return=bar,
)
result = trainer.train(config, dataset, verbose=True)

last = result.metrics.eval_rows[-1]
score = (last["mean_return"] - zero_mean) / (expert_mean - zero_mean)
print(f"\nstopped after {result.env_steps} environment steps")
print(f"final 20-episode eval return: {last['mean_return']:.2f} "
      f"(normalized score {score:.2f})")
print("\neval curve (episode, mean return):")
for row in result.metrics.eval_rows:
    print(f"  {row['episode']:4d}  {row['mean_return']:10.2f} "
          f"+- {row['std_return']:.2f}")
