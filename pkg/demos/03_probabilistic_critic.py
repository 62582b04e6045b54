"""The probabilistic critic's building blocks, numerically.

Shows why the reward objective's optimum is (1, 0.5), how Bellman
targets become products of probabilities with an expert branch and a
halved non-expert branch, and that the JSD loss bottoms out exactly
when predictions match targets.
"""

import math

import numpy as np

from mimicrl import critic, objectives
from mimicrl.envs import env_spec

print("== Bernoulli entropy peaks at 0.5 ==")
for p in (0.01, 0.1, 0.25, 0.5, 0.75, 0.99):
    bar = "#" * int(40 * critic.bernoulli_entropy(p) / math.log(2))
    print(f"H({p:4.2f}) = {critic.bernoulli_entropy(p):.4f}  {bar}")

print("\n== the reward objective: expert likelihood + non-expert entropy ==")
print("objective(r_expert, r_beta) on a coarse grid; the maximum sits at")
print("r_expert = 1, r_beta = 0.5, exactly the values the Bellman targets")
print("hard-code:")
grid = [0.0, 0.25, 0.5, 0.75, 1.0]
header = "        " + "".join(f"rb={rb:<6}" for rb in grid)
print(header)
for re_v in grid:
    row = "".join(
        f"{objectives.reward_objective(objectives.RewardTable([re_v], [rb])):<9.4f}"
        for rb in grid)
    print(f"re={re_v:<5} {row}")

print("\n== clipped-double Bellman targets ==")
spec = env_spec("linereacher-v0")
rng = np.random.default_rng(0)
t1, t2 = critic.make_critic(spec, rng), critic.make_critic(spec, rng)
next_obs = rng.standard_normal((4, 2))
next_act = rng.uniform(-1, 1, (4, 1))
sa = np.concatenate([next_obs, next_act], axis=1)
q1, q2 = critic.q_batch(t1, sa), critic.q_batch(t2, sa)
base = critic.target_base_batch(t1, t2, next_obs, next_act, 0.99,
                                np.array([False, False, False, True]))
print(f"{'q_t1':>8} {'q_t2':>8} {'done':>6} {'base=minq^g':>12} "
      f"{'expert tgt':>11} {'beta tgt':>9}")
for i in range(4):
    done = i == 3
    e = critic.branch_target(base[i], "expert", 1e-6)
    b = critic.branch_target(base[i], "beta", 1e-6)
    print(f"{q1[i]:8.4f} {q2[i]:8.4f} {str(done):>6} {base[i]:12.4f} "
          f"{float(e):11.6f} {float(b):9.6f}")

print("\n== the JSD loss is zero exactly at the matched fixed point ==")
c1 = critic.make_critic(spec, rng)
c2 = critic.CriticNet(c1.params.copy(), c1.clamp_eps)
obs = rng.standard_normal((3, 2))
act = rng.uniform(-1, 1, (3, 1))
targets = critic.q_batch(c1, np.concatenate([obs, act], axis=1))
loss, g1, g2, _ = critic.critic_loss_and_grads(
    c1, c2, obs, act, targets, obs, act, targets)
print(f"predictions == targets: loss = {loss}, |grad1| = "
      f"{np.linalg.norm(g1)}, |grad2| = {np.linalg.norm(g2)}")
perturbed = np.clip(targets * 0.7, 1e-6, 1 - 1e-6)
loss2, *_ = critic.critic_loss_and_grads(
    c1, c2, obs, act, perturbed, obs, act, perturbed)
print(f"targets perturbed by x0.7:  loss = {loss2:.6f} (> 0)")
