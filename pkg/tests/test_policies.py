import math
import unittest

import numpy as np

from heavy_tail_bandits.clipped_sgd import Schedule, g_bound
from heavy_tail_bandits.errors import ConfigError, PreconditionError
from heavy_tail_bandits.estimators import SmomConfig
from heavy_tail_bandits.policies import (
    ClippedSgdUcbPolicy,
    DeltaRule,
    GenericFoUcbPolicy,
    PolicyConfig,
    PolicyFamily,
    RucbMedianPolicy,
    VanillaUcbPolicy,
    canonical_name,
    init_policy,
    make_policy,
    named_policy,
    resolve_delta,
    rucb_block_count,
    rucb_median_index,
    vanilla_ucb_index,
)
from heavy_tail_bandits.policies.base import ArmState
from heavy_tail_bandits.policies.indices import fo_ucb_index, g_at, zo_ucb_index


class RecordingFeed:
    """Reward feed returning fixed per-arm values and logging the pulled arms."""

    def __init__(self, means):
        self.means = means
        self.arms = []

    def __call__(self, arm):
        self.arms.append(arm)
        return self.means[arm]


class CauchyFeed:
    """Reward feed with Cauchy(1) noise around fixed per-arm means."""

    def __init__(self, means, seed=0):
        self.means = means
        self.gen = np.random.default_rng(seed)

    def __call__(self, arm):
        return self.means[arm] + float(self.gen.standard_cauchy())


class TestPolicyConfig(unittest.TestCase):
    def test_named_variants(self):
        self.assertEqual(canonical_name("sgd-ucb-smom"), "SGD-UCB-SMoM")
        self.assertEqual(named_policy("SGD-UCB").batch_size, 1)
        self.assertEqual(named_policy("SGD-UCB-Median").batch_size, 3)
        self.assertEqual(named_policy("SGD-UCB-SMoM").batch_size, 6)
        self.assertEqual(named_policy("RUCB-Median").batch_size, 1)
        self.assertEqual(named_policy("UCB").family, PolicyFamily.VANILLA_UCB)

    def test_unknown_name(self):
        with self.assertRaises(ConfigError):
            canonical_name("thompson")

    def test_theta_override_keeps_blocks(self):
        cfg = named_policy("SGD-UCB-SMoM", theta=0.1)
        self.assertEqual(cfg.smom, SmomConfig(m=1, n=2, theta=0.1))

    def test_invalid_values(self):
        with self.assertRaises(PreconditionError):
            named_policy("SGD-UCB", p=2)
        with self.assertRaises(PreconditionError):
            named_policy("SGD-UCB", delta_rule=DeltaRule.FIXED)
        with self.assertRaises(ValueError):
            named_policy("SGD-UCB", delta_rule="sometimes")

    def test_default_delta_rules(self):
        self.assertEqual(named_policy("UCB").effective_delta_rule, DeltaRule.PER_ROUND)
        self.assertEqual(named_policy("SGD-UCB").effective_delta_rule, DeltaRule.ONE_OVER_T_TPLUS1)
        self.assertEqual(named_policy("RUCB-Median").effective_delta_rule, DeltaRule.ONE_OVER_T_TPLUS1)

    def test_dict_form(self):
        data = named_policy("SGD-UCB-Median", label="median").to_dict()
        self.assertEqual(data["name"], "SGD-UCB-Median")
        self.assertEqual(data["label"], "median")
        self.assertEqual(data["smom"], {"m": 1, "n": 1, "theta": 0.0})
        self.assertNotIn("rucb", data)
        self.assertEqual(named_policy("RUCB-Median").to_dict()["rucb"], {"alpha": 1.0, "v": 1.0, "c": 1.0})


class TestIndices(unittest.TestCase):
    def test_resolve_delta(self):
        self.assertEqual(resolve_delta(DeltaRule.PER_ROUND, 100, 10), 0.01)
        self.assertEqual(resolve_delta(DeltaRule.ONE_OVER_T2, 100, 10), 1e-4)
        self.assertEqual(resolve_delta(DeltaRule.ONE_OVER_T_TPLUS1, 100, 10), 1.0 / 10100)
        self.assertEqual(resolve_delta(DeltaRule.FIXED, 100, 10, 0.2), 0.2)
        with self.assertRaises(PreconditionError):
            resolve_delta(DeltaRule.FIXED, 100, 10)

    def test_vanilla_index(self):
        self.assertAlmostEqual(vanilla_ucb_index(0.5, 4, 10), 0.5 + math.sqrt(2 * math.log(100) / 4), places=12)
        self.assertAlmostEqual(vanilla_ucb_index(0.5, 4, 10, v=2.0, delta=0.1),
                               0.5 + math.sqrt(4 * math.log(10) / 4), places=12)
        with self.assertRaises(PreconditionError):
            vanilla_ucb_index(0.0, 0, 10)

    def test_rucb_block_count(self):
        self.assertEqual(rucb_block_count(0.01, 1000), 17)
        self.assertEqual(rucb_block_count(0.01, 10), 9)
        self.assertEqual(rucb_block_count(0.01, 1), 1)
        self.assertEqual(rucb_block_count(0.5, 4), 3)

    def test_rucb_index_on_constant_samples(self):
        radius = math.sqrt(math.log(100) / 20)
        self.assertAlmostEqual(rucb_median_index([2.0] * 20, 20, 0.01), 2.0 + radius, places=12)

    def test_g_at_rescales_log_factor(self):
        s = Schedule(100, 0.01)
        self.assertEqual(g_at(5, s), g_bound(5, s))
        scale = math.log(4 * 101 / 0.001) / s.log_term
        self.assertAlmostEqual(g_at(5, s, 0.001), g_bound(5, s) * scale, places=12)

    def test_first_order_index_falls_with_every_step(self):
        s = Schedule(1000, 0.01)
        arm = ArmState(index=0, x=0.3, pulls=1, total_samples=3)
        for delta in (None, 0.001):
            previous = float("inf")
            for pulls in range(1, 2001):
                arm.pulls = pulls
                value = fo_ucb_index(arm, s, delta)
                self.assertLess(value, previous, msg=f"pulls={pulls}, delta={delta}")
                previous = value

    def test_zo_index_rejects_negative_g(self):
        policy_arm = type("Arm", (), {"x": 1.0})()
        self.assertEqual(zo_ucb_index(policy_arm, 0.5), 1.5)
        with self.assertRaises(PreconditionError):
            zo_ucb_index(policy_arm, -0.1)


class TestPolicyLifecycle(unittest.TestCase):
    def test_factory_families(self):
        self.assertIsInstance(make_policy(named_policy("SGD-UCB"), 2, 100), ClippedSgdUcbPolicy)
        self.assertIsInstance(make_policy(named_policy("UCB"), 2, 100), VanillaUcbPolicy)
        self.assertIsInstance(make_policy(named_policy("RUCB-Median"), 2, 100), RucbMedianPolicy)

    def test_needs_two_arms(self):
        with self.assertRaises(PreconditionError):
            make_policy(named_policy("SGD-UCB"), 1, 100)

    def test_initialization_pulls_each_arm_p_times_in_order(self):
        feed = RecordingFeed([1.0, 2.0, 3.0])
        policy = init_policy(named_policy("SGD-UCB", p=3), 3, 100, feed)
        self.assertEqual(feed.arms, [0, 0, 0, 1, 1, 1, 2, 2, 2])
        self.assertEqual(policy.t, 9)
        self.assertEqual(policy.pull_counts(), [1, 1, 1])
        self.assertEqual([arm.x for arm in policy.arms], [1.0, 2.0, 3.0])
        self.assertEqual(policy.select_arm(), 2)

    def test_lifecycle_errors(self):
        policy = make_policy(named_policy("SGD-UCB-SMoM"), 2, 100)
        with self.assertRaises(PreconditionError):
            policy.select_arm()
        policy.initialize(RecordingFeed([0.0, 0.0]))
        with self.assertRaises(PreconditionError):
            policy.initialize(RecordingFeed([0.0, 0.0]))
        with self.assertRaises(PreconditionError):
            policy.update(0, [0.0, 0.0, 0.0])
        with self.assertRaises(PreconditionError):
            policy.update(5, [0.0] * 6)

    def test_ties_go_to_lowest_arm(self):
        for name in ("SGD-UCB", "UCB", "RUCB-Median"):
            policy = init_policy(named_policy(name), 4, 100, RecordingFeed([0.0] * 4))
            self.assertEqual(policy.select_arm(), 0, msg=name)

    def test_exact_rewards_leave_sgd_estimate_in_place(self):
        policy = init_policy(named_policy("SGD-UCB-Median"), 2, 100, RecordingFeed([0.5, 0.0]))
        policy.update(0, [0.5, 0.5, 0.5])
        self.assertEqual(policy.arms[0].x, 0.5)
        self.assertEqual(policy.arms[0].pulls, 2)
        self.assertEqual(policy.arms[0].optimizer.k, 2)
        self.assertEqual(policy.arms[0].total_samples, 6)

    def test_sgd_update_moves_toward_reward(self):
        policy = init_policy(named_policy("SGD-UCB"), 2, 1000, RecordingFeed([0.0, 0.0]))
        policy.update(1, [1.0])
        state = policy.arms[1]
        schedule = policy.schedule
        expected = 0.0 - schedule.step_size(1) * max(-schedule.level(1), -1.0)
        self.assertAlmostEqual(state.x, expected, places=12)
        self.assertAlmostEqual(policy.ucbs[1], state.x + math.sqrt(2.0 * g_bound(2, schedule)), places=12)

    def test_vanilla_ucb_running_mean(self):
        policy = init_policy(named_policy("UCB", p=1), 2, 100, RecordingFeed([1.0, 0.0]))
        policy.update(0, [3.0])
        state = policy.arms[0]
        self.assertEqual(state.pulls, 2)
        self.assertEqual(state.x, 2.0)
        self.assertAlmostEqual(policy.ucbs[0], vanilla_ucb_index(2.0, 2, 3), places=12)

    def test_rucb_keeps_every_sample(self):
        policy = init_policy(named_policy("RUCB-Median", p=1), 2, 100, RecordingFeed([1.0, 0.0]))
        for reward in (2.0, 3.0):
            policy.update(0, [reward])
        self.assertEqual(policy.arms[0].samples, [1.0, 2.0, 3.0])
        self.assertEqual(policy.arms[0].pulls, 3)

    def test_update_recomputes_only_the_played_arm(self):
        for name in ("SGD-UCB-SMoM", "RUCB-Median"):
            feed = CauchyFeed([0.0, 0.2, 0.4, 0.6], seed=11)
            policy = init_policy(named_policy(name), 4, 1000, feed)
            for _ in range(60):
                arm = policy.select_arm()
                before = list(policy.ucbs)
                policy.update(arm, [feed(arm) for _ in range(policy.batch_size)])
                for other in range(4):
                    if other != arm:
                        self.assertEqual(policy.ucbs[other], before[other], msg=f"{name}, arm {other}")

    def test_each_round_adds_one_optimizer_step(self):
        for name in ("SGD-UCB", "SGD-UCB-Median", "SGD-UCB-SMoM"):
            feed = CauchyFeed([0.0, 0.5, 1.0, 1.5, 2.0], seed=3)
            policy = init_policy(named_policy(name), 5, 1000, feed)
            self.assertEqual(sum(policy.pull_counts()), 5)
            for t in range(1, 101):
                arm = policy.select_arm()
                policy.update(arm, [feed(arm) for _ in range(policy.batch_size)])
                self.assertEqual(sum(policy.pull_counts()), 5 + t, msg=name)

    def test_overruns_reported_past_horizon(self):
        policy = init_policy(named_policy("SGD-UCB", p=1), 2, 3, RecordingFeed([0.0, 0.0]))
        for _ in range(4):
            policy.update(0, [0.0])
        self.assertEqual(policy.overruns(), 2)


class TestGenericTemplates(unittest.TestCase):
    @staticmethod
    def averaging_step(x, k, rewards):
        return x + (sum(rewards) / len(rewards) - x) / (k + 1)

    def test_first_order_template(self):
        cfg = PolicyConfig(family=PolicyFamily.GENERIC_FO_UCB)
        policy = init_policy(cfg, 2, 100, RecordingFeed([2.0, 1.0]), step=self.averaging_step,
                             g=lambda k, d: 1.0 / k)
        self.assertIsInstance(policy, GenericFoUcbPolicy)
        self.assertAlmostEqual(policy.ucbs[0], 2.0 + math.sqrt(2.0), places=12)
        policy.update(0, [5.0])
        self.assertAlmostEqual(policy.arms[0].x, 3.5, places=12)
        self.assertAlmostEqual(policy.ucbs[0], 3.5 + 1.0, places=12)

    def test_zero_order_template(self):
        cfg = PolicyConfig(family=PolicyFamily.GENERIC_ZO_UCB)
        policy = init_policy(cfg, 2, 100, RecordingFeed([2.0, 1.0]), step=self.averaging_step,
                             g=lambda k, d: 0.25 / k)
        self.assertAlmostEqual(policy.ucbs[1], 1.25, places=12)
        self.assertEqual(cfg.name, "ZO-UCB")

    def test_optimizer_required(self):
        with self.assertRaises(PreconditionError):
            make_policy(PolicyConfig(family=PolicyFamily.GENERIC_FO_UCB), 2, 100)


if __name__ == '__main__':
    unittest.main()
