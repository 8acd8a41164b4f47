import math
import os
import unittest

import numpy as np

from heavy_tail_bandits.clipped_sgd import Schedule
from heavy_tail_bandits.distributions import NoiseModel
from heavy_tail_bandits.environments import SweepKind, builtin_env, delta_sweep_env
from heavy_tail_bandits.errors import PreconditionError
from heavy_tail_bandits.harness import (
    calibrate,
    delta_sweep,
    run_experiment,
    run_trial,
    runtime_benchmark,
    sgd_convergence,
)
from heavy_tail_bandits.policies import DeltaRule, PolicyConfig, PolicyFamily, ScheduleParams, named_policy
from heavy_tail_bandits.presets import TUNED_SCHEDULE
from heavy_tail_bandits.utils.stats import growth_exponent

from .test_utils import skip_slow_test, timeout, zero_noise_env

TUNED = ScheduleParams(**TUNED_SCHEDULE)
ALL_FAMILIES = ("SGD-UCB", "SGD-UCB-Median", "SGD-UCB-SMoM", "RUCB-Median", "UCB")


def tuned(name, **overrides):
    if name in ("RUCB-Median", "UCB"):
        return named_policy(name, **overrides)
    return named_policy(name, schedule=TUNED, **overrides)


class TestRunTrial(unittest.TestCase):
    def test_budget_must_cover_initialization_and_one_round(self):
        env = builtin_env("Env1")
        with self.assertRaises(PreconditionError):
            run_trial(env, named_policy("SGD-UCB-SMoM"), budget=35, seed=0)
        run_trial(env, named_policy("SGD-UCB-SMoM"), budget=36, seed=0)

    def test_targets_must_be_positive(self):
        with self.assertRaises(PreconditionError):
            run_trial(builtin_env("Env1"), named_policy("UCB"), budget=100, seed=0, targets=[0.0])

    def test_budget_accounting(self):
        summary = run_trial(builtin_env("Env1"), tuned("SGD-UCB-SMoM"), budget=500, seed=3, keep_trace=True)
        self.assertEqual(summary.pulls, 498)
        self.assertEqual(sum(summary.arm_pulls), summary.pulls)
        self.assertEqual(summary.checkpoints[-1], 500)
        # the last checkpoint carries the regret of pull 498 forward
        self.assertEqual(summary.final_regret, summary.trace.at(498))

    def test_same_seed_same_trial(self):
        cfg = named_policy("SGD-UCB-SMoM", schedule=TUNED, theta=0.1)
        a = run_trial(builtin_env("Env2"), cfg, budget=800, seed=11, targets=[0.5], keep_trace=True)
        b = run_trial(builtin_env("Env2"), cfg, budget=800, seed=11, targets=[0.5], keep_trace=True)
        np.testing.assert_array_equal(a.trace.arms, b.trace.arms)
        np.testing.assert_array_equal(a.regret, b.regret)
        self.assertEqual(a.realized_regret, b.realized_regret)
        self.assertEqual(a.target_hits[0.5].pulls_to_hit, b.target_hits[0.5].pulls_to_hit)

    def test_regret_equals_gap_weighted_pull_counts(self):
        env = builtin_env("Env2")
        for seed in range(4):
            for name in ALL_FAMILIES:
                summary = run_trial(env, tuned(name), budget=400, seed=seed, keep_trace=True)
                trace = summary.trace
                self.assertEqual(trace.at(0), 0.0)
                self.assertTrue(np.all(np.diff(trace.cumulative) >= 0.0))
                for t in (30, 100, 257, 400):
                    expected = float(np.dot(env.gaps, trace.arm_pulls(t)))
                    self.assertAlmostEqual(trace.at(t), expected, places=9, msg=f"{name} seed {seed} t={t}")

    def test_noise_free_rewards_give_exact_realized_regret(self):
        env = zero_noise_env((0.0, 1.0, 0.5))
        summary = run_trial(env, named_policy("UCB"), budget=200, seed=0)
        self.assertAlmostEqual(summary.realized_regret, summary.final_regret, places=9)

    def test_optimal_arm_only_has_zero_regret(self):
        env = zero_noise_env((1.0, 1.0))
        summary = run_trial(env, tuned("SGD-UCB"), budget=100, seed=0)
        self.assertEqual(summary.final_regret, 0.0)

    def test_suboptimal_pulls_stay_bounded_without_noise(self):
        budget = 2000
        env = zero_noise_env((0.0, 1.0))
        delta = 1.0 / (budget * (budget + 1))
        # an arm is only chosen while its radius exceeds the unit gap
        bound_constant = TUNED.build(budget, delta).bound_constant
        cases = [
            (tuned("SGD-UCB"), 3 + 2 * bound_constant),
            (tuned("SGD-UCB-Median"), 3 + 3 * 2 * bound_constant),
            (named_policy("RUCB-Median"), 1 + math.log(1 / delta)),
            (named_policy("UCB", delta_rule=DeltaRule.ONE_OVER_T2), 1 + 4 * math.log(budget)),
        ]
        for cfg, limit in cases:
            summary = run_trial(env, cfg, budget=budget, seed=0)
            self.assertLessEqual(summary.arm_pulls[0], limit, msg=cfg.display_name)
            self.assertEqual(summary.final_regret, summary.arm_pulls[0])

    def test_shift_leaves_decisions_unchanged(self):
        env = builtin_env("Env2")
        moved = env.shifted(7.0)
        for name in ALL_FAMILIES:
            for seed in range(10):
                a = run_trial(env, tuned(name), budget=1000, seed=seed, keep_trace=True)
                b = run_trial(moved, tuned(name), budget=1000, seed=seed, keep_trace=True)
                np.testing.assert_array_equal(a.trace.arms, b.trace.arms, err_msg=f"{name} seed {seed}")
                np.testing.assert_allclose(a.regret, b.regret, rtol=1e-9)

    def test_target_met_at_end_of_initialization(self):
        env = zero_noise_env((0.0, 1.0))
        summary = run_trial(env, named_policy("UCB"), budget=100, seed=0, targets=[1.0, 1e-9])
        self.assertTrue(summary.target_hits[1.0].hit)
        self.assertEqual(summary.target_hits[1.0].pulls_to_hit, 6)
        self.assertFalse(summary.target_hits[1e-9].hit)
        self.assertIsNone(summary.target_hits[1e-9].pulls_to_hit)

    def test_generic_template_through_harness(self):
        cfg = PolicyConfig(family=PolicyFamily.GENERIC_FO_UCB)
        optimizer = {
            "step": lambda x, k, rewards: x + (rewards[0] - x) / (k + 1),
            "g": lambda k, delta: math.log(1 / delta) / k,
        }
        summary = run_trial(builtin_env("Gauss1"), cfg, budget=300, seed=0, optimizer=optimizer)
        self.assertEqual(summary.pulls, 300)


class TestRunExperiment(unittest.TestCase):
    def test_single_trial_has_zero_spread(self):
        report = run_experiment(builtin_env("Env1"), [tuned("SGD-UCB")], trials=1, budget=300, base_seed=5)
        agg = report.aggregate("SGD-UCB")
        summary = report.summaries["SGD-UCB"][0]
        np.testing.assert_array_equal(agg.mean, summary.regret)
        self.assertTrue(np.all(agg.std == 0.0))
        self.assertEqual(report.seeds, [5])

    def test_curve_shape_and_seeds(self):
        policies = [tuned("SGD-UCB"), named_policy("UCB")]
        report = run_experiment(builtin_env("Env2"), policies, trials=3, budget=5000, base_seed=10, max_points=50)
        self.assertEqual(report.seeds, [10, 11, 12])
        self.assertEqual(len(report.checkpoints), 50)
        self.assertEqual(report.checkpoints[0], 1)
        self.assertEqual(report.checkpoints[-1], 5000)
        for agg in report.aggregates:
            self.assertEqual(agg.mean.shape, (50,))
            self.assertTrue(np.all(np.diff(agg.mean) >= 0))
        self.assertEqual([s.seed for s in report.summaries["UCB"]], [10, 11, 12])

    def test_generic_template_alongside_named_policies(self):
        optimizer = {
            "step": lambda x, k, rewards: x + (rewards[0] - x) / (k + 1),
            "g": lambda k, delta: math.log(1 / delta) / k,
        }
        policies = [PolicyConfig(family=PolicyFamily.GENERIC_FO_UCB), tuned("SGD-UCB")]
        report = run_experiment(builtin_env("Gauss1"), policies, trials=2, budget=300, optimizer=optimizer)
        self.assertEqual([agg.label for agg in report.aggregates], ["FO-UCB", "SGD-UCB"])
        alone = run_trial(builtin_env("Gauss1"), policies[0], budget=300, seed=1, optimizer=optimizer)
        np.testing.assert_array_equal(report.summaries["FO-UCB"][1].regret, alone.regret)

    def test_common_seeds_across_policies(self):
        report = run_experiment(builtin_env("Env1"), [named_policy("UCB"), named_policy("UCB", label="UCB copy")],
                                trials=2, budget=200)
        np.testing.assert_array_equal(report.aggregate("UCB").mean, report.aggregate("UCB copy").mean)

    def test_same_inputs_same_aggregates(self):
        args = (builtin_env("Env1"), [tuned("SGD-UCB-Median"), named_policy("RUCB-Median")])
        a = run_experiment(*args, trials=3, budget=400, base_seed=2, targets=[0.5])
        b = run_experiment(*args, trials=3, budget=400, base_seed=2, targets=[0.5])
        for x, y in zip(a.aggregates, b.aggregates):
            np.testing.assert_array_equal(x.mean, y.mean)
            np.testing.assert_array_equal(x.std, y.std)
            self.assertEqual(x.fails, y.fails)
            self.assertEqual(x.pulls_to_target, y.pulls_to_target)

    @timeout(120)
    def test_worker_pool_matches_inline(self):
        args = (builtin_env("Env2"), [tuned("SGD-UCB"), named_policy("UCB")])
        inline = run_experiment(*args, trials=4, budget=300, base_seed=1, workers=1)
        pooled = run_experiment(*args, trials=4, budget=300, base_seed=1, workers=2)
        for x, y in zip(inline.aggregates, pooled.aggregates):
            np.testing.assert_array_equal(x.mean, y.mean)
            np.testing.assert_array_equal(x.std, y.std)
        self.assertEqual([s.seed for s in pooled.summaries["UCB"]], [1, 2, 3, 4])

    def test_duplicate_labels_rejected(self):
        with self.assertRaises(PreconditionError):
            run_experiment(builtin_env("Env1"), [named_policy("UCB"), named_policy("ucb")], trials=1, budget=100)

    def test_needs_trials_and_policies(self):
        with self.assertRaises(PreconditionError):
            run_experiment(builtin_env("Env1"), [named_policy("UCB")], trials=0, budget=100)
        with self.assertRaises(PreconditionError):
            run_experiment(builtin_env("Env1"), [], trials=1, budget=100)


class TestRuntimeBenchmark(unittest.TestCase):
    def test_trivial_target_reached_by_every_trial(self):
        env = zero_noise_env((0.0, 1.0))
        result = runtime_benchmark(env, [named_policy("UCB")], targets=[1.0], budget=100, trials=3)
        row = result.rows[0]
        self.assertEqual(row.fails, 0)
        self.assertEqual(row.pulls_p50, 6)
        self.assertEqual(row.pulls_p90, 6)
        self.assertGreaterEqual(row.time_p90, 0.0)

    def test_unreachable_target_counts_every_trial_as_failed(self):
        result = runtime_benchmark(builtin_env("Env1"), [named_policy("UCB")], targets=[1e-9], budget=200, trials=2)
        row = result.rows[0]
        self.assertEqual(row.fails, 2)
        self.assertIsNone(row.time_p90)
        self.assertIsNone(row.pulls_p50)

    def test_one_row_per_policy_and_target(self):
        result = runtime_benchmark(builtin_env("Env1"), [tuned("SGD-UCB"), named_policy("UCB")],
                                   targets=[0.1, 0.05], budget=200, trials=1)
        self.assertEqual([(r.policy, r.target) for r in result.rows],
                         [("SGD-UCB", 0.1), ("SGD-UCB", 0.05), ("UCB", 0.1), ("UCB", 0.05)])

    def test_needs_positive_targets(self):
        with self.assertRaises(PreconditionError):
            runtime_benchmark(builtin_env("Env1"), [named_policy("UCB")], targets=[], budget=100, trials=1)
        with self.assertRaises(PreconditionError):
            runtime_benchmark(builtin_env("Env1"), [named_policy("UCB")], targets=[-0.1], budget=100, trials=1)


class TestDeltaSweep(unittest.TestCase):
    def test_zero_gap_has_zero_regret(self):
        result = delta_sweep(SweepKind.TWO_ARM, [0.0, 0.5], trials=2, budget=100,
                             policies=[tuned("SGD-UCB"), named_policy("UCB")])
        self.assertEqual(result.grid, [0.0, 0.5])
        for label in ("SGD-UCB", "UCB"):
            self.assertEqual(result.final_mean[label][0], 0.0)
            self.assertEqual(result.final_std[label][0], 0.0)
            self.assertGreater(result.final_mean[label][1], 0.0)

    def test_default_grid(self):
        result = delta_sweep("five-arm", None, trials=1, budget=40, policies=[named_policy("UCB", p=1)])
        self.assertEqual(len(result.grid), 26)
        self.assertEqual(len(result.final_mean["UCB"]), 26)

    def test_empty_grid_rejected(self):
        with self.assertRaises(PreconditionError):
            delta_sweep(SweepKind.TWO_ARM, [], trials=1, budget=100, policies=[named_policy("UCB")])


class TestSgdConvergence(unittest.TestCase):
    def test_noise_free_constant_steps(self):
        s = Schedule(1000, 0.01)
        result = sgd_convergence(NoiseModel.zero(), s, seeds=[0, 1])
        np.testing.assert_array_equal(result.per_seed[0], result.per_seed[1])
        self.assertTrue(np.all(np.diff(result.median) < 0))
        self.assertLess(result.slope, 0.0)
        self.assertEqual(result.checkpoints[-1], 1000)

    def test_harmonic_first_step_lands_on_optimum(self):
        s = Schedule(1000, 0.01, lr_mode="harmonic")
        result = sgd_convergence(NoiseModel.zero(), s, seeds=[0])
        self.assertTrue(np.all(result.median == 0.0))
        self.assertIsNone(result.slope)

    @timeout(120)
    def test_worker_pool_matches_inline(self):
        s = Schedule(200, 0.05, lr_mode="harmonic")
        inline = sgd_convergence(NoiseModel.cauchy(), s, seeds=range(4))
        pooled = sgd_convergence(NoiseModel.cauchy(), s, seeds=range(4), workers=2)
        np.testing.assert_array_equal(inline.per_seed, pooled.per_seed)

    def test_needs_seeds(self):
        with self.assertRaises(PreconditionError):
            sgd_convergence(NoiseModel.zero(), Schedule(10, 0.1), seeds=[])

    def test_calibration_wrapper(self):
        result = calibrate(NoiseModel.cauchy(), Schedule(200, 0.1), seeds=range(10))
        self.assertGreater(result.C, 0.0)
        self.assertGreaterEqual(result.coverage, 0.9)


class TestReferenceShapes(unittest.TestCase):
    """Monte-Carlo checks at the published experiment sizes."""

    workers = min(4, os.cpu_count() or 1)

    @skip_slow_test()
    @timeout(3600)
    def test_runtime_to_target_on_env1(self):
        policies = [tuned("SGD-UCB-SMoM"), named_policy("RUCB-Median")]
        result = runtime_benchmark(builtin_env("Env1"), policies, targets=[0.1], budget=10 ** 4, trials=100,
                                   workers=self.workers)
        rows = {row.policy: row for row in result.rows}
        self.assertLessEqual(rows["SGD-UCB-SMoM"].fails, 30)
        self.assertGreaterEqual(rows["RUCB-Median"].fails, rows["SGD-UCB-SMoM"].fails)
        report = result.report
        smom_wall = report.aggregate("SGD-UCB-SMoM").wall_time["p50"]
        rucb_wall = report.aggregate("RUCB-Median").wall_time["p50"]
        self.assertGreaterEqual(rucb_wall, 5 * smom_wall)

    @skip_slow_test()
    @timeout(1800)
    def test_vanilla_ucb_degrades_under_cauchy_noise(self):
        report = run_experiment(builtin_env("Env1"), [tuned("SGD-UCB-SMoM"), named_policy("UCB")], trials=50,
                                budget=10 ** 4, workers=self.workers)
        self.assertGreaterEqual(report.aggregate("UCB").final_mean, 3 * report.aggregate("SGD-UCB-SMoM").final_mean)

    @skip_slow_test()
    @timeout(1800)
    def test_gaussian_noise_keeps_policies_close(self):
        variants = ("SGD-UCB", "SGD-UCB-Median", "SGD-UCB-SMoM")
        policies = [tuned(name, p=1) for name in variants] + [named_policy("UCB", p=1)]
        report = run_experiment(builtin_env("Gauss1"), policies, trials=150, budget=3000, workers=self.workers)
        ucb = report.aggregate("UCB").final_mean
        for name in variants:
            sgd = report.aggregate(name).final_mean
            self.assertLessEqual(ucb, sgd, msg=name)
            self.assertLessEqual(sgd, 3 * ucb, msg=name)

    @skip_slow_test()
    @timeout(7200)
    def test_regret_grows_sublinearly(self):
        env = delta_sweep_env(SweepKind.TWO_ARM, 0.5, NoiseModel.cauchy(1.0))
        horizons = [10 ** 3, 10 ** 4, 10 ** 5]
        finals = []
        for budget in horizons:
            report = run_experiment(env, [tuned("SGD-UCB-SMoM")], trials=30, budget=budget,
                                    workers=self.workers, max_points=1)
            finals.append(report.aggregates[0].final_mean)
        self.assertLess(growth_exponent(horizons, finals), 0.8, msg=f"final regret {finals}")


if __name__ == '__main__':
    unittest.main()
