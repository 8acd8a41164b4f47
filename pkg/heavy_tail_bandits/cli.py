"""Command-line interface for heavy-tail-bandits."""

import argparse
import json
import sys
from typing import List, Optional

from rich.console import Console

from .distributions import NoiseModel
from .environments import SweepKind, delta_sweep_env
from .errors import BanditError, ConfigError
from .harness import calibrate, delta_sweep, run_experiment, runtime_benchmark, sgd_convergence
from .logger import LogLevel, get_logger
from .presets import PRESETS, preset, preset_names
from .simple_config import ConfigManager, RunConfig, apply_overrides
from .utils.display import (
    display_benchmark,
    display_calibration,
    display_convergence,
    display_experiment,
    display_presets,
    display_sweep,
    display_written,
)
from .utils.reporting import ReportWriter

# subcommand -> experiment kind
SUBCOMMAND_KINDS = {
    "run": "curves",
    "bench": "bench",
    "sweep": "delta-sweep",
    "sgd-convergence": "sgd-convergence",
    "calibrate-c": "calibrate-c",
}


class HeavyTailBanditsCLI:
    """CLI front end: build a RunConfig, run it, print a summary and write result files."""

    def __init__(self):
        self.console = Console()
        self.config_manager = ConfigManager()
        self.config: Optional[RunConfig] = None
        self.logger = get_logger()
        self.logger.set_console(Console(stderr=True))

    def main(self, argv: Optional[List[str]] = None):
        """Main entry point for the CLI."""
        parser = self.create_parser()
        args = parser.parse_args(argv)

        if args.debug:
            self.logger.set_level(LogLevel.DEBUG)
            self.logger.debug("Debug logging enabled")

        if args.command is None:
            parser.print_help()
            sys.exit(2)

        try:
            if args.command == "preset-list":
                display_presets(self.console, PRESETS)
                return
            self.config = self.load_run_config(args)
            written = self.run_config(self.config)
            display_written(self.console, written)
        except BanditError as e:
            self._fail(e, 2 if isinstance(e, ConfigError) else 1)
        except Exception as e:
            self._fail(e, 1)

    def _fail(self, error: Exception, status: int):
        payload = error.to_dict() if isinstance(error, BanditError) else {"error": "internal_error",
                                                                          "message": str(error)}
        self.console.print(f"[red]Error: {error}[/red]")
        sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
        sys.exit(status)

    def create_parser(self) -> argparse.ArgumentParser:
        """Create the argument parser with one subcommand per experiment kind."""
        parser = argparse.ArgumentParser(
            prog='heavy-tail-bandits',
            description='Simulate and benchmark UCB policies for heavy-tailed multi-armed bandits'
        )
        parser.add_argument(
            '--debug',
            action='store_true',
            help='Enable debug logging (per-trial progress, schedule details)'
        )

        common = argparse.ArgumentParser(add_help=False)
        common.add_argument('--config', help='Path to a YAML run config')
        common.add_argument('--preset', choices=preset_names(), help='Start from a named preset instead of a file')
        common.add_argument('--scale', type=float, default=None,
                            help='Multiply the trial count (rounded, at least 1)')
        common.add_argument('--seed', type=int, default=None, help='Base seed; trial i uses seed + i')
        common.add_argument('--workers', type=int, default=None, help='Worker processes for independent trials')
        common.add_argument('--out-dir', default=None, help='Directory for result files (default: results)')
        common.add_argument('--format', action='append', default=None, metavar='FORMAT',
                            help='Output format: csv, json or plotdata (repeatable or comma separated)')
        common.add_argument('--trials', type=int, default=None, help='Override the trial count')
        common.add_argument('--budget', type=int, default=None, help='Override the pull budget per trial')

        sub = parser.add_subparsers(dest='command')
        sub.add_parser('run', parents=[common], help='Regret curves for every policy and environment')
        sub.add_parser('bench', parents=[common], help='Runtime and fail counts to reach target R_T/T values')
        sub.add_parser('sweep', parents=[common], help='Final regret over a grid of arm gaps')
        sub.add_parser('sgd-convergence', parents=[common], help='Suboptimality of clipped-SGD vs step count')
        sub.add_parser('calibrate-c', parents=[common], help='Fit the bounding constant C on pilot runs')
        sub.add_parser('preset-list', help='List the available presets')
        preset_parser = sub.add_parser('preset', parents=[common], help='Run a named preset')
        preset_parser.add_argument('name', choices=preset_names(), help='Preset name')
        return parser

    def load_run_config(self, args) -> RunConfig:
        """Config file or preset, then command-line overrides."""
        if args.command == "preset":
            config = preset(args.name)
            self.logger.info(f"Using preset {args.name}")
        else:
            if args.config and args.preset:
                raise ConfigError("--preset", "give either --config or --preset, not both")
            if args.config:
                config = self.config_manager.load_config(args.config)
            elif args.preset:
                config = preset(args.preset)
                self.logger.info(f"Using preset {args.preset}")
            else:
                config = RunConfig()
            config.experiment = SUBCOMMAND_KINDS[args.command]

        formats = None
        if args.format:
            formats = [f.strip() for item in args.format for f in item.split(",") if f.strip()]
        config = apply_overrides(config, seed=args.seed, workers=args.workers, out_dir=args.out_dir,
                                 formats=formats, scale=args.scale, trials=args.trials, budget=args.budget)
        if config.experiment in ("curves", "bench", "delta-sweep") and not config.policies:
            raise ConfigError("policies", f"a {config.experiment} experiment needs at least one policy")
        return config

    def run_config(self, config: RunConfig) -> List[str]:
        """Run the configured experiment and write its result files."""
        writer = ReportWriter(config.output.dir, config.output.formats)
        kind = config.experiment
        trials = config.effective_trials

        if kind in ("curves", "bench"):
            for env in config.environments():
                policies = config.policy_configs(env)
                if kind == "bench":
                    result = runtime_benchmark(env, policies, config.targets, config.budget, trials,
                                               config.seed, config.workers)
                    display_benchmark(self.console, result)
                    writer.add_experiment(result.report, result.rows)
                else:
                    report = run_experiment(env, policies, trials, config.budget, config.seed, config.workers,
                                            config.targets, config.output.max_points)
                    display_experiment(self.console, report)
                    writer.add_experiment(report)
        elif kind == "delta-sweep":
            sweep_kind = SweepKind(config.sweep.kind)
            noise = config.noise.model()
            light = delta_sweep_env(sweep_kind, 0.0, noise).noise.is_light_tailed
            policies = [entry.to_policy_config(light_tailed=light) for entry in config.policies]
            result = delta_sweep(sweep_kind, config.sweep.grid, trials, config.budget, policies, config.seed,
                                 config.workers, noise)
            display_sweep(self.console, result)
            writer.add_sweep(result)
        elif kind == "sgd-convergence":
            section = config.convergence
            noise = config.noise_or(NoiseModel.cauchy(1.0))
            schedule = section.build_schedule()
            seeds = [config.seed + i for i in range(section.seeds)]
            result = sgd_convergence(noise, schedule, seeds, mu=section.mu, x0=section.x0,
                                     smom_cfg=section.smom_config(), fit_from=section.fit_from,
                                     workers=config.workers)
            display_convergence(self.console, result)
            writer.add_convergence(result, noise, schedule, seeds)
        elif kind == "calibrate-c":
            section = config.calibration
            noise = config.noise_or(NoiseModel.cauchy(1.0))
            schedule = section.build_schedule()
            seeds = [config.seed + i for i in range(section.seeds)]
            result = calibrate(noise, schedule, seeds, mu=section.mu, x0=section.x0, smom_cfg=section.smom_config())
            display_calibration(self.console, result, schedule.delta)
            writer.add_calibration(result, noise, schedule, seeds)
        else:
            raise ConfigError("experiment", f"unknown experiment kind {kind!r}")

        return writer.finalize(kind, config.to_dict())


def main(argv: Optional[List[str]] = None):
    """Entry point for the heavy-tail-bandits command."""
    cli = HeavyTailBanditsCLI()
    cli.main(argv)


if __name__ == '__main__':
    main()
