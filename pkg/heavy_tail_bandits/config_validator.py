"""
Schema validation of raw run-config mappings before anything is built or run.
"""

import math
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

from .environments import BUILTIN_ENVS, SweepKind
from .distributions import NoiseKind
from .errors import BanditError, ConfigError
from .policies import DeltaRule, NAMED_VARIANTS
from .clipped_sgd import LR_MODES

EXPERIMENT_KINDS = ("curves", "bench", "delta-sweep", "sgd-convergence", "calibrate-c")
OUTPUT_FORMATS = ("csv", "json", "plotdata")

TOP_LEVEL_KEYS = {"experiment", "envs", "noise", "policies", "trials", "budget", "seed", "workers",
                  "targets", "scale", "sweep", "convergence", "calibration", "output"}
NOISE_KEYS = {"kind", "scale", "shape", "weights", "tail_alpha", "tail_sigma"}
ENV_KEYS = {"name", "means"}
POLICY_KEYS = {"name", "label", "p", "smom", "delta_rule", "delta", "schedule", "rucb", "ucb_v"}
SMOM_KEYS = {"m", "n", "theta"}
SCHEDULE_KEYS = {"R", "L", "C", "lr_mode"}
RUCB_KEYS = {"alpha", "v", "c"}
SWEEP_KEYS = {"kind", "grid"}
CONVERGENCE_KEYS = {"horizon", "delta", "R", "L", "C", "lr_mode", "mu", "x0", "seeds", "fit_from", "m", "n"}
CALIBRATION_KEYS = {"horizon", "delta", "R", "L", "lr_mode", "mu", "x0", "seeds", "m", "n"}
OUTPUT_KEYS = {"dir", "formats", "max_points"}


@dataclass
class ValidationResult:
    """Result of config validation. Errors carry the key path of the offending entry."""
    is_valid: bool
    errors: List[BanditError]
    warnings: List[str] = field(default_factory=list)

    def raise_first(self):
        if self.errors:
            raise self.errors[0]


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


class ConfigValidator:
    """Validates a raw config mapping against the run-config schema."""

    def validate(self, data: Any) -> ValidationResult:
        self.errors: List[ConfigError] = []
        self.warnings: List[str] = []

        if not isinstance(data, dict):
            self._error(None, "config must be a mapping at the top level")
            return self._result()

        self._check_keys(data, TOP_LEVEL_KEYS, "")
        experiment = data.get("experiment", "curves")
        if experiment not in EXPERIMENT_KINDS:
            self._error("experiment", f"must be one of {list(EXPERIMENT_KINDS)}, got {experiment!r}")

        for key in ("trials", "budget", "workers"):
            if key in data:
                self._positive_int(data[key], key)
        if "seed" in data and not (_is_int(data["seed"]) and data["seed"] >= 0):
            self._error("seed", f"must be a nonnegative integer, got {data['seed']!r}")
        if "scale" in data and not (_is_number(data["scale"]) and data["scale"] > 0):
            self._error("scale", f"must be a positive number, got {data['scale']!r}")
        if "targets" in data:
            self._targets(data["targets"])

        if "noise" in data:
            self._noise(data["noise"])
        if "envs" in data:
            self._envs(data["envs"])
        if "policies" in data:
            self._policies(data["policies"])
        elif experiment in ("curves", "bench", "delta-sweep"):
            self._error("policies", f"a {experiment} experiment needs at least one policy")
        if "sweep" in data:
            self._sweep(data["sweep"])
        if "convergence" in data:
            self._optimizer_section(data["convergence"], "convergence", CONVERGENCE_KEYS)
        if "calibration" in data:
            self._optimizer_section(data["calibration"], "calibration", CALIBRATION_KEYS)
        if "output" in data:
            self._output(data["output"])

        workers = data.get("workers", 1)
        if _is_int(workers) and workers > (os.cpu_count() or 1):
            self.warnings.append(f"workers={workers} exceeds the {os.cpu_count()} available CPUs")
        return self._result()

    def _result(self) -> ValidationResult:
        return ValidationResult(is_valid=not self.errors, errors=self.errors, warnings=self.warnings)

    def _error(self, key: Optional[str], message: str):
        self.errors.append(ConfigError(key, message))

    def _path(self, prefix: str, key: str) -> str:
        return f"{prefix}.{key}" if prefix else key

    def _check_keys(self, mapping: Dict, allowed: set, prefix: str):
        for key in mapping:
            if key not in allowed:
                self._error(self._path(prefix, str(key)), "unknown key")

    def _mapping(self, value: Any, key: str) -> bool:
        if not isinstance(value, dict):
            self._error(key, f"must be a mapping, got {type(value).__name__}")
            return False
        return True

    def _positive_int(self, value: Any, key: str):
        if not (_is_int(value) and value >= 1):
            self._error(key, f"must be a positive integer, got {value!r}")

    def _number(self, value: Any, key: str, check: Callable[[float], bool], requirement: str):
        if not (_is_number(value) and check(value)):
            self._error(key, f"must be {requirement}, got {value!r}")

    def _targets(self, targets: Any):
        if not isinstance(targets, list) or not targets:
            self._error("targets", "must be a nonempty list of positive numbers")
            return
        for i, target in enumerate(targets):
            self._number(target, f"targets[{i}]", lambda v: v > 0, "a positive number")

    def _noise(self, noise: Any):
        if not self._mapping(noise, "noise"):
            return
        self._check_keys(noise, NOISE_KEYS, "noise")
        kinds = [k.value for k in NoiseKind]
        if "kind" in noise and noise["kind"] not in kinds:
            self._error("noise.kind", f"must be one of {kinds}, got {noise['kind']!r}")
        for key in ("scale", "shape", "tail_alpha", "tail_sigma"):
            if key in noise and noise[key] is not None:
                self._number(noise[key], f"noise.{key}", lambda v: v > 0, "a positive number")
        if "weights" in noise:
            weights = noise["weights"]
            if (not isinstance(weights, list) or len(weights) != 2 or not all(_is_number(w) and w >= 0 for w in weights)
                    or not math.isclose(sum(weights), 1.0)):
                self._error("noise.weights", f"must be two nonnegative numbers summing to 1, got {weights!r}")

    def _envs(self, envs: Any):
        if isinstance(envs, str):
            envs = [envs]
        if not isinstance(envs, list) or not envs:
            self._error("envs", "must be a nonempty list of environments")
            return
        names = []
        for i, env in enumerate(envs):
            key = f"envs[{i}]"
            if isinstance(env, str):
                if env not in BUILTIN_ENVS:
                    self._error(key, f"unknown environment {env!r}; expected one of {list(BUILTIN_ENVS)}")
                names.append(env)
                continue
            if not self._mapping(env, key):
                continue
            self._check_keys(env, ENV_KEYS, key)
            name = env.get("name")
            if not isinstance(name, str) or not name:
                self._error(f"{key}.name", "must be a nonempty string")
            names.append(name)
            if "means" in env:
                means = env["means"]
                if not isinstance(means, list) or len(means) < 2 or not all(_is_number(m) for m in means):
                    self._error(f"{key}.means", "must be a list of at least 2 finite numbers")
            elif name not in BUILTIN_ENVS:
                self._error(key, f"unknown environment {name!r} and no means given")
        duplicates = sorted({n for n in names if isinstance(n, str) and names.count(n) > 1})
        if duplicates:
            self._error("envs", f"duplicate environment names {duplicates}")

    def _policies(self, policies: Any):
        if not isinstance(policies, list) or not policies:
            self._error("policies", "must be a nonempty list of policies")
            return
        lookup = {name.lower() for name in NAMED_VARIANTS}
        labels = []
        for i, entry in enumerate(policies):
            key = f"policies[{i}]"
            if isinstance(entry, str):
                entry = {"name": entry}
            if not self._mapping(entry, key):
                continue
            self._check_keys(entry, POLICY_KEYS, key)
            name = entry.get("name")
            if not isinstance(name, str) or name.strip().lower() not in lookup:
                self._error(f"{key}.name", f"unknown policy {name!r}; expected one of {sorted(NAMED_VARIANTS)}")
                continue
            label = entry.get("label") or name
            if not isinstance(label, str):
                self._error(f"{key}.label", "must be a string")
            elif label.lower() in [known.lower() for known in labels]:
                self._error(f"{key}.label" if "label" in entry else f"{key}.name",
                            f"duplicate policy name {label!r}; give each entry a unique label")
            labels.append(str(label))
            self._policy_params(entry, key)

    def _policy_params(self, entry: Dict, key: str):
        if "p" in entry and entry["p"] is not None:
            p = entry["p"]
            if not (_is_int(p) and p >= 1 and p % 2 == 1):
                self._error(f"{key}.p", f"must be a positive odd integer, got {p!r}")
        rule = entry.get("delta_rule")
        rules = [r.value for r in DeltaRule]
        if rule is not None and rule not in rules:
            self._error(f"{key}.delta_rule", f"must be one of {rules}, got {rule!r}")
        if entry.get("delta") is not None:
            self._number(entry["delta"], f"{key}.delta", lambda v: 0 < v <= 1, "in (0, 1]")
        elif rule == DeltaRule.FIXED.value:
            self._error(f"{key}.delta", "a fixed delta rule needs a delta value")
        if "ucb_v" in entry:
            self._number(entry["ucb_v"], f"{key}.ucb_v", lambda v: v > 0, "a positive number")

        smom = entry.get("smom")
        if smom is not None and self._mapping(smom, f"{key}.smom"):
            self._check_keys(smom, SMOM_KEYS, f"{key}.smom")
            if "m" in smom and not (_is_int(smom["m"]) and smom["m"] >= 0):
                self._error(f"{key}.smom.m", f"must be a nonnegative integer, got {smom['m']!r}")
            if "n" in smom:
                self._positive_int(smom["n"], f"{key}.smom.n")
            if "theta" in smom:
                self._number(smom["theta"], f"{key}.smom.theta", lambda v: v >= 0, "a nonnegative number")
        schedule = entry.get("schedule")
        if schedule is not None and self._mapping(schedule, f"{key}.schedule"):
            self._check_keys(schedule, SCHEDULE_KEYS, f"{key}.schedule")
            self._schedule_values(schedule, f"{key}.schedule")
        rucb = entry.get("rucb")
        if rucb is not None and self._mapping(rucb, f"{key}.rucb"):
            self._check_keys(rucb, RUCB_KEYS, f"{key}.rucb")
            if "alpha" in rucb:
                self._number(rucb["alpha"], f"{key}.rucb.alpha", lambda v: 0 < v <= 1, "in (0, 1]")
            for name in ("v", "c"):
                if name in rucb:
                    self._number(rucb[name], f"{key}.rucb.{name}", lambda v: v > 0, "a positive number")

    def _schedule_values(self, section: Dict, prefix: str):
        for name in ("R", "L"):
            if name in section:
                self._number(section[name], f"{prefix}.{name}", lambda v: v > 0, "a positive number")
        if "C" in section:
            self._number(section["C"], f"{prefix}.C", lambda v: v >= 0, "a nonnegative number")
        if "lr_mode" in section and section["lr_mode"] not in LR_MODES:
            self._error(f"{prefix}.lr_mode", f"must be one of {list(LR_MODES)}, got {section['lr_mode']!r}")

    def _sweep(self, sweep: Any):
        if not self._mapping(sweep, "sweep"):
            return
        self._check_keys(sweep, SWEEP_KEYS, "sweep")
        kinds = [k.value for k in SweepKind]
        if "kind" in sweep and sweep["kind"] not in kinds:
            self._error("sweep.kind", f"must be one of {kinds}, got {sweep['kind']!r}")
        grid = sweep.get("grid")
        if grid is not None:
            if not isinstance(grid, list) or not grid:
                self._error("sweep.grid", "must be a nonempty list of gaps")
            elif not all(_is_number(g) and g >= 0 for g in grid):
                self._error("sweep.grid", "gaps must be nonnegative numbers")
            elif _has_duplicates(grid):
                self._error("sweep.grid", "gaps must be distinct")

    def _optimizer_section(self, section: Any, prefix: str, allowed: set):
        if not self._mapping(section, prefix):
            return
        self._check_keys(section, allowed, prefix)
        for name in ("horizon", "seeds", "n"):
            if name in section:
                self._positive_int(section[name], f"{prefix}.{name}")
        if "fit_from" in section:
            self._positive_int(section["fit_from"], f"{prefix}.fit_from")
        if "m" in section and not (_is_int(section["m"]) and section["m"] >= 0):
            self._error(f"{prefix}.m", f"must be a nonnegative integer, got {section['m']!r}")
        if "delta" in section:
            self._number(section["delta"], f"{prefix}.delta", lambda v: 0 < v <= 1, "in (0, 1]")
        if "mu" in section:
            self._number(section["mu"], f"{prefix}.mu", lambda v: True, "a finite number")
        if section.get("x0") is not None:
            self._number(section["x0"], f"{prefix}.x0", lambda v: True, "a finite number")
        self._schedule_values(section, prefix)

    def _output(self, output: Any):
        if not self._mapping(output, "output"):
            return
        self._check_keys(output, OUTPUT_KEYS, "output")
        if "dir" in output and (not isinstance(output["dir"], str) or not output["dir"]):
            self._error("output.dir", "must be a nonempty path")
        if "formats" in output:
            formats = output["formats"]
            if not isinstance(formats, list) or not formats or any(f not in OUTPUT_FORMATS for f in formats):
                self._error("output.formats", f"must be a nonempty subset of {list(OUTPUT_FORMATS)}, got {formats!r}")
        if "max_points" in output:
            self._positive_int(output["max_points"], "output.max_points")


def _has_duplicates(values: Sequence[float]) -> bool:
    return len(set(values)) != len(values)
