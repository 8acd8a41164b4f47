"""
Result files: regret curves and plot data as CSV, the deterministic report.json and the
wall-clock timings.json.

Numbers are written with a fixed format and JSON keys are sorted, so identical results
give identical bytes.
"""

import csv
import json
import os
import re
from typing import Any, Dict, Iterator, List, Optional, Sequence

import numpy as np

from ..clipped_sgd import CalibrationResult, Schedule
from ..config_validator import ValidationResult
from ..distributions import NoiseModel
from ..errors import OutputError, ReportError
from ..harness import BenchmarkRow, ConvergenceResult, DeltaSweepResult, ExperimentReport
from ..logger import get_logger

logger = get_logger()

SCHEMA_VERSION = 1
CURVE_COLUMNS = ["policy", "trial", "pull", "cum_regret", "mean_regret"]
PLOTDATA_COLUMNS = ["policy", "pull", "mean", "lower", "upper"]
SWEEP_COLUMNS = ["policy", "delta", "mean_final_regret", "std_final_regret"]
CONVERGENCE_COLUMNS = ["k", "median_suboptimality"]

_NUMBER = (int, float)
_OPTIONAL_NUMBER = (int, float, type(None))

_CURVE_BLOCK = {"env": dict, "budget": int, "trials": int, "seeds": list, "targets": list,
                "checkpoints": int, "policies": list}
_CURVE_POLICY = {"label": str, "config": dict, "final_mean": _NUMBER, "final_std": _NUMBER,
                 "realized_regret_mean": _NUMBER, "overruns": int, "fails": dict, "pulls_to_target": dict}

REPORT_SCHEMA: Dict[str, Any] = {
    "top": {"schema_version": int, "experiment": str, "config": dict, "results": list},
    "blocks": {
        "curves": _CURVE_BLOCK,
        "bench": dict(_CURVE_BLOCK, rows=list),
        "delta-sweep": {"kind": str, "grid": list, "budget": int, "trials": int, "seeds": list, "policies": list},
        "sgd-convergence": {"noise": dict, "schedule": dict, "seeds": list, "checkpoints": list, "median": list,
                            "slope": _OPTIONAL_NUMBER, "fit_from": int},
        "calibrate-c": {"noise": dict, "schedule": dict, "seeds": list, "C": _NUMBER, "coverage": _NUMBER,
                        "per_seed": list, "checkpoints": list},
    },
    "policies": {
        "curves": _CURVE_POLICY,
        "bench": _CURVE_POLICY,
        "delta-sweep": {"label": str, "final_mean": list, "final_std": list},
    },
    "bench_row": {"policy": str, "target": _NUMBER, "trials": int, "fails": int,
                  "pulls_p50": _OPTIONAL_NUMBER, "pulls_p90": _OPTIONAL_NUMBER},
}


def format_number(value: Any) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.10g}"


def target_key(target: float) -> str:
    return f"{float(target):g}"


def file_slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("_") or "env"


def _plain(value: Any) -> Any:
    """numpy scalars and arrays to plain Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def curve_rows(report: Optional[ExperimentReport]) -> Iterator[List[str]]:
    """Per-trial cumulative and mean regret at the shared checkpoints."""
    if report is None:
        return
    for agg in report.aggregates:
        for summary in report.summaries.get(agg.label, []):
            for pull, regret in zip(summary.checkpoints, summary.regret):
                yield [agg.label, str(summary.trial), format_number(pull), format_number(regret),
                       format_number(regret / pull)]


def plotdata_rows(report: Optional[ExperimentReport]) -> Iterator[List[str]]:
    """Mean curve with a one-standard-deviation band."""
    if report is None:
        return
    for agg in report.aggregates:
        for pull, mean, std in zip(report.checkpoints, agg.mean, agg.std):
            yield [agg.label, format_number(pull), format_number(mean), format_number(mean - std),
                   format_number(mean + std)]


def write_csv(path: str, columns: Sequence[str], rows) -> str:
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            writer.writerows(rows)
    except OSError as e:
        raise OutputError(f"could not write {path}: {e}")
    logger.info(f"Saved {path}")
    return path


def write_curves_csv(path: str, report: Optional[ExperimentReport]) -> str:
    return write_csv(path, CURVE_COLUMNS, curve_rows(report))


def write_plotdata_csv(path: str, report: Optional[ExperimentReport]) -> str:
    return write_csv(path, PLOTDATA_COLUMNS, plotdata_rows(report))


def write_sweep_csv(path: str, result: DeltaSweepResult) -> str:
    rows = ([label, format_number(gap), format_number(mean), format_number(std)]
            for label, means in result.final_mean.items()
            for gap, mean, std in zip(result.grid, means, result.final_std[label]))
    return write_csv(path, SWEEP_COLUMNS, rows)


def write_convergence_csv(path: str, result: ConvergenceResult) -> str:
    rows = ([format_number(k), format_number(v)] for k, v in zip(result.checkpoints, result.median))
    return write_csv(path, CONVERGENCE_COLUMNS, rows)


def experiment_block(report: ExperimentReport, rows: Optional[List[BenchmarkRow]] = None) -> Dict[str, Any]:
    """Deterministic summary of one experiment; wall-clock values are left out."""
    policies = []
    for agg in report.aggregates:
        policies.append({
            "label": agg.label,
            "config": agg.config,
            "final_mean": agg.final_mean,
            "final_std": agg.final_std,
            "realized_regret_mean": agg.realized_regret_mean,
            "overruns": agg.overruns,
            "fails": {target_key(t): n for t, n in agg.fails.items()},
            "pulls_to_target": {target_key(t): p for t, p in agg.pulls_to_target.items()},
        })
    block: Dict[str, Any] = {
        "env": report.env.to_dict(),
        "budget": report.budget,
        "trials": report.trials,
        "seeds": report.seeds,
        "targets": report.targets,
        "checkpoints": len(report.checkpoints),
        "policies": policies,
    }
    if rows is not None:
        block["rows"] = [{"policy": r.policy, "target": r.target, "trials": r.trials, "fails": r.fails,
                          "pulls_p50": r.pulls_p50, "pulls_p90": r.pulls_p90} for r in rows]
    return _plain(block)


def timings_block(report: ExperimentReport) -> Dict[str, Any]:
    return _plain({
        "env": report.env.name,
        "policies": [{
            "label": agg.label,
            "wall_time": agg.wall_time,
            "time_to_target": {target_key(t): p for t, p in agg.time_to_target.items()},
        } for agg in report.aggregates],
    })


def sweep_block(result: DeltaSweepResult) -> Dict[str, Any]:
    return _plain({
        "kind": result.kind.value,
        "grid": result.grid,
        "budget": result.budget,
        "trials": result.trials,
        "seeds": [result.base_seed + i for i in range(result.trials)],
        "policies": [{"label": label, "final_mean": means, "final_std": result.final_std[label]}
                     for label, means in result.final_mean.items()],
    })


def _schedule_dict(schedule: Schedule) -> Dict[str, Any]:
    return {"horizon": schedule.horizon, "delta": schedule.delta, "R": schedule.R, "L": schedule.L,
            "C": schedule.C, "lr_mode": schedule.lr_mode, "gamma": schedule.gamma}


def convergence_block(result: ConvergenceResult, noise: NoiseModel, schedule: Schedule,
                      seeds: Sequence[int]) -> Dict[str, Any]:
    return _plain({
        "noise": noise.to_dict(),
        "schedule": _schedule_dict(schedule),
        "seeds": list(seeds),
        "checkpoints": result.checkpoints,
        "median": result.median,
        "slope": result.slope,
        "fit_from": result.fit_from,
    })


def calibration_block(result: CalibrationResult, noise: NoiseModel, schedule: Schedule,
                      seeds: Sequence[int]) -> Dict[str, Any]:
    return _plain({
        "noise": noise.to_dict(),
        "schedule": _schedule_dict(schedule),
        "seeds": list(seeds),
        "C": result.C,
        "coverage": result.coverage,
        "per_seed": result.per_seed,
        "checkpoints": result.checkpoints,
    })


def build_report(experiment: str, config: Dict[str, Any], blocks: List[Dict[str, Any]]) -> Dict[str, Any]:
    return {"schema_version": SCHEMA_VERSION, "experiment": experiment, "config": _plain(config),
            "results": blocks}


def _type_ok(value: Any, expected) -> bool:
    if isinstance(value, bool):
        return expected is bool
    return isinstance(value, expected)


def _check_fields(data: Any, fields: Dict[str, Any], prefix: str, errors: List[ReportError]):
    if not isinstance(data, dict):
        errors.append(ReportError(prefix or None, "must be an object"))
        return
    for key, expected in fields.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in data:
            errors.append(ReportError(path, "missing"))
        elif not _type_ok(data[key], expected):
            errors.append(ReportError(path, f"has type {type(data[key]).__name__}"))


def validate_report(data: Any) -> ValidationResult:
    """Check a report mapping against REPORT_SCHEMA."""
    errors: List[ReportError] = []
    _check_fields(data, REPORT_SCHEMA["top"], "", errors)
    if errors:
        return ValidationResult(is_valid=False, errors=errors)
    experiment = data["experiment"]
    block_fields = REPORT_SCHEMA["blocks"].get(experiment)
    if block_fields is None:
        errors.append(ReportError("experiment", f"unknown experiment kind {experiment!r}"))
        return ValidationResult(is_valid=False, errors=errors)
    for i, block in enumerate(data["results"]):
        prefix = f"results[{i}]"
        _check_fields(block, block_fields, prefix, errors)
        if not isinstance(block, dict):
            continue
        policy_fields = REPORT_SCHEMA["policies"].get(experiment)
        if policy_fields and isinstance(block.get("policies"), list):
            for j, policy in enumerate(block["policies"]):
                _check_fields(policy, policy_fields, f"{prefix}.policies[{j}]", errors)
        if experiment == "bench" and isinstance(block.get("rows"), list):
            for j, row in enumerate(block["rows"]):
                _check_fields(row, REPORT_SCHEMA["bench_row"], f"{prefix}.rows[{j}]", errors)
    return ValidationResult(is_valid=not errors, errors=errors)


def dumps(data: Dict[str, Any]) -> str:
    return json.dumps(_plain(data), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: str, data: Dict[str, Any]) -> str:
    try:
        with open(path, "w") as f:
            f.write(dumps(data))
    except OSError as e:
        raise OutputError(f"could not write {path}: {e}")
    logger.info(f"Saved {path}")
    return path


class ReportWriter:
    """Collects the results of one run and writes the requested formats to `out_dir`.

    The directory is created on the first write.
    """

    def __init__(self, out_dir: str, formats: Sequence[str]):
        self.out_dir = out_dir
        self.formats = list(formats)
        self.blocks: List[Dict[str, Any]] = []
        self.timings: List[Dict[str, Any]] = []
        self.written: List[str] = []

    def _path(self, name: str) -> str:
        try:
            os.makedirs(self.out_dir, exist_ok=True)
        except OSError as e:
            raise OutputError(f"could not create output directory {self.out_dir}: {e}")
        return os.path.join(self.out_dir, name)

    def add_experiment(self, report: ExperimentReport, rows: Optional[List[BenchmarkRow]] = None):
        slug = file_slug(report.env.name)
        if "csv" in self.formats:
            self.written.append(write_curves_csv(self._path(f"curves_{slug}.csv"), report))
        if "plotdata" in self.formats:
            self.written.append(write_plotdata_csv(self._path(f"plotdata_{slug}.csv"), report))
        self.blocks.append(experiment_block(report, rows))
        self.timings.append(timings_block(report))

    def add_sweep(self, result: DeltaSweepResult):
        if "csv" in self.formats or "plotdata" in self.formats:
            self.written.append(write_sweep_csv(self._path(f"sweep_{result.kind.value}.csv"), result))
        self.blocks.append(sweep_block(result))

    def add_convergence(self, result: ConvergenceResult, noise: NoiseModel, schedule: Schedule,
                        seeds: Sequence[int]):
        if "csv" in self.formats or "plotdata" in self.formats:
            self.written.append(write_convergence_csv(self._path("convergence.csv"), result))
        self.blocks.append(convergence_block(result, noise, schedule, seeds))

    def add_calibration(self, result: CalibrationResult, noise: NoiseModel, schedule: Schedule,
                        seeds: Sequence[int]):
        self.blocks.append(calibration_block(result, noise, schedule, seeds))

    def finalize(self, experiment: str, config: Dict[str, Any]) -> List[str]:
        """Validate and write report.json and timings.json when JSON output is requested."""
        if "json" not in self.formats:
            return self.written
        report = build_report(experiment, config, self.blocks)
        validate_report(report).raise_first()
        self.written.append(write_json(self._path("report.json"), report))
        if self.timings:
            self.written.append(write_json(self._path("timings.json"), {"results": self.timings}))
        return self.written
