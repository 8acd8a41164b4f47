"""Console summaries of experiment results."""

from typing import Dict, Iterable, Optional

from rich.panel import Panel
from rich.table import Table


def _fmt(value: Optional[float], spec: str = ".4g") -> str:
    return "-" if value is None else format(value, spec)


def display_experiment(console, report):
    """Final regret of every policy on one environment."""
    table = Table(title=f"{report.env.name} ({report.env.noise.label}), {report.trials} trials x {report.budget} pulls")
    table.add_column("Policy", style="bold")
    table.add_column("R_T mean", justify="right")
    table.add_column("R_T std", justify="right")
    table.add_column("R_T/T", justify="right")
    for target in report.targets:
        table.add_column(f"fails @ {target:g}", justify="right")
    table.add_column("p50 wall (s)", justify="right")

    for agg in report.aggregates:
        row = [agg.label, _fmt(agg.final_mean), _fmt(agg.final_std), _fmt(agg.final_mean / report.budget)]
        row.extend(str(agg.fails[target]) for target in report.targets)
        row.append(_fmt(agg.wall_time["p50"], ".3f"))
        table.add_row(*row)
    console.print(table)


def display_benchmark(console, result):
    """Fail counts and p90 time/pulls to each target."""
    report = result.report
    table = Table(title=f"Runtime to target on {report.env.name}, {report.trials} trials, budget {report.budget}")
    table.add_column("Policy", style="bold")
    table.add_column("R_T/T target", justify="right")
    table.add_column("p90 time (s)", justify="right")
    table.add_column("p90 pulls", justify="right")
    table.add_column("# fails", justify="right")
    for row in result.rows:
        fails_style = "red" if row.fails == row.trials else ""
        fails = f"[{fails_style}]{row.fails}[/{fails_style}]" if fails_style else str(row.fails)
        table.add_row(row.policy, f"{row.target:g}", _fmt(row.time_p90, ".3f"), _fmt(row.pulls_p90, ".0f"), fails)
    console.print(table)


def display_sweep(console, result, max_rows: int = 30):
    table = Table(title=f"Mean final regret vs gap ({result.kind.value}, {result.trials} trials x {result.budget} pulls)")
    table.add_column("gap", justify="right", style="bold")
    labels = list(result.final_mean)
    for label in labels:
        table.add_column(label, justify="right")
    for i, gap in enumerate(result.grid[:max_rows]):
        table.add_row(f"{gap:g}", *(_fmt(result.final_mean[label][i]) for label in labels))
    console.print(table)


def display_convergence(console, result):
    lines = [f"[bold]Fitted slope (k >= {result.fit_from}):[/bold] {_fmt(result.slope)}",
             f"[bold]Seeds:[/bold] {result.per_seed.shape[0]}"]
    for k, value in zip(result.checkpoints, result.median):
        lines.append(f"  k={k:>8d}  median f(x)-f* = {value:.4e}")
    console.print(Panel("\n".join(lines), title="Clipped-SGD convergence", border_style="blue"))


def display_calibration(console, result, delta: float):
    lines = [f"[bold]C:[/bold] {result.C:.6g}",
             f"[bold]Coverage:[/bold] {result.coverage:.1%} of {len(result.per_seed)} seeds (target {1 - delta:.1%})",
             f"[bold]Checkpoints:[/bold] {', '.join(str(k) for k in result.checkpoints)}"]
    console.print(Panel("\n".join(lines), title="Calibrated bounding constant", border_style="blue"))


def display_presets(console, presets: Dict):
    table = Table(title="Presets")
    table.add_column("Name", style="bold")
    table.add_column("Kind")
    table.add_column("Trials", justify="right")
    table.add_column("Budget", justify="right")
    table.add_column("Description")
    for name, entry in presets.items():
        config = entry.build()
        table.add_row(name, config.experiment, str(config.trials), str(config.budget), entry.description)
    console.print(table)


def display_written(console, paths: Iterable[str]):
    paths = list(paths)
    if paths:
        console.print("\n[bold]Output files:[/bold]")
        for path in paths:
            console.print(f"  • {path}")
