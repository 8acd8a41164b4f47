"""Small numeric helpers shared by the harness and the reports."""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np


def checkpoint_grid(budget: int, max_points: int = 2000) -> np.ndarray:
    """Up to `max_points` pull indices in [1, budget], always including budget."""
    if budget <= max_points:
        return np.arange(1, budget + 1)
    if max_points < 2:
        return np.array([budget], dtype=np.int64)
    grid = np.unique(np.round(np.linspace(1, budget, max_points)).astype(np.int64))
    return grid


def percentiles(values: Sequence[float], levels: Iterable[float] = (50, 90)) -> Dict[str, Optional[float]]:
    """Linear-interpolation percentiles keyed 'p50', 'p90', ...; None for an empty sample."""
    values = list(values)
    out: Dict[str, Optional[float]] = {}
    for level in levels:
        key = f"p{level:g}"
        out[key] = float(np.percentile(values, level)) if values else None
    return out


def mean_and_std(rows: List[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Pointwise mean and population standard deviation of equally long rows."""
    stacked = np.vstack(rows)
    return stacked.mean(axis=0), stacked.std(axis=0)


def growth_exponent(horizons: Sequence[float], values: Sequence[float]) -> float:
    """Fitted exponent a in values ~ horizons^a (least squares in log-log)."""
    slope, _ = np.polyfit(np.log(np.asarray(horizons, dtype=float)), np.log(np.asarray(values, dtype=float)), 1)
    return float(slope)
