"""Evaluation quantities computed from trajectories and trial batches."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrajectoryRecord:
    """Per-step snapshot of the whole network.

    Taken at the end of each simulated step: node mass/token arrays, the
    vote pair, estimates and flags, plus totals over messages still in
    flight so the conservation ledger can be audited offline.
    """

    step: int
    y: np.ndarray
    z: np.ndarray
    estimate: np.ndarray
    vote_max: np.ndarray
    vote_min: np.ndarray
    flag: np.ndarray
    inflight_y: int = 0
    inflight_z: int = 0
    inflight_count: int = 0

    def mass_totals(self) -> tuple[int, int]:
        """(total y, total z) over nodes and in-flight messages."""
        return (
            int(self.y.sum()) + self.inflight_y,
            int(self.z.sum()) + self.inflight_z,
        )


@dataclass(frozen=True)
class ErrorSeries:
    """Normalized error curve; degenerate marks an already-optimal start."""

    values: np.ndarray
    degenerate: bool


def normalized_error(
    trajectory: Sequence[TrajectoryRecord],
    x_star: float,
    mode: str = "reciprocal",
) -> ErrorSeries:
    """Normalized distance-to-optimum series over a recorded trajectory.

    Per step k the node states are q_j[k] = y_j[k] / z_j[k].  In
    "reciprocal" mode the error compares 1/q_j[k] against x_star (the
    natural reading under the task-scheduling mapping, where the state
    approximates the reciprocal of the balanced utilization); "direct"
    mode compares q_j[k] itself.  The series is normalized by its k=0
    value, so e[0] = 1 whenever the start is not already optimal.
    """
    if mode not in ("reciprocal", "direct"):
        raise ValueError(f"mode must be 'reciprocal' or 'direct', got {mode!r}")
    if len(trajectory) == 0:
        raise ValueError("trajectory is empty")
    target = float(x_star)
    sums = np.empty(len(trajectory), dtype=np.float64)
    for i, rec in enumerate(trajectory):
        states = rec.y.astype(np.float64) / rec.z.astype(np.float64)
        if mode == "reciprocal":
            with np.errstate(divide="ignore"):
                states = 1.0 / states
        sums[i] = np.sum((states - target) ** 2)
    if sums[0] == 0.0:
        logger.warning("normalized_error: start is already optimal, returning zeros")
        return ErrorSeries(values=np.zeros(len(trajectory)), degenerate=True)
    return ErrorSeries(values=np.sqrt(sums / sums[0]), degenerate=False)


@dataclass(frozen=True)
class TrialStats:
    """Summary statistics over identically configured trials.

    Non-converged trials enter convergence_steps censored at their step
    cap and are flagged in `censored`, never silently dropped.
    """

    trials: int
    convergence_steps: tuple[int, ...]
    censored: tuple[bool, ...]
    converged_count: int
    mean: float
    std: float
    min: int
    max: int
    fraction_within_bound: Optional[float] = None


def trial_stats(outcomes: Sequence, bound: Optional[int] = None) -> TrialStats:
    """Aggregate RunOutcome objects from repeated trials.

    `bound` adds the empirical fraction of trials that converged within
    that many steps (the one-sided completion-bound check); censored
    trials count as outside the bound.
    """
    if len(outcomes) == 0:
        raise ValueError("trial_stats needs at least one outcome")
    steps: list[int] = []
    censored: list[bool] = []
    within = 0
    for out in outcomes:
        if out.converged:
            steps.append(out.termination_step)
            censored.append(False)
            if bound is not None and out.termination_step <= bound:
                within += 1
        else:
            steps.append(out.steps_run)
            censored.append(True)
    arr = np.asarray(steps, dtype=np.float64)
    return TrialStats(
        trials=len(outcomes),
        convergence_steps=tuple(steps),
        censored=tuple(censored),
        converged_count=sum(1 for c in censored if not c),
        mean=float(arr.mean()),
        std=float(arr.std()),
        min=int(arr.min()),
        max=int(arr.max()),
        fraction_within_bound=None if bound is None else within / len(outcomes),
    )
