"""Local iterative heuristic for the diagonal scaling bound.

Every node simultaneously moves its weight toward the square-root ratio of
its largest incoming and outgoing scaled entries, interpolated by a step
parameter. The synchronous update suits distributed evaluation but can
oscillate with a full step; the trace records enough to diagnose that.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .magnitude import as_array
from .nubar import nubar_exact


@dataclass(frozen=True)
class BalanceStep:
    t: int
    d: np.ndarray
    objective: float
    rel_change: float


@dataclass(frozen=True)
class BalanceTrace:
    iterations: list[BalanceStep]
    converged: bool
    oscillating: bool
    final: np.ndarray

    @property
    def updates(self) -> int:
        return len(self.iterations) - 1

    @property
    def objective(self) -> float:
        return self.iterations[-1].objective

    def iterations_to(self, tol: float) -> int | None:
        """Number of updates until the objective's relative change first
        drops to ``tol``; None if it never does."""
        for step in self.iterations[1:]:
            if step.rel_change <= tol:
                return step.t - 1
        return None


def _objective(a: np.ndarray, d: np.ndarray) -> float:
    return float((a * d[:, None] / d[None, :]).max())


def heuristic_balance(
    M,
    theta: float = 0.5,
    max_iter: int = 1000,
    tol: float = 1e-3,
    asynchronous: bool = False,
) -> BalanceTrace:
    """Run the balancing iteration from the all-ones scaling.

    The update for node k interpolates between the current weight and
    sqrt(max incoming scaled entry) / sqrt(max outgoing entry-over-weight),
    skipping the diagonal on both sides; a node with an empty side keeps its
    weight. Stops once the objective's relative change and the weights
    themselves settle below ``tol``, or at ``max_iter`` updates. A period-2
    orbit of the weights is flagged as oscillating and never reported as
    converged.
    """
    if not (0.0 < theta <= 1.0):
        raise ValidationError(f"theta must lie in (0, 1], got {theta!r}")
    if not tol > 0:
        raise ValidationError(f"tolerance must be positive, got {tol!r}")
    if max_iter < 1:
        raise ValidationError(f"max_iter must be at least 1, got {max_iter!r}")
    a = as_array(M)
    n = a.shape[0]
    a0 = a.copy()
    np.fill_diagonal(a0, 0.0)

    d = np.ones(n)
    steps = [BalanceStep(1, d.copy(), _objective(a, d), float("inf"))]
    converged = False
    oscillating = False
    for t in range(2, max_iter + 2):
        prev = steps[-1]
        if asynchronous:
            dn = d.copy()
            for k in range(n):
                num = float((a0[:, k] * dn).max())
                den = float((a0[k, :] / dn).max())
                ratio = np.sqrt(num) / np.sqrt(den) if num > 0 and den > 0 else dn[k]
                dn[k] = (1.0 - theta) * dn[k] + theta * ratio
        else:
            num = (a0 * d[:, None]).max(axis=0)
            den = (a0 / d[None, :]).max(axis=1)
            ok = (num > 0) & (den > 0)
            ratio = np.where(ok, np.sqrt(np.where(ok, num, 1.0)) / np.sqrt(np.where(ok, den, 1.0)), d)
            dn = (1.0 - theta) * d + theta * ratio
        obj = _objective(a, dn)
        rel = abs(obj - prev.objective) / max(prev.objective, 1e-300)
        steps.append(BalanceStep(t, dn.copy(), obj, rel))
        if len(steps) >= 3:
            back2 = steps[-3].d
            close2 = np.abs(dn - back2).max() <= 1e-9 * max(back2.max(), 1e-300)
            close1 = np.abs(dn - d).max() <= 1e-9 * max(d.max(), 1e-300)
            if close2 and not close1:
                oscillating = True
        d_settled = np.abs(dn - d).max() <= tol * max(d.max(), 1e-300)
        d = dn
        if rel <= tol and d_settled and not oscillating:
            converged = True
            break
    return BalanceTrace(steps, converged, oscillating, d)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    rel_changes: np.ndarray
    final_objective: float
    optimum: float
    converged: bool

    def iterations_to(self, tol: float) -> int | None:
        hits = np.nonzero(self.rel_changes <= tol)[0]
        return int(hits[0]) + 1 if hits.size else None


@dataclass(frozen=True)
class StudyRow:
    n: int
    theta: float
    tol: float
    max_iters: int
    median_iters: int
    failures: int


def trial_matrix(n: int, seed: int, trial: int, dist: str = "uniform", density: float = 0.25) -> np.ndarray:
    """Reproducible random nonnegative test matrix for convergence studies."""
    rng = np.random.default_rng(seed + trial)
    m = rng.random((n, n))
    if dist == "uniform":
        return m
    if dist == "sparse":
        mask = rng.random((n, n)) < density
        return m * mask
    raise ValidationError(f"unknown matrix distribution {dist!r}")


def run_trials(
    n: int,
    trials: int,
    theta: float,
    stop_tol: float,
    max_iter: int = 1000,
    seed: int = 0,
    dist: str = "uniform",
    density: float = 0.25,
    threads: int = 1,
) -> list[TrialRecord]:
    """Balance ``trials`` seeded random matrices and record their traces."""

    def one(trial: int) -> TrialRecord:
        m = trial_matrix(n, seed, trial, dist, density)
        trace = heuristic_balance(m, theta=theta, max_iter=max_iter, tol=stop_tol)
        rel = np.array([s.rel_change for s in trace.iterations[1:]])
        return TrialRecord(trial, rel, trace.objective, nubar_exact(m).value, trace.converged)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(trials)))
    return [one(trial) for trial in range(trials)]


def convergence_study(
    ns: list[int],
    trials: int,
    thetas: list[float],
    tol_grid: list[float],
    seed: int = 0,
    max_iter: int = 1000,
    dist: str = "uniform",
    density: float = 0.25,
    threads: int = 1,
) -> list[StudyRow]:
    """Iteration counts to reach each tolerance, aggregated over trials.

    For every (n, theta) the same seeded matrices are run once down to the
    tightest tolerance; crossing counts for looser tolerances are read off
    the recorded trace. ``max_iters``/``median_iters`` are -1 when no trial
    reaches the tolerance.
    """
    if trials < 1 or not ns or not thetas or not tol_grid:
        raise ValidationError("study needs at least one n, theta, tolerance and trial")
    if any(t <= 0 for t in tol_grid):
        raise ValidationError("tolerances must be positive")
    rows: list[StudyRow] = []
    stop_tol = min(tol_grid)
    for n in ns:
        for theta in thetas:
            records = run_trials(
                n, trials, theta, stop_tol, max_iter, seed, dist, density, threads
            )
            for tol in tol_grid:
                counts = [r.iterations_to(tol) for r in records]
                hits = [c for c in counts if c is not None]
                rows.append(
                    StudyRow(
                        n=int(n),
                        theta=float(theta),
                        tol=float(tol),
                        max_iters=max(hits) if hits else -1,
                        median_iters=int(np.median(hits)) if hits else -1,
                        failures=trials - len(hits),
                    )
                )
    return rows
