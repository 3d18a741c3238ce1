"""Sigma-point (unscented-transform) uncertainty propagation.

A random input with mean ``mu`` (dimension a) and covariance ``cov`` is
represented by 2a+1 deterministic samples: the mean itself with weight
``w0``, and symmetric pairs ``mu +/- column_i(S)`` where ``S S^T`` equals
``cov * a / (1 - w0)``.  Each remaining point carries weight
``(1 - w0) / (2a)``.  Pushing the samples through any nonlinear map and
re-averaging recovers the output mean and covariance to second order, and
exactly for affine maps.

The scheduling-specific entry points (scenario scaling, scheduling under
uncertainty, Monte Carlo reference runs) live at the bottom; they import the
scheduler lazily so this module stays usable on plain arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CaseError


@dataclass(frozen=True)
class SigmaPointSet:
    """Deterministic sample representation of a random vector."""

    points: np.ndarray    # (2a+1, a); row 0 is the mean
    weights: np.ndarray   # (2a+1,) summing to 1

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass
class OutputStatistics:
    mean: np.ndarray
    covariance: np.ndarray
    per_point: np.ndarray   # (count, out_dim) propagated values
    weights: np.ndarray


def matrix_sqrt_psd(cov: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Square root S with S @ S.T == cov for symmetric PSD input.

    Cholesky when the matrix is definite; otherwise a symmetric eigenvalue
    square root that tolerates zero (and slightly negative, up to ``tol``
    relative) eigenvalues.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be square")
    if not np.allclose(cov, cov.T, atol=1e-12, rtol=1e-9):
        raise ValueError("covariance must be symmetric")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    vals, vecs = np.linalg.eigh(cov)
    scale = max(vals.max(initial=0.0), 1.0)
    if vals.min(initial=0.0) < -tol * scale:
        raise ValueError(f"covariance has negative eigenvalue {vals.min():.3e}")
    vals = np.clip(vals, 0.0, None)
    return vecs * np.sqrt(vals)


def weights(alpha: int, w0: float) -> np.ndarray:
    """Center weight w0 plus 2*alpha equal side weights; sums to one."""
    if alpha < 1:
        raise ValueError("need at least one uncertain dimension")
    if not 0.0 <= w0 < 1.0:
        raise ValueError("center weight must lie in [0, 1)")
    w = np.full(2 * alpha + 1, (1.0 - w0) / (2 * alpha))
    w[0] = w0
    return w


def sigma_points(mean, cov: np.ndarray | None = None,
                 w0: float = 1.0 / 3.0) -> SigmaPointSet:
    """Build the 2a+1 samples for (mean, cov) with center weight w0.

    Also accepts a single UncertainInput in place of the triple.
    """
    if isinstance(mean, UncertainInput):
        mean, cov, w0 = mean.mean, mean.covariance, mean.w0
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    a = mean.size
    if a == 0:
        raise ValueError("empty mean vector")
    if cov.shape != (a, a):
        raise ValueError(f"covariance shape {cov.shape} does not match dimension {a}")
    if not 0.0 <= w0 < 1.0:
        raise ValueError("center weight must lie in [0, 1)")
    spread = matrix_sqrt_psd(cov * (a / (1.0 - w0)))
    pts = np.empty((2 * a + 1, a))
    pts[0] = mean
    pts[1: a + 1] = mean + spread.T
    pts[a + 1:] = mean - spread.T
    return SigmaPointSet(pts, weights(a, w0))


def reconstruct(values: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weighted mean and covariance of propagated sample values."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    weights = np.asarray(weights, dtype=float)
    mean = weights @ values
    dev = values - mean
    cov = (dev * weights[:, None]).T @ dev
    return mean, cov


def propagate(func, samples: SigmaPointSet) -> OutputStatistics:
    """Push every sigma point through ``func`` and reassemble statistics.

    ``func`` maps a 1-D input vector to a scalar or 1-D output.  Exceptions
    are re-raised with the offending sample attached so a failing scenario
    can be reproduced.
    """
    outs = []
    for k in range(samples.count):
        x = samples.points[k]
        try:
            y = func(x)
        except Exception as exc:
            raise RuntimeError(
                f"propagation failed on sigma point {k} (input {x.tolist()})"
            ) from exc
        outs.append(np.atleast_1d(np.asarray(y, dtype=float)))
    per_point = np.vstack(outs)
    mean, cov = reconstruct(per_point, samples.weights)
    return OutputStatistics(mean, cov, per_point, samples.weights.copy())


def monte_carlo_propagate(func, mean, cov, n_samples: int = 10_000,
                          seed: int = 0) -> OutputStatistics:
    """Plain Monte Carlo reference for ``propagate`` (seeded, reproducible)."""
    rng = np.random.default_rng(seed)
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    draws = rng.multivariate_normal(mean, cov, size=n_samples,
                                    method="eigh")
    outs = [np.atleast_1d(np.asarray(func(x), dtype=float)) for x in draws]
    per_point = np.vstack(outs)
    weights = np.full(n_samples, 1.0 / n_samples)
    mu = per_point.mean(axis=0)
    dev = per_point - mu
    sigma = dev.T @ dev / n_samples
    return OutputStatistics(mu, sigma, per_point, weights)


# --------------------------------------------------------------------------
# scheduling under uncertainty
# --------------------------------------------------------------------------

SERIES = ("load", "wind", "price")


class ScenarioInfeasible(RuntimeError):
    """A sigma point produced an unschedulable day; statistics are withheld."""

    def __init__(self, factors, status: str):
        self.factors = np.asarray(factors, dtype=float)
        self.status = status
        super().__init__(
            f"scenario with factors {self.factors.tolist()} ended {status}")


@dataclass(frozen=True)
class UncertainInput:
    """Random multiplicative factors applied to the forecast series.

    ``factor_map[k]`` names what dimension k scales: a series name for a
    whole-day factor, or ``(series, hour)`` for a single hour.  The default
    construction (:func:`gaussian_factors`) uses three whole-day factors
    (load, wind, price); the per-hour variant grows to 3 x horizon
    dimensions.
    """

    mean: np.ndarray
    covariance: np.ndarray
    w0: float = 1.0 / 3.0
    factor_map: tuple = ("load", "wind", "price")

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance",
                           np.asarray(self.covariance, dtype=float))
        if mean.size != len(self.factor_map):
            raise ValueError("factor map length does not match mean dimension")
        for entry in self.factor_map:
            series = entry[0] if isinstance(entry, tuple) else entry
            if series not in SERIES:
                raise ValueError(f"unknown series {series!r} in factor map")

    def samples(self) -> SigmaPointSet:
        return sigma_points(self.mean, self.covariance, self.w0)


def gaussian_factors(sigma_load: float = 0.0, sigma_wind: float = 0.0,
                     sigma_price: float = 0.0, w0: float = 1.0 / 3.0,
                     per_hour: bool = False, horizon: int = 24) -> UncertainInput:
    """Independent factors centred at 1 with the given standard deviations.

    Whole-day by default (dimension 3); ``per_hour`` switches to one factor
    per series per hour (dimension ``3 * horizon``).
    """
    sigmas = (sigma_load, sigma_wind, sigma_price)
    if per_hour:
        fmap = tuple((s, t) for s in SERIES for t in range(horizon))
        var = np.repeat(np.square(sigmas), horizon)
    else:
        fmap = SERIES
        var = np.square(sigmas)
    dim = len(fmap)
    return UncertainInput(np.ones(dim), np.diag(var), w0, fmap)


def apply_factors(model, uncertain: UncertainInput, x: np.ndarray):
    """Realize the forecast series under one factor vector."""
    from .model import scale_forecasts

    T = model.settings.horizon
    mult = {s: np.ones(T) for s in SERIES}
    for k, entry in enumerate(uncertain.factor_map):
        if isinstance(entry, tuple):
            series, hour = entry
            mult[series][hour] *= x[k]
        else:
            mult[entry] *= x[k]
    return scale_forecasts(model, mult["load"], mult["wind"], mult["price"])


@dataclass
class StochasticResult:
    """Unscented propagation of a day-ahead run over the scenario factors."""

    statistics: OutputStatistics    # over total schedule cost
    reports: list                   # CostReport per sigma point
    runs: list                      # full RunResult per sigma point
    samples: SigmaPointSet

    @property
    def mean_cost(self) -> float:
        return float(self.statistics.mean[0])

    @property
    def cost_std(self) -> float:
        return float(np.sqrt(max(self.statistics.covariance[0, 0], 0.0)))


def stats_dict(result: StochasticResult) -> dict:
    """JSON-ready statistics report.

    Every retained point is feasible by construction (an infeasible one
    aborts the propagation), so the flag is informational for readers
    that splice in external scenario sets.
    """
    per_point = [
        {"factors": [float(v) for v in x], "cost": run.cost.total,
         "feasible": run.status == "OPTIMAL"}
        for x, run in zip(result.samples.points, result.runs)
    ]
    det = result.runs[0].cost.total
    return {
        "mean_cost": result.mean_cost,
        "cost_std": result.cost_std,
        "deterministic_cost": det,
        "delta_vs_deterministic": result.mean_cost - det,
        "weights": [float(w) for w in result.samples.weights],
        "per_point": per_point,
    }


def run_stochastic(model, flag=None, uncertain: UncertainInput | None = None,
                   options=None, mean_run=None) -> StochasticResult:
    """Schedule every sigma point and reassemble cost statistics.

    The central point is scheduled first (it is exactly the deterministic
    run) and its solution pattern seeds the branch-and-bound incumbent of
    the remaining points.  A caller that already holds that deterministic
    result can pass it as ``mean_run`` to skip re-solving it.  Any scenario
    that fails to reach a proven schedule aborts the whole propagation -
    partial statistics would be silently biased.
    """
    from .scheduler import CASE1, run_deterministic

    flag = CASE1 if flag is None else flag
    uncertain = uncertain if uncertain is not None else gaussian_factors(
        horizon=model.settings.horizon)
    samples = uncertain.samples()
    runs = []
    hint = None
    for k in range(samples.count):
        if k and np.array_equal(samples.points[k], samples.points[0]):
            runs.append(runs[0])     # collapsed dimension, same scenario
            continue
        if k == 0 and mean_run is not None:
            if mean_run.status != "OPTIMAL" or mean_run.milp_values is None:
                raise ValueError("mean_run must be a proven optimal result")
            hint = mean_run.milp_values
            runs.append(mean_run)
            continue
        inputs = apply_factors(model, uncertain, samples.points[k])
        result = run_deterministic(model, flag, inputs, options, hint=hint)
        if result.status != "OPTIMAL" or result.cost is None:
            raise ScenarioInfeasible(samples.points[k], result.status)
        if k == 0:
            hint = result.milp_values
        runs.append(result)
    costs = np.array([[r.cost.total] for r in runs])
    mean, cov = reconstruct(costs, samples.weights)
    stats = OutputStatistics(mean, cov, costs, samples.weights.copy())
    return StochasticResult(stats, [r.cost for r in runs], runs, samples)


@dataclass
class MonteCarloResult:
    """Seeded sampling reference for :func:`run_stochastic`."""

    statistics: OutputStatistics
    reports: list
    excluded: int               # draws with non-physical factors or failed runs
    sample_count: int

    @property
    def exclusion_rate(self) -> float:
        return self.excluded / self.sample_count if self.sample_count else 0.0

    @property
    def mean_cost(self) -> float:
        return float(self.statistics.mean[0])


def monte_carlo_reference(model, flag=None, uncertain: UncertainInput | None = None,
                          sample_count: int = 100, seed: int = 0,
                          options=None) -> MonteCarloResult:
    """Schedule independent Gaussian factor draws (reproducible under seed).

    Draws with any non-positive factor, and draws whose schedule cannot be
    proven, are excluded from the statistics but counted, so a high
    exclusion rate is visible instead of silently skewing the mean.
    """
    from .scheduler import CASE1, run_deterministic

    flag = CASE1 if flag is None else flag
    uncertain = uncertain if uncertain is not None else gaussian_factors(
        horizon=model.settings.horizon)
    rng = np.random.default_rng(seed)
    draws = rng.multivariate_normal(uncertain.mean, uncertain.covariance,
                                    size=sample_count, method="eigh")
    hint = None
    reports = []
    costs = []
    excluded = 0
    for x in draws:
        if (x <= 0.0).any():
            excluded += 1
            continue
        inputs = apply_factors(model, uncertain, x)
        try:
            result = run_deterministic(model, flag, inputs, options, hint=hint)
        except CaseError:
            excluded += 1
            continue
        if result.status != "OPTIMAL" or result.cost is None:
            excluded += 1
            continue
        if hint is None:
            hint = result.milp_values
        reports.append(result.cost)
        costs.append([result.cost.total])
    if costs:
        arr = np.asarray(costs)
        n = len(costs)
        weights = np.full(n, 1.0 / n)
        mu = arr.mean(axis=0)
        dev = arr - mu
        stats = OutputStatistics(mu, dev.T @ dev / n, arr, weights)
    else:
        empty = np.zeros((0, 1))
        stats = OutputStatistics(np.array([np.nan]), np.array([[np.nan]]),
                                 empty, np.zeros(0))
    return MonteCarloResult(stats, reports, excluded, sample_count)
