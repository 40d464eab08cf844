"""Regularized loss of a candidate parametrization against the data.

A search point x = (p, alpha, T) is resolved into a full model by
interpolating the crossover income at fraction p on the empirical CCDF
and setting lam = exp(-m_c/T). The loss is the root mean squared log
error between empirical and model CCDF over the class statistic
(excluding its top point), plus two penalties: one forcing the model's
exponential-body mean to match the restricted empirical mean, one
forcing lam to match the crossover fraction p.

Degenerate evaluations (no incomes below the crossover, exponent
overflow, single-knot CCDF) return a large sentinel total instead of
raising, so a population optimizer can keep ranking candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ccdf import (
    DEFAULT_CLASS_POINTS,
    EmpiricalCcdf,
    IncomeSample,
    build_ccdf,
    empirical_mean,
)
from .model import TwoClassParams, exponential_regime_mean, _EXP_OVERFLOW

SENTINEL_LOSS = 1.0e6


@dataclass(frozen=True)
class SearchPoint:
    """Optimizer coordinates: crossover fraction, Pareto index, temperature."""

    p: float
    alpha: float
    temperature: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p, self.alpha, self.temperature], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "SearchPoint":
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))


@dataclass(frozen=True)
class LossBreakdown:
    """Loss components at one search point.

    ``total = rmsle + mean_penalty + fraction_penalty`` always holds;
    degenerate evaluations carry the sentinel in ``rmsle`` and set the
    flag.
    """

    rmsle: float
    mean_penalty: float
    fraction_penalty: float
    total: float
    params: TwoClassParams | None
    crossover: float | None
    degenerate: bool = False

    @classmethod
    def sentinel(cls) -> "LossBreakdown":
        return cls(SENTINEL_LOSS, 0.0, 0.0, SENTINEL_LOSS, None, None, True)


def default_bounds(mean_income: float, p_max: float = 0.2,
                   alpha_bounds: tuple[float, float] = (1.0, 3.0),
                   temperature_span: tuple[float, float] = (0.5, 2.0)) -> np.ndarray:
    """Search cuboid: p in (0, p_max], alpha in [1, 3], T in [mean/2, 2*mean].

    The open lower edge of p is approximated by a small positive bound.
    """
    return np.array([
        [1e-6, p_max],
        [alpha_bounds[0], alpha_bounds[1]],
        [temperature_span[0] * mean_income, temperature_span[1] * mean_income],
    ])


class FitContext:
    """Precomputed empirical quantities shared by all loss evaluations.

    Holding the class statistic, its log CCDF values and prefix sums up
    front keeps each evaluation O(k) with no transcendentals beyond a
    handful, which matters when a swarm calls the loss thousands of
    times. Immutable after construction and safe to share.
    """

    def __init__(self, sample: IncomeSample, k: int = DEFAULT_CLASS_POINTS):
        if k < 2:
            raise ValueError(f"need at least 2 class points, got {k}")
        self.sample = sample
        self.k = min(int(k), sample.n)
        self.ccdf = build_ccdf(sample, self.k)
        points = self.ccdf.class_points
        self.fit_points = points[:-1].copy()  # top class point excluded
        self.fit_log_income = np.log(self.fit_points)
        fractions = self.ccdf.evaluate(self.fit_points)
        self.fit_log_fraction = np.log(fractions)
        self.mean = sample.mean

    def loss_at(self, p: float, alpha: float, temperature: float) -> LossBreakdown:
        """Evaluate the full loss; sentinel on degenerate configurations."""
        if not (0.0 < p <= 1.0) or temperature <= 0.0 or alpha <= 1.0:
            return LossBreakdown.sentinel()
        if self.ccdf.incomes.size < 2:
            return LossBreakdown.sentinel()
        m_c = self.ccdf.inverse(p)
        if m_c <= 0.0:
            return LossBreakdown.sentinel()
        z = m_c / temperature
        if z > _EXP_OVERFLOW:
            return LossBreakdown.sentinel()
        log_lam = -z
        lam = math.exp(log_lam)

        split = int(np.searchsorted(self.fit_points, m_c, side="left"))
        log_model = np.empty_like(self.fit_points)
        log_model[:split] = -self.fit_points[:split] / temperature
        log_model[split:] = log_lam - alpha * (self.fit_log_income[split:] - math.log(m_c))
        residuals = self.fit_log_fraction - log_model
        rmsle_val = float(np.sqrt(np.mean(residuals * residuals)))

        count, total = self.sample.count_and_sum_below(m_c)
        if count == 0:
            return LossBreakdown.sentinel()
        body_mean = total / count
        theo_mean = temperature - m_c / math.expm1(z)
        mean_pen = abs(theo_mean / body_mean - 1.0)
        frac_pen = abs(lam / p - 1.0)

        params = TwoClassParams(lam, temperature, alpha)
        return LossBreakdown(rmsle_val, mean_pen, frac_pen,
                             rmsle_val + mean_pen + frac_pen, params, m_c)

    def objective(self, x: np.ndarray) -> float:
        """Scalar loss for optimizer use."""
        return self.loss_at(x[0], x[1], x[2]).total


def resolve_params(x: SearchPoint, ccdf: EmpiricalCcdf) -> tuple[TwoClassParams, float]:
    """Turn a search point into model parameters via the empirical CCDF.

    The crossover income is the interpolated inverse CCDF at fraction p
    and the top fraction follows from continuity, lam = exp(-m_c/T).
    """
    if ccdf.incomes.size < 2:
        raise ValueError("degenerate CCDF: fewer than two distinct incomes")
    m_c = ccdf.inverse(x.p)
    if m_c <= 0.0:
        raise ValueError(f"interpolated crossover is non-positive: {m_c}")
    z = m_c / x.temperature
    if z > _EXP_OVERFLOW:
        raise ValueError("top fraction underflows: crossover far above temperature scale")
    return TwoClassParams(math.exp(-z), x.temperature, x.alpha), m_c


def rmsle(empirical, model) -> float:
    """Root mean squared logarithmic error between two CCDF vectors."""
    emp = np.asarray(empirical, dtype=float)
    mod = np.asarray(model, dtype=float)
    if emp.shape != mod.shape:
        raise ValueError("empirical and model vectors must have equal length")
    if np.any(emp <= 0.0) or np.any(mod <= 0.0):
        raise ValueError("CCDF values must be strictly positive")
    r = np.log(emp) - np.log(mod)
    return float(np.sqrt(np.mean(r * r)))


def l1_penalty(temperature: float, crossover: float, sample: IncomeSample) -> float:
    """Relative mismatch between model and data body means.

    |theoretical exponential-body mean / restricted empirical mean - 1|,
    the restricted mean running over incomes strictly below the crossover.
    """
    body_mean = empirical_mean(sample, upper_cutoff=crossover)
    return abs(exponential_regime_mean(temperature, crossover) / body_mean - 1.0)


def l2_penalty(lam: float, p: float) -> float:
    """Relative mismatch between the model top fraction and the crossover fraction."""
    if p <= 0.0:
        raise ValueError(f"crossover fraction must be positive, got {p}")
    return abs(lam / p - 1.0)


def loss(x, data: FitContext) -> LossBreakdown:
    """Full regularized loss at a search point (SearchPoint or array)."""
    if isinstance(x, SearchPoint):
        return data.loss_at(x.p, x.alpha, x.temperature)
    return data.loss_at(float(x[0]), float(x[1]), float(x[2]))
