"""Particle swarm optimizer with bounded quasi-Newton refinement.

Standard 2007-style swarm: every candidate informs itself plus K
randomly chosen candidates, velocities blend inertia with pulls toward
the personal best and the best informant, and all informant sets are
redrawn whenever an iteration fails to improve the best solution found
so far. Positions leaving the search box are clamped to the face with
that velocity component zeroed. Inertia falls linearly between its
endpoints over the iteration budget.

The hybrid layer periodically polishes the incumbent best with L-BFGS-B
steps driven by central finite-difference gradients; refinement never
returns a worse point than its input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize


@dataclass(eq=False)
class SwarmConfig:
    bounds: np.ndarray                  # (d, 2) [lo, hi] per dimension
    n_candidates: int = 40
    max_iters: int = 200
    k_informants: int = 3
    c1: float = 1.7
    c2: float = 1.7
    w_start: float = 0.7
    w_end: float = 0.4
    seed: int = 0
    refine_every: int = 10              # 0 disables periodic refinement
    refine_max_steps: int = 100

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=float)
        if self.bounds.ndim != 2 or self.bounds.shape[1] != 2:
            raise ValueError("bounds must be a (d, 2) array")
        if np.any(self.bounds[:, 0] >= self.bounds[:, 1]):
            raise ValueError("each bound must satisfy lo < hi")
        if self.n_candidates < 2:
            raise ValueError("need at least 2 candidates")
        if not 0.0 < self.w_end <= self.w_start < 1.0:
            raise ValueError("inertia schedule must satisfy 0 < w_end <= w_start < 1")
        if self.max_iters < 1:
            raise ValueError("need at least 1 iteration")


@dataclass(eq=False)
class SwarmState:
    positions: np.ndarray               # (n, d)
    velocities: np.ndarray
    pbest_positions: np.ndarray
    pbest_values: np.ndarray
    informants: np.ndarray              # (n, n) bool, [j, i]: j informs i
    best_x: np.ndarray                  # best candidate visit so far
    best_value: float
    t: int
    rng: np.random.Generator
    informant_redraws: int = 0
    last_step_improved: bool = field(default=True)


def _draw_informants(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """Membership matrix: each candidate joins k random sets plus its own."""
    informs = np.zeros((n, n), dtype=bool)
    targets = rng.integers(0, n, size=(n, k))
    rows = np.repeat(np.arange(n), k)
    informs[rows, targets.ravel()] = True
    np.fill_diagonal(informs, True)
    return informs


def _neighborhood_best(informants: np.ndarray, pbest_positions: np.ndarray,
                       pbest_values: np.ndarray) -> np.ndarray:
    """Best personal best among each candidate's informants."""
    masked = np.where(informants, pbest_values[:, None], np.inf)
    idx = np.argmin(masked, axis=0)
    return pbest_positions[idx]


def initialize(config: SwarmConfig, objective) -> SwarmState:
    """Seeded uniform start inside the box, with half-difference velocities."""
    rng = np.random.default_rng(config.seed)
    lo, hi = config.bounds[:, 0], config.bounds[:, 1]
    n, d = config.n_candidates, config.bounds.shape[0]
    positions = lo + (hi - lo) * rng.random((n, d))
    second = lo + (hi - lo) * rng.random((n, d))
    velocities = (second - positions) / 2.0
    informants = _draw_informants(rng, n, config.k_informants)
    values = np.array([objective(p) for p in positions], dtype=float)
    best_idx = int(np.argmin(values))
    return SwarmState(
        positions=positions,
        velocities=velocities,
        pbest_positions=positions.copy(),
        pbest_values=values,
        informants=informants,
        best_x=positions[best_idx].copy(),
        best_value=float(values[best_idx]),
        t=0,
        rng=rng,
    )


def step(state: SwarmState, config: SwarmConfig, objective) -> SwarmState:
    """One swarm iteration; updates the state in place and returns it."""
    lo, hi = config.bounds[:, 0], config.bounds[:, 1]
    n, d = state.positions.shape
    if config.max_iters > 1:
        frac = min(state.t, config.max_iters - 1) / (config.max_iters - 1)
    else:
        frac = 0.0
    w = config.w_start + (config.w_end - config.w_start) * frac

    nbest = _neighborhood_best(state.informants, state.pbest_positions,
                               state.pbest_values)
    lam1 = state.rng.random((n, d))
    lam2 = state.rng.random((n, d))
    state.velocities = (w * state.velocities
                        + config.c1 * lam1 * (state.pbest_positions - state.positions)
                        + config.c2 * lam2 * (nbest - state.positions))
    state.positions = state.positions + state.velocities
    out = (state.positions < lo) | (state.positions > hi)
    state.positions = np.clip(state.positions, lo, hi)
    state.velocities[out] = 0.0

    values = np.array([objective(p) for p in state.positions], dtype=float)
    better = values < state.pbest_values
    state.pbest_positions[better] = state.positions[better]
    state.pbest_values[better] = values[better]

    best_idx = int(np.argmin(state.pbest_values))
    improved = state.pbest_values[best_idx] < state.best_value
    if improved:
        state.best_value = float(state.pbest_values[best_idx])
        state.best_x = state.pbest_positions[best_idx].copy()
    else:
        state.informants = _draw_informants(state.rng, n, config.k_informants)
        state.informant_redraws += 1
    state.last_step_improved = bool(improved)
    state.t += 1
    return state


def refine(point, objective, bounds, max_steps: int = 100) -> tuple[np.ndarray, float]:
    """Bounded quasi-Newton polish from ``point``; never returns a worse point.

    Gradients are central finite differences with relative step 1e-6 per
    coordinate, falling back to one-sided differences at the box faces.
    A non-finite objective at the start point returns it unchanged.
    """
    bounds = np.asarray(bounds, dtype=float)
    lo, hi = bounds[:, 0], bounds[:, 1]
    x0 = np.clip(np.asarray(point, dtype=float), lo, hi)
    f0 = float(objective(x0))
    if not np.isfinite(f0):
        return np.asarray(point, dtype=float).copy(), f0
    best_x, best_f = x0.copy(), f0

    def evaluate(x):
        nonlocal best_x, best_f
        f = float(objective(x))
        if np.isfinite(f) and f < best_f:
            best_f = f
            best_x = np.array(x, dtype=float)
        return f if np.isfinite(f) else 1e300

    def gradient(x):
        g = np.zeros_like(x)
        for i in range(x.size):
            h = 1e-6 * max(abs(x[i]), 1e-3 * (hi[i] - lo[i]))
            xp = x.copy()
            xp[i] = min(x[i] + h, hi[i])
            xm = x.copy()
            xm[i] = max(x[i] - h, lo[i])
            span = xp[i] - xm[i]
            g[i] = 0.0 if span == 0.0 else (evaluate(xp) - evaluate(xm)) / span
        return g

    try:
        minimize(evaluate, x0, jac=gradient, method="L-BFGS-B",
                 bounds=list(zip(lo, hi)), options={"maxiter": int(max_steps)})
    except (ValueError, FloatingPointError):
        pass
    return best_x, best_f


@dataclass(eq=False)
class OptimizeResult:
    x: np.ndarray
    value: float
    trace: list[float]                  # best value after init, each iter, final refine
    trace_points: list[np.ndarray]
    iterations: int
    informant_redraws: int


def optimize(config: SwarmConfig, objective) -> OptimizeResult:
    """Run the full hybrid schedule and return the best point ever seen."""
    state = initialize(config, objective)
    best_x, best_value = state.best_x.copy(), state.best_value
    trace = [best_value]
    trace_points = [best_x.copy()]
    for t in range(1, config.max_iters + 1):
        step(state, config, objective)
        if state.best_value < best_value:
            best_value = state.best_value
            best_x = state.best_x.copy()
        if config.refine_every and t % config.refine_every == 0:
            rx, rv = refine(best_x, objective, config.bounds, config.refine_max_steps)
            if rv < best_value:
                best_value, best_x = rv, rx.copy()
        trace.append(best_value)
        trace_points.append(best_x.copy())
    rx, rv = refine(best_x, objective, config.bounds, config.refine_max_steps)
    if rv < best_value:
        best_value, best_x = rv, rx.copy()
    trace.append(best_value)
    trace_points.append(best_x.copy())
    return OptimizeResult(best_x, best_value, trace, trace_points,
                          config.max_iters, state.informant_redraws)
