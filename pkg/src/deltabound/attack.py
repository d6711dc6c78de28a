"""Iterative random-search attack driver.

Each iteration perturbs the current best direction, projects the proposal
orthogonal to previously accepted directions, and spends a single query on
the acceptance test: is the boundary distance along the candidate at most
delta_t times the current best. Accepted candidates get their distance
refreshed by the quantile-guided binary search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import norm as _stdnorm

from .distance import (
    BoundaryDistance,
    RatioStore,
    compare_at_radius,
    improved_binary_search,
    initial_g_evaluation,
    record_ratio,
)
from .errors import (
    BudgetExhausted,
    DegenerateResidual,
    InitializationFailed,
    MisclassifiedInput,
    NoBoundaryFound,
)
from .oracle import DecisionOracle
from .sampling import P_SCHEDULES, SamplerConfig, draw_direction, p_value

DELTA_KINDS = ("linear", "sqrt", "log")

# Below this input dimension a direction basis is counterproductive: with a
# single basis vector in R^2 every proposal collapses onto one fixed line
# and the search can stall short of the optimum.
_MIN_BASIS_DIM = 4


@dataclass(frozen=True)
class AttackConfig:
    p_schedule: str = "const"
    delta_kind: str = "log"
    delta_factor: float = 0.05
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    budget: int = 1000
    seed: int = 0
    basis_cap: int | None = None  # default derived from the input dimension
    init_retries: int = 20
    init_rel_tol: float = 0.05

    def __post_init__(self):
        if self.p_schedule not in P_SCHEDULES:
            raise ValueError(f"unknown p schedule {self.p_schedule!r}")
        if self.delta_kind not in DELTA_KINDS:
            raise ValueError(f"unknown delta schedule {self.delta_kind!r}")
        if not 0.0 < self.delta_factor < 1.0:
            raise ValueError("delta_factor must lie in (0, 1)")
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")

    def effective_basis_cap(self, dim: int) -> int:
        if self.basis_cap is not None:
            return self.basis_cap
        if dim < _MIN_BASIS_DIM:
            return 0
        return min(dim // 2, 50)


@dataclass
class TraceRow:
    t: int
    queries_used: int
    g_best: float
    accepted: bool
    ratio: float | None
    binsearch_queries: int


@dataclass
class AttackTrace:
    init_queries: int
    rows: list[TraceRow] = field(default_factory=list)

    def accepted_rows(self) -> list[TraceRow]:
        return [row for row in self.rows if row.accepted]

    def total_queries(self) -> int:
        """Init cost plus one acceptance test and any search probes per row."""
        return self.init_queries + sum(1 + row.binsearch_queries for row in self.rows)


@dataclass
class AttackState:
    theta: np.ndarray
    g_best: BoundaryDistance
    basis: list[np.ndarray]
    t: int
    ratio_store: RatioStore
    trace: AttackTrace


@dataclass
class AttackResult:
    adversarial_point: np.ndarray
    distance: float
    queries_used: int
    trace: AttackTrace


def delta_value(kind: str, factor: float, t: int) -> float:
    """Required improvement factor delta_t in (0, 1); natural log."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if not 0.0 < factor < 1.0:
        raise ValueError("factor must lie in (0, 1)")
    if kind == "linear":
        return 1.0 - factor / (t + 1)
    if kind == "sqrt":
        return 1.0 - factor / math.sqrt(t + 1)
    if kind == "log":
        return 1.0 - factor / math.log(t + 2)
    raise ValueError(f"unknown delta schedule {kind!r}")


def orthogonal_residual(v: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    """Remove the projection of v onto each (orthonormal) basis vector."""
    v = np.asarray(v, dtype=float)
    residual = v.copy()
    for b in basis:
        residual -= (residual @ b) * b
    if np.linalg.norm(residual) < 1e-9 * np.linalg.norm(v):
        raise DegenerateResidual("proposal lies in the span of the basis")
    return residual


_DEGENERATE_RETRIES = 10


def propose_candidate(
    state: AttackState,
    cfg: AttackConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Unit candidate direction: theta plus a scaled random step, made
    orthogonal to the accepted-direction basis.

    Degenerate residuals trigger a resample of the random step; after
    _DEGENERATE_RETRIES consecutive failures the basis is cleared.
    """
    dim = len(state.theta)
    scale = p_value(cfg.p_schedule, state.t)
    for attempt in range(_DEGENERATE_RETRIES + 1):
        if attempt == _DEGENERATE_RETRIES:
            state.basis.clear()
        z = draw_direction(cfg.sampler, dim, rng)
        z_norm = np.linalg.norm(z)
        if z_norm == 0.0:
            continue  # all-zero draw (possible for the dct sampler)
        u = (scale / z_norm) * z
        try:
            residual = orthogonal_residual(state.theta + u, state.basis)
        except DegenerateResidual:
            continue
        return residual / np.linalg.norm(residual)
    raise DegenerateResidual("could not build a candidate direction")


def attack_iteration(
    state: AttackState,
    oracle: DecisionOracle,
    x0: np.ndarray,
    y0: int,
    cfg: AttackConfig,
    rng: np.random.Generator,
) -> AttackState:
    """One acceptance-test iteration; mutates and returns the state.

    Raises BudgetExhausted (state untouched) when the acceptance test
    cannot be paid for.
    """
    delta_t = delta_value(cfg.delta_kind, cfg.delta_factor, state.t)
    candidate = propose_candidate(state, cfg, rng)
    accepted = compare_at_radius(
        oracle, x0, y0, candidate, state.g_best.value * delta_t
    )
    ratio = None
    binsearch_queries = 0
    if accepted:
        g_old = state.g_best
        cap = cfg.effective_basis_cap(len(state.theta))
        if cap > 0:
            state.basis.append(state.theta)
            while len(state.basis) > cap:
                state.basis.pop(0)
        state.theta = candidate
        before = oracle.ledger.used
        g_new = improved_binary_search(
            oracle, x0, y0, candidate, g_old, delta_t, state.ratio_store
        )
        binsearch_queries = oracle.ledger.used - before
        record_ratio(state.ratio_store, g_new, g_old)
        state.g_best = g_new
        ratio = g_new.value / g_old.value
    state.t += 1
    state.trace.rows.append(
        TraceRow(
            t=state.t - 1,
            queries_used=oracle.ledger.used,
            g_best=state.g_best.value,
            accepted=accepted,
            ratio=ratio,
            binsearch_queries=binsearch_queries,
        )
    )
    return state


def run_attack(
    oracle: DecisionOracle,
    x0,
    y0: int,
    cfg: AttackConfig,
) -> AttackResult:
    """Full attack: initialize theta, iterate until the budget is spent."""
    x0 = np.asarray(x0, dtype=float)
    dim = len(x0)
    if int(oracle.model.predict(x0)) != y0:
        raise MisclassifiedInput(f"x0 is not classified as {y0}")

    rng = np.random.default_rng(cfg.seed)
    lambda_init = float(np.linalg.norm(x0)) or 1.0

    theta = None
    g_best = None
    for _ in range(cfg.init_retries):
        z = draw_direction(cfg.sampler, dim, rng)
        z_norm = np.linalg.norm(z)
        if z_norm == 0.0:
            continue
        direction = z / z_norm
        try:
            g_best = initial_g_evaluation(
                oracle, x0, y0, direction, lambda_init, cfg.init_rel_tol
            )
        except NoBoundaryFound:
            continue
        except BudgetExhausted as exc:
            raise InitializationFailed(
                "budget exhausted before any adversarial point was verified"
            ) from exc
        theta = direction
        break
    if theta is None:
        raise InitializationFailed(
            f"no adversarial direction in {cfg.init_retries} attempts"
        )

    state = AttackState(
        theta=theta,
        g_best=g_best,
        basis=[],
        t=0,
        ratio_store=RatioStore(),
        trace=AttackTrace(init_queries=oracle.ledger.used),
    )
    while True:
        try:
            attack_iteration(state, oracle, x0, y0, cfg, rng)
        except BudgetExhausted:
            break
    return AttackResult(
        adversarial_point=x0 + state.g_best.value * state.theta,
        distance=state.g_best.value,
        queries_used=oracle.ledger.used,
        trace=state.trace,
    )


def attack_toy2d(fn_id: str, cfg: AttackConfig, x0=(0.0, 0.0)):
    """Convenience runner against one of the analytic 2D classifiers."""
    from .models import Toy2DClassifier
    from .oracle import QueryLedger

    model = Toy2DClassifier(fn_id)
    oracle = DecisionOracle(model, QueryLedger(cfg.budget))
    x0 = np.asarray(x0, dtype=float)
    return run_attack(oracle, x0, model.predict(x0), cfg)


def validate_theorem1(
    g0: float,
    w,
    delta: float,
    p: float,
    n_samples: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte-Carlo check of the update-probability formula on a linear g.

    For g(theta) = g0 + w . theta at theta = 0 and u ~ N(0, I p^2), counts
    the event g(0) <= g(u) * delta and compares against the first-order
    prediction 1 - Phi(g0 (1 - delta) / (||w|| p)).
    """
    w = np.asarray(w, dtype=float)
    w_norm = np.linalg.norm(w)
    if w_norm == 0.0:
        raise ValueError("w must be nonzero")
    if not (0.0 < delta <= 1.0 and p > 0 and n_samples >= 1):
        raise ValueError("need 0 < delta <= 1, p > 0, n_samples >= 1")
    predicted = float(1.0 - _stdnorm.cdf(g0 * (1.0 - delta) / (w_norm * p)))

    hits = 0
    remaining = n_samples
    batch = 200_000
    while remaining > 0:
        m = min(batch, remaining)
        u = rng.standard_normal((m, len(w))) * p
        hits += int(np.count_nonzero(g0 <= (g0 + u @ w) * delta))
        remaining -= m
    return hits / n_samples, predicted
