"""Boundary-distance estimation along a direction.

All estimates of the directional boundary distance live here: the
single-query comparison oracle, the bootstrap evaluation of the first
distance, and the quantile-guided binary search that refreshes the best
distance after an accepted direction, backed by an empirical store of
past improvement ratios.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExhausted, NoBoundaryFound, RatioOutOfRange, ZeroDirection
from .oracle import DecisionOracle

DOUBLING_CAP = 30


@dataclass(frozen=True)
class BoundaryDistance:
    """A boundary distance that was actually observed adversarial.

    The value is the verified radius itself: the oracle returned a label
    different from y0 at exactly this distance along the direction.
    """

    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("boundary distance must be positive")

    @property
    def verified_radius(self) -> float:
        return self.value


class RatioStore:
    """Bounded FIFO window of past accepted improvement ratios."""

    def __init__(self, capacity: int = 100, min_samples: int = 10):
        self.capacity = capacity
        self.min_samples = min_samples
        self._ratios: deque[float] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._ratios)

    def __iter__(self):
        return iter(self._ratios)

    def append(self, ratio: float) -> None:
        if not 0.0 < ratio < 1.0:
            raise RatioOutOfRange(f"ratio {ratio} outside (0, 1)")
        self._ratios.append(ratio)

    def truncated(self, bound: float) -> list[float]:
        """Sorted ratios no larger than ``bound``."""
        return sorted(r for r in self._ratios if r <= bound)


def record_ratio(store: RatioStore, g_new: BoundaryDistance, g_old: BoundaryDistance) -> RatioStore:
    if not g_new.value < g_old.value:
        raise RatioOutOfRange(
            f"g_new={g_new.value} must be strictly below g_old={g_old.value}"
        )
    store.append(g_new.value / g_old.value)
    return store


def compare_at_radius(
    oracle: DecisionOracle,
    x0: np.ndarray,
    y0: int,
    direction: np.ndarray,
    radius: float,
) -> bool:
    """One query: is x0 + radius * direction/||direction|| adversarial?

    Equivalently, is the boundary distance along the direction <= radius.
    """
    direction = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(direction)
    if norm == 0.0:
        raise ZeroDirection("cannot probe along a zero direction")
    if not radius > 0:
        raise ValueError("radius must be positive")
    return oracle.is_adversarial(y0, x0 + (radius / norm) * direction)


def initial_g_evaluation(
    oracle: DecisionOracle,
    x0: np.ndarray,
    y0: int,
    theta: np.ndarray,
    lambda_init: float,
    rel_tol: float = 0.05,
) -> BoundaryDistance:
    """Bootstrap the first boundary distance along theta.

    Doubles the radius from lambda_init until an adversarial probe is seen
    (at most DOUBLING_CAP doublings), then bisects the bracket until its
    width falls below rel_tol of the upper end. The upper (verified
    adversarial) endpoint is returned.
    """
    if not lambda_init > 0:
        raise ValueError("lambda_init must be positive")
    lam, lo = lambda_init, 0.0
    hi = None
    for _ in range(DOUBLING_CAP + 1):
        # no verified point yet: a budget error here must propagate
        if compare_at_radius(oracle, x0, y0, theta, lam):
            hi = lam
            break
        lo = lam
        lam *= 2.0
    if hi is None:
        raise NoBoundaryFound(
            f"no adversarial probe within {DOUBLING_CAP} doublings from {lambda_init}"
        )
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        try:
            adv = compare_at_radius(oracle, x0, y0, theta, mid)
        except BudgetExhausted:
            break  # hi is already a verified adversarial radius
        if adv:
            hi = mid
        else:
            lo = mid
    return BoundaryDistance(hi)


def icdf_query(store: RatioStore, p: float, delta_t: float) -> float:
    """Inverse CDF of the (truncated) empirical ratio distribution.

    With at least ``min_samples`` stored ratios <= delta_t the empirical
    quantile of those ratios is used; otherwise a linear fallback over
    [max(0, delta_t - 4*(1 - delta_t)), delta_t].
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if not 0.0 < delta_t < 1.0:
        raise ValueError("delta_t must lie in (0, 1)")
    truncated = store.truncated(delta_t)
    if len(truncated) >= store.min_samples:
        k = min(max(math.ceil(p * len(truncated)), 1), len(truncated))
        return truncated[k - 1]
    lo = max(0.0, delta_t - 4.0 * (1.0 - delta_t))
    return lo + p * (delta_t - lo)


def improved_binary_search(
    oracle: DecisionOracle,
    x0: np.ndarray,
    y0: int,
    theta_new: np.ndarray,
    g_prev: BoundaryDistance,
    delta_t: float,
    store: RatioStore,
) -> BoundaryDistance:
    """Refresh the boundary distance after an accepted direction.

    Bisects in probability space of the ratio ICDF G. The caller's
    acceptance test already verified an adversarial probe at radius
    g_prev * delta_t, so G(1) is pinned to delta_t and the invariant
    "adversarial at G(r), non-adversarial at G(l) or l unprobed" holds
    throughout. Stops once the bracket is tighter than (1 - delta_t) in
    ratio space, which guarantees a result strictly below g_prev; on
    budget exhaustion the current verified upper bracket is returned.
    """

    def G(p: float) -> float:
        if p >= 1.0:
            return delta_t  # radius verified adversarial by the acceptance test
        return icdf_query(store, p, delta_t)

    eps = 1.0 - delta_t
    l, r = 0.0, 1.0
    l_probed = False
    while G(r) - G(l) >= eps:
        if r - l <= 1e-9:
            break  # empirical grid exhausted between the brackets
        mid = 0.5 * (l + r)
        g_mid = G(mid)
        # equal-G moves carry no information; shrink without spending a query
        if g_mid >= G(r):
            r = mid
            continue
        if l_probed and g_mid <= G(l):
            l = mid
            continue
        try:
            adversarial = compare_at_radius(oracle, x0, y0, theta_new, g_prev.value * g_mid)
        except BudgetExhausted:
            break
        if adversarial:
            r = mid
        else:
            l = mid
            l_probed = True
    return BoundaryDistance(g_prev.value * G(r))
