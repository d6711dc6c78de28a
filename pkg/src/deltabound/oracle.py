"""Hard-label decision interface with budget-enforcing query accounting.

Every classifier evaluation made by the attack passes through a
:class:`DecisionOracle`, which charges exactly one query on its
:class:`QueryLedger` per call. The ledger enforces a hard budget: once
``used == budget`` any further query raises :class:`BudgetExhausted`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExhausted, DimensionMismatch


@dataclass
class QueryLedger:
    """Monotone query counter with a hard budget."""

    budget: int
    used: int = 0

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")

    @property
    def remaining(self) -> int:
        return self.budget - self.used

    def charge(self) -> None:
        """Consume one query, or raise if the budget is already spent."""
        if self.used >= self.budget:
            raise BudgetExhausted(
                f"query budget of {self.budget} exhausted"
            )
        self.used += 1


@dataclass
class DecisionOracle:
    """Top-1 label access to a victim model, metered by a ledger.

    ``model`` is anything exposing ``n_features`` and a deterministic
    ``predict(x) -> int`` (a ModelSpec or a toy 2D classifier). When
    ``clamp_bounds`` is set, the point actually classified is clamped
    coordinate-wise to [low, high]; distances elsewhere in the attack are
    always measured on the unclamped proposal.
    """

    model: object
    ledger: QueryLedger
    clamp_bounds: tuple | None = field(default=None)

    def query(self, x) -> int:
        x = np.asarray(x, dtype=float)
        d = self.model.n_features
        if x.shape != (d,):
            raise DimensionMismatch(
                f"expected point of dimension {d}, got shape {x.shape}"
            )
        self.ledger.charge()
        if self.clamp_bounds is not None:
            low, high = self.clamp_bounds
            x = np.clip(x, low, high)
        return int(self.model.predict(x))

    def is_adversarial(self, y0: int, x) -> bool:
        """True iff the (clamped) point classifies to a label != y0."""
        return self.query(x) != y0
