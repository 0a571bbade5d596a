"""Streaming supply: consume increments, emit allocation/payment deltas.

Because the auction outcome is componentwise monotone in the total supply
(both allocation and payments), the auctioneer can sell and charge on the
fly: every arriving increment is handled by re-solving at the new
cumulative supply and shipping the differences.  A full recompute per
increment is deliberate; the outcome is a non-separable function of total
supply, a solve is cheap, and monotonicity guarantees the deltas are
valid.  Monotonicity failing beyond tolerance would falsify the theory
the stream rests on, so it is raised as a hard error rather than clamped.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import engine
from .core import (
    ABS_FLOOR,
    MonotonicityViolation,
    NonPositiveIncrement,
    Outcome,
    ValidatedInstance,
    validate_instance,
)


@dataclass(frozen=True)
class DeltaOutcome:
    """Per-increment deltas plus the cumulative supply they bring about."""

    delta_x: tuple[float, ...]
    delta_pay: tuple[float, ...]
    supply: float


class SupplyStream:
    """Single-writer state machine over cumulative supply.

    `on_supply` calls must be serialized by the caller; reading `outcome`,
    `supply` or `utility_snapshot` between mutations is safe.  Distinct
    streams are fully independent.
    """

    def __init__(self, values, budgets, config: engine.EngineConfig = engine.DEFAULT_CONFIG):
        self.inst = validate_instance(values=values, budgets=budgets, supply=0.0)
        self.config = config
        self.supply = 0.0
        self.outcome = Outcome.zero(self.inst.n)
        self.log: list[DeltaOutcome] = []

    def _tol(self, *xs: float) -> float:
        scale = max(1.0, *map(abs, xs)) if xs else 1.0
        return max(ABS_FLOOR, self.config.rel_tol * scale)

    def on_supply(self, ds: float) -> DeltaOutcome:
        """Account for ds more units: re-solve and emit non-negative deltas.

        Deltas within tolerance of zero are clamped to exactly zero so
        consumers never see negative dust; a delta negative beyond
        tolerance raises MonotonicityViolation (an engine bug signal, not
        a user error).
        """
        ds = float(ds)
        if not ds > 0.0:
            raise NonPositiveIncrement(f"supply increment must be positive, got {ds}")
        new_supply = self.supply + ds
        inst = ValidatedInstance(self.inst.values, self.inst.budgets, new_supply,
                                 self.inst.value_order, self.inst.tie_groups)
        new = engine.solve(inst, self.config)
        old_u = self.utility_snapshot()
        dx = self._delta(self.outcome.allocation, new.allocation)
        dp = self._delta(self.outcome.payments, new.payments)
        self.supply = new_supply
        self.outcome = new
        new_u = self.utility_snapshot()
        for i, (a, b) in enumerate(zip(old_u, new_u)):
            if b < a - self._tol(a, b):
                raise MonotonicityViolation(
                    f"utility of player {i} fell from {a} to {b} as supply grew")
        out = DeltaOutcome(dx, dp, new_supply)
        self.log.append(out)
        return out

    def _delta(self, old: tuple, new: tuple) -> tuple[float, ...]:
        out = []
        for i, (a, b) in enumerate(zip(old, new)):
            d = b - a
            if d < -self._tol(a, b):
                raise MonotonicityViolation(
                    f"component {i} fell from {a} to {b} as supply grew")
            out.append(d if abs(d) > self._tol(a, b) else 0.0)
        return tuple(out)

    def utility_snapshot(self) -> tuple[float, ...]:
        """Current utilities v_i * x_i - pay_i; non-decreasing across increments."""
        return tuple(self.inst.values[i] * self.outcome.allocation[i]
                     - self.outcome.payments[i] for i in range(self.inst.n))


def init_stream(values, budgets, config: engine.EngineConfig = engine.DEFAULT_CONFIG
                ) -> SupplyStream:
    """Fresh stream at zero cumulative supply."""
    return SupplyStream(values, budgets, config)
