"""Shared domain types, validation and tolerance conventions.

Everything downstream works on validated instances: a vector of per-unit
valuations, a vector of budgets (money) and a total supply of a divisible
good.  All quantities are IEEE doubles; equality between money/supply
quantities is relative with an absolute floor (see `close`).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

REL_TOL = 1e-9
ABS_FLOOR = 1e-12


def close(a: float, b: float, rel: float = REL_TOL, floor: float = ABS_FLOOR) -> bool:
    """True when a and b agree within rel * max(1, |a|, |b|), floored at `floor`."""
    return abs(a - b) <= max(floor, rel * max(1.0, abs(a), abs(b)))


def leq(a: float, b: float, rel: float = REL_TOL, floor: float = ABS_FLOOR) -> bool:
    """a <= b up to the shared tolerance."""
    return a <= b + max(floor, rel * max(1.0, abs(a), abs(b)))


class AuctionError(Exception):
    """Base class for every error raised by this package."""


class NonFinite(AuctionError):
    pass


class NegativeEntry(AuctionError):
    pass


class LengthMismatch(AuctionError):
    pass


class EmptyInstance(AuctionError):
    pass


class BudgetExceeded(AuctionError):
    """Payment above the declared budget (the -infinity utility branch)."""


class NumericalDivergence(AuctionError):
    """The event loop failed to advance the price clock."""


class NoActivePlayers(AuctionError):
    pass


class EventSkipped(AuctionError):
    """A closed-form evolution step jumped over an entry or exit event."""


class NegativeBudget(AuctionError):
    """A remaining budget went negative beyond tolerance; internal bug signal."""


class ZeroPrice(AuctionError):
    pass


class StepTooLarge(AuctionError):
    """The integrator's clinching-set membership oscillated; shrink the step."""


class OnRegimeBoundary(AuctionError):
    """Marginal rates requested on or too near a regime boundary."""


class NonPositiveIncrement(AuctionError):
    pass


class MonotonicityViolation(AuctionError):
    """A supply increment produced a negative allocation/payment delta."""


class OracleViolation(AuctionError):
    """A capacity oracle broke monotonicity during evaluation."""


@dataclass(frozen=True)
class AuctionInstance:
    """Raw problem input: per-unit values v_i, budgets B_i and total supply s."""

    values: tuple[float, ...]
    budgets: tuple[float, ...]
    supply: float

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ValidatedInstance:
    """An instance that passed validation, plus derived ordering metadata.

    `value_order` lists player ids by ascending (value, index).  `tie_groups`
    lists the groups of two or more players whose values are bit-equal, in
    ascending value order; near-equal but distinct doubles are *not* grouped.
    """

    values: tuple[float, ...]
    budgets: tuple[float, ...]
    supply: float
    value_order: tuple[int, ...]
    tie_groups: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.values)


def _as_floats(name: str, xs: Sequence[float]) -> tuple[float, ...]:
    out = []
    for v in xs:
        v = float(v)
        if not math.isfinite(v):
            raise NonFinite(f"{name} contains a non-finite entry: {v!r}")
        if v < 0.0:
            raise NegativeEntry(f"{name} contains a negative entry: {v!r}")
        out.append(v)
    return tuple(out)


def validate_instance(
    inst: AuctionInstance | ValidatedInstance | None = None,
    *,
    values: Sequence[float] | None = None,
    budgets: Sequence[float] | None = None,
    supply: float | None = None,
) -> ValidatedInstance:
    """Validate an instance and attach derived metadata.

    Idempotent: re-validating a ValidatedInstance reproduces it exactly.
    Raises NonFinite / NegativeEntry / LengthMismatch / EmptyInstance.
    """
    if inst is not None:
        values, budgets, supply = inst.values, inst.budgets, inst.supply
    if values is None or budgets is None or supply is None:
        raise LengthMismatch("values, budgets and supply are all required")
    vals = _as_floats("values", values)
    buds = _as_floats("budgets", budgets)
    if len(vals) == 0:
        raise EmptyInstance("need at least one player")
    if len(vals) != len(buds):
        raise LengthMismatch(f"{len(vals)} values vs {len(buds)} budgets")
    (sup,) = _as_floats("supply", [supply])

    order = tuple(sorted(range(len(vals)), key=lambda i: (vals[i], i)))
    groups: list[tuple[int, ...]] = []
    run = [order[0]]
    for i in order[1:]:
        if vals[i] == vals[run[-1]]:
            run.append(i)
        else:
            if len(run) > 1:
                groups.append(tuple(run))
            run = [i]
    if len(run) > 1:
        groups.append(tuple(run))
    return ValidatedInstance(vals, buds, sup, order, tuple(groups))


@dataclass(frozen=True)
class Outcome:
    """Final allocation (units per player) and payments (money per player)."""

    allocation: tuple[float, ...]
    payments: tuple[float, ...]

    @staticmethod
    def zero(n: int) -> "Outcome":
        return Outcome((0.0,) * n, (0.0,) * n)

    @property
    def n(self) -> int:
        return len(self.allocation)


def utility(inst: ValidatedInstance | AuctionInstance, outcome: Outcome, i: int) -> float:
    """Budget-constrained utility v_i * x_i - pay_i for player i.

    Raises BudgetExceeded instead of returning the -infinity branch.
    """
    pay = outcome.payments[i]
    if pay > inst.budgets[i] + max(ABS_FLOOR, REL_TOL * max(1.0, pay, inst.budgets[i])):
        raise BudgetExceeded(f"player {i} pays {pay} with budget {inst.budgets[i]}")
    return inst.values[i] * outcome.allocation[i] - pay


@dataclass(frozen=True)
class PriceState:
    """Snapshot of the ascending process at one price.

    Carries the (constant) value vector so that a state is self-contained:
    active/clinching sets, remaining budgets and remnant supply can all be
    re-derived and cross-checked from the snapshot alone.
    """

    price: float
    allocation: tuple[float, ...]
    budgets: tuple[float, ...]
    supply: float
    active: frozenset[int]
    clinching: frozenset[int]
    values: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.allocation)

    def max_budget(self) -> float:
        """Maximum remaining budget among active players (0 if none active)."""
        return max((self.budgets[i] for i in self.active), default=0.0)


EVENT_CLINCH_ENTRY = "clinch_entry"
EVENT_EXIT = "exit"


@dataclass(frozen=True)
class Event:
    """One event of the ascending process.

    Exits at a repeated value are recorded as one event per removed player,
    all sharing the price; entries list every player that joined together.
    """

    kind: str
    price: float
    players: tuple[int, ...]
    delta_x: tuple[float, ...]
    delta_pay: tuple[float, ...]
    before: PriceState
    after: PriceState


@dataclass(frozen=True)
class EventTrace:
    """Ordered events of one auction run plus the final state and outcome."""

    values: tuple[float, ...]
    budgets: tuple[float, ...]
    supply: float
    events: tuple[Event, ...]
    final: PriceState
    outcome: Outcome
    notes: tuple[str, ...] = ()


def check_price_state(state: PriceState, initial_budgets: Sequence[float],
                      total_supply: float, rel: float = REL_TOL,
                      active_rule: str = "gt", left_limit: bool = False) -> list[str]:
    """Return violation messages for the structural snapshot invariants.

    Checks, against tolerance `rel`: the remnant-supply identity, the active
    set definition, the supply inequality for every active player, the
    remaining-budget profile min{B_i(0), B_*} and, when the clinching set is
    non-empty, that it is exactly the set of active max-budget players.

    `active_rule` picks the set-definition convention for the snapshot:
    "gt" for right-continuous states ({i: v_i > p}), "ge" for a left limit
    at an exit price ({i: v_i >= p}), "skip" for mid-procedure states
    between removals of a tied group, where neither applies.

    `left_limit` relaxes the clinching-set law to a subset check: at the
    left limit of an entry price the joining player already holds the
    maximum budget but only enters the (right-continuous) set at the price
    itself.
    """
    bad: list[str] = []
    p, n = state.price, state.n
    if not close(state.supply, total_supply - sum(state.allocation), rel):
        bad.append(f"supply identity: S={state.supply} vs s-sum(x)={total_supply - sum(state.allocation)}")
    if active_rule != "skip":
        if active_rule == "ge":
            expected_active = frozenset(i for i in range(n)
                                        if state.values[i] >= p and state.values[i] > 0.0)
        else:
            expected_active = frozenset(i for i in range(n) if state.values[i] > p)
        if state.active != expected_active:
            bad.append(f"active set {sorted(state.active)} != expected {sorted(expected_active)}")
    if p > 0.0:
        for i in state.active:
            others = sum(state.budgets[j] for j in state.active if j != i) / p
            if not leq(state.supply, others, rel):
                bad.append(f"supply inequality fails for player {i}: S={state.supply} > {others}")
    bstar = state.max_budget()
    for i in state.active:
        want = min(initial_budgets[i], bstar)
        if not close(state.budgets[i], want, rel):
            bad.append(f"budget profile: B_{i}={state.budgets[i]} != min(B0, B*)={want}")
    if state.clinching:
        tied = frozenset(i for i in state.active if close(state.budgets[i], bstar, rel))
        if left_limit:
            if not state.clinching <= tied:
                bad.append(f"clinching set {sorted(state.clinching)} not within "
                           f"max-budget actives {sorted(tied)}")
        elif state.clinching != tied:
            bad.append(f"clinching set {sorted(state.clinching)} != max-budget actives {sorted(tied)}")
        if not state.clinching <= state.active:
            bad.append("clinching set not a subset of active set")
    return bad


# ---------------------------------------------------------------------------
# JSON plumbing.  Numbers are rendered with 17 significant digits so that a
# serialize/parse round trip reproduces every double exactly.

INSTANCE_SCHEMA = '{"values": [...], "budgets": [...], "supply": number}'


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def _encode(obj) -> str:
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps(obj) -> str:
    """Serialize nested dicts/lists/numbers with lossless float formatting."""
    return _encode(obj)


def instance_to_json(inst: ValidatedInstance | AuctionInstance) -> str:
    return dumps({"values": list(inst.values), "budgets": list(inst.budgets),
                  "supply": inst.supply})


def instance_from_json(text: str, *, require_supply: bool = True) -> ValidatedInstance:
    """Parse the shared instance schema; supply defaults to 0 when optional."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LengthMismatch(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "values" not in doc or "budgets" not in doc:
        raise LengthMismatch(f"expected schema {INSTANCE_SCHEMA}")
    if require_supply and "supply" not in doc:
        raise LengthMismatch(f"expected schema {INSTANCE_SCHEMA}")
    return validate_instance(values=doc["values"], budgets=doc["budgets"],
                             supply=doc.get("supply", 0.0))


def outcome_to_dict(outcome: Outcome) -> dict:
    return {"x": list(outcome.allocation), "pi": list(outcome.payments)}


def outcome_from_dict(doc: dict) -> Outcome:
    return Outcome(tuple(float(v) for v in doc["x"]), tuple(float(v) for v in doc["pi"]))
