"""Budget-constrained clinching auction with online supply: exact solver,
closed two-player forms, streaming supply, VCG baselines and a property
verification harness."""

from .core import (
    AuctionError,
    AuctionInstance,
    Event,
    EventTrace,
    Outcome,
    PriceState,
    ValidatedInstance,
    utility,
    validate_instance,
)
from .engine import EngineConfig, evolve, exit_step, next_event_price, solve, trace, wishful_allocation

__all__ = [
    "AuctionError",
    "AuctionInstance",
    "EngineConfig",
    "Event",
    "EventTrace",
    "Outcome",
    "PriceState",
    "ValidatedInstance",
    "evolve",
    "exit_step",
    "next_event_price",
    "solve",
    "trace",
    "utility",
    "validate_instance",
    "wishful_allocation",
]
