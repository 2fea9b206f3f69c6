"""Static item pricing: item halving for XoS buyers, reserve-price doubling,
single-price multi-unit markets, and exact checkers for their guarantees."""
from .errors import (
    ChargingViolationError,
    DegenerateInstanceError,
    InconsistentSolutionError,
    InvalidInstanceError,
    ItemPricingError,
    NoOverwhelmingViolationError,
    OversizedInstanceError,
    PreconditionError,
    UnsupportedValuationError,
)
from .item_halving import Adversarial, CoreTrace, Fixed, RandomSampling, core_run, solve_xos
from .market import Allocation, Instance, PricingSolution, revenue, social_welfare, surplus, theta
from .mechanisms import ExplicitOrders, UniformOrders, all_orders, sequential_run, simultaneous_check
from .multiunit import MultiUnitSolution, solve_multiunit
from .price_doubling import price_doubling_run, unit_demand_walrasian
from .rational import UNAVAILABLE
from .valuations import Additive, MultiUnit, SingleMinded, UnitDemand, XoS, demand, value, xos_witness

__version__ = "0.1.0"

__all__ = [
    "Additive",
    "Adversarial",
    "Allocation",
    "ChargingViolationError",
    "CoreTrace",
    "DegenerateInstanceError",
    "ExplicitOrders",
    "Fixed",
    "InconsistentSolutionError",
    "Instance",
    "InvalidInstanceError",
    "ItemPricingError",
    "MultiUnit",
    "MultiUnitSolution",
    "NoOverwhelmingViolationError",
    "OversizedInstanceError",
    "PreconditionError",
    "PricingSolution",
    "RandomSampling",
    "SingleMinded",
    "UNAVAILABLE",
    "UniformOrders",
    "UnitDemand",
    "UnsupportedValuationError",
    "XoS",
    "all_orders",
    "core_run",
    "demand",
    "price_doubling_run",
    "revenue",
    "sequential_run",
    "simultaneous_check",
    "social_welfare",
    "solve_multiunit",
    "solve_xos",
    "surplus",
    "theta",
    "unit_demand_walrasian",
    "value",
    "xos_witness",
]
