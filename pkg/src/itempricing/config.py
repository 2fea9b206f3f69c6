"""Library-wide defaults. Every routine also accepts explicit overrides."""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction


@dataclass(frozen=True)
class Limits:
    demand_goods: int = 22
    factorial_buyers: int = 8
    brute_goods: int = 6
    brute_buyers: int = 5
    brute_supply: int = 3
    # Tail price is v* - v* * epsilon_factor.
    epsilon_factor: Fraction = Fraction(1, 2**20)

    def with_overrides(self, **kwargs) -> "Limits":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


DEFAULT_LIMITS = Limits()
