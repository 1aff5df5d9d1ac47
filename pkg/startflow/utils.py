from __future__ import annotations

import json
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from numbers import Rational
from typing import Any

_TWO_PLACES = Decimal("0.01")


def to_decimal(value: Rational | int | float | Decimal) -> Decimal:
    if isinstance(value, Decimal):
        return value
    if isinstance(value, Rational):
        fraction = Fraction(value)
        return Decimal(fraction.numerator) / Decimal(fraction.denominator)
    return Decimal(str(value))


def round_half_up(value: Rational | int | float | Decimal, places: int = 2) -> Decimal:
    """Round for presentation (2.675 -> 2.68, never banker's rounding)."""
    quantum = _TWO_PLACES if places == 2 else Decimal(1).scaleb(-places)
    return to_decimal(value).quantize(quantum, rounding=ROUND_HALF_UP)


def decimal_json(value: Rational | int | float | Decimal, places: int = 2) -> float:
    """Rounded value as a JSON number."""
    return float(round_half_up(value, places))


def dump_json(payload: Any) -> str:
    """Stable JSON text for reports: insertion-ordered keys, UTF-8, trailing newline."""
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"
