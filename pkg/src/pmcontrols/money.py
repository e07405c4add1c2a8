"""Money and time-axis value types.

Money is fixed-point decimal: inputs are canonicalized to 4 fractional
digits on ingestion, and all arithmetic runs in a high-precision decimal
context so that sums are exact and associative (audit equality depends on
this).  Ratios (CPI/SPI) are ordinary floats.

Time points are either calendar dates or ordinal period numbers; a single
project must use one kind throughout.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date
from decimal import Context, Decimal, InvalidOperation, localcontext
from functools import total_ordering

from .errors import ValidationFailed

MONEY_QUANTUM = Decimal("0.0001")
FRACTION_QUANTUM = Decimal("0.000001")

# High precision for quotient-derived amounts (forecast divisions).
DECIMAL_CONTEXT = Context(prec=50)

_ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def _wide_enough(*values: Decimal) -> Context:
    """A context wide enough that adding/subtracting ``values`` is exact."""
    tops = []
    lows = []
    for value in values:
        parts = value.as_tuple()
        lows.append(parts.exponent)
        tops.append(parts.exponent + len(parts.digits))
    return Context(prec=max(max(tops) - min(lows) + 2, 1))


def exact_add(a: Decimal, b: Decimal) -> Decimal:
    return _wide_enough(a, b).add(a, b)


def exact_sub(a: Decimal, b: Decimal) -> Decimal:
    """a - b with no rounding, whatever the operands' magnitudes."""
    return _wide_enough(a, b).subtract(a, b)


def parse_money(raw, field: str = "amount") -> Decimal:
    """Parse a money value from a number, numeric string or Decimal.

    Floats are converted through their shortest repr so that JSON numbers
    like 0.4 arrive as the decimal 0.4, not its binary expansion.  The
    result is quantized to 4 fractional digits.
    """
    try:
        if isinstance(raw, Decimal):
            value = raw
        elif isinstance(raw, bool):
            raise ValidationFailed("expected a number", pointer=field)
        elif isinstance(raw, (int, float, str)):
            value = Decimal(str(raw).strip())
        else:
            raise ValidationFailed(f"expected a number, got {type(raw).__name__}", pointer=field)
    except (InvalidOperation, ValueError):
        raise ValidationFailed(f"not a valid amount: {raw!r}", pointer=field)
    if not value.is_finite():
        raise ValidationFailed("amount must be finite", pointer=field)
    return value.quantize(MONEY_QUANTUM, context=DECIMAL_CONTEXT)


def format_money(value: Decimal) -> str:
    """Canonical wire rendering of a money amount: fixed 4 fractional digits."""
    return format(value.quantize(MONEY_QUANTUM, context=DECIMAL_CONTEXT), "f")


def parse_fraction(raw, field: str = "fraction") -> Decimal:
    """Parse a dimensionless fraction, canonicalized to 6 fractional digits."""
    try:
        if isinstance(raw, Decimal):
            value = raw
        elif isinstance(raw, bool):
            raise ValidationFailed("expected a number", pointer=field)
        elif isinstance(raw, (int, float, str)):
            value = Decimal(str(raw).strip())
        else:
            raise ValidationFailed(f"expected a number, got {type(raw).__name__}", pointer=field)
    except (InvalidOperation, ValueError):
        raise ValidationFailed(f"not a valid fraction: {raw!r}", pointer=field)
    if not value.is_finite():
        raise ValidationFailed("fraction must be finite", pointer=field)
    return value.quantize(FRACTION_QUANTUM, context=DECIMAL_CONTEXT)


def format_number(value: Decimal) -> str:
    """Render a decimal without exponent notation or spurious trailing zeros."""
    normalized = value.normalize(context=DECIMAL_CONTEXT)
    return format(normalized, "f")


@total_ordering
@dataclass(frozen=True)
class TimePoint:
    """A point on a project's time axis: a calendar date or an ordinal period."""

    value: date | Decimal

    @classmethod
    def parse(cls, raw, field: str = "t") -> "TimePoint":
        if isinstance(raw, TimePoint):
            return raw
        if isinstance(raw, date):
            return cls(raw)
        if isinstance(raw, Decimal):
            return cls(raw)
        if isinstance(raw, bool):
            raise ValidationFailed("expected a date or number", pointer=field)
        if isinstance(raw, (int, float)):
            return cls(Decimal(str(raw)))
        if isinstance(raw, str):
            text = raw.strip()
            if _ISO_DATE.match(text):
                try:
                    return cls(date.fromisoformat(text))
                except ValueError:
                    raise ValidationFailed(f"not a valid date: {raw!r}", pointer=field)
            try:
                value = Decimal(text)
            except InvalidOperation:
                raise ValidationFailed(f"not a valid time point: {raw!r}", pointer=field)
            if not value.is_finite():
                raise ValidationFailed("time point must be finite", pointer=field)
            return cls(value)
        raise ValidationFailed(f"not a valid time point: {raw!r}", pointer=field)

    @property
    def is_date(self) -> bool:
        return isinstance(self.value, date)

    def ordinal(self) -> Decimal:
        """Numeric position on the axis (dates map to day ordinals)."""
        if isinstance(self.value, date):
            return Decimal(self.value.toordinal())
        return self.value

    @classmethod
    def from_ordinal(cls, ordinal: float | Decimal, like: "TimePoint") -> "TimePoint":
        """Build a point at a numeric position using the axis kind of ``like``.

        Date axes round up to the next whole day (a forecast finish never
        lands earlier than the fractional estimate).
        """
        value = Decimal(str(ordinal)) if not isinstance(ordinal, Decimal) else ordinal
        if like.is_date:
            whole = int(value)
            if value != whole:
                whole += 1
            return cls(date.fromordinal(whole))
        return cls(value)

    def canonical(self) -> str:
        if isinstance(self.value, date):
            return self.value.isoformat()
        return format_number(self.value)

    def _check_same_axis(self, other: "TimePoint") -> None:
        if self.is_date != other.is_date:
            raise ValidationFailed(
                "cannot compare a calendar date with an ordinal period; "
                "a project must use one time-axis kind throughout"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimePoint):
            return NotImplemented
        return self.is_date == other.is_date and self.value == other.value

    def __lt__(self, other: "TimePoint") -> bool:
        if not isinstance(other, TimePoint):
            return NotImplemented
        self._check_same_axis(other)
        return self.value < other.value

    def __hash__(self) -> int:
        return hash((self.is_date, self.value))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"TimePoint({self.canonical()})"


def money_div(numerator: Decimal, denominator: Decimal) -> Decimal:
    """Decimal division in the shared high-precision context."""
    with localcontext(DECIMAL_CONTEXT):
        return numerator / denominator
