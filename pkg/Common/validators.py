"""
Shared validators for pipeline inputs and configuration values
"""

import math
from django.core.exceptions import ValidationError
from django.utils.deconstruct import deconstructible


@deconstructible
class IntervalValidator:
    """
    Validates that a number lies in an interval
    The upper bound is inclusive unless upper_open is set
    """

    code = "out_of_range"

    def __init__(self, lower, upper, upper_open=False, name="value"):
        self.lower = lower
        self.upper = upper
        self.upper_open = upper_open
        self.name = name

    def __call__(self, value):
        if value is None or not math.isfinite(value):
            raise ValidationError(
                f"{self.name} must be a finite number, got {value!r}", code=self.code
            )

        too_high = value >= self.upper if self.upper_open else value > self.upper
        if value < self.lower or too_high:
            closing = ")" if self.upper_open else "]"
            raise ValidationError(
                f"{self.name} must be in [{self.lower}, {self.upper}{closing}, got {value}",
                code=self.code,
            )

    def __eq__(self, other):
        return (
            isinstance(other, IntervalValidator)
            and self.lower == other.lower
            and self.upper == other.upper
            and self.upper_open == other.upper_open
        )


validate_probability = IntervalValidator(0.0, 1.0, name="probability")
validate_fraction = IntervalValidator(0.0, 1.0, upper_open=True, name="fraction")


def validate_non_negative(value, name="value"):
    """Validate that a number is finite and >= 0"""
    if value is None or not math.isfinite(value) or value < 0:
        raise ValidationError(f"{name} must be finite and non-negative, got {value!r}")


def validate_nonempty(items, name="sequence"):
    """Validate that a sized collection has at least one element"""
    if items is None or len(items) == 0:
        raise ValidationError(f"{name} must not be empty")


def validate_same_length(first, second, name="inputs"):
    """Validate that two parallel collections line up"""
    if len(first) != len(second):
        raise ValidationError(
            f"{name} have different lengths: {len(first)} != {len(second)}"
        )
