"""Backport of ``enum.StrEnum`` (stdlib from Python 3.11) for Python 3.10."""
from enum import Enum

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    class StrEnum(str, Enum):
        """Same behavior as the 3.11 stdlib ``StrEnum``: ``str()``/``format()`` give the value."""

        def __new__(cls, *values):
            value = str(*values)
            member = str.__new__(cls, value)
            member._value_ = value
            return member

        __str__ = str.__str__
        __format__ = str.__format__

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()

__all__ = ["StrEnum"]
