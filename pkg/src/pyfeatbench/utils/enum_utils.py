"""Utilities to handle Enums."""

from __future__ import annotations

import enum


class IntEnumMixin(enum.IntEnum):
    """Mixin class to handle missing enum values.

    Unknown integer values resolve to a pseudo-member named "UNKNOWN" carrying
    the missing value, so process exit codes from foreign tools never raise.
    """

    @classmethod
    def _missing_(cls: type[enum.IntEnum], value: object) -> enum.IntEnum:
        """Handle missing enum values by returning member with UNKNOWN name."""
        for member in cls:
            if member.value == value:
                return member
        unknown_enum_val = int.__new__(cls, value)  # type: ignore[call-overload]
        unknown_enum_val._name_ = 'UNKNOWN'
        unknown_enum_val._value_ = value  # type: ignore[assignment]
        unknown_enum_val.__objclass__ = cls.__class__  # type: ignore[assignment]
        return unknown_enum_val


class CaseInsensitiveStrEnum(enum.StrEnum):
    """StrEnum that resolves values regardless of case and surrounding space.

    Method names arrive from the command line and from configuration files
    as `fast`, `FAST` or `Fast`; all resolve to the same member.

    Example:
        >>> DetectorTypes('orb')
        <DetectorTypes.ORB: 'ORB'>
    """

    @classmethod
    def _missing_(cls, value: object) -> CaseInsensitiveStrEnum | None:
        """Look the value up case-insensitively, None when nothing matches."""
        if not isinstance(value, str):
            return None
        folded = value.strip().casefold()
        for member in cls:
            if member.value.casefold() == folded or member.name.casefold() == folded:
                return member
        return None
