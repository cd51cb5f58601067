"""Human-readable durations and byte counts."""

from __future__ import annotations

import math

# Julian year; thresholds are fixed so rendered output is reproducible.
YEAR_S = 365.25 * 86400.0
DURATION_UNITS = (
    ("seconds", 1.0),
    ("minutes", 60.0),
    ("hours", 3600.0),
    ("days", 86400.0),
    ("years", YEAR_S),
    ("centuries", 100 * YEAR_S),
)
SCALE_WORDS = ((1e12, "trillion"), (1e9, "billion"), (1e6, "million"), (1e3, "thousand"))
BYTE_UNITS = ("B", "KB", "MB", "GB", "TB", "PB", "EB", "ZB", "YB")


def duration_parts(seconds: float) -> tuple[float, str]:
    """Largest unit in which ``seconds`` is at least 1 (centuries at most)."""
    if not seconds >= 0:
        raise ValueError("duration must be non-negative")
    name, size = DURATION_UNITS[0]
    for unit, unit_size in DURATION_UNITS:
        if seconds >= unit_size:
            name, size = unit, unit_size
    return seconds / size, name


def humanize_duration(seconds: float) -> str:
    """``8.13e13`` -> ``'25,762 centuries (25.8 thousand centuries)'``."""
    if math.isinf(seconds):
        return "beyond floating-point range"
    value, unit = duration_parts(seconds)
    text = f"{value:,.0f} {unit}" if value >= 100 else f"{value:.3g} {unit}"
    for size, word in SCALE_WORDS:
        if value >= size:
            text += f" ({value / size:.1f} {word} {unit})"
            break
    return text


def humanize_bytes(n_bytes: float) -> str:
    """Decimal (SI) units: 7.43e21 bytes -> ``'7.43 ZB'``."""
    if math.isinf(n_bytes):
        return "beyond floating-point range"
    exp = 0
    while exp < len(BYTE_UNITS) - 1 and n_bytes >= 1000.0 ** (exp + 1):
        exp += 1
    return f"{n_bytes / 1000.0 ** exp:.3g} {BYTE_UNITS[exp]}"
