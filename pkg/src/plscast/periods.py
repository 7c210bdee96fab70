"""Quarter labels of the form ``YYYYQn``."""

from __future__ import annotations

import re

from .errors import ParseError

_QUARTER = re.compile(r"^(\d{4})Q([1-4])$")


def parse_quarter(label: str) -> int:
    """Map ``'2000Q1'`` to a consecutive integer (``year * 4 + quarter - 1``)."""
    m = _QUARTER.match(label.strip())
    if m is None:
        raise ParseError(f"malformed period {label!r}, expected YYYYQn")
    return int(m.group(1)) * 4 + int(m.group(2)) - 1


def format_quarter(ordinal: int) -> str:
    year, q = divmod(ordinal, 4)
    return f"{year:04d}Q{q + 1}"


def quarter_range(start: str, count: int) -> list[str]:
    first = parse_quarter(start)
    return [format_quarter(first + i) for i in range(count)]
