"""Parsing and formatting of exact rationals.

Rationals are plain :class:`fractions.Fraction` values throughout the
package; ``Fraction`` already maintains the canonical reduced form with a
positive denominator.  These helpers exist so file formats and the CLI
share one strict "p/q" syntax instead of ``Fraction``'s more permissive
constructor (which would silently accept floats or decimal strings).
"""

from __future__ import annotations

import re
from fractions import Fraction

_RATIONAL_RE = re.compile(r"^(-?\d+)(?:/(\d+))?$")


class RationalParseError(ValueError):
    """Raised for malformed rational literals (bad syntax or zero denominator)."""


def parse_rational(text: str | int) -> Fraction:
    """Parse ``"p/q"`` or an integer literal into a Fraction.

    Floats and anything else are rejected: exactness end-to-end.
    """
    if isinstance(text, bool):
        raise RationalParseError(f"not a rational literal: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise RationalParseError(f"not a rational literal: {text!r}")
    m = _RATIONAL_RE.match(text.strip())
    if m is None:
        raise RationalParseError(f"malformed rational {text!r} (expected 'p' or 'p/q')")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise RationalParseError(f"zero denominator in rational {text!r}")
    return Fraction(num, den)


def format_rational(q: Fraction) -> str:
    """Render a Fraction as ``"p"`` or ``"p/q"`` (exact round-trip with parse)."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"
