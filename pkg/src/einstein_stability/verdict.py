"""One-sided verdicts: a negative form value proves instability, nothing else is claimed."""

from __future__ import annotations

import enum

from .exactnum import is_exact

# float verdicts need value < -FLOAT_MARGIN * tol
FLOAT_MARGIN = 10
DEFAULT_TOL = 1e-10


class Verdict(str, enum.Enum):
    UNSTABLE = "Unstable"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self) -> str:
        return self.value


def sign_verdict(value, tol: float = DEFAULT_TOL) -> Verdict:
    """Unstable iff ``value`` is strictly negative.

    Rational values are judged exactly. Float values must clear a margin of
    ``10 * tol`` so roundoff never produces an instability claim.
    """
    if is_exact(value):
        return Verdict.UNSTABLE if value < 0 else Verdict.INCONCLUSIVE
    return Verdict.UNSTABLE if value < -FLOAT_MARGIN * tol else Verdict.INCONCLUSIVE


def within_margin(value, tol: float = DEFAULT_TOL) -> bool:
    """True for float values in the ambiguous band ``(-10 tol, 0)``."""
    return not is_exact(value) and -FLOAT_MARGIN * tol <= value < 0
