"""Einstein Riemannian submersions with totally geodesic fibers.

An Einstein submersion ``(M^{n+r}, g) -> (B^n, ǧ)`` with Einstein constant
``E`` satisfies two trace identities tying the fiber scalar curvature ``ŝ``,
the base scalar curvature ``š`` and the O'Neill tensor norm ``‖A‖²``::

    ŝ + ‖A‖² = E r
    š - 2‖A‖² = E n

The TT-tensor ``g - ((n+r)/n) π*ǧ`` then has second-variation value
``(2(n+r)/n²)(r š - 2 n ŝ)`` per unit volume.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConstraintViolation, InvalidParams
from .exactnum import Scalar, div, is_exact
from .verdict import DEFAULT_TOL, Verdict, sign_verdict

THEOREM1_WITNESS = "g − ((n+r)/n)π*ǧ"


@dataclass(frozen=True)
class SubmersionInvariants:
    n: int
    r: int
    E: Scalar
    fiber_scal: Scalar
    base_scal: Scalar
    a_norm_sq: Scalar

    @property
    def total_scal(self) -> Scalar:
        return self.E * (self.n + self.r)

    def fiber_residual(self) -> Scalar:
        return self.fiber_scal + self.a_norm_sq - self.E * self.r

    def base_residual(self) -> Scalar:
        return self.base_scal - 2 * self.a_norm_sq - self.E * self.n


def check_einstein_invariants(n, r, E, fiber_scal, base_scal, a_norm_sq, tol=None) -> SubmersionInvariants:
    """Validate the two Einstein trace identities and return the record.

    ``tol`` defaults to 0 when every input is rational and to 1e-10
    otherwise.
    """
    if int(n) != n or n < 1 or int(r) != r or r < 1:
        raise InvalidParams("n and r must be positive integers")
    if a_norm_sq < 0:
        raise InvalidParams("‖A‖² must be non-negative")
    inv = SubmersionInvariants(int(n), int(r), E, fiber_scal, base_scal, a_norm_sq)
    exact = all(is_exact(v) for v in (E, fiber_scal, base_scal, a_norm_sq))
    if tol is None:
        tol = 0 if exact else DEFAULT_TOL
    res = inv.fiber_residual()
    if abs(res) > tol:
        raise ConstraintViolation("ŝ + ‖A‖² = E r", res)
    res = inv.base_residual()
    if abs(res) > tol:
        raise ConstraintViolation("š − 2‖A‖² = E n", res)
    return inv


def instability_bracket(inv: SubmersionInvariants) -> Scalar:
    """``r š − 2 n ŝ``; its sign decides the verdict."""
    return inv.r * inv.base_scal - 2 * inv.n * inv.fiber_scal


def theorem1_value(inv: SubmersionInvariants, tol: float = DEFAULT_TOL) -> tuple[Scalar, Verdict]:
    n, r = inv.n, inv.r
    value = div(2 * (n + r) * instability_bracket(inv), n**2)
    return value, sign_verdict(value, tol)


def theorem1_long_form(inv: SubmersionInvariants) -> Scalar:
    """Unsimplified integrand before the trace identities are substituted.

    Uses ``⟨∇π*ǧ, ∇π*ǧ⟩ = 2‖A‖²`` and ``⟨R̊π*ǧ, π*ǧ⟩ = š − 3‖A‖²``.
    """
    n, r = inv.n, inv.r
    s = inv.total_scal
    grad = 2 * inv.a_norm_sq
    curv = inv.base_scal - 3 * inv.a_norm_sq
    ratio_sq = div((n + r) ** 2, n**2) if is_exact(s) else (n + r) ** 2 / n**2
    return -2 * s + 4 * (n + r) * inv.E + ratio_sq * grad - 2 * ratio_sq * curv


def canonical_variation_value(n, r, E_hat, E_check, tol: float = DEFAULT_TOL) -> tuple[Scalar, Verdict]:
    """``r n (Ě − 2Ê)`` for Einstein fibers and base with constants ``Ê``, ``Ě``."""
    if n < 1 or r < 1:
        raise InvalidParams("n and r must be positive")
    value = r * n * (E_check - 2 * E_hat)
    return value, sign_verdict(value, tol)
