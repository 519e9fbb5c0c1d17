"""Normal homogeneous metrics on Sp(mq)/(Sp(q) × … × Sp(q)) fibered over Sp(mq)/(Sp(kq) × Sp(q)^{m-k}).

Everything here is exact rational arithmetic; the verdict thresholds are
sharp integer inequalities and floats are never used.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidParams, StabilityError
from .submersion import THEOREM1_WITNESS
from .verdict import Verdict

# destabilizing projections stated for the sibling families; recorded, not computed
SIBLING_THRESHOLDS = {
    "SU(mq)/S(U(q)×…×U(q))": {"q_min": 2, "m_min": 3, "k_min": 2, "unstable_if": "m − 3 ≤ k"},
    "SO(mq)/(SO(q)×…×SO(q))": {"q_min": 4, "m_min": 3, "k_min": 2, "unstable_if": "m − 2 ≤ k"},
}


@dataclass(frozen=True)
class SpFamilyParams:
    m: int
    q: int
    k: int

    def __post_init__(self):
        if self.m < 3 or self.q < 1 or not 1 < self.k < self.m:
            raise InvalidParams(f"need m >= 3, q >= 1 and 1 < k < m; got (m, q, k) = ({self.m}, {self.q}, {self.k})")


@dataclass(frozen=True)
class SpInvariants:
    r: int
    n: int
    fiber_scal: Fraction
    base_scal: Fraction
    fiber_einstein: Fraction
    ricci_eigs: tuple[Fraction, Fraction]
    quantity: Fraction
    bracket: Fraction


def _params(p) -> SpFamilyParams:
    return p if isinstance(p, SpFamilyParams) else SpFamilyParams(*p)


def sp_invariants(p) -> SpInvariants:
    p = _params(p)
    m, q, k = p.m, p.q, p.k
    F = Fraction
    r = 2 * k * (k - 1) * q * q
    n = 2 * (m - k) * (m + k - 1) * q * q
    fiber_einstein = F(1, 4) * (1 + F(2 * q + 1, k * q + 1)) * F(k * q + 1, m * q + 1)
    fiber_scal = F(k * (k - 1) * q * q, 2 * (m * q + 1)) * (q * k + 2 * q + 2)
    ricci_eigs = (
        F(1, 4) * (1 + F(k * q + q + 1, m * q + 1)),
        F(1, 4) * (1 + F(2 * q + 1, m * q + 1)),
    )
    base_scal = F(q * q * (m - k), m * q + 1) * (
        (m + k + 1) * k * q + 2 * k + F(m - k - 1, 2) * (m * q + 2 * q + 2)
    )
    quantity = r * base_scal - 2 * n * fiber_scal
    bracket = F(1, 2) * (q * m * (m - k - 3) - 2 * q * (k - 1) - 2 * m - 2 * (k - 1))
    return SpInvariants(r, n, fiber_scal, base_scal, fiber_einstein, ricci_eigs, quantity, bracket)


def sp_prefactor(p) -> Fraction:
    p = _params(p)
    return Fraction(2 * p.k * (p.k - 1) * (p.m - p.k) * p.q**4, p.m * p.q + 1)


def sp_unsimplified_bracket(p) -> Fraction:
    p = _params(p)
    m, q, k = p.m, p.q, p.k
    return (
        (m + k + 1) * k * q + 2 * k + Fraction(m - k - 1, 2) * (m * q + 2 * q + 2)
        - (m + k - 1) * (k * q + 2 * q + 2)
    )


def base_scal_from_eigs(p, inv: SpInvariants) -> Fraction:
    """``š`` as the dimension-weighted sum of the two Ricci eigenvalues."""
    p = _params(p)
    m, q, k = p.m, p.q, p.k
    d1 = (m - k) * 4 * k * q * q
    d2 = Fraction((m - k) * (m - k - 1), 2) * 4 * q * q
    return d1 * inv.ricci_eigs[0] + d2 * inv.ricci_eigs[1]


def sp_quantity(p) -> tuple[Fraction, Fraction, Verdict]:
    """``r š − 2 n ŝ`` computed directly and as prefactor × simplified bracket.

    Returns ``(value, bracket, verdict)``; raises if the two routes disagree.
    """
    p = _params(p)
    inv = sp_invariants(p)
    factored = sp_prefactor(p) * inv.bracket
    if factored != inv.quantity or inv.bracket != sp_unsimplified_bracket(p):
        raise StabilityError(f"direct and factored forms disagree at {p}: {inv.quantity} vs {factored}")
    verdict = Verdict.UNSTABLE if inv.quantity < 0 else Verdict.INCONCLUSIVE
    return inv.quantity, inv.bracket, verdict


@dataclass(frozen=True)
class SpScanRow:
    m: int
    q: int
    k: int
    value: Fraction
    bracket: Fraction
    verdict: Verdict


def sp_scan(m_max: int, q_max: int) -> list[SpScanRow]:
    """Tabulate every admissible ``(m, q, k)`` and check the stated thresholds.

    Asserts that ``k >= m − 3`` always destabilizes and that for
    ``k = m − 4`` instability is equivalent to ``10(q+1)/(q+4) < m``.
    """
    if m_max < 3 or q_max < 1:
        raise InvalidParams("need m_max >= 3 and q_max >= 1")
    rows = []
    for m in range(3, m_max + 1):
        for q in range(1, q_max + 1):
            for k in range(2, m):
                value, bracket, verdict = sp_quantity((m, q, k))
                unstable = verdict is Verdict.UNSTABLE
                if m - 3 <= k and not unstable:
                    raise StabilityError(f"threshold m − 3 <= k fails at {(m, q, k)}")
                if k == m - 4 and unstable != (Fraction(10 * (q + 1), q + 4) < m):
                    raise StabilityError(f"k = m − 4 threshold fails at {(m, q, k)}")
                rows.append(SpScanRow(m, q, k, value, bracket, verdict))
    return rows


WITNESS = THEOREM1_WITNESS
