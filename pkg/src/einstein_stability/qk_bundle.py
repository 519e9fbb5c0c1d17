"""Bundles with fiber (SO(3) × … × SO(3))/ΔSO(3) over quaternionic Kähler products.

Factors have real dimension ``4 N_i`` with ``Ric(g_i) = E_i g_i`` and base
scaling ``ǧ_i = x_i g_i``. The fiber carries the normal metric induced by
``λ_1 B ⊕ … ⊕ λ_m B`` with ``λ = Σ λ_i``. Only the closed-form expressions
of the final forms are evaluated here; the Einstein system itself is not
solved.

Two forms are exposed and kept verbatim, including their different
normalisations: the pairwise form on ``π*(ǧ_i/4N_i − ǧ_j/4N_j)`` and the
telescoped μ-form on ``Σ μ_i π*(ǧ_i/4N_i − ǧ_{i+1}/4N_{i+1})``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import IndexOutOfRange, InvalidParams, MRequiresAtLeastThree, StabilityError
from .exactnum import Inertia, Scalar, SymMatrix, all_exact, div, inertia
from .verdict import DEFAULT_TOL, Verdict, sign_verdict


@dataclass(frozen=True)
class QkConfig:
    N: tuple[int, ...]
    E: tuple[Scalar, ...]
    x: tuple[Scalar, ...]
    lam: tuple[Scalar, ...]

    def __post_init__(self):
        m = len(self.N)
        if not (len(self.E) == len(self.x) == len(self.lam) == m):
            raise InvalidParams("N, E, x and lam must have equal length")
        if m < 2:
            raise InvalidParams("at least two quaternionic Kähler factors are required")
        if any(int(n) != n or n < 2 for n in self.N):
            raise InvalidParams("quaternionic Kähler factors need N_i >= 2")
        if any(v <= 0 for v in (*self.E, *self.x, *self.lam)):
            raise InvalidParams("E_i, x_i and λ_i must be positive")

    @classmethod
    def build(cls, N, E, x, lam) -> "QkConfig":
        return cls(tuple(int(n) for n in N), tuple(E), tuple(x), tuple(lam))

    @property
    def m(self) -> int:
        return len(self.N)

    @property
    def lam_total(self) -> Scalar:
        return sum(self.lam)

    def require_m3(self):
        if self.m < 3:
            raise MRequiresAtLeastThree("the closed forms need m >= 3 factors")


def qk_a_norm_sq(config: QkConfig, i: int) -> Scalar:
    """``‖A^{(i)}‖² = (3/2) 4N_i E_i² λ_i (1 − λ_i/λ) / ((N_i+2)² x_i²)``."""
    if not 0 <= i < config.m:
        raise IndexOutOfRange(f"factor index {i} out of range")
    N, E, x, li = config.N[i], config.E[i], config.x[i], config.lam[i]
    lam = config.lam_total
    return div(3, 2) * div(4 * N * E * E, (N + 2) ** 2 * x * x) * li * (1 - div(li, lam))


def _curvature_part(config: QkConfig, i: int) -> Scalar:
    # E_i² λ_i / ((N_i+2)² x_i²)
    N, E, x, li = config.N[i], config.E[i], config.x[i], config.lam[i]
    return div(E * E * li, (N + 2) ** 2 * x * x)


def qk_pairwise_value(config: QkConfig, i: int, j: int, tol: float = DEFAULT_TOL) -> tuple[Scalar, Verdict]:
    config.require_m3()
    m = config.m
    if not (0 <= i < m and 0 <= j < m) or i == j:
        raise IndexOutOfRange("need two distinct factor indices")
    lam = config.lam_total
    value = 0
    for k in (i, j):
        N, lk = config.N[k], config.lam[k]
        value -= div(1, 2 * N) * (div(1, 4 * lk) + div(1, 2 * lam))
        value -= div(1, 4 * N) * _curvature_part(config, k) * (4 * N - 6 * (1 - div(lk, lam)))
    return value, sign_verdict(value, tol)


def qk_mu_form_value(config: QkConfig, mu: Sequence[Scalar]) -> Scalar:
    config.require_m3()
    m = config.m
    if len(mu) != m - 1:
        raise InvalidParams(f"μ must have m − 1 = {m - 1} entries")
    lam = config.lam_total
    padded = [0, *mu, 0]
    value = 0
    for k in range(m):
        d = padded[k + 1] - padded[k]
        if d == 0:
            continue
        N, lk = config.N[k], config.lam[k]
        value -= div(d * d, 2 * N * N) * (div(1, 4 * lk) - div(1, 2 * lam))
        value -= div(d * d, 2 * N) * _curvature_part(config, k) * (2 * N - 3 * (1 - div(lk, lam)))
    return value


@dataclass
class QkAnalysis:
    Q: SymMatrix
    inertia: Inertia
    verdict: Verdict
    all_lambda_small: bool
    qualified: bool
    note: str | None = None

    @property
    def coindex_lower_bound(self) -> int:
        return self.inertia.n_neg


def _mu_matrix(config: QkConfig) -> SymMatrix:
    # polarisation of a quadratic form that is diagonal in the differences
    k = config.m - 1
    exact = all_exact((*config.E, *config.x, *config.lam))
    zero = Fraction(0) if exact else 0.0
    unit = Fraction(1) if exact else 1.0
    rows = [[zero] * k for _ in range(k)]
    for a in range(k):
        ea = [zero] * k
        ea[a] = unit
        rows[a][a] = qk_mu_form_value(config, ea)
    for a in range(k):
        for b in range(a + 1, k):
            eab = [zero] * k
            eab[a] = unit
            eab[b] = unit
            val = (qk_mu_form_value(config, eab) - rows[a][a] - rows[b][b]) / 2
            rows[a][b] = rows[b][a] = val
    return SymMatrix(rows)


def qk_analyze(config: QkConfig) -> QkAnalysis:
    """Matrix of the μ-form, its inertia and the coindex verdict.

    When ``λ > 2λ_i`` for every factor the form is negative definite, so
    ``n_neg = m − 1`` is asserted; otherwise the computed inertia is reported
    as is and the verdict is marked qualified.
    """
    config.require_m3()
    Q = _mu_matrix(config)
    inert = inertia(Q)
    lam = config.lam_total
    small = all(lam > 2 * li for li in config.lam)
    note = None
    if small:
        if inert.n_neg != config.m - 1:
            raise StabilityError(f"μ-form should be negative definite when λ > 2λ_i, got {inert}")
    else:
        note = "some λ_i >= λ/2: negativity of the μ-form is not guaranteed; inertia reported as computed"
    verdict = Verdict.UNSTABLE if inert.n_neg > 0 else Verdict.INCONCLUSIVE
    return QkAnalysis(Q, inert, verdict, small, not small, note)
