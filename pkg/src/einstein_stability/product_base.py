"""Stability forms for TT-tensors pulled back from a Riemannian-product base.

For a base ``B = B_1 × … × B_m`` the tensors ``π*(ǧ_p/n_p)`` are mutually
orthogonal for both the rough Laplacian and curvature parts of the stability
operator, so on combinations ``Σ c_p π*(ǧ_p/n_p)`` with ``Σ c_p = 0`` the
form is diagonal: ``Σ c_p² d_p`` with ``d_p = (8‖A^{(p)}‖² − 2 s_p)/n_p²``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import IndexOutOfRange, InvalidParams, SpanDependent, SpanNotTraceFree
from .exactnum import Inertia, Scalar, SymMatrix, all_exact, div, inertia, matrix_rank
from .verdict import DEFAULT_TOL, Verdict, sign_verdict


@dataclass(frozen=True)
class BaseFactorData:
    dims: tuple[int, ...]
    scals: tuple[Scalar, ...]
    a_norm_sqs: tuple[Scalar, ...]

    def __post_init__(self):
        m = len(self.dims)
        if m < 2:
            raise InvalidParams("a product base needs at least two factors")
        if len(self.scals) != m or len(self.a_norm_sqs) != m:
            raise InvalidParams("dims, scals and a_norm_sqs must have equal length")
        if any(int(n) != n or n < 2 for n in self.dims):
            raise InvalidParams("factor dimensions must be integers >= 2")
        if any(a < 0 for a in self.a_norm_sqs):
            raise InvalidParams("‖A^(p)‖² must be non-negative")

    @classmethod
    def from_lists(cls, dims, scals, a_norm_sqs) -> "BaseFactorData":
        return cls(tuple(int(n) for n in dims), tuple(scals), tuple(a_norm_sqs))

    @property
    def m(self) -> int:
        return len(self.dims)


@dataclass(frozen=True)
class DiagonalFormData:
    d: tuple[Scalar, ...]

    @property
    def m(self) -> int:
        return len(self.d)


def _coefficient(n: int, scal, a_norm_sq):
    return div(8 * a_norm_sq - 2 * scal, n * n)


def diagonal_coefficients(data: BaseFactorData) -> DiagonalFormData:
    return DiagonalFormData(
        tuple(_coefficient(n, s, a) for n, s, a in zip(data.dims, data.scals, data.a_norm_sqs))
    )


def pairwise_value(data: BaseFactorData, p: int, q: int, tol: float = DEFAULT_TOL) -> tuple[Scalar, Verdict]:
    """Form value on ``π*(ǧ_p/n_p − ǧ_q/n_q)``; ``p``, ``q`` are 0-based."""
    m = data.m
    if not (0 <= p < m and 0 <= q < m):
        raise IndexOutOfRange(f"factor indices must lie in [0, {m})")
    if p == q:
        raise IndexOutOfRange("p and q must differ")
    np_, nq = data.dims[p], data.dims[q]
    sp, sq = data.scals[p], data.scals[q]
    ap, aq = data.a_norm_sqs[p], data.a_norm_sqs[q]
    value = -div(2 * sp, np_**2) - div(2 * sq, nq**2) + div(8 * ap, np_**2) + div(8 * aq, nq**2)
    return value, sign_verdict(value, tol)


def pairwise_witness(p: int, q: int) -> str:
    return f"π*(ǧ_{p + 1}/n_{p + 1} − ǧ_{q + 1}/n_{q + 1})"


def difference_basis(m: int, count: int | None = None) -> list[list[int]]:
    """Consecutive differences ``e_p − e_{p+1}``; the first ``count`` of them."""
    count = m - 1 if count is None else count
    if not 0 <= count <= m - 1:
        raise InvalidParams(f"at most {m - 1} difference directions exist")
    return [[1 if j == i else -1 if j == i + 1 else 0 for j in range(m)] for i in range(count)]


def coindex_lower_bound(
    d: DiagonalFormData, span: Sequence[Sequence[Scalar]] | None = None
) -> tuple[SymMatrix, Inertia]:
    """Restrict ``Σ c_p² d_p`` to ``span`` and count its negative directions.

    ``span`` defaults to the consecutive-difference basis. Each vector must
    have zero entry sum, and the vectors must be linearly independent.
    """
    m = d.m
    span = difference_basis(m) if span is None else [list(v) for v in span]
    for vec in span:
        if len(vec) != m:
            raise InvalidParams(f"span vectors must have {m} entries")
        total = sum(vec)
        slack = 0 if all_exact(vec) else 1e-12 * max(abs(v) for v in vec)
        if abs(total) > slack:
            raise SpanNotTraceFree(f"span vector {vec} does not sum to zero")
    if span and matrix_rank(span) < len(span):
        raise SpanDependent("span vectors are linearly dependent")
    k = len(span)
    q = [[sum(span[a][p] * d.d[p] * span[b][p] for p in range(m)) for b in range(k)] for a in range(k)]
    for a in range(k):
        for b in range(a + 1, k):
            q[b][a] = q[a][b]
    if not all_exact(d.d) or not all(all_exact(v) for v in span):
        q = [[float(v) for v in row] for row in q]
    mat = SymMatrix(q)
    return mat, inertia(mat)
