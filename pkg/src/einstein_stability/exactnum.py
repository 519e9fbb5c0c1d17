"""Arithmetic kernel: rationals, small symmetric matrices, inertia, damped Newton.

Rationals are :class:`fractions.Fraction`; every formula in the package is
written against plain Python arithmetic so the same code runs on exact
``Fraction`` inputs and on ``float`` inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ConstructionError, MaxIterationsExceeded, SingularJacobian

Scalar = Fraction | float | int

DEFAULT_FLOAT_ZERO_TOL = 1e-9


def is_exact(value) -> bool:
    return isinstance(value, Rational)


def all_exact(values: Iterable) -> bool:
    return all(is_exact(v) for v in values)


def to_fraction(value) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        # JSON numbers such as 0.5 arrive as floats; keep their exact binary value
        return Fraction(value)
    raise TypeError(f"cannot convert {value!r} to a rational")


def div(num, den):
    """``num / den`` that stays rational when both operands are rational."""
    if is_exact(num) and is_exact(den):
        return Fraction(num) / Fraction(den)
    return num / den


def parse_scalar(value, exact: bool = True) -> Scalar:
    if exact:
        return to_fraction(value)
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    return float(value)


@dataclass(frozen=True)
class Inertia:
    n_neg: int
    n_zero: int
    n_pos: int

    @property
    def dim(self) -> int:
        return self.n_neg + self.n_zero + self.n_pos

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_neg, self.n_zero, self.n_pos)


class SymMatrix:
    """Immutable dense symmetric matrix with exact or float entries.

    Symmetry is checked at construction: exactly for rational entries and
    bitwise for floats.
    """

    __slots__ = ("_rows",)

    def __init__(self, rows: Sequence[Sequence[Scalar]]):
        rows = tuple(tuple(row) for row in rows)
        dim = len(rows)
        for row in rows:
            if len(row) != dim:
                raise ConstructionError("matrix must be square")
        for i in range(dim):
            for j in range(i + 1, dim):
                if rows[i][j] != rows[j][i]:
                    raise ConstructionError(
                        f"matrix is not symmetric at ({i}, {j}): "
                        f"{rows[i][j]!r} != {rows[j][i]!r}"
                    )
        object.__setattr__(self, "_rows", rows)

    def __setattr__(self, name, value):
        raise AttributeError("SymMatrix is immutable")

    @classmethod
    def diag(cls, values: Sequence[Scalar]) -> "SymMatrix":
        zero = Fraction(0) if all_exact(values) else 0.0
        n = len(values)
        return cls([[values[i] if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def from_numpy(cls, array: np.ndarray) -> "SymMatrix":
        return cls(array.tolist())

    @property
    def dim(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> tuple[tuple[Scalar, ...], ...]:
        return self._rows

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for row in self._rows for v in row)

    def __getitem__(self, index: tuple[int, int]) -> Scalar:
        i, j = index
        return self._rows[i][j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self) -> int:
        return hash(self._rows)

    def __repr__(self) -> str:
        return f"SymMatrix({[list(r) for r in self._rows]!r})"

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self._rows], dtype=float)

    def tolist(self) -> list[list[Scalar]]:
        return [list(row) for row in self._rows]

    def congruent(self, p: Sequence[Sequence[Scalar]]) -> "SymMatrix":
        """Return ``Pᵀ M P``."""
        n = self.dim
        k = len(p[0]) if n else 0
        mp = [[sum(self._rows[i][l] * p[l][j] for l in range(n)) for j in range(k)] for i in range(n)]
        out = [[sum(p[l][a] * mp[l][b] for l in range(n)) for b in range(k)] for a in range(k)]
        # force bitwise symmetry for float inputs
        for a in range(k):
            for b in range(a + 1, k):
                out[b][a] = out[a][b]
        return SymMatrix(out)

    def quadratic_form(self, v: Sequence[Scalar]) -> Scalar:
        n = self.dim
        return sum(v[i] * self._rows[i][j] * v[j] for i in range(n) for j in range(n))


def _inertia_exact(m: SymMatrix) -> Inertia:
    # symmetric-pivoted LDLᵀ with 1x1 / 2x2 blocks; only the signs of D matter
    a = [list(map(Fraction, row)) for row in m.rows]
    active = list(range(m.dim))
    neg = pos = 0
    while active:
        diag_idx = max(active, key=lambda i: abs(a[i][i]))
        if a[diag_idx][diag_idx] != 0:
            p = diag_idx
            d = a[p][p]
            if d > 0:
                pos += 1
            else:
                neg += 1
            active.remove(p)
            col = {i: a[i][p] for i in active}
            for i in active:
                if col[i] == 0:
                    continue
                f = col[i] / d
                for j in active:
                    a[i][j] -= f * col[j]
            continue
        # zero diagonal: look for an off-diagonal pivot
        pair = None
        best = Fraction(0)
        for ii, i in enumerate(active):
            for j in active[ii + 1 :]:
                if abs(a[i][j]) > best:
                    best, pair = abs(a[i][j]), (i, j)
        if pair is None:
            break
        i0, j0 = pair
        # block [[0, c], [c, 0]] has one positive and one negative eigenvalue
        pos += 1
        neg += 1
        c = a[i0][j0]
        active.remove(i0)
        active.remove(j0)
        u = {k: a[k][i0] for k in active}
        w = {k: a[k][j0] for k in active}
        # Schur complement: A - [u w] D⁻¹ [u w]ᵀ with D⁻¹ = [[0, 1/c], [1/c, 0]]
        for k in active:
            for l in active:
                a[k][l] -= (u[k] * w[l] + w[k] * u[l]) / c
    zero = m.dim - neg - pos
    return Inertia(neg, zero, pos)


def inertia(m: SymMatrix, zero_tol: float | None = None) -> Inertia:
    """Signature of ``m`` by Sylvester's law of inertia.

    Exact matrices go through a pivoted LDLᵀ factorisation over the
    rationals and ``zero_tol`` must be 0 or None. Float matrices use
    eigenvalues; ``|λ| <= zero_tol`` counts as zero, with the default
    tolerance 1e-9 relative to the largest absolute entry.
    """
    if m.dim == 0:
        return Inertia(0, 0, 0)
    if m.exact:
        if zero_tol not in (None, 0):
            raise ValueError("zero_tol must be 0 for exact matrices")
        return _inertia_exact(m)
    arr = m.to_numpy()
    if zero_tol is None:
        zero_tol = DEFAULT_FLOAT_ZERO_TOL * float(np.max(np.abs(arr)))
    eig = np.linalg.eigvalsh(arr)
    neg = int(np.sum(eig < -zero_tol))
    pos = int(np.sum(eig > zero_tol))
    return Inertia(neg, m.dim - neg - pos, pos)


def negative_direction(m: SymMatrix) -> list[Scalar] | None:
    """A vector ``v`` with ``vᵀ m v < 0``, or None if ``m`` has no negative direction.

    Basis vectors and pairwise sums/differences are tried first; otherwise the
    eigenvector of the smallest eigenvalue is used, rounded to a small-denominator
    rational for exact matrices and re-checked.
    """
    n = m.dim
    exact = m.exact
    unit = Fraction(1) if exact else 1.0
    zero = unit * 0
    for i in range(n):
        if m[i, i] < 0:
            return [unit if j == i else zero for j in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            for sign in (1, -1):
                v = [zero] * n
                v[i], v[j] = unit, sign * unit
                if m.quadratic_form(v) < 0:
                    return v
    if n == 0:
        return None
    eig, vec = np.linalg.eigh(m.to_numpy())
    if eig[0] >= 0:
        return None
    v = vec[:, 0]
    v = v / np.max(np.abs(v))
    for denom in (10**3, 10**6, 10**9):
        cand = [Fraction(float(c)).limit_denominator(denom) for c in v] if exact else [float(c) for c in v]
        if m.quadratic_form(cand) < 0:
            return cand
        if not exact:
            break
    return None


def mat_inverse(rows: Sequence[Sequence[Scalar]]) -> list[list[Scalar]]:
    """Inverse of a small square matrix; Gauss-Jordan over Q when entries are rational."""
    n = len(rows)
    if not all(all_exact(row) for row in rows):
        return np.linalg.inv(np.array(rows, dtype=float)).tolist()
    a = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(rows)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if a[i][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        inv_p = 1 / a[col][col]
        a[col] = [v * inv_p for v in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [v - f * w for v, w in zip(a[i], a[col])]
    return [row[n:] for row in a]


def matrix_rank(vectors: Sequence[Sequence[Scalar]]) -> int:
    """Exact rank over Q (floats are converted exactly)."""
    rows = [[Fraction(v) for v in vec] for vec in vectors]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col] / rows[rank][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def _fd_jacobian(residual, x: np.ndarray, f0: np.ndarray) -> np.ndarray:
    jac = np.empty((f0.size, x.size))
    for j in range(x.size):
        h = 1e-7 * max(1.0, abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        jac[:, j] = (np.asarray(residual(xp), dtype=float) - np.asarray(residual(xm), dtype=float)) / (2 * h)
    return jac


def newton_solve(
    residual: Callable[[np.ndarray], Sequence[float]],
    start: Sequence[float],
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None,
    tol: float = 1e-12,
    max_iter: int = 50,
    max_halvings: int = 30,
) -> np.ndarray:
    """Damped Newton iteration for a square system ``residual(x) = 0``.

    Without ``jacobian`` a central finite-difference Jacobian is used. A
    full step that increases ``‖residual‖∞`` is halved up to
    ``max_halvings`` times. A singular Jacobian met mid-run falls back to
    the minimum-norm least-squares step; ``SingularJacobian`` is raised only
    when the Jacobian at the start point is singular or non-finite.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    x = np.atleast_1d(np.asarray(start, dtype=float)).copy()

    f = np.atleast_1d(np.asarray(residual(x), dtype=float))
    norm = float(np.max(np.abs(f)))
    for it in range(max_iter):
        if norm <= tol:
            break
        jac = np.atleast_2d(jacobian(x) if jacobian is not None else _fd_jacobian(residual, x, f))
        if not np.all(np.isfinite(jac)):
            raise SingularJacobian(x, norm)
        try:
            if np.linalg.cond(jac) > 1e14:
                raise np.linalg.LinAlgError
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            if it == 0:
                raise SingularJacobian(x, norm) from None
            step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        t = 1.0
        for _ in range(max_halvings + 1):
            trial = x + t * step
            with np.errstate(all="ignore"):
                ft = np.atleast_1d(np.asarray(residual(trial), dtype=float))
            nt = float(np.max(np.abs(ft))) if np.all(np.isfinite(ft)) else math.inf
            if nt < norm:
                break
            t *= 0.5
        else:
            # no decrease along the step; keep the least-bad trial so the iteration can escape
            if not math.isfinite(nt):
                continue
        x, f, norm = trial, ft, nt
    # post-check on a fresh evaluation
    final = float(np.max(np.abs(np.asarray(residual(x), dtype=float))))
    if not final <= tol:
        raise MaxIterationsExceeded(x, final)
    return x
