"""Pointwise algebra of Einstein principal circle bundles.

Conventions: ``ω`` is the curvature 2-form on the base as a skew matrix in
an orthonormal frame, norms are full tensor norms (``‖ω‖² = Σ_ij ω_ij²``),
and ``ȟ_ij = Σ_k ω_ik ω_jk``. In the frame that puts ``ω`` in block normal
form, ``ȟ = diag(b_1, b_1, …, b_m, b_m[, 0])`` with ``b_i ≥ 0``.

Every correction tensor is computed twice: by the literal index sum and by
closed matrix products. The index sum is the reference.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ConstraintViolation, ConstructionError, InvalidParams, NotOnSimplex, PairingOutOfRange, StabilityError
from .exactnum import Scalar, SymMatrix, all_exact, div, is_exact
from .verdict import DEFAULT_TOL, Verdict, sign_verdict

CIRCLE_WITNESS = "π*(ȟ − (‖ω‖²/n)ǧ)"
KAHLER_WITNESS = "π*ȟ with ȟ(X, Y) = η(J′X, Y), η a harmonic (1,1)-form orthogonal to the Kähler form"
FLOAT_AGREEMENT = 1e-12


def _as_array(rows) -> np.ndarray:
    rows = [list(r) for r in rows]
    if all(all_exact(r) for r in rows):
        return np.array([[Fraction(v) for v in r] for r in rows], dtype=object)
    return np.array(rows, dtype=float)


@dataclass(frozen=True, eq=False)
class PointwiseTensorPair:
    n: int
    omega: np.ndarray
    hcheck: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParams("n must be at least 2")
        if self.omega.shape != (self.n, self.n) or self.hcheck.shape != (self.n, self.n):
            raise ConstructionError("omega and hcheck must be n × n")
        for i in range(self.n):
            for j in range(self.n):
                if self.omega[i, j] != -self.omega[j, i]:
                    raise ConstructionError("omega must be skew-symmetric")
                if self.hcheck[i, j] != self.hcheck[j, i]:
                    raise ConstructionError("hcheck must be symmetric")

    @classmethod
    def build(cls, omega, hcheck) -> "PointwiseTensorPair":
        w = _as_array(omega)
        h = _as_array(hcheck)
        if w.dtype != h.dtype:
            w, h = w.astype(float), h.astype(float)
        return cls(w.shape[0], w, h)

    @classmethod
    def from_omega(cls, omega) -> "PointwiseTensorPair":
        """Pair with the canonical ``ȟ = ω ωᵀ``."""
        w = _as_array(omega)
        return cls(w.shape[0], w, w @ w.T)

    @property
    def exact(self) -> bool:
        return self.omega.dtype == object

    def omega_norm_sq(self) -> Scalar:
        return (self.omega * self.omega).sum()

    def h_norm_sq(self) -> Scalar:
        return (self.hcheck * self.hcheck).sum()

    def h_trace_cube(self) -> Scalar:
        return np.trace(self.hcheck @ self.hcheck @ self.hcheck)


@dataclass(frozen=True)
class OmegaSpectrum:
    n: int
    b: tuple[Scalar, ...]

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParams("n must be at least 2")
        if len(self.b) != self.n // 2:
            raise InvalidParams(f"spectrum needs floor(n/2) = {self.n // 2} entries")
        if any(v < 0 for v in self.b):
            raise InvalidParams("spectrum entries b_i must be non-negative")

    @classmethod
    def build(cls, n, b) -> "OmegaSpectrum":
        return cls(int(n), tuple(b))

    def omega_norm_sq(self) -> Scalar:
        return 2 * sum(self.b)

    def h_norm_sq(self) -> Scalar:
        return 2 * sum(v * v for v in self.b)

    def h_trace_cube(self) -> Scalar:
        return 2 * sum(v**3 for v in self.b)

    def hcheck_diagonal(self) -> list[Scalar]:
        zero = Fraction(0) if all_exact(self.b) else 0.0
        out = [v for v in self.b for _ in range(2)]
        return out + [zero] * (self.n % 2)


@dataclass(frozen=True)
class CircleEinsteinData:
    n: int
    E: Scalar
    spectrum: OmegaSpectrum
    base_scal: Scalar

    @property
    def ricci_eigenvalues(self) -> list[Scalar]:
        """Eigenvalues of ``Ric(ǧ) = E ǧ + ȟ/2`` in the normal-form frame."""
        return [self.E + div(v, 2) for v in self.spectrum.hcheck_diagonal()]


def circle_einstein_check(n, E, spectrum: OmegaSpectrum | Sequence, tol=None) -> CircleEinsteinData:
    """Validate ``‖ω‖² = 4E`` and derive ``š = (n/4 + 1/2)‖ω‖²``."""
    spec = spectrum if isinstance(spectrum, OmegaSpectrum) else OmegaSpectrum.build(n, spectrum)
    if spec.n != n:
        raise InvalidParams("spectrum dimension does not match n")
    if E <= 0:
        raise InvalidParams("E must be positive")
    w2 = spec.omega_norm_sq()
    if tol is None:
        tol = 0 if (is_exact(E) and all_exact(spec.b)) else DEFAULT_TOL
    residual = w2 - 4 * E
    if abs(residual) > tol:
        raise ConstraintViolation("‖ω‖² = 4E", residual)
    base_scal = (div(n, 4) + div(1, 2)) * w2
    return CircleEinsteinData(n, E, spec, base_scal)


def _check_agree(a: np.ndarray, b: np.ndarray, what: str):
    if a.dtype == object:
        if not np.array_equal(a, b):
            raise StabilityError(f"{what}: index-sum and matrix forms disagree")
    elif not np.allclose(a, b, rtol=0, atol=FLOAT_AGREEMENT * max(1.0, float(np.max(np.abs(a))))):
        raise StabilityError(f"{what}: index-sum and matrix forms disagree")


def _sym(a: np.ndarray) -> SymMatrix:
    n = a.shape[0]
    rows = [[a[i, j] for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            rows[j][i] = rows[i][j]
    return SymMatrix(rows)


def _scaled(a: np.ndarray) -> tuple[list[list], Scalar]:
    # exact arrays become integer arrays over a common denominator; loops then run on ints
    if a.dtype != object:
        return a.tolist(), 1.0
    den = math.lcm(*(v.denominator for v in a.flat))
    return [[int(v * den) for v in row] for row in a], den


def lemma_corrections_index_sum(p: PointwiseTensorPair) -> tuple[np.ndarray, np.ndarray]:
    n = p.n
    w, dw = _scaled(p.omega)
    h, dh = _scaled(p.hcheck)
    scale = 4 * dw * dw * dh
    lap = np.empty((n, n), dtype=p.omega.dtype)
    curv = np.empty((n, n), dtype=p.omega.dtype)
    for i in range(n):
        for j in range(n):
            s_lap = 0
            s_curv = 0
            for k in range(n):
                for l in range(n):
                    # four times the summands, so integer inputs stay integral
                    s_lap += 2 * w[k][i] * w[k][l] * h[l][j] + 2 * w[k][j] * w[k][l] * h[l][i] - 2 * w[i][k] * w[j][l] * h[k][l]
                    s_curv += -2 * w[i][k] * w[j][l] * h[k][l] + w[k][j] * w[i][l] * h[k][l]
            lap[i, j] = div(s_lap, scale)
            curv[i, j] = div(s_curv, scale)
    return lap, curv


def lemma_corrections_matrix(p: PointwiseTensorPair) -> tuple[np.ndarray, np.ndarray]:
    w, h = p.omega, p.hcheck
    half = Fraction(1, 2) if p.exact else 0.5
    quarter = Fraction(1, 4) if p.exact else 0.25
    wtw = w.T @ w
    whwt = w @ h @ w.T
    lap = half * (wtw @ h) + half * (h @ wtw) - half * whwt
    curv = -half * whwt + quarter * (w @ h @ w)
    return lap, curv


def lemma_corrections(p: PointwiseTensorPair) -> tuple[SymMatrix, SymMatrix]:
    """Zeroth-order corrections of the rough Laplacian and of ``R̊`` for ``h = π*ȟ``.

    ``lap_corr_ij = Σ_kl (½ω_ki ω_kl ȟ_lj + ½ω_kj ω_kl ȟ_li − ½ω_ik ω_jl ȟ_kl)`` and
    ``curv_corr_ij = Σ_kl (−½ω_ik ω_jl ȟ_kl + ¼ω_kj ω_il ȟ_kl)``.
    """
    lap_i, curv_i = lemma_corrections_index_sum(p)
    lap_m, curv_m = lemma_corrections_matrix(p)
    _check_agree(lap_i, lap_m, "laplacian correction")
    _check_agree(curv_i, curv_m, "curvature correction")
    return _sym(lap_i), _sym(curv_i)


def prop46_index_sum(p: PointwiseTensorPair) -> Scalar:
    n = p.n
    w, dw = _scaled(p.omega)
    h, dh = _scaled(p.hcheck)
    total = 0
    for i, j, k, l in itertools.product(range(n), repeat=4):
        total += w[k][i] * w[k][l] * h[l][j] * h[i][j] + w[i][k] * w[j][l] * h[k][l] * h[i][j]
    return div(total, dw * dw * dh * dh)


def prop46_trace(p: PointwiseTensorPair) -> Scalar:
    w, h = p.omega, p.hcheck
    return np.trace(w.T @ w @ h @ h) + np.trace(w @ h @ w.T @ h)


def prop46_correction(p: PointwiseTensorPair) -> Scalar:
    """Total-space minus base stability integrand for ``h = π*ȟ``."""
    a = prop46_index_sum(p)
    b = prop46_trace(p)
    if p.exact:
        if a != b:
            raise StabilityError("pointwise correction: index-sum and trace forms disagree")
    elif abs(a - b) > FLOAT_AGREEMENT * max(1.0, abs(a)):
        raise StabilityError("pointwise correction: index-sum and trace forms disagree")
    return a


def pairing(a: SymMatrix | np.ndarray, b: np.ndarray) -> Scalar:
    a = np.array(a.tolist(), dtype=b.dtype) if isinstance(a, SymMatrix) else a
    return (a * b).sum()


def theorem15_value(n, source, D1=0, D2=0) -> Scalar:
    """Stability integrand of ``π*(ȟ − (‖ω‖²/n)ǧ)`` at a point.

    ``source`` is an :class:`OmegaSpectrum` or a :class:`PointwiseTensorPair`.
    ``D1 = ⟨δ∇d∇ȟ, ȟ⟩`` and ``D2 = ⟨∇*∇ȟ, ȟ⟩`` carry the derivative data;
    the defaults give the algebraic part alone.
    """
    if source.n != n:
        raise InvalidParams("source dimension does not match n")
    w2 = source.omega_norm_sq()
    h2 = source.h_norm_sq()
    h3 = source.h_trace_cube()
    w6 = w2**3
    return (
        2 * D1 - D2 + h3 - div(w2 * h2, 2) - div(2 * w2 * h2, n) + div(w6, 2 * n) + div(w6, n * n)
    )


def spectrum_to_simplex(spectrum: OmegaSpectrum) -> tuple[Scalar, tuple[Scalar, ...]]:
    """``(E, t)`` with ``E = ‖ω‖²/4`` and ``t_i = b_i / 2E``."""
    E = div(spectrum.omega_norm_sq(), 4)
    if E == 0:
        raise InvalidParams("ω vanishes; the simplex coordinates are undefined")
    return E, tuple(div(v, 2 * E) for v in spectrum.b)


def _f(t: Sequence[Scalar], n: int) -> Scalar:
    return sum(v**3 for v in t) - (1 + div(4, n)) * sum(v * v for v in t) + div(2, n) + div(4, n * n)


def f_factorization(t: Sequence[Scalar], n: int) -> Scalar:
    m = len(t)
    if n % 2 == 0:
        c = div(1, m)
        return sum((v - c) ** 2 * (v - 1) for v in t)
    c = div(2, 2 * m + 1)
    return sum((v - c) ** 2 * (v - 1) for v in t) - div(2 + 4 * m, (2 * m + 1) ** 3)


def f_value(t: Sequence[Scalar], n: int, tol=None) -> tuple[Scalar, Scalar]:
    """``f(t) = Σt³ − (1 + 4/n)Σt² + 2/n + 4/n²`` on the simplex, plus the
    residual of its parity-dependent factorization (zero up to roundoff)."""
    t = tuple(t)
    if len(t) != n // 2:
        raise InvalidParams(f"t needs floor(n/2) = {n // 2} entries")
    if tol is None:
        tol = 0 if all_exact(t) else 1e-12
    if any(v < 0 for v in t) or abs(sum(t) - 1) > tol:
        raise NotOnSimplex(f"t = {t} is not on the standard simplex")
    value = _f(t, n)
    return value, value - f_factorization(t, n)


def algebraic_part_from_f(spectrum: OmegaSpectrum) -> Scalar:
    """``2(2E)³ f(t)``; equals ``theorem15_value(n, spectrum)``."""
    E, t = spectrum_to_simplex(spectrum)
    return 2 * (2 * E) ** 3 * _f(t, spectrum.n)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


@dataclass(frozen=True)
class SimplexScan:
    max_value: Fraction
    argmax: tuple[Fraction, ...]
    verdict: Verdict
    points: int
    zero_points: tuple[tuple[Fraction, ...], ...]


def simplex_scan(n: int, grid_step=Fraction(1, 100)) -> SimplexScan:
    """Exact maximum of ``f`` over the grid ``{t : t_i ∈ step·Z≥0, Σt_i = 1}``.

    Asserts ``max f ≤ 0``; for even ``n`` zeros occur only at the
    barycenter, for odd ``n`` the maximum is strictly negative. Ties for the
    maximiser go to the lexicographically largest grid point.
    """
    step = Fraction(grid_step)
    if step <= 0 or step > 1 or (1 / step).denominator != 1:
        raise InvalidParams("grid_step must divide 1 evenly")
    N = int(1 / step)
    m = n // 2
    if m < 1:
        raise InvalidParams("n must be at least 2")
    best = None
    best_k = None
    zeros = []
    count = 0
    # N³n² f = n² Σk³ − n(n+4) N Σk² + (2n+4) N³, kept in integers
    for ks in _compositions(N, m):
        count += 1
        num = n * n * sum(k**3 for k in ks) - n * (n + 4) * N * sum(k * k for k in ks) + (2 * n + 4) * N**3
        if best is None or num > best:
            best, best_k = num, ks
        if num == 0:
            zeros.append(tuple(Fraction(k, N) for k in ks))
    max_value = Fraction(best, N**3 * n * n)
    argmax = tuple(Fraction(k, N) for k in best_k)
    if max_value > 0:
        raise StabilityError(f"f exceeds 0 on the grid: {max_value} at {argmax}")
    if n % 2 == 0:
        bary = tuple(Fraction(1, m) for _ in range(m))
        if any(z != bary for z in zeros):
            raise StabilityError("f vanishes away from the barycenter")
    elif max_value >= 0:
        raise StabilityError("f must be strictly negative for odd n")
    return SimplexScan(max_value, argmax, sign_verdict(max_value), count, tuple(zeros))


def kahler_bound_value(n, omega_norm_sq, h_norm_sq, hJ_pairing, tol: float = DEFAULT_TOL):
    """Form value on ``π*ȟ`` for a Kähler–Einstein base and its upper bound.

    ``value = −((n+2)/2n)‖ω‖²‖ȟ‖² + (‖ω‖²/n)(‖ȟ‖² + ⟨ȟ(J′·,J′·), ȟ⟩)`` and
    ``bound = −(1/2 − 1/n)‖ω‖²‖ȟ‖²``. Returns ``(value, bound, verdict)``.
    """
    if n < 2:
        raise InvalidParams("n must be at least 2")
    if h_norm_sq < 0 or omega_norm_sq < 0:
        raise InvalidParams("norms must be non-negative")
    if abs(hJ_pairing) > h_norm_sq:
        raise PairingOutOfRange("|⟨ȟ(J′·,J′·), ȟ⟩| must not exceed ‖ȟ‖²")
    w2, h2 = omega_norm_sq, h_norm_sq
    value = -div((n + 2) * w2 * h2, 2 * n) + div(w2 * (h2 + hJ_pairing), n)
    bound = -(div(1, 2) - div(1, n)) * w2 * h2
    slack = 0 if all_exact((w2, h2, hJ_pairing)) else tol * max(1.0, abs(bound))
    if value > bound + slack:
        raise StabilityError(f"bound violated: {value} > {bound}")
    return value, bound, sign_verdict(value, tol)
