"""Principal torus bundles over products of Fano Kähler–Einstein factors.

Topology is an ``r × m`` integer matrix ``b`` (the bundle's classes are
``χ_β = Σ_i b_{βi} π_i*α_i``), factor data ``n_i`` (real dimension) and
``q_i`` (``Ric(g_i) = q_i g_i``). The metric unknowns are the base scalings
``x_i`` (``ǧ_i = x_i g_i``) and the flat fiber metric ``ĝ``. With the Gram
matrix ``C = bᵀ ĝ b`` the Einstein system reads::

    q_i / x_i = E + C_ii / (2 x_i²)                 (horizontal, per factor)
    ¼ b diag(n_i / x_i²) bᵀ = E ĝ⁻¹                 (vertical, r × r)

and tracing the vertical equation against ``ĝ`` gives
``E = (1/4r) Σ_j n_j C_jj / x_j²``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvalidParams, MaxIterationsExceeded, NewtonError, NoSolutionFound, NotEinstein
from .exactnum import (
    Inertia,
    Scalar,
    SymMatrix,
    all_exact,
    div,
    inertia,
    is_exact,
    mat_inverse,
    matrix_rank,
    negative_direction,
    newton_solve,
)
from .product_base import BaseFactorData, DiagonalFormData, diagonal_coefficients
from .verdict import Verdict

SOLVER_TOL = 1e-10
DEDUP_TOL = 1e-6
PRODUCT_NOTE = (
    "r = m: the Einstein metric is a Riemannian product of Einstein metrics, "
    "which is unstable; no difference directions are tested here"
)


@dataclass(frozen=True)
class TorusBundleConfig:
    dims: tuple[int, ...]
    q: tuple[Scalar, ...]
    b: tuple[tuple[int, ...], ...]
    x: tuple[Scalar, ...] | None = None
    ghat: SymMatrix | None = None

    def __post_init__(self):
        m, r = len(self.dims), len(self.b)
        if m < 1:
            raise InvalidParams("at least one base factor is required")
        if not 1 <= r <= m:
            raise InvalidParams("torus rank r must satisfy 1 <= r <= m")
        if len(self.q) != m:
            raise InvalidParams("q must have one entry per factor")
        if any(n < 2 or n % 2 for n in self.dims):
            raise InvalidParams("factor dimensions must be even integers >= 2")
        if any(v <= 0 for v in self.q):
            raise InvalidParams("Fano constants q_i must be positive")
        for row in self.b:
            if len(row) != m:
                raise InvalidParams("b must be an r × m matrix")
            if any(int(v) != v for v in row):
                raise InvalidParams("b must have integer entries")
        for j in range(m):
            if all(row[j] == 0 for row in self.b):
                raise InvalidParams("columns of b must be nonzero")
        if matrix_rank(self.b) < r:
            raise InvalidParams("b must have full rank r")
        if self.x is not None:
            if len(self.x) != m or any(v <= 0 for v in self.x):
                raise InvalidParams("x must hold m positive scalings")
        if self.ghat is not None:
            if self.ghat.dim != r:
                raise InvalidParams("ghat must be r × r")
            if inertia(self.ghat).n_pos != r:
                raise InvalidParams("ghat must be positive definite")

    @classmethod
    def build(cls, dims, q, b, x=None, ghat=None) -> "TorusBundleConfig":
        g = None
        if ghat is not None:
            g = ghat if isinstance(ghat, SymMatrix) else SymMatrix(ghat)
        return cls(
            tuple(int(n) for n in dims),
            tuple(q),
            tuple(tuple(int(v) for v in row) for row in b),
            None if x is None else tuple(x),
            g,
        )

    @property
    def m(self) -> int:
        return len(self.dims)

    @property
    def r(self) -> int:
        return len(self.b)

    @property
    def has_metric(self) -> bool:
        return self.x is not None and self.ghat is not None

    def _require_metric(self):
        if not self.has_metric:
            raise InvalidParams("configuration has no metric (x, ghat)")

    def with_metric(self, x, ghat) -> "TorusBundleConfig":
        g = ghat if isinstance(ghat, SymMatrix) else SymMatrix(ghat)
        return replace(self, x=tuple(x), ghat=g)

    def permuted(self, perm: Sequence[int]) -> "TorusBundleConfig":
        """Reorder factors so that new factor ``k`` is old factor ``perm[k]``."""
        return TorusBundleConfig(
            tuple(self.dims[p] for p in perm),
            tuple(self.q[p] for p in perm),
            tuple(tuple(row[p] for p in perm) for row in self.b),
            None if self.x is None else tuple(self.x[p] for p in perm),
            self.ghat,
        )


@dataclass(frozen=True)
class TorusEinsteinSolution:
    config: TorusBundleConfig
    E: Scalar
    residual_norm: Scalar


def column_gram(config: TorusBundleConfig) -> SymMatrix:
    """``C_jk = Σ_{α,β} b_{αj} ĝ_{αβ} b_{βk}``."""
    config._require_metric()
    b, g, r, m = config.b, config.ghat, config.r, config.m
    gb = [[sum(g[a, c] * b[c][k] for c in range(r)) for k in range(m)] for a in range(r)]
    rows = [[sum(b[a][j] * gb[a][k] for a in range(r)) for k in range(m)] for j in range(m)]
    for j in range(m):
        for k in range(j + 1, m):
            rows[k][j] = rows[j][k]
    return SymMatrix(rows)


def a_norm_sq(config: TorusBundleConfig, C: SymMatrix, i: int) -> Scalar:
    """``‖A^{(i)}‖² = n_i C_ii / (4 x_i²)`` (``i`` is 0-based)."""
    config._require_metric()
    if not 0 <= i < config.m:
        raise InvalidParams(f"factor index {i} out of range")
    return div(config.dims[i] * C[i, i], 4 * config.x[i] ** 2)


def trace_einstein_constant(config: TorusBundleConfig, C: SymMatrix | None = None) -> Scalar:
    C = column_gram(config) if C is None else C
    total = sum(div(config.dims[j] * C[j, j], config.x[j] ** 2) for j in range(config.m))
    return div(total, 4 * config.r)


def _vertical_lhs(config: TorusBundleConfig) -> list[list[Scalar]]:
    # ¼ b diag(n_i / x_i²) bᵀ
    b, r, m = config.b, config.r, config.m
    w = [div(config.dims[i], 4 * config.x[i] ** 2) for i in range(m)]
    return [[sum(b[a][i] * w[i] * b[c][i] for i in range(m)) for c in range(r)] for a in range(r)]


def einstein_system_residual(config: TorusBundleConfig, E=None):
    """Residuals of the horizontal and vertical Einstein equations.

    ``E`` defaults to the trace formula; pass a gauge value to evaluate the
    system at a prescribed Einstein constant. Returns
    ``(horizontal, vertical, E)``.
    """
    config._require_metric()
    C = column_gram(config)
    if E is None:
        E = trace_einstein_constant(config, C)
    horizontal = tuple(
        div(config.q[i], config.x[i]) - div(C[i, i], 2 * config.x[i] ** 2) - E for i in range(config.m)
    )
    ginv = mat_inverse(config.ghat.tolist())
    lhs = _vertical_lhs(config)
    r = config.r
    vert = [[lhs[a][c] - E * ginv[a][c] for c in range(r)] for a in range(r)]
    for a in range(r):
        for c in range(a + 1, r):
            vert[c][a] = vert[a][c]
    return horizontal, SymMatrix(vert), E


def residual_norm(config: TorusBundleConfig, E=None) -> Scalar:
    horizontal, vertical, _ = einstein_system_residual(config, E)
    values = list(horizontal) + [v for row in vertical.rows for v in row]
    return max(abs(v) for v in values)


def construct_solution(dims, b, x, E=Fraction(1)) -> TorusEinsteinSolution:
    """Build the unique Einstein data for prescribed scalings ``x``.

    The vertical equation fixes ``ĝ = 4E (b diag(n/x²) bᵀ)⁻¹`` and the
    horizontal one then fixes ``q_i = E x_i + C_ii/(2 x_i)``. With rational
    inputs the result is an exact Einstein solution.
    """
    r, m = len(b), len(dims)
    stub = TorusBundleConfig.build(dims, [1] * m, b)
    bb, xs = stub.b, tuple(x)
    w = [div(dims[i], 4 * xs[i] ** 2) for i in range(m)]
    lhs = [[sum(bb[a][i] * w[i] * bb[c][i] for i in range(m)) for c in range(r)] for a in range(r)]
    inv = mat_inverse(lhs)
    ghat = [[E * inv[a][c] for c in range(r)] for a in range(r)]
    for a in range(r):
        for c in range(a + 1, r):
            ghat[c][a] = ghat[a][c]
    with_g = TorusBundleConfig.build(dims, [1] * m, b, xs, ghat)
    C = column_gram(with_g)
    q = [E * xs[i] + div(C[i, i], 2 * xs[i]) for i in range(m)]
    config = TorusBundleConfig.build(dims, q, b, xs, ghat)
    return TorusEinsteinSolution(config, trace_einstein_constant(config), residual_norm(config))


def _unpack(params: np.ndarray, m: int, r: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.exp(params[:m])
    L = np.zeros((r, r))
    idx = m
    for a in range(r):
        for c in range(a + 1):
            L[a, c] = math.exp(params[idx]) if a == c else params[idx]
            idx += 1
    return x, L @ L.T


def _pack(x: np.ndarray, ghat: np.ndarray) -> np.ndarray:
    L = np.linalg.cholesky(ghat)
    out = list(np.log(x))
    r = ghat.shape[0]
    for a in range(r):
        for c in range(a + 1):
            out.append(math.log(L[a, c]) if a == c else L[a, c])
    return np.array(out)


def _float_residual(params, dims, q, b, E) -> np.ndarray:
    m, r = len(dims), b.shape[0]
    x, ghat = _unpack(params, m, r)
    C = b.T @ ghat @ b
    horizontal = q / x - np.diag(C) / (2 * x**2) - E
    vert = 0.25 * b @ np.diag(dims / x**2) @ b.T - E * np.linalg.inv(ghat)
    iu = np.triu_indices(r)
    return np.concatenate([horizontal, vert[iu]])


def solve_einstein(
    config: TorusBundleConfig,
    E_target: float = 1.0,
    starts: int = 32,
    seed: int = 0,
    tol: float = SOLVER_TOL,
) -> list[TorusEinsteinSolution]:
    """Find Einstein metrics ``(x, ĝ)`` for the topology of ``config``.

    Multi-start damped Newton in log-scalings and a log-Cholesky factor of
    ``ĝ``. Solutions within ``1e-6`` of each other are merged; the result is
    sorted by residual, then lexicographically by ``x``.
    """
    if E_target <= 0:
        raise InvalidParams("gauge Einstein constant must be positive")
    m, r = config.m, config.r
    dims = np.array(config.dims, dtype=float)
    q = np.array([float(v) for v in config.q])
    b = np.array(config.b, dtype=float)
    E = float(E_target)
    rng = np.random.default_rng(seed)
    found: list[tuple[float, np.ndarray, np.ndarray]] = []
    best = math.inf

    def fn(p):
        return _float_residual(p, dims, q, b, E)

    for _ in range(starts):
        # x_i < q_i / E is forced by the horizontal equation
        x0 = q / E * rng.uniform(0.2, 1.0, size=m)
        g0 = 4 * E * np.linalg.inv(b @ np.diag(dims / x0**2) @ b.T)
        g0 = 0.5 * (g0 + g0.T)
        try:
            p = newton_solve(fn, _pack(x0, g0), tol=tol / 10, max_iter=100)
        except MaxIterationsExceeded as exc:
            norm = exc.residual_norm
            best = min(best, norm)
            if not norm <= tol:
                continue
            p = exc.last_iterate
        except (NewtonError, np.linalg.LinAlgError, FloatingPointError):
            continue
        x, ghat = _unpack(p, m, r)
        ghat = 0.5 * (ghat + ghat.T)
        norm = float(np.max(np.abs(fn(p))))
        best = min(best, norm)
        if norm > tol:
            continue
        duplicate = False
        for k, (other_norm, ox, og) in enumerate(found):
            if np.max(np.abs(ox - x)) <= DEDUP_TOL and np.max(np.abs(og - ghat)) <= DEDUP_TOL:
                duplicate = True
                if norm < other_norm:
                    found[k] = (norm, x, ghat)
                break
        if not duplicate:
            found.append((norm, x, ghat))
    if not found:
        raise NoSolutionFound(best)
    found.sort(key=lambda item: (item[0], tuple(item[1])))
    solutions = []
    for _, x, ghat in found:
        solved = config.with_metric([float(v) for v in x], ghat.tolist())
        solutions.append(
            TorusEinsteinSolution(solved, trace_einstein_constant(solved), residual_norm(solved))
        )
    return solutions


def _check_einstein(solution: TorusEinsteinSolution, tol):
    config = solution.config
    norm = residual_norm(config)
    exact = is_exact(norm)
    limit = 0 if (tol is None and exact) else (SOLVER_TOL * 10 if tol is None else tol)
    if norm > limit:
        raise NotEinstein(norm, limit)


def _mu_coefficients(solution: TorusEinsteinSolution) -> list[Scalar]:
    # (C_ii/x_i² − 2E)/n_i for the first m − r + 1 factors
    config = solution.config
    C = column_gram(config)
    E = solution.E
    k = config.m - config.r + 1
    return [div(div(C[i, i], config.x[i] ** 2) - 2 * E, config.dims[i]) for i in range(k)]


def _differences(mu: Sequence[Scalar]) -> list[Scalar]:
    padded = [0, *mu, 0]
    return [padded[i] - padded[i - 1] for i in range(1, len(padded))]


def mu_form_value(solution: TorusEinsteinSolution, mu: Sequence[Scalar], tol=None) -> Scalar:
    """Form value on ``h = Σ μ_i π*(ǧ_i/n_i − ǧ_{i+1}/n_{i+1})``, ``i ≤ m − r``."""
    config = solution.config
    if len(mu) != config.m - config.r:
        raise InvalidParams(f"μ must have m − r = {config.m - config.r} entries")
    _check_einstein(solution, tol)
    coef = _mu_coefficients(solution)
    return sum(d * d * c for d, c in zip(_differences(mu), coef))


def mu_form_matrix(solution: TorusEinsteinSolution, tol=None) -> SymMatrix:
    """Gram matrix of :func:`mu_form_value` in the μ coordinates."""
    config = solution.config
    k = config.m - config.r
    _check_einstein(solution, tol)
    coef = _mu_coefficients(solution)
    zero = Fraction(0) if all_exact(coef) else 0.0
    rows = [[zero] * k for _ in range(k)]
    # Δμ_i involves μ_i and μ_{i-1}; entry i (0-based) couples μ indices i-1 and i
    for i, c in enumerate(coef):
        terms = [(i, 1), (i - 1, -1)]
        terms = [(a, s) for a, s in terms if 0 <= a < k]
        for a, sa in terms:
            for bb, sb in terms:
                rows[a][bb] += sa * sb * c
    return SymMatrix(rows)


def product_base_data(solution: TorusEinsteinSolution) -> BaseFactorData:
    """Factor data for the product-base module: ``s_i = n_i q_i/x_i``, ``‖A^(i)‖²``."""
    config = solution.config
    C = column_gram(config)
    scals = [div(config.dims[i] * config.q[i], config.x[i]) for i in range(config.m)]
    norms = [a_norm_sq(config, C, i) for i in range(config.m)]
    if config.m < 2:
        raise InvalidParams("product-base data needs m >= 2")
    return BaseFactorData.from_lists(config.dims, scals, norms)


def bound_chain(solution: TorusEinsteinSolution, mu: Sequence[Scalar]) -> tuple[Scalar, Scalar, Scalar]:
    """``(value, intermediate, final)`` of the negativity argument.

    Valid for factors ordered by ``n_i C_ii / x_i²``. ``intermediate``
    replaces ``E`` in the ``i``-th term by ``(m−i+1)/(4r) n_i C_ii/x_i²``;
    ``final`` is ``−μ_1² C_11/(2r x_1²) − Σ_{i=2}^{m−r} Δμ_i² C_ii/(2r x_i²)``.
    """
    config = solution.config
    m, r = config.m, config.r
    C = column_gram(config)
    dmu = _differences(mu)
    value = mu_form_value(solution, mu)
    intermediate = 0
    for i, d in enumerate(dmu):
        cx = div(C[i, i], config.x[i] ** 2)
        intermediate += d * d * (div(cx, config.dims[i]) - div((m - i) * cx, 2 * r))
    final = 0
    for i in range(m - r):
        cx = div(C[i, i], config.x[i] ** 2)
        final -= dmu[i] * dmu[i] * div(cx, 2 * r)
    return value, intermediate, final


def factor_order(config: TorusBundleConfig) -> list[int]:
    """Stable ascending order of ``n_i C_ii / x_i²``; ties keep input order."""
    C = column_gram(config)
    keys = [div(config.dims[i] * C[i, i], config.x[i] ** 2) for i in range(config.m)]
    return sorted(range(config.m), key=lambda i: (keys[i], i))


@dataclass
class CoindexAnalysis:
    permutation: list[int]
    solution: TorusEinsteinSolution
    Q: SymMatrix
    inertia: Inertia
    proof_bound_ok: bool
    verdict: Verdict
    witness: list[Scalar] | None = None
    note: str | None = None
    samples: int = 0
    violations: list = field(default_factory=list)

    @property
    def coindex_lower_bound(self) -> int:
        return self.inertia.n_neg


def _random_mu(rng: np.random.Generator, k: int, exact: bool) -> list[Scalar]:
    if exact:
        return [Fraction(int(rng.integers(-50, 51)), int(rng.integers(1, 20))) for _ in range(k)]
    return list(rng.normal(size=k))


def analyze_coindex(
    solution: TorusEinsteinSolution, samples: int = 100, seed: int = 0, tol=None
) -> CoindexAnalysis:
    """Sort factors, build the (m − r)-dimensional form and count negative directions.

    ``proof_bound_ok`` records that ``value ≤ intermediate ≤ final`` held on
    ``samples`` random μ (exactly for rational data, with slack ``1e-9``
    relative otherwise).
    """
    _check_einstein(solution, tol)
    perm = factor_order(solution.config)
    sorted_config = solution.config.permuted(perm)
    sorted_solution = TorusEinsteinSolution(sorted_config, solution.E, solution.residual_norm)
    k = sorted_config.m - sorted_config.r
    if k == 0:
        empty = SymMatrix([])
        return CoindexAnalysis(
            perm, sorted_solution, empty, Inertia(0, 0, 0), True, Verdict.INCONCLUSIVE,
            note=PRODUCT_NOTE,
        )
    Q = mu_form_matrix(sorted_solution, tol)
    inert = inertia(Q)
    exact = Q.exact
    rng = np.random.default_rng(seed)
    ok = True
    violations = []
    for _ in range(samples):
        mu = _random_mu(rng, k, exact)
        value, mid, final = bound_chain(sorted_solution, mu)
        slack = 0 if exact else 1e-9 * max(1.0, abs(float(value)))
        if not (value <= mid + slack and mid <= final + slack and (final < 0 or not any(mu))):
            ok = False
            violations.append([mu, value, mid, final])
    verdict = Verdict.UNSTABLE if inert.n_neg > 0 else Verdict.INCONCLUSIVE
    witness = negative_direction(Q) if inert.n_neg > 0 else None
    return CoindexAnalysis(
        perm, sorted_solution, Q, inert, ok, verdict, witness=witness,
        samples=samples, violations=violations,
    )


def diagonal_form(solution: TorusEinsteinSolution) -> DiagonalFormData:
    """Product-base coefficients ``d_i`` of a solved configuration."""
    return diagonal_coefficients(product_base_data(solution))
