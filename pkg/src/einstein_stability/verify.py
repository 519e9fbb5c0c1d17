"""Seeded identity suites behind ``einstein-stability verify``.

Every suite draws its cases from ``random.Random(seed)`` and compares two
independent routes to the same quantity. Reports contain no timings, so equal
seeds give byte-identical output.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable

from .circle_bundle import (
    OmegaSpectrum,
    PointwiseTensorPair,
    algebraic_part_from_f,
    f_factorization,
    f_value,
    kahler_bound_value,
    lemma_corrections,
    pairing,
    prop46_correction,
    simplex_scan,
    theorem15_value,
)
from .exactnum import Inertia, SymMatrix, inertia, matrix_rank
from .homogeneous_sp import sp_quantity, sp_scan
from .product_base import BaseFactorData, coindex_lower_bound, diagonal_coefficients, pairwise_value
from .qk_bundle import QkConfig, qk_analyze, qk_mu_form_value, qk_pairwise_value
from .submersion import check_einstein_invariants, instability_bracket, theorem1_long_form, theorem1_value
from .torus_bundle import analyze_coindex, construct_solution, diagonal_form, mu_form_value

MAX_FAILURES = 3


def rand_rational(rng: random.Random, lo: int = -9, hi: int = 9, max_den: int = 7) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, max_den))


def rand_positive(rng: random.Random, hi: int = 9, max_den: int = 7) -> Fraction:
    return Fraction(rng.randint(1, hi), rng.randint(1, max_den))


# generators


def random_submersion(rng: random.Random):
    n, r = rng.randint(1, 12), rng.randint(1, 12)
    E = rand_rational(rng)
    a = abs(rand_positive(rng) - 1)
    return check_einstein_invariants(n, r, E, E * r - a, E * n + 2 * a, a)


def random_simplex_point(rng: random.Random, m: int) -> tuple[Fraction, ...]:
    ks = [rng.randint(0, 30) for _ in range(m)]
    if not any(ks):
        ks[rng.randrange(m)] = 1
    total = sum(ks)
    return tuple(Fraction(k, total) for k in ks)


def random_full_rank_b(rng: random.Random, r: int, m: int) -> list[list[int]]:
    while True:
        b = [[rng.randint(-3, 3) for _ in range(m)] for _ in range(r)]
        if all(any(b[a][i] for a in range(r)) for i in range(m)) and matrix_rank(b) == r:
            return b


def random_torus_solution(rng: random.Random, m_max: int = 6):
    m = rng.randint(2, m_max)
    r = rng.randint(1, m - 1)
    dims = [2 * rng.randint(1, 4) for _ in range(m)]
    b = random_full_rank_b(rng, r, m)
    x = [rand_positive(rng, 9, 5) for _ in range(m)]
    return construct_solution(dims, b, x, rand_positive(rng, 5, 3))


def random_qk(rng: random.Random, m_max: int = 6) -> QkConfig:
    m = rng.randint(3, m_max)
    return QkConfig.build(
        [rng.randint(2, 6) for _ in range(m)],
        [rand_positive(rng) for _ in range(m)],
        [rand_positive(rng) for _ in range(m)],
        [rand_positive(rng) for _ in range(m)],
    )


def random_pair(rng: random.Random, n_max: int = 8) -> PointwiseTensorPair:
    n = rng.randint(2, n_max)
    w = [[Fraction(0)] * n for _ in range(n)]
    h = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            h[i][j] = h[j][i] = rand_rational(rng, -5, 5, 4)
            if j > i:
                v = rand_rational(rng, -5, 5, 4)
                w[i][j], w[j][i] = v, -v
    return PointwiseTensorPair.build(w, h)


def random_symmetric(rng: random.Random, dim_max: int = 4) -> SymMatrix:
    n = rng.randint(1, dim_max)
    rows = [[Fraction(0)] * n for _ in range(n)]
    # low-rank and zero-heavy draws exercise the zero count
    sparse = rng.random() < 0.3
    for i in range(n):
        for j in range(i, n):
            v = Fraction(0) if sparse and rng.random() < 0.5 else rand_rational(rng, -6, 6, 5)
            rows[i][j] = rows[j][i] = v
    if rng.random() < 0.2 and n >= 2:
        # duplicate a row/column pair to force a kernel
        i, j = rng.sample(range(n), 2)
        c = rand_rational(rng)
        for k in range(n):
            rows[j][k] = c * rows[i][k]
        for k in range(n):
            rows[k][j] = c * rows[k][i]
        rows[j][j] = c * c * rows[i][i]
    return SymMatrix(rows)


def random_invertible(rng: random.Random, n: int) -> list[list[Fraction]]:
    while True:
        p = [[rand_rational(rng, -4, 4, 3) for _ in range(n)] for _ in range(n)]
        if matrix_rank(p) == n:
            return p


# characteristic-polynomial oracle


def charpoly(m: SymMatrix) -> list[Fraction]:
    """Coefficients ``c_0 … c_n`` of ``det(λI − M)`` by Faddeev–LeVerrier."""
    n = m.dim
    a = [[Fraction(v) for v in row] for row in m.rows]
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        prod = [[sum(a[i][l] * mk[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        mk = [[prod[i][j] + (coeffs[n - k + 1] if i == j else 0) for j in range(n)] for i in range(n)]
        amk = [[sum(a[i][l] * mk[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        coeffs[n - k] = -sum(amk[i][i] for i in range(n)) / k
    return coeffs


def _sign_changes(values: list[Fraction]) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def charpoly_inertia(m: SymMatrix) -> Inertia:
    """Inertia from Descartes' rule of signs, exact because the roots are real."""
    c = charpoly(m)
    zero = next(k for k, v in enumerate(c) if v != 0)
    reduced = c[zero:]
    pos = _sign_changes(reduced)
    neg = _sign_changes([v * (-1) ** k for k, v in enumerate(reduced)])
    return Inertia(neg, zero, pos)


# suites


class _Suite:
    def __init__(self, name: str):
        self.name = name
        self.cases = 0
        self.failed = 0
        self.failures: list[str] = []

    def check(self, ok: bool, describe: Callable[[], str]):
        self.cases += 1
        if not ok:
            self.failed += 1
            if len(self.failures) < MAX_FAILURES:
                self.failures.append(describe())

    def report(self) -> dict:
        return {"cases": self.cases, "failed": self.failed, "passed": self.failed == 0, "failures": self.failures}


def suite_submersion(rng: random.Random, cases: int) -> _Suite:
    s = _Suite("submersion")
    for _ in range(cases):
        inv = random_submersion(rng)
        lhs = theorem1_long_form(inv)
        rhs = Fraction(2 * (inv.n + inv.r), inv.n**2) * instability_bracket(inv)
        s.check(lhs == rhs and theorem1_value(inv)[0] == rhs, lambda: f"{inv}: {lhs} != {rhs}")
    return s


def suite_sp(rng: random.Random, cases: int) -> _Suite:
    s = _Suite("homogeneous_sp")
    try:
        rows = sp_scan(12, 8)
        s.check(len(rows) > 0, lambda: "empty scan")
    except Exception as exc:  # noqa: BLE001 - reported as a failure
        s.check(False, lambda: repr(exc))
    s.check(sp_quantity((3, 1, 2))[0] == -8, lambda: "(3,1,2) spot value")
    return s


def suite_product_base(rng: random.Random, cases: int) -> _Suite:
    s = _Suite("product_base")
    for _ in range(cases):
        m = rng.randint(2, 6)
        data = BaseFactorData.from_lists(
            [rng.randint(2, 8) for _ in range(m)],
            [rand_rational(rng) for _ in range(m)],
            [abs(rand_rational(rng)) for _ in range(m)],
        )
        d = diagonal_coefficients(data).d
        p, q = rng.sample(range(m), 2)
        value = pairwise_value(data, p, q)[0]
        Q, _ = coindex_lower_bound(diagonal_coefficients(data))
        s.check(
            value == d[p] + d[q] and all(Q[a, a] == d[a] + d[a + 1] for a in range(m - 1)),
            lambda: f"{data}: pairwise {value}",
        )
    return s


def suite_torus(rng: random.Random, cases: int) -> _Suite:
    s = _Suite("torus_bundle")
    for _ in range(cases):
        sol = random_torus_solution(rng)
        a = analyze_coindex(sol, samples=20, seed=rng.randrange(2**32))
        k = sol.config.m - sol.config.r
        mu = [rand_rational(rng) for _ in range(k)]
        v1 = mu_form_value(a.solution, mu)
        dd = diagonal_form(a.solution).d
        padded = [0, *mu, 0]
        v2 = sum(d * (padded[i + 1] - padded[i]) ** 2 for i, d in enumerate(dd[: k + 1]))
        s.check(
            a.inertia.n_neg == k and a.proof_bound_ok and v1 == v2,
            lambda: f"dims={sol.config.dims} b={sol.config.b}: inertia {a.inertia}, routes {v1} vs {v2}",
        )
    return s


def suite_qk(rng: random.Random, cases: int) -> _Suite:
    s = _Suite("qk_bundle")
    for _ in range(cases):
        cfg = random_qk(rng)
        m = cfg.m
        pair_ok = all(qk_pairwise_value(cfg, i, j)[0] < 0 for i in range(m) for j in range(i + 1, m))
        mu = [rand_rational(rng) for _ in range(m - 1)]
        if not any(mu):
            mu[0] = Fraction(1)
        small = all(cfg.lam_total > 2 * li for li in cfg.lam)
        mu_ok = (not small) or qk_mu_form_value(cfg, mu) < 0
        a = qk_analyze(cfg)
        s.check(pair_ok and mu_ok and (not small or a.inertia.n_neg == m - 1), lambda: f"{cfg}")
    cfg = QkConfig.build([2, 2, 2], [1, 1, 1], [1, 1, 1], [1, 1, 1])
    s.check(
        qk_pairwise_value(cfg, 0, 1)[0] == Fraction(-13, 48) and qk_mu_form_value(cfg, [1, 0]) == Fraction(-1, 12),
        lambda: "all-equal m=3 spot values",
    )
    return s


def suite_circle_pointwise(rng: random.Random, cases: int) -> _Suite:
    s = _Suite("circle_pointwise")
    for _ in range(cases):
        p = random_pair(rng)
        try:
            lap, curv = lemma_corrections(p)
            lhs = pairing(lap, p.hcheck) - 2 * pairing(curv, p.hcheck)
            rhs = prop46_correction(p)
            s.check(lhs == rhs, lambda: f"n={p.n}: {lhs} != {rhs}")
        except Exception as exc:  # noqa: BLE001
            s.check(False, lambda: f"n={p.n}: {exc!r}")
    return s


def suite_simplex(rng: random.Random, cases: int) -> _Suite:
    s = _Suite("circle_simplex")
    for parity in (0, 1):
        for _ in range(cases):
            n = rng.choice([k for k in range(2, 13) if k % 2 == parity])
            t = random_simplex_point(rng, n // 2)
            value, residual = f_value(t, n)
            s.check(residual == 0, lambda: f"n={n} t={t}: residual {residual}")
    for _ in range(cases):
        n = rng.randint(2, 12)
        b = [abs(rand_positive(rng) - 1) for _ in range(n // 2)]
        if not any(b):
            b[0] = Fraction(1)
        spec = OmegaSpectrum.build(n, b)
        lhs, rhs = theorem15_value(n, spec), algebraic_part_from_f(spec)
        s.check(lhs == rhs, lambda: f"n={n} b={b}: {lhs} != {rhs}")
    expected = {4: (Fraction(0), (Fraction(1, 2),) * 2), 3: (Fraction(-2, 9), None), 5: (Fraction(-9, 100), (Fraction(1, 2),) * 2)}
    for n, (mx, arg) in expected.items():
        scan = simplex_scan(n, Fraction(1, 100))
        s.check(scan.max_value == mx and (arg is None or scan.argmax == arg), lambda: f"scan n={n}: {scan.max_value}")
    return s


def suite_kahler(rng: random.Random, cases: int) -> _Suite:
    s = _Suite("circle_kahler")
    for _ in range(cases):
        n = 2 * rng.randint(1, 8)
        w2, h2 = abs(rand_rational(rng)), abs(rand_rational(rng))
        hJ = h2 if rng.random() < 0.25 else h2 * Fraction(rng.randint(-20, 20), 20)
        value, bound, _ = kahler_bound_value(n, w2, h2, hJ)
        s.check(value <= bound and ((value == bound) == (hJ == h2 or w2 == 0 or h2 == 0)), lambda: f"{n},{w2},{h2},{hJ}")
    s.check(kahler_bound_value(2, 4, 1, 1)[0] == 0, lambda: "n=2 value")
    return s


def suite_inertia(rng: random.Random, cases: int) -> _Suite:
    s = _Suite("inertia")
    for _ in range(cases):
        m = random_symmetric(rng)
        got, want = inertia(m), charpoly_inertia(m)
        s.check(got == want, lambda: f"{m}: {got} vs oracle {want}")
    for _ in range(max(1, cases // 5)):
        m = random_symmetric(rng)
        p = random_invertible(rng, m.dim)
        s.check(inertia(m.congruent(p)) == inertia(m), lambda: f"congruence {m}")
    return s


SUITES: dict[str, Callable[[random.Random, int], _Suite]] = {
    "submersion": suite_submersion,
    "homogeneous_sp": suite_sp,
    "product_base": suite_product_base,
    "torus_bundle": suite_torus,
    "qk_bundle": suite_qk,
    "circle_pointwise": suite_circle_pointwise,
    "circle_simplex": suite_simplex,
    "circle_kahler": suite_kahler,
    "inertia": suite_inertia,
}


def run_suites(seed: int = 0, cases: int = 50, only: list[str] | None = None) -> dict:
    """Run the named suites (default: all) and return a plain report dict."""
    results = {}
    for name, fn in SUITES.items():
        if only and name not in only:
            continue
        # each suite gets its own stream so adding a suite never shifts the others
        rng = random.Random(f"{seed}:{name}")
        results[name] = fn(rng, cases).report()
    return {
        "seed": seed,
        "cases": cases,
        "suites": results,
        "all_passed": all(r["passed"] for r in results.values()),
    }
