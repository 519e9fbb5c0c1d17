import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from einstein_stability.circle_bundle import (
    OmegaSpectrum,
    PointwiseTensorPair,
    algebraic_part_from_f,
    circle_einstein_check,
    f_value,
    kahler_bound_value,
    lemma_corrections,
    lemma_corrections_index_sum,
    lemma_corrections_matrix,
    pairing,
    prop46_correction,
    prop46_index_sum,
    prop46_trace,
    simplex_scan,
    theorem15_value,
)
from einstein_stability.errors import ConstraintViolation, ConstructionError, InvalidParams, NotOnSimplex, PairingOutOfRange
from einstein_stability.verdict import Verdict
from einstein_stability.verify import random_pair

F = Fraction
J = [[0, 1], [-1, 0]]
I2 = [[1, 0], [0, 1]]


def block_omega(a):
    """Skew matrix in normal form with blocks [[0, a_i], [−a_i, 0]]."""
    n = 2 * len(a)
    w = [[F(0)] * n for _ in range(n)]
    for i, v in enumerate(a):
        w[2 * i][2 * i + 1], w[2 * i + 1][2 * i] = F(v), F(-v)
    return w


@pytest.mark.parametrize("n, E, b, scal", [(2, 1, (2,), 4), (4, 1, (1, 1), 6)])
def test_einstein_check(n, E, b, scal):
    assert circle_einstein_check(n, E, b).base_scal == scal


def test_einstein_check_violation():
    with pytest.raises(ConstraintViolation):
        circle_einstein_check(4, 1, (3, 0))


def test_ricci_eigenvalues():
    data = circle_einstein_check(5, F(3, 2), (F(2), F(1)))
    assert data.ricci_eigenvalues == [F(5, 2), F(5, 2), 2, 2, F(3, 2)]


@pytest.mark.parametrize("n, b", [(4, (1,)), (4, (1, -1)), (1, ())])
def test_spectrum_validation(n, b):
    with pytest.raises(InvalidParams):
        OmegaSpectrum.build(n, b)


def test_pair_validation():
    with pytest.raises(ConstructionError):
        PointwiseTensorPair.build([[0, 1], [1, 0]], I2)
    with pytest.raises(ConstructionError):
        PointwiseTensorPair.build(J, [[1, 2], [0, 1]])


def test_zero_omega():
    p = PointwiseTensorPair.build([[0, 0], [0, 0]], [[1, 2], [2, 3]])
    lap, curv = lemma_corrections(p)
    assert lap.tolist() == [[0, 0], [0, 0]] and curv.tolist() == [[0, 0], [0, 0]]
    assert prop46_correction(p) == 0


@pytest.mark.parametrize("h, expected", [(I2, 4), ([[1, 0], [0, -1]], 0)])
def test_pointwise_correction_small(h, expected):
    assert prop46_correction(PointwiseTensorPair.build(J, h)) == expected


def test_identity_contractions():
    # ⟨curv_corr(ω, ǧ), ǧ⟩ = −3‖A‖², ⟨lap_corr(ω, ǧ), ǧ⟩ = 2‖A‖² with ‖A‖² = ‖ω‖²/4
    rng = random.Random(3)
    for _ in range(20):
        p = random_pair(rng, n_max=6)
        ident = PointwiseTensorPair.build(p.omega, np.eye(p.n, dtype=int).tolist())
        lap, curv = lemma_corrections(ident)
        a2 = ident.omega_norm_sq() / 4
        assert pairing(curv, ident.hcheck) == -3 * a2
        assert pairing(lap, ident.hcheck) == 2 * a2


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_oracle_and_matrix_forms_agree(seed):
    p = random_pair(random.Random(seed), n_max=6)
    li, ci = lemma_corrections_index_sum(p)
    lm, cm = lemma_corrections_matrix(p)
    assert np.array_equal(li, lm) and np.array_equal(ci, cm)
    assert prop46_index_sum(p) == prop46_trace(p)
    lap, curv = lemma_corrections(p)
    assert pairing(lap, p.hcheck) - 2 * pairing(curv, p.hcheck) == prop46_correction(p)


def test_float_pair_agreement():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(5, 5))
    h = rng.normal(size=(5, 5))
    p = PointwiseTensorPair.build(a - a.T, h + h.T)
    lap, curv = lemma_corrections(p)
    assert abs(pairing(lap, p.hcheck) - 2 * pairing(curv, p.hcheck) - prop46_correction(p)) < 1e-9


@pytest.mark.parametrize("n, b, expected", [(4, (1, 1), 0), (4, (2, 0), -4), (3, (2,), F(-32, 9))])
def test_circle_value_examples(n, b, expected):
    assert theorem15_value(n, OmegaSpectrum.build(n, b)) == expected


def test_circle_value_derivative_terms():
    spec = OmegaSpectrum.build(4, (1, 1))
    assert theorem15_value(4, spec, D1=1, D2=F(1, 2)) == F(3, 2)


def test_circle_value_pair_matches_spectrum():
    # normal form ω with a = (1, 2): ȟ = ωωᵀ = diag(1, 1, 4, 4)
    w = block_omega((1, 2))
    p = PointwiseTensorPair.from_omega(w)
    assert theorem15_value(4, p) == theorem15_value(4, OmegaSpectrum.build(4, (1, 4)))


@pytest.mark.parametrize(
    "t, n, expected",
    [((F(1, 2), F(1, 2)), 4, 0), ((F(1), F(0)), 4, F(-1, 4)), ((F(1),), 3, F(-2, 9))],
)
def test_f_examples(t, n, expected):
    value, residual = f_value(t, n)
    assert value == expected and residual == 0


@pytest.mark.parametrize("t, n", [((F(1, 2), F(1, 4)), 4), ((F(3, 2), F(-1, 2)), 4), ((F(1),), 4)])
def test_f_off_simplex(t, n):
    with pytest.raises((NotOnSimplex, InvalidParams)):
        f_value(t, n)


@st.composite
def simplex_points(draw):
    n = draw(st.integers(2, 12))
    ks = draw(st.lists(st.integers(0, 40), min_size=n // 2, max_size=n // 2).filter(any))
    return n, tuple(F(k, sum(ks)) for k in ks)


@settings(max_examples=300, deadline=None)
@given(simplex_points())
def test_factorizations(point):
    n, t = point
    value, residual = f_value(t, n)
    assert residual == 0
    assert value <= 0


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 12), st.data())
def test_circle_value_reduces_to_f(n, data):
    b = data.draw(st.lists(st.fractions(0, 5, max_denominator=7), min_size=n // 2, max_size=n // 2).filter(any))
    spec = OmegaSpectrum.build(n, b)
    assert theorem15_value(n, spec) == algebraic_part_from_f(spec)


@pytest.mark.parametrize(
    "n, max_value, argmax, verdict",
    [
        (4, F(0), (F(1, 2), F(1, 2)), Verdict.INCONCLUSIVE),
        (3, F(-2, 9), (F(1),), Verdict.UNSTABLE),
        (5, F(-9, 100), (F(1, 2), F(1, 2)), Verdict.UNSTABLE),
    ],
)
def test_simplex_scan(n, max_value, argmax, verdict):
    scan = simplex_scan(n, F(1, 100))
    assert (scan.max_value, scan.argmax, scan.verdict) == (max_value, argmax, verdict)


def test_even_zero_only_at_barycenter():
    scan = simplex_scan(6, F(1, 30))
    assert scan.zero_points == ((F(1, 3),) * 3,)
    assert scan.max_value == 0


def test_scan_step_must_divide():
    with pytest.raises(InvalidParams):
        simplex_scan(4, F(2, 7))


@pytest.mark.parametrize(
    "args, value, bound, verdict",
    [
        ((4, 4, 1, 1), -1, -1, Verdict.UNSTABLE),
        ((4, 4, 1, -1), -3, -1, Verdict.UNSTABLE),
        ((2, 4, 1, 1), 0, 0, Verdict.INCONCLUSIVE),
    ],
)
def test_kahler_examples(args, value, bound, verdict):
    assert kahler_bound_value(*args) == (value, bound, verdict)


def test_kahler_pairing_range():
    with pytest.raises(PairingOutOfRange):
        kahler_bound_value(4, 4, 1, 2)


@settings(max_examples=300)
@given(
    st.integers(1, 8),
    st.fractions(0, 20, max_denominator=9),
    st.fractions(0, 20, max_denominator=9),
    st.fractions(-1, 1, max_denominator=20),
)
def test_kahler_bound(k, w2, h2, ratio):
    n = 2 * k
    value, bound, _ = kahler_bound_value(n, w2, h2, ratio * h2)
    assert value <= bound
    assert kahler_bound_value(n, w2, h2, h2)[0] == bound
