"""Twistor curves, Cauchy divisors, Fujiki polarization, period ranks."""

from fractions import Fraction

import numpy as np
import pytest

from periodgeom.quadspace import QuadraticSpace, Subspace, fraction_matrix
from periodgeom.posgrass import (
    GraphChart,
    plane_to_null,
    random_positive_plane,
)
from periodgeom.perigeo import (
    CauchyDivisor,
    CauchyPencil,
    FujikiForm,
    IntersectionKind,
    NotFujikiError,
    TwistorCurve,
    bbf_explicit,
    cauchy_contains,
    cauchy_through,
    fujiki_polarize,
    is_period_point,
    monomial_form,
    period_image_rank,
    power_cup,
    power_form,
    random_twistor_curve,
    twistor_cauchy_intersection,
    twistor_point,
    twistor_through,
)

SP = QuadraticSpace.diagonal(3, 19)
SP34 = QuadraticSpace.diagonal(3, 4)


def test_is_period_point_examples():
    sp = QuadraticSpace.diagonal(3, 1)
    e = np.eye(4)
    assert is_period_point(sp, e[0] + 1j * e[1])
    assert not is_period_point(sp, e[0])              # q(v,v) = 1
    sp2 = QuadraticSpace.diagonal(3, 1)
    assert not is_period_point(sp2, e[0] + 1j * e[3])  # q(v,vbar) = 0


def test_period_points_from_planes():
    rng = np.random.default_rng(0)
    for _ in range(10):
        W = random_positive_plane(SP, rng)
        assert is_period_point(SP, plane_to_null(W).vec)


# ---------------------------------------------------------------------------
# twistor curves
# ---------------------------------------------------------------------------

def test_curve_frame_validation():
    with pytest.raises(ValueError):
        TwistorCurve(SP, np.eye(22)[:, :2])
    bad = np.eye(22)[:, [0, 1, 5]]   # third column negative
    with pytest.raises(ValueError):
        TwistorCurve(SP, bad)


def test_curve_from_subspace_orthonormalizes():
    rng = np.random.default_rng(1)
    B = np.eye(22)[:, :3] @ rng.standard_normal((3, 3))
    while abs(np.linalg.det(B[:3, :])) < 0.1:
        B = np.eye(22)[:, :3] @ rng.standard_normal((3, 3))
    curve = TwistorCurve.from_subspace(Subspace(SP, B))
    F = curve.frame
    np.testing.assert_allclose(F.T @ SP.gram @ F, np.eye(3), atol=1e-10)


def test_null_lift_is_null_everywhere():
    rng = np.random.default_rng(2)
    curve = random_twistor_curve(SP, rng)
    for z in (0.0, 1.0, -2.3 + 0.7j, 10j, None):
        w = curve.null_lift(z)
        assert is_period_point(SP, w)
        assert abs(complex(SP.q(w, w))) < 1e-10


def test_curve_anchors():
    rng = np.random.default_rng(3)
    curve = random_twistor_curve(SP, rng)
    f1, f2, f3 = curve.frame.T
    W0 = curve.point(0.0)
    assert W0.contains_vector(f1) and W0.contains_vector(f2)
    E = W0.orthonormal_basis()
    assert float(np.max(np.abs(E.T @ SP.gram @ f3))) < 1e-10
    Winf = curve.point(None)
    assert Winf.same_plane(W0)
    assert not Winf.same_oriented_plane(W0)


def test_curve_points_lie_in_span():
    rng = np.random.default_rng(4)
    curve = random_twistor_curve(SP, rng)
    for z in (0.3, -1.0 + 2.0j, 5.0):
        assert curve.contains_plane(curve.point(z))


def test_twistor_through_passes_through_plane():
    rng = np.random.default_rng(5)
    for _ in range(5):
        W = random_positive_plane(SP, rng)
        curve = twistor_through(W, rng=rng)
        assert curve.point(0.0).same_oriented_plane(W)


def test_parametrization_is_holomorphic():
    """Cauchy-Riemann residual of the projective chart w / w[k]."""
    rng = np.random.default_rng(6)
    curve = random_twistor_curve(SP34, rng)
    z0 = 0.2 - 0.4j
    h = 1e-5
    w0 = curve.null_lift(z0)
    k = int(np.argmax(np.abs(w0)))

    def chart(z):
        w = curve.null_lift(z)
        return np.delete(w / w[k], k)

    dx = (chart(z0 + h) - chart(z0 - h)) / (2 * h)
    dy = (chart(z0 + 1j * h) - chart(z0 - 1j * h)) / (2 * h)
    assert float(np.max(np.abs(dx + 1j * dy))) < 1e-7


def test_twistor_point_alias():
    rng = np.random.default_rng(7)
    curve = random_twistor_curve(SP, rng)
    assert twistor_point(curve, 0.5).same_oriented_plane(curve.point(0.5))


# ---------------------------------------------------------------------------
# Cauchy divisors
# ---------------------------------------------------------------------------

def test_divisor_requires_positive_vector():
    with pytest.raises(ValueError):
        CauchyDivisor(SP, np.eye(22)[5])     # negative norm
    CauchyDivisor(SP, np.eye(22)[0])         # fine


def test_cauchy_contains():
    v = np.eye(22)[0]
    div = CauchyDivisor(SP, v)
    rng = np.random.default_rng(8)
    # plane inside v^perp
    sub = QuadraticSpace(SP.gram[1:, 1:])
    Wp = random_positive_plane(sub, rng)
    basis = np.vstack([np.zeros((1, 2)), Wp.basis])
    from periodgeom.posgrass import OrientedPositivePlane
    W = OrientedPositivePlane(SP, basis)
    assert cauchy_contains(div, W)
    assert not cauchy_contains(div, random_positive_plane(SP, rng))


def test_cauchy_pencil_samples_contain_plane():
    rng = np.random.default_rng(9)
    W = random_positive_plane(SP, rng)
    pen = cauchy_through(W)
    for _ in range(10):
        v = pen.sample(rng)
        assert float(SP.q(v, v)) > 0
        assert pen.contains(v)
        assert cauchy_contains(CauchyDivisor(SP, v), W)


# ---------------------------------------------------------------------------
# twistor / Cauchy intersection
# ---------------------------------------------------------------------------

def test_intersection_generic():
    rng = np.random.default_rng(10)
    for _ in range(25):
        curve = random_twistor_curve(SP, rng)
        W = random_positive_plane(SP, rng)
        v = cauchy_through(W).sample(rng)
        div = CauchyDivisor(SP, v)
        res = twistor_cauchy_intersection(curve, div)
        assert res.kind == IntersectionKind.HITS
        assert res.unoriented_count == 1
        assert len(res.planes) == 2
        P, Q = res.planes
        assert P.same_plane(Q) and not P.same_oriented_plane(Q)
        for X in (P, Q):
            assert cauchy_contains(div, X, tol=1e-10)
            assert curve.contains_plane(X, tol=1e-10)


def test_intersection_matches_null_line_conjugation():
    rng = np.random.default_rng(11)
    curve = random_twistor_curve(SP, rng)
    v = cauchy_through(curve.point(1.3)).sample(rng)
    res = twistor_cauchy_intersection(curve, CauchyDivisor(SP, v))
    w1 = plane_to_null(res.planes[0])
    w2 = plane_to_null(res.planes[1])
    assert w1.same_line(w2.conjugate())


def test_intersection_contained_branch():
    # v orthogonal to all of U needs signature (4, n)
    sp = QuadraticSpace.diagonal(4, 1)
    U = Subspace(sp, np.eye(5)[:, :3])
    curve = TwistorCurve.from_subspace(U)
    div = CauchyDivisor(sp, np.eye(5)[3])
    res = twistor_cauchy_intersection(curve, div)
    assert res.kind == IntersectionKind.CONTAINED
    assert res.planes == ()


def test_intersection_hit_is_unique_root():
    # the hit parameter is consistent: re-intersecting through the found
    # plane's own pencil gives back the same unoriented plane
    rng = np.random.default_rng(12)
    curve = random_twistor_curve(SP34, rng)
    W = curve.point(0.7 - 0.2j)
    v = cauchy_through(W).sample(rng)
    res = twistor_cauchy_intersection(curve, CauchyDivisor(SP34, v))
    assert any(P.same_plane(W) for P in res.planes)


# ---------------------------------------------------------------------------
# Fujiki polarization
# ---------------------------------------------------------------------------

def test_power_form_homogeneity_guard():
    def not_homog(alpha):
        return float(alpha[0] ** 2 + alpha[1])
    with pytest.raises(ValueError):
        FujikiForm(2, 1, not_homog)


def test_fujiki_polarize_exact_recovery():
    G = fraction_matrix([[2, 1, 0, 0], [1, -2, 0, 1],
                         [0, 0, 3, 0], [0, 1, 0, -1]])
    for n in (1, 2, 3):
        F = power_form(G, Fraction(3, 2), n, exact=True)
        res = fujiki_polarize(F)
        lead = next(x for x in np.asarray(G).flat if x != 0)
        expect = np.asarray(G, dtype=object) / lead
        assert np.array_equal(np.asarray(res.gram), expect)
        assert res.constant == Fraction(3, 2) * lead ** n
        assert res.residual == 0


def test_fujiki_polarize_float_recovery():
    rng = np.random.default_rng(13)
    M = rng.standard_normal((5, 5))
    G = M + M.T
    F = power_form(G, 1.0, 2)
    res = fujiki_polarize(F)
    ratio = np.asarray(res.gram, dtype=float) / G
    lead = ratio.flat[np.flatnonzero(np.abs(G) > 1e-9)[0]]
    np.testing.assert_allclose(np.asarray(res.gram, dtype=float),
                               lead * G, atol=1e-8)
    assert res.residual < 1e-8


def test_fujiki_polarize_normalize_max():
    G = fraction_matrix([[2, 0], [0, -4]])
    F = power_form(G, Fraction(1), 1, exact=True)
    res = fujiki_polarize(F, normalize="max")
    assert max(abs(x) for x in np.asarray(res.gram).flat) == 1


def test_fujiki_polarize_rejects_degenerate():
    # F = (x0 + x1)^2 polarizes to a rank-1 gram
    F = monomial_form(2, 1, [([2, 0], Fraction(1)), ([0, 2], Fraction(1)),
                             ([1, 1], Fraction(2))], exact=True)
    with pytest.raises(NotFujikiError):
        fujiki_polarize(F)


def test_fujiki_polarize_rejects_non_power():
    # x0^4 + x1^4 is homogeneous of degree 4 but not q^2
    F = monomial_form(2, 2, [([4, 0], Fraction(1)), ([0, 4], Fraction(1))],
                      exact=True)
    with pytest.raises(NotFujikiError):
        fujiki_polarize(F)


def test_monomial_form_matches_power_form():
    # q = x0^2 - 2 x0 x1, n = 1
    G = fraction_matrix([[1, -1], [-1, 0]])
    F1 = power_form(G, Fraction(1), 1, exact=True)
    F2 = monomial_form(2, 1, [([2, 0], Fraction(1)), ([1, 1], Fraction(-2))],
                       exact=True)
    for v in ([1, 0], [0, 1], [1, 1], [2, -3]):
        assert F1(v) == F2(v)


# ---------------------------------------------------------------------------
# synthetic cup and the explicit q formula
# ---------------------------------------------------------------------------

def test_power_cup_small_cases():
    G = np.array([[1.0, 0.0], [0.0, -1.0]])
    cup = power_cup(G, 1.0, 1)
    e0, e1 = np.eye(2)
    assert cup(e0, e0) == pytest.approx(1.0)
    assert cup(e0, e1) == pytest.approx(0.0)
    cup2 = power_cup(G, 1.0, 2)
    # full polarization of q^2: cup(a,a,a,a) = q(a)^2
    a = np.array([2.0, 1.0])
    assert cup2(a, a, a, a) == pytest.approx((4.0 - 1.0) ** 2)


def test_bbf_recovers_seeded_form():
    rng = np.random.default_rng(14)
    d = 5
    M = rng.standard_normal((d, d))
    G = M + M.T + 4 * np.eye(d)   # make q(sigma + bar sigma) comfortably positive
    # need a period-like omega: q(w,w)=0, q(w,wbar)>0 in the seeded form
    sp = QuadraticSpace(G, tol=1e-9)
    if sp.signature().positive < 2:
        pytest.skip("seed not positive enough")
    from periodgeom.quadspace import orthogonal_frame
    F, eps = orthogonal_frame(sp)
    w = F[:, 0] - 1j * F[:, 1]
    for n in (1, 2, 3):
        cup = power_cup(G, 1.0, n)
        vals = []
        for _ in range(8):
            a = rng.standard_normal(d)
            b = rng.standard_normal(d)
            got = bbf_explicit(cup, n, w, a, b)
            ref = float(a @ G @ b)
            if abs(ref) > 1e-6:
                vals.append(got / ref)
        vals = np.asarray(vals)
        assert np.max(np.abs(vals - vals[0])) < 1e-8 * max(1.0, abs(vals[0]))
        # positivity on sigma + bar sigma
        s = np.real(w) * 2
        assert bbf_explicit(cup, n, w, s, s) > 0


def test_bbf_n1_is_twice_cup():
    G = np.diag([1.0, 1.0, -1.0])
    cup = power_cup(G, 1.0, 1)
    w = np.array([1.0, -1.0j, 0.0])
    a = np.array([1.0, 2.0, 3.0])
    b = np.array([-1.0, 0.5, 1.0])
    assert bbf_explicit(cup, 1, w, a, b) == pytest.approx(2.0 * cup(a, b))


# ---------------------------------------------------------------------------
# period image rank
# ---------------------------------------------------------------------------

def test_period_rank_twistor_is_two():
    rng = np.random.default_rng(15)
    curve = random_twistor_curve(SP, rng)
    pts = [np.array([0.1, 0.2]), np.array([-0.3, 0.4])]
    assert period_image_rank(
        lambda p: curve.point(complex(p[0], p[1])), pts) == 2


def test_period_rank_chart_is_four():
    rng = np.random.default_rng(16)
    chart = GraphChart(random_positive_plane(SP, rng))

    def phi(p):
        A = np.zeros((chart.codim, 2))
        A[0, :] = p[:2]
        A[1, :] = p[2:]
        return chart.plane_at(A)

    pts = [np.zeros(4), np.array([0.05, -0.02, 0.03, 0.01])]
    assert period_image_rank(phi, pts) == 4


def test_period_rank_constant_is_zero():
    rng = np.random.default_rng(17)
    W = random_positive_plane(SP, rng)
    assert period_image_rank(lambda p: W, [np.zeros(3)]) == 0
