"""Indefinite Kähler structure: closedness, Fubini-Study, invariance."""

import warnings

import numpy as np
import pytest

from periodgeom.quadspace import QuadraticSpace
from periodgeom.posgrass import GraphChart, random_positive_plane, rotate90
from periodgeom.perigeo import random_twistor_curve
from periodgeom.lorkahler import (
    FS_CONSTANT,
    Isometry,
    NotImmersionWarning,
    TangentVector,
    chart_metric,
    chart_omega,
    closedness_residual,
    closedness_suite,
    fubini_study_ratio,
    fubini_study_suite,
    invariance_residual,
    invariance_suite,
    metric_at,
    metric_matrix_at,
    omega_at,
    omega_matrix_at,
    pullback_form,
    random_isometry,
    tangent_space_signature,
)

SP34 = QuadraticSpace.diagonal(3, 4)
SP319 = QuadraticSpace.diagonal(3, 19)


def test_metric_unit_tangent():
    # tangent sending e1 to a unit positive normal direction, e2 to 0
    rng = np.random.default_rng(0)
    W = random_positive_plane(SP34, rng)
    chart = GraphChart(W)
    A = np.zeros((5, 2))
    A[0, 0] = 1.0          # first complement direction is the positive one
    assert chart.eps[0] == 1.0
    g = metric_at(W)
    t = TangentVector(W, A)
    assert g(t, t) == pytest.approx(1.0)


def test_omega_antisymmetry_and_compatibility():
    rng = np.random.default_rng(1)
    W = random_positive_plane(SP34, rng)
    om = omega_at(W)
    g = metric_at(W)
    for _ in range(5):
        A = TangentVector(W, rng.standard_normal((5, 2)))
        B = TangentVector(W, rng.standard_normal((5, 2)))
        assert om(A, A) == pytest.approx(0.0, abs=1e-12)
        assert om(A, B) == pytest.approx(-om(B, A), abs=1e-12)
        assert om(A, A.rotated()) == pytest.approx(g(A, A))


def test_tangent_vector_rejects_wrong_base():
    rng = np.random.default_rng(2)
    W1 = random_positive_plane(SP34, rng)
    W2 = random_positive_plane(SP34, rng)
    g = metric_at(W1)
    with pytest.raises(ValueError):
        g(TangentVector(W1, np.zeros((5, 2))), TangentVector(W2, np.zeros((5, 2))))


def test_metric_is_frame_independent():
    """Change-of-frame oracle: rotate the plane basis, transform tangents."""
    rng = np.random.default_rng(3)
    W = random_positive_plane(SP319, rng)
    chart = GraphChart(W)
    th = 0.83
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    from periodgeom.posgrass import OrientedPositivePlane
    W2 = OrientedPositivePlane(SP319, W.orthonormal_basis() @ R)
    chart2 = GraphChart(W2)
    for _ in range(5):
        A = rng.standard_normal((20, 2))
        B = rng.standard_normal((20, 2))
        T_A = chart.tangent_to_ambient(A)
        T_B = chart.tangent_to_ambient(B)
        # images of chart2's base columns under the same geometric tangents
        A2 = chart2.ambient_to_tangent(T_A @ (chart.E.T @ SP319.gram @ chart2.E))
        B2 = chart2.ambient_to_tangent(T_B @ (chart.E.T @ SP319.gram @ chart2.E))
        assert chart2.metric(A2, B2) == pytest.approx(chart.metric(A, B))
        assert chart2.omega(A2, B2) == pytest.approx(chart.omega(A, B))


def test_tangent_space_signature():
    rng = np.random.default_rng(4)
    assert tangent_space_signature(random_positive_plane(SP34, rng)) == (2, 8, 0)
    assert tangent_space_signature(random_positive_plane(SP319, rng)) == (2, 38, 0)


def test_form_matrices():
    rng = np.random.default_rng(5)
    W = random_positive_plane(SP34, rng)
    om = omega_matrix_at(W).value
    g = metric_matrix_at(W).value
    np.testing.assert_allclose(om, -om.T, atol=1e-12)
    np.testing.assert_allclose(g, g.T, atol=1e-12)
    assert np.linalg.matrix_rank(om, tol=1e-8) == 10   # 2(dim - 2)


# ---------------------------------------------------------------------------
# closedness
# ---------------------------------------------------------------------------

def test_closedness_residual_origin_superconverges():
    # at the chart origin the geodesic symmetry kills odd derivatives
    rng = np.random.default_rng(6)
    W = random_positive_plane(SP34, rng)
    X, Y, Z = (rng.standard_normal((5, 2)) for _ in range(3))
    assert closedness_residual(W, X, Y, Z, h=1e-3) < 1e-10


def test_closedness_residual_displaced_is_second_order():
    rng = np.random.default_rng(7)
    W = random_positive_plane(SP34, rng)
    chart = GraphChart(W)
    def unit(M):
        return M / np.linalg.norm(M)

    A0 = 0.3 * unit(rng.standard_normal((5, 2)))
    X, Y, Z = (unit(rng.standard_normal((5, 2))) for _ in range(3))
    r1 = closedness_residual(chart, X, Y, Z, h=1e-3, at=A0)
    r2 = closedness_residual(chart, X, Y, Z, h=5e-4, at=A0)
    assert r1 < 1e-6
    assert r1 / r2 == pytest.approx(4.0, rel=0.2)


def test_closedness_rejects_bad_step():
    rng = np.random.default_rng(8)
    W = random_positive_plane(SP34, rng)
    X = np.zeros((5, 2))
    with pytest.raises(ValueError):
        closedness_residual(W, X, X, X, h=0.0)


def test_closedness_suite_summary():
    out = closedness_suite(SP34, samples=20, h=1e-3, seed=0)
    assert out["residual_max"] < 1e-6
    assert 1.8 <= out["order_estimate"] <= 2.2
    assert out["control_max"] > 1e-3


def test_chart_evaluation_at_origin_matches_chart_forms():
    rng = np.random.default_rng(9)
    W = random_positive_plane(SP319, rng)
    chart = GraphChart(W)
    A = rng.standard_normal((20, 2))
    B = rng.standard_normal((20, 2))
    O = np.zeros((20, 2))
    assert chart_omega(chart, O, A, B) == pytest.approx(chart.omega(A, B))
    assert chart_metric(chart, O, A, B) == pytest.approx(chart.metric(A, B))


# ---------------------------------------------------------------------------
# Fubini-Study
# ---------------------------------------------------------------------------

def test_fs_ratio_constant_along_curve():
    rng = np.random.default_rng(10)
    curve = random_twistor_curve(SP319, rng)
    r0 = fubini_study_ratio(curve, 0.0)
    r1 = fubini_study_ratio(curve, 1.0 + 2.0j)
    assert abs(r0 - r1) < 1e-8
    assert r0 > 0
    assert r0 == pytest.approx(FS_CONSTANT, abs=1e-10)


def test_fs_constant_across_signatures():
    for n in (1, 4, 19):
        sp = QuadraticSpace.diagonal(3, n)
        out = fubini_study_suite(sp, curves=3, points=10, seed=0)
        assert out["constant"] == pytest.approx(FS_CONSTANT, abs=1e-8)
        assert out["max_deviation"] < 1e-8


def test_fs_rejects_infinite_parameter():
    rng = np.random.default_rng(11)
    curve = random_twistor_curve(SP34, rng)
    with pytest.raises(ValueError):
        fubini_study_ratio(curve, float("inf"))


def test_pullback_matches_fs_density():
    """Cross-module consistency of the two omega evaluations."""
    rng = np.random.default_rng(12)
    curve = random_twistor_curve(SP34, rng)
    for z0 in (0.0 + 0.0j, 0.4 - 0.3j, 1.1 + 0.2j):
        val = pullback_form(
            lambda p: curve.point(complex(p[0], p[1])),
            np.array([z0.real, z0.imag]),
            np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        expect = FS_CONSTANT / (1.0 + abs(z0) ** 2) ** 2
        assert val == pytest.approx(expect, rel=1e-6)


def test_pullback_warns_on_rank_deficiency():
    rng = np.random.default_rng(13)
    W = random_positive_plane(SP34, rng)
    with pytest.warns(NotImmersionWarning):
        pullback_form(lambda p: W, np.zeros(2),
                      np.array([1.0, 0.0]), np.array([0.0, 1.0]))


# ---------------------------------------------------------------------------
# invariance
# ---------------------------------------------------------------------------

def test_isometry_validation():
    with pytest.raises(ValueError):
        Isometry(SP34, 2.0 * np.eye(7))
    iso = Isometry(SP34, np.eye(7))
    assert iso.defect() == 0.0


def test_random_isometry_defect():
    for seed in range(5):
        iso = random_isometry(SP319, seed)
        assert iso.defect() < 1e-10


def test_identity_and_minus_identity_invariance():
    rng = np.random.default_rng(14)
    W = random_positive_plane(SP34, rng)
    X = rng.standard_normal((5, 2))
    Y = rng.standard_normal((5, 2))
    for Q in (np.eye(7), -np.eye(7)):
        iso = Isometry(SP34, Q)
        assert invariance_residual(iso, [(W, X, Y)]) < 1e-10


def test_invariance_random_isometries():
    rng = np.random.default_rng(15)
    for seed in range(5):
        iso = random_isometry(SP319, seed)
        batch = []
        for _ in range(3):
            W = random_positive_plane(SP319, rng)
            batch.append((W, rng.standard_normal((20, 2)),
                          rng.standard_normal((20, 2))))
        assert invariance_residual(iso, batch) < 1e-8


def test_invariance_suite_summary():
    out = invariance_suite(SP34, isometries=20, samples_per=2, seed=0)
    assert out["residual_max"] < 1e-8
