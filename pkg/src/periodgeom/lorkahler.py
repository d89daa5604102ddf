"""Indefinite Kähler structure on the positive Grassmannian.

The tangent space at a plane W is Hom(W, W^perp); the trace pairing
g(A, B) = sum_i q(A e_i, B e_i) over an oriented orthonormal frame of W has
signature (2, 2 dim - 6), and omega(A, B) = g(rotate90(A), B) is a closed
nondegenerate 2-form. This module evaluates both at displaced chart points
with exact linear algebra (so the only error in the finite-difference
closedness check is the O(h^2) truncation of the scheme), restricts omega
to twistor curves (Fubini-Study, constant 4 under the trace normalization),
checks isometry invariance, and pulls omega back along immersions.

Sign convention: omega(A, rotate90(A)) = +g(A, A) with rotate90 from
posgrass (columns (A1, A2) -> (A2, -A1)).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .quadspace import QuadraticSpace, Signature, signature
from .posgrass import (
    GraphChart,
    NonPositivePlaneError,
    OrientedPositivePlane,
    random_positive_plane,
    rotate90,
    _random_isometry_matrix,
)
from .perigeo import TwistorCurve

__all__ = [
    "FS_CONSTANT",
    "TangentVector",
    "FormSample",
    "Isometry",
    "metric_at",
    "omega_at",
    "chart_metric",
    "chart_omega",
    "closedness_residual",
    "closedness_suite",
    "fubini_study_ratio",
    "fubini_study_suite",
    "random_isometry",
    "invariance_residual",
    "invariance_suite",
    "NotImmersionWarning",
    "pullback_form",
    "omega_matrix_at",
    "metric_matrix_at",
    "tangent_space_signature",
]

# value of fubini_study_ratio under the trace normalization of the metric
FS_CONSTANT = 4.0


class NotImmersionWarning(UserWarning):
    """The sampled differential is rank-deficient at the base point."""


@dataclass
class TangentVector:
    """Tangent vector at a plane: matrix of W -> W^perp in chart frames.

    Rows index the pseudo-orthonormal complement frame of the graph chart
    at ``at`` (deterministically reconstructible from the plane), columns
    the oriented orthonormal frame of ``at``.
    """
    at: OrientedPositivePlane
    A: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        k = self.at.ambient.dim - 2
        if self.A.shape != (k, 2):
            raise ValueError(f"tangent matrix must have shape ({k}, 2)")

    def rotated(self) -> "TangentVector":
        return TangentVector(self.at, rotate90(self.A))


def _check_bound(W: OrientedPositivePlane, T: TangentVector) -> None:
    if T.at is W:
        return
    if not T.at.same_oriented_plane(W):
        raise ValueError("tangent vector is bound to a different base plane")


def metric_at(W: OrientedPositivePlane):
    """g_W as a callable on TangentVectors at W."""
    chart = GraphChart(W)

    def g(A: TangentVector, B: TangentVector) -> float:
        _check_bound(W, A)
        _check_bound(W, B)
        return chart.metric(A.A, B.A)

    return g


def omega_at(W: OrientedPositivePlane):
    """omega_W = g_W(rotate90 ., .) as a callable on TangentVectors at W."""
    chart = GraphChart(W)

    def om(A: TangentVector, B: TangentVector) -> float:
        _check_bound(W, A)
        _check_bound(W, B)
        return chart.omega(A.A, B.A)

    return om


# ---------------------------------------------------------------------------
# displaced evaluation in a fixed chart
# ---------------------------------------------------------------------------

def _gs_onb2(space: QuadraticSpace, b: np.ndarray) -> np.ndarray:
    """Oriented orthonormalization of a 2-column basis; errors if not positive."""
    G = space.gram
    b1, b2 = b[:, 0], b[:, 1]
    n1 = float(b1 @ G @ b1)
    if n1 <= 0:
        raise NonPositivePlaneError("chart point left the positivity region")
    u1 = b1 / math.sqrt(n1)
    w = b2 - float(b2 @ G @ u1) * u1
    n2 = float(w @ G @ w)
    if n2 <= 0:
        raise NonPositivePlaneError("chart point left the positivity region")
    return np.column_stack([u1, w / math.sqrt(n2)])


def _ambient_metric(space: QuadraticSpace, TX: np.ndarray, TY: np.ndarray) -> float:
    G = space.gram
    return float(TX[:, 0] @ G @ TY[:, 0] + TX[:, 1] @ G @ TY[:, 1])


def _ambient_omega(space: QuadraticSpace, TX: np.ndarray, TY: np.ndarray) -> float:
    G = space.gram
    return float(TX[:, 1] @ G @ TY[:, 0] - TX[:, 0] @ G @ TY[:, 1])


def _displaced_tangents(chart: GraphChart, A, directions):
    """Ambient tangent maps of chart directions at the chart point A.

    The plane at A has basis b = E + C A; each direction X moves the basis
    with velocity C X, and the corresponding map W_A -> W_A^perp, expressed
    against the oriented orthonormal frame E_W of W_A, is
    (1 - P) (C X) S with S the coordinates of E_W in the basis b.
    """
    space = chart.ambient
    G = space.gram
    b = chart.E + chart.C @ np.asarray(A, dtype=float)
    E_W = _gs_onb2(space, b)
    P = E_W @ (E_W.T @ G)
    S = np.linalg.solve(b.T @ G @ b, b.T @ G @ E_W)
    out = []
    for X in directions:
        V = chart.C @ (np.asarray(X, dtype=float) @ S)
        out.append(V - P @ V)
    return E_W, out


def chart_metric(chart: GraphChart, A, X, Y) -> float:
    """g at the chart point A applied to the chart directions X, Y."""
    _, (TX, TY) = _displaced_tangents(chart, A, (X, Y))
    return _ambient_metric(chart.ambient, TX, TY)


def chart_omega(chart: GraphChart, A, X, Y) -> float:
    """omega at the chart point A applied to the chart directions X, Y."""
    _, (TX, TY) = _displaced_tangents(chart, A, (X, Y))
    return _ambient_omega(chart.ambient, TX, TY)


def _tilted_omega(chart: GraphChart, A, X, Y) -> float:
    """Deliberately non-closed comparison form (1 + A[0,0]) * omega."""
    return (1.0 + float(np.asarray(A)[0, 0])) * chart_omega(chart, A, X, Y)


# ---------------------------------------------------------------------------
# closedness
# ---------------------------------------------------------------------------

def closedness_residual(base, X, Y, Z, h: float = 1e-3, form=chart_omega,
                        at=None) -> float:
    """|d form (X, Y, Z)| at a chart point by central differences.

    For constant coordinate fields the exterior derivative reduces to the
    cyclic sum of directional derivatives of the coefficient functions,
    d omega(X,Y,Z) = D_X omega(Y,Z) - D_Y omega(X,Z) + D_Z omega(X,Y);
    each derivative is a second-order central difference with step h, so
    the residual of a closed form is O(h^2).

    ``at`` is the chart coordinate of the stencil center (default: origin).
    At the origin the chart is equivariant under the geodesic symmetry of
    the base plane (A -> -A), so all odd coordinate derivatives of the
    coefficients vanish there and the residual drops straight to rounding
    noise; a generic displaced center exhibits the honest O(h^2) rate.
    """
    chart = base if isinstance(base, GraphChart) else GraphChart(base)
    if h <= 0:
        raise ValueError("step h must be positive")
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    A0 = np.zeros((chart.codim, 2)) if at is None else np.asarray(at, dtype=float)

    def diff(U, V1, V2):
        return (form(chart, A0 + h * U, V1, V2)
                - form(chart, A0 - h * U, V1, V2)) / (2 * h)

    return abs(diff(X, Y, Z) - diff(Y, X, Z) + diff(Z, X, Y))


def _unit(M: np.ndarray) -> np.ndarray:
    return M / np.linalg.norm(M)


def closedness_suite(space: QuadraticSpace, samples: int = 100, h: float = 1e-3,
                     seed: int = 0, scale: float = 0.6) -> dict:
    """Residuals over random (plane, direction-triple) samples.

    Reports the residual at h and h/2, the Richardson order estimate
    log2(max_res(h) / max_res(h/2)) (2.0 for a second-order-clean scheme),
    and the same residual for the non-closed control form.
    """
    rng = np.random.default_rng(seed)
    res_h, res_h2, control = [], [], []
    for _ in range(samples):
        W = random_positive_plane(space, rng, scale)
        chart = GraphChart(W)
        A0 = 0.3 * _unit(rng.standard_normal((chart.codim, 2)))
        X, Y, Z = (_unit(rng.standard_normal((chart.codim, 2))) for _ in range(3))
        res_h.append(closedness_residual(chart, X, Y, Z, h, at=A0))
        res_h2.append(closedness_residual(chart, X, Y, Z, h / 2, at=A0))
        control.append(closedness_residual(chart, X, Y, Z, h,
                                           form=_tilted_omega, at=A0))
    order = math.log2(max(res_h) / max(res_h2)) if min(max(res_h), max(res_h2)) > 0 \
        else float("nan")
    return {
        "samples": samples,
        "h": h,
        "residual_max": max(res_h),
        "residual_mean": sum(res_h) / len(res_h),
        "residual_half_max": max(res_h2),
        "order_estimate": order,
        "control_max": max(control),
        "control_mean": sum(control) / len(control),
    }


# ---------------------------------------------------------------------------
# Fubini-Study restriction to twistor curves
# ---------------------------------------------------------------------------

def fubini_study_ratio(curve: TwistorCurve, z) -> float:
    """omega(d phi dx, d phi dy) divided by the FS density 1/(1+|z|^2)^2.

    phi is the curve parametrization z -> plane; the differential is exact
    (analytic derivative of the null lift), so the ratio is constant to
    rounding. Under the trace normalization the constant is FS_CONSTANT.
    """
    z = complex(z)
    if not np.isfinite(abs(z)):
        raise ValueError("parametrization chart requires finite z")
    space = curve.ambient
    G = space.gram
    w = curve.null_lift(z)
    wp = curve.null_lift_derivative(z)
    b = np.column_stack([w.real, -w.imag])
    # d/dx and d/dy of the basis (z = x + iy): velocities of (Re w, -Im w)
    vx = np.column_stack([wp.real, -wp.imag])
    wy = 1j * wp
    vy = np.column_stack([wy.real, -wy.imag])
    E_W = _gs_onb2(space, b)
    P = E_W @ (E_W.T @ G)
    S = np.linalg.solve(b.T @ G @ b, b.T @ G @ E_W)
    TX = vx @ S
    TX -= P @ TX
    TY = vy @ S
    TY -= P @ TY
    val = _ambient_omega(space, TX, TY)
    return float(val * (1.0 + abs(z) ** 2) ** 2)


def fubini_study_suite(space: QuadraticSpace, curves: int = 10, points: int = 50,
                       seed: int = 0, scale: float = 0.6) -> dict:
    """Constancy sweep of fubini_study_ratio over random curves and points."""
    from .perigeo import random_twistor_curve
    rng = np.random.default_rng(seed)
    values = []
    for _ in range(curves):
        curve = random_twistor_curve(space, rng, scale)
        for _ in range(points):
            z = complex(*rng.uniform(-2.0, 2.0, size=2))
            values.append(fubini_study_ratio(curve, z))
    mean = sum(values) / len(values)
    return {
        "curves": curves,
        "points": points,
        "constant": mean,
        "max_deviation": max(abs(v - mean) for v in values),
        "min": min(values),
        "max": max(values),
    }


# ---------------------------------------------------------------------------
# isometry invariance
# ---------------------------------------------------------------------------

class Isometry:
    """Linear map with Q^T G Q = G for the ambient Gram matrix G."""

    def __init__(self, space: QuadraticSpace, Q, tol: float = 1e-8):
        self.space = space
        self.Q = np.asarray(Q, dtype=float)
        if self.Q.shape != (space.dim, space.dim):
            raise ValueError("isometry matrix has the wrong shape")
        if self.defect() > tol:
            raise ValueError("matrix does not preserve the form")

    def defect(self) -> float:
        G = self.space.gram
        return float(np.max(np.abs(self.Q.T @ G @ self.Q - G)))

    def __call__(self, x) -> np.ndarray:
        return self.Q @ np.asarray(x, dtype=float)

    def apply_to_plane(self, W: OrientedPositivePlane) -> OrientedPositivePlane:
        return OrientedPositivePlane(self.space, self.Q @ W.basis, check=False)


def random_isometry(space: QuadraticSpace, seed, scale: float = 0.5) -> Isometry:
    """exp(S) with G S antisymmetric; scale 0 gives the identity."""
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(seed)
    if scale == 0:
        return Isometry(space, np.eye(space.dim))
    return Isometry(space, _random_isometry_matrix(space, rng, scale))


def invariance_residual(iso: Isometry, samples, include_metric: bool = True) -> float:
    """max |value at Q.W of pushed tangents - value at W| over the samples.

    Each sample is (W, X, Y) with X, Y chart matrices at W. The pushed
    tangent at Q.W is evaluated against the independently built chart there,
    so the residual also exercises chart-independence of the two forms.
    """
    space = iso.space
    G = space.gram
    worst = 0.0
    for W, X, Y in samples:
        chart = GraphChart(W)
        g0 = chart.metric(X, Y)
        o0 = chart.omega(X, Y)
        W2 = iso.apply_to_plane(W)
        chart2 = GraphChart(W2)
        # coordinates of Q^{-1} (chart2 frame) in the frame of W
        s = chart.E.T @ G @ np.linalg.solve(iso.Q, chart2.E)
        pushed = []
        for A in (X, Y):
            T2 = iso.Q @ (chart.C @ (np.asarray(A, dtype=float) @ s))
            pushed.append(chart2.ambient_to_tangent(T2))
        P2X, P2Y = pushed
        worst = max(worst, abs(chart2.omega(P2X, P2Y) - o0))
        if include_metric:
            worst = max(worst, abs(chart2.metric(P2X, P2Y) - g0))
    return worst


def invariance_suite(space: QuadraticSpace, isometries: int = 100,
                     samples_per: int = 2, seed: int = 0,
                     scale: float = 0.5) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(isometries):
        iso = random_isometry(space, rng, scale)
        batch = []
        for _ in range(samples_per):
            W = random_positive_plane(space, rng, 0.6)
            k = space.dim - 2
            batch.append((W, _unit(rng.standard_normal((k, 2))),
                          _unit(rng.standard_normal((k, 2)))))
        worst = max(worst, invariance_residual(iso, batch))
    return {"isometries": isometries, "samples_per": samples_per,
            "residual_max": worst}


# ---------------------------------------------------------------------------
# pullback along immersions
# ---------------------------------------------------------------------------

def pullback_form(phi, point, x, y, step: float = 1e-4,
                  rank_tol: float = 1e-6) -> float:
    """omega(d phi x, d phi y) at phi(point) by projector differences.

    phi maps parameter vectors to OrientedPositivePlane. The differential
    along a direction d is (1 - P0) P'(d) restricted to the base frame,
    with P' a central difference of projectors. A rank-deficient sampled
    differential raises NotImmersionWarning (the value is still returned).
    """
    b0 = np.asarray(point, dtype=float)
    W0 = phi(b0)
    space = W0.ambient
    E0 = W0.orthonormal_basis()
    P0 = W0.projector()

    def tangent(d):
        d = np.asarray(d, dtype=float)
        Pp = phi(b0 + step * d).projector()
        Pm = phi(b0 - step * d).projector()
        Pdot = (Pp - Pm) / (2 * step)
        V = Pdot @ E0
        return V - P0 @ V

    TX, TY = tangent(x), tangent(y)
    J = np.column_stack([TX.reshape(-1), TY.reshape(-1)])
    sv = np.linalg.svd(J, compute_uv=False)
    if int(np.sum(sv > rank_tol * max(1.0, float(sv[0])))) < 2:
        warnings.warn("sampled differential is rank-deficient: "
                      "the map is not an immersion at this point",
                      NotImmersionWarning, stacklevel=2)
    return _ambient_omega(space, TX, TY)


# ---------------------------------------------------------------------------
# matrix samples of the two forms
# ---------------------------------------------------------------------------

@dataclass
class FormSample:
    """Matrix of omega in flattened chart coordinates at a chart point."""
    point: np.ndarray
    value: np.ndarray


def _unit_directions(k: int):
    for i in range(k):
        for j in range(2):
            U = np.zeros((k, 2))
            U[i, j] = 1.0
            yield U


def omega_matrix_at(base, at=None) -> FormSample:
    """omega as an antisymmetric matrix over the flattened chart basis.

    Basis order is row-major on (complement index, frame column). The
    antisymmetry is exact by construction (upper triangle computed, lower
    filled with negation).
    """
    chart = base if isinstance(base, GraphChart) else GraphChart(base)
    k = chart.codim
    A0 = np.zeros((k, 2)) if at is None else np.asarray(at, dtype=float)
    units = list(_unit_directions(k))
    m = len(units)
    M = np.zeros((m, m))
    for a in range(m):
        for b in range(a + 1, m):
            v = chart_omega(chart, A0, units[a], units[b])
            M[a, b] = v
            M[b, a] = -v
    return FormSample(point=A0, value=M)


def metric_matrix_at(base, at=None) -> FormSample:
    """g as a symmetric matrix over the flattened chart basis."""
    chart = base if isinstance(base, GraphChart) else GraphChart(base)
    k = chart.codim
    A0 = np.zeros((k, 2)) if at is None else np.asarray(at, dtype=float)
    units = list(_unit_directions(k))
    m = len(units)
    M = np.zeros((m, m))
    for a in range(m):
        for b in range(a, m):
            v = chart_metric(chart, A0, units[a], units[b])
            M[a, b] = M[b, a] = v
    return FormSample(point=A0, value=M)


def tangent_space_signature(base) -> Signature:
    """Signature of g on the tangent space: (2, 2 dim - 6) in signature (3, n)."""
    return signature(metric_matrix_at(base).value)
