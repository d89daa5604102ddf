"""Oriented positive 2-planes in an indefinite quadratic space.

The positive Grassmannian Gr++(V) carries a complex structure through the
correspondence with projectivized positive null vectors: an oriented plane
W with q-orthonormal oriented basis (u1, u2) maps to the null line spanned
by w = u1 - i u2, which satisfies q(w, w) = 0 and q(w, wbar) = 2, and whose
real/imaginary parts recover W with its orientation. This module implements
that correspondence, the unit-disc chart for signature (2,1), retraction
along negative lines, and graph charts used by the metric layer.

The dual picture of planes as negative lines in the Cayley-Klein model is
intentionally not implemented; only the unit-disc chart below touches it.
"""

from __future__ import annotations

import numpy as np

from .quadspace import (
    DEFAULT_TOL,
    QuadraticSpace,
    Subspace,
    is_positive_definite,
    orthogonal_complement,
    orthogonal_frame,
)

__all__ = [
    "PLANE_MATCH_TOL",
    "NonPositivePlaneError",
    "OrientedPositivePlane",
    "PositiveNullVector",
    "plane_to_null",
    "null_to_plane",
    "standard_disc_frame",
    "disc_embed",
    "disc_coords",
    "retract",
    "GraphChart",
    "graph_plane",
    "rotate90",
    "random_positive_plane",
    "serialize_plane",
    "parse_plane",
]

# projector-distance threshold under which two planes count as equal
PLANE_MATCH_TOL = 1e-9


class NonPositivePlaneError(ValueError):
    """The restriction of the form to the given plane is not positive."""


class OrientedPositivePlane:
    """2-plane with ordered basis, on which the ambient form is positive."""

    def __init__(self, ambient: QuadraticSpace, basis, check: bool = True):
        self.ambient = ambient
        B = np.asarray(basis, dtype=float)
        if B.shape != (ambient.dim, 2):
            raise ValueError("plane basis must be an (ambient dim) x 2 matrix")
        self.basis = B
        if check:
            g2 = B.T @ ambient.gram @ B
            if not is_positive_definite(g2, tol=ambient.tol):
                raise NonPositivePlaneError(
                    "form is not positive definite on the given plane")
        self._onb: np.ndarray | None = None
        self._proj: np.ndarray | None = None

    # -- frames -----------------------------------------------------------

    def orthonormal_basis(self) -> np.ndarray:
        """Oriented q-orthonormal basis via Gram-Schmidt (orientation kept)."""
        if self._onb is None:
            G = self.ambient.gram
            b1, b2 = self.basis[:, 0], self.basis[:, 1]
            u1 = b1 / np.sqrt(b1 @ G @ b1)
            w = b2 - (b2 @ G @ u1) * u1
            u2 = w / np.sqrt(w @ G @ w)
            self._onb = np.column_stack([u1, u2])
        return self._onb

    def projector(self) -> np.ndarray:
        """q-orthogonal projector onto the plane."""
        if self._proj is None:
            E = self.orthonormal_basis()
            self._proj = E @ (E.T @ self.ambient.gram)
        return self._proj

    # -- comparisons --------------------------------------------------------

    def distance(self, other: "OrientedPositivePlane") -> float:
        return float(np.max(np.abs(self.projector() - other.projector())))

    def same_plane(self, other, tol: float = PLANE_MATCH_TOL) -> bool:
        return self.distance(other) <= tol

    def orientation_sign(self, other: "OrientedPositivePlane") -> int:
        """Sign of the change of basis (call only on the same plane)."""
        G = self.ambient.gram
        g2 = self.basis.T @ G @ self.basis
        C = np.linalg.solve(g2, self.basis.T @ G @ other.basis)
        return 1 if np.linalg.det(C) > 0 else -1

    def same_oriented_plane(self, other, tol: float = PLANE_MATCH_TOL) -> bool:
        return self.same_plane(other, tol) and self.orientation_sign(other) > 0

    def reverse(self) -> "OrientedPositivePlane":
        return OrientedPositivePlane(
            self.ambient, self.basis[:, ::-1], check=False)

    def contains_vector(self, v, tol: float | None = None) -> bool:
        t = PLANE_MATCH_TOL if tol is None else tol
        v = np.asarray(v, dtype=float)
        r = self.projector() @ v - v
        return float(np.max(np.abs(r))) <= t * max(1.0, float(np.max(np.abs(v))))

    def __repr__(self) -> str:
        return f"OrientedPositivePlane(dim={self.ambient.dim})"


class PositiveNullVector:
    """Complex vector with q(v, v) = 0 and q(v, vbar) > 0."""

    def __init__(self, ambient: QuadraticSpace, vec, tol: float | None = None):
        self.ambient = ambient
        v = np.asarray(vec, dtype=complex)
        t = ambient.tol if tol is None else tol
        h = complex(ambient.q(v, np.conj(v))).real
        if h <= 0 or abs(complex(ambient.q(v, v))) > max(t * h, t):
            raise ValueError("vector is not a positive null vector")
        self.vec = v

    def conjugate(self) -> "PositiveNullVector":
        return PositiveNullVector(self.ambient, np.conj(self.vec))

    def same_line(self, other, tol: float = 1e-8) -> bool:
        a = self.vec / np.linalg.norm(self.vec)
        b = other.vec if isinstance(other, PositiveNullVector) else np.asarray(other)
        b = b / np.linalg.norm(b)
        return bool(1.0 - abs(np.vdot(a, b)) <= tol)


def plane_to_null(W: OrientedPositivePlane) -> PositiveNullVector:
    """Null vector of an oriented positive plane.

    For the oriented q-orthonormal basis (u1, u2) the representative is
    w = u1 - i u2; then {w + wbar, i(w - wbar)} is positively oriented in W
    and q(w, wbar) = 2. The representative is canonicalized by rotating the
    largest-modulus coordinate to the positive real axis, so the first
    nonzero coordinate of Re w is positive and roundtrips are deterministic.
    """
    E = W.orthonormal_basis()
    w = E[:, 0] - 1j * E[:, 1]
    k = int(np.argmax(np.abs(w)))
    w = w * (np.conj(w[k]) / abs(w[k]))
    h = complex(W.ambient.q(w, np.conj(w))).real
    w = w * np.sqrt(2.0 / h)
    return PositiveNullVector(W.ambient, w)


def null_to_plane(v: PositiveNullVector | np.ndarray,
                  ambient: QuadraticSpace | None = None) -> OrientedPositivePlane:
    """Oriented plane spanned by (w + wbar, i(w - wbar)) = 2(Re w, -Im w)."""
    if isinstance(v, PositiveNullVector):
        ambient, vec = v.ambient, v.vec
    else:
        if ambient is None:
            raise ValueError("ambient space required for a raw vector")
        vec = PositiveNullVector(ambient, v).vec
    basis = np.column_stack([vec.real, -vec.imag])
    return OrientedPositivePlane(ambient, basis)


# ---------------------------------------------------------------------------
# disc model for signature (2, 1)
# ---------------------------------------------------------------------------

def standard_disc_frame(space: QuadraticSpace) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Frame (u, v, w) with |u|^2 = -1, |v|^2 = |w|^2 = 1 for signature (2,1)."""
    if space.signature() != (2, 1, 0):
        raise ValueError("disc model requires ambient signature (2, 1)")
    F, _ = orthogonal_frame(space)
    return F[:, 2], F[:, 0], F[:, 1]


def _check_disc_frame(space, frame, tol):
    u, v, w = (np.asarray(x, dtype=float) for x in frame)
    ref = np.array([[-1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    M = np.column_stack([u, v, w])
    if float(np.max(np.abs(M.T @ space.gram @ M - ref))) > max(tol, 1e-7):
        raise ValueError("frame must be orthogonal with norms (-1, 1, 1)")
    return u, v, w


def disc_embed(space: QuadraticSpace, a: float, b: float,
               frame=None) -> OrientedPositivePlane:
    """Plane <v + a u, w + b u> for disc coordinates a^2 + b^2 < 1.

    On x(v + a u) + y(w + b u) the form evaluates to
    x^2 + y^2 - (a x + b y)^2, so the plane is positive exactly on the open
    unit disc; outside it a NonPositivePlaneError is raised.
    """
    frame = standard_disc_frame(space) if frame is None else frame
    u, v, w = _check_disc_frame(space, frame, space.tol)
    basis = np.column_stack([v + a * u, w + b * u])
    return OrientedPositivePlane(space, basis)


def disc_coords(W: OrientedPositivePlane, frame=None) -> tuple[float, float]:
    """Inverse of disc_embed: the unique (a, b) with W = <v + a u, w + b u>."""
    space = W.ambient
    frame = standard_disc_frame(space) if frame is None else frame
    u, v, w = _check_disc_frame(space, frame, space.tol)
    Fm = np.column_stack([u, v, w])
    X = np.linalg.solve(Fm, W.basis)        # frame coordinates of the basis
    S = X[1:, :]                            # (v, w) components, must be invertible
    C = np.linalg.inv(S)
    a, b = (X[0:1, :] @ C)[0]
    return float(a), float(b)


def retract(W: OrientedPositivePlane, line) -> OrientedPositivePlane:
    """Project W into the orthogonal complement of a negative line.

    The image of a positive plane stays positive, so this retracts
    Gr++(V) onto Gr++(l^perp) for any negative line l (a 1-dimensional
    Subspace, or a spanning vector).
    """
    amb = W.ambient
    if not isinstance(line, Subspace):
        line = Subspace(amb, np.asarray(line, dtype=float).reshape(-1, 1))
    if line.dim != 1:
        raise ValueError("retraction line must be 1-dimensional")
    u = np.asarray(line.basis[:, 0], dtype=float)
    d = float(amb.q(u, u))
    if d >= -amb.tol * max(1.0, float(np.max(np.abs(u))) ** 2):
        raise ValueError("retraction requires a negative line")
    B = W.basis - np.outer(u, (u @ amb.gram @ W.basis) / d)
    return OrientedPositivePlane(amb, B)


# ---------------------------------------------------------------------------
# graph charts
# ---------------------------------------------------------------------------

def rotate90(A: np.ndarray) -> np.ndarray:
    """Precompose a tangent matrix with the +90 degree rotation of the base.

    Columns (A1, A2) become (A2, -A1); applying it twice gives -A.
    """
    A = np.asarray(A, dtype=float)
    return np.column_stack([A[:, 1], -A[:, 0]])


class GraphChart:
    """Chart of Gr++ around a base plane W: A in R^((n-2) x 2) -> graph plane.

    The base plane ships with an oriented q-orthonormal basis E, and the
    complement with a pseudo-orthonormal frame C (signs ``eps``, positive
    directions first). The plane at A is spanned by E + C A, and A is also
    the matrix of a tangent vector W -> W^perp in these frames.
    """

    def __init__(self, base: OrientedPositivePlane):
        self.base = base
        self.ambient = base.ambient
        E = base.orthonormal_basis()
        K = orthogonal_complement(Subspace(self.ambient, E)).basis
        Gc = K.T @ self.ambient.gram @ K
        lam, V = np.linalg.eigh(Gc)
        idx = np.argsort(-lam)
        lam, V = lam[idx], V[:, idx]
        self.E = E
        self.C = K @ (V / np.sqrt(np.abs(lam)))
        self.eps = np.sign(lam)

    @property
    def codim(self) -> int:
        return self.ambient.dim - 2

    def plane_at(self, A, check: bool = True) -> OrientedPositivePlane:
        A = np.asarray(A, dtype=float)
        if A.shape != (self.codim, 2):
            raise ValueError(f"chart point must have shape ({self.codim}, 2)")
        return OrientedPositivePlane(self.ambient, self.E + self.C @ A, check=check)

    def metric(self, A, B) -> float:
        """g(A, B) = sum_i q(A e_i, B e_i) in the complement frame."""
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        return float(np.sum(self.eps[:, None] * A * B))

    def omega(self, A, B) -> float:
        """omega(A, B) = g(rotate90(A), B)."""
        return self.metric(rotate90(A), B)

    def tangent_to_ambient(self, A) -> np.ndarray:
        """Ambient images (T(e1), T(e2)) of the tangent with matrix A."""
        return self.C @ np.asarray(A, dtype=float)

    def ambient_to_tangent(self, T: np.ndarray) -> np.ndarray:
        """Inverse of tangent_to_ambient for columns lying in W^perp."""
        return self.eps[:, None] * (self.C.T @ self.ambient.gram @ T)


def graph_plane(base: OrientedPositivePlane, A) -> OrientedPositivePlane:
    """Graph plane of a tangent matrix A over the base plane."""
    return GraphChart(base).plane_at(A)


# ---------------------------------------------------------------------------
# sampling and serialization
# ---------------------------------------------------------------------------

def random_positive_plane(space: QuadraticSpace, rng: np.random.Generator,
                          scale: float = 0.6) -> OrientedPositivePlane:
    """Random oriented positive plane: rotate a positive-block plane by a
    random isometry exp(S) with scale-controlled generator."""
    F, eps = orthogonal_frame(space)
    p = int(np.sum(eps > 0))
    if p < 2:
        raise ValueError("need at least two positive directions")
    R, _ = np.linalg.qr(rng.standard_normal((p, 2)))
    basis = F[:, :p] @ R
    Q = _random_isometry_matrix(space, rng, scale)
    return OrientedPositivePlane(space, Q @ basis, check=False)


def _random_isometry_matrix(space: QuadraticSpace, rng: np.random.Generator,
                            scale: float) -> np.ndarray:
    from scipy.linalg import expm
    n = space.dim
    M = rng.standard_normal((n, n))
    K = scale * (M - M.T) / 2.0
    G = np.asarray(space.gram, dtype=float)
    return expm(np.linalg.solve(G, K))


def serialize_plane(W: OrientedPositivePlane, frame_label: str = "ambient") -> str:
    """Deterministic text form: header, frame reference, basis columns."""
    lines = [f"plane dim={W.ambient.dim} frame={frame_label}"]
    for j in range(2):
        lines.append(" ".join(repr(float(x)) for x in W.basis[:, j]))
    return "\n".join(lines) + "\n"


def parse_plane(text: str, ambient: QuadraticSpace) -> OrientedPositivePlane:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if not head or head[0] != "plane":
        raise ValueError("not a serialized plane")
    dim = int(dict(kv.split("=") for kv in head[1:])["dim"])
    if dim != ambient.dim:
        raise ValueError("dimension mismatch with ambient space")
    cols = [np.array([float(tok) for tok in ln.split()]) for ln in lines[1:3]]
    return OrientedPositivePlane(ambient, np.column_stack(cols))
