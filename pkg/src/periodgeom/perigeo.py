"""Period-domain geometry: twistor curves, Cauchy divisors, Fujiki forms.

A positive 3-subspace U determines a rational curve CP^1 = Gr++(U) inside
the positive Grassmannian (a twistor curve); a positive-norm vector v cuts
out the divisor of planes orthogonal to it (a Cauchy divisor). The two meet
in a single unoriented plane, seen here as a conjugate pair of oriented
points. The quadratic form itself can be recovered, up to scale, from any
Fujiki-type functional F = c q(.)^n by polarization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .quadspace import (
    QuadraticSpace,
    Subspace,
    exact_det,
    fraction_matrix,
    orthogonal_complement,
    orthogonal_frame,
)
from .posgrass import (
    OrientedPositivePlane,
    PositiveNullVector,
    plane_to_null,
    null_to_plane,
)

__all__ = [
    "is_period_point",
    "TwistorCurve",
    "twistor_point",
    "random_twistor_curve",
    "twistor_through",
    "CauchyDivisor",
    "cauchy_contains",
    "CauchyPencil",
    "cauchy_through",
    "IntersectionKind",
    "TwistorCauchyIntersection",
    "twistor_cauchy_intersection",
    "FujikiForm",
    "NotFujikiError",
    "PolarizationResult",
    "fujiki_polarize",
    "monomial_form",
    "power_form",
    "power_cup",
    "bbf_explicit",
    "period_image_rank",
]

RESIDUAL_TOL = 1e-10


def is_period_point(space: QuadraticSpace, vec, tol: float | None = None) -> bool:
    """True iff q(v, v) = 0 (to tolerance) and q(v, vbar) > 0."""
    v = np.asarray(vec, dtype=complex)
    t = space.tol if tol is None else tol
    h = complex(space.q(v, np.conj(v))).real
    if h <= 0:
        return False
    return abs(complex(space.q(v, v))) <= max(t * h, t)


# ---------------------------------------------------------------------------
# twistor curves
# ---------------------------------------------------------------------------

class TwistorCurve:
    """CP^1 of oriented positive planes inside a positive 3-subspace U.

    The curve is parametrized through its holomorphic null lift

        w(z) = (1 - z^2) f1 - i (1 + z^2) f2 + 2 z f3,

    where (f1, f2, f3) is the stored q-orthonormal frame of U. At z = 0 the
    plane is span(f1, f2) with normal f3; z and infinity give the same
    unoriented plane with opposite orientations at antipodal normals
    s(z) = (-2 Re z, 2 Im z, 1 - |z|^2) / (1 + |z|^2) in frame coordinates.
    """

    def __init__(self, ambient: QuadraticSpace, frame):
        self.ambient = ambient
        F = np.asarray(frame, dtype=float)
        if F.shape != (ambient.dim, 3):
            raise ValueError("frame must be (ambient dim) x 3")
        g3 = F.T @ ambient.gram @ F
        if float(np.max(np.abs(g3 - np.eye(3)))) > max(ambient.tol, 1e-7):
            raise ValueError("frame must be q-orthonormal and positive")
        self.frame = F

    @classmethod
    def from_subspace(cls, sub: Subspace) -> "TwistorCurve":
        """Orthonormalize a positive 3-subspace (orientation from the basis)."""
        amb = sub.ambient
        if sub.dim != 3:
            raise ValueError("twistor curve needs a 3-dimensional subspace")
        B = np.asarray(sub.basis, dtype=float)
        G = amb.gram
        cols = []
        for j in range(3):
            v = B[:, j].copy()
            for u in cols:
                v -= (v @ G @ u) * u
            nrm = float(v @ G @ v)
            if nrm <= 0:
                raise ValueError("subspace is not positive definite")
            cols.append(v / np.sqrt(nrm))
        return cls(amb, np.column_stack(cols))

    def null_lift(self, z) -> np.ndarray:
        """Holomorphic null lift w(z); z may be complex or infinite."""
        f1, f2, f3 = self.frame.T
        if z is None or (isinstance(z, (float, complex)) and not np.isfinite(abs(z))):
            return f1 + 1j * f2
        z = complex(z)
        return (1 - z * z) * f1 - 1j * (1 + z * z) * f2 + 2 * z * f3

    def null_lift_derivative(self, z) -> np.ndarray:
        f1, f2, f3 = self.frame.T
        z = complex(z)
        return -2 * z * f1 - 2j * z * f2 + 2 * f3

    def point(self, z) -> OrientedPositivePlane:
        return null_to_plane(PositiveNullVector(self.ambient, self.null_lift(z)))

    def contains_plane(self, W: OrientedPositivePlane, tol: float = 1e-9) -> bool:
        """Does W lie in U (as an unoriented plane of the curve)?"""
        F = self.frame
        P = F @ (F.T @ self.ambient.gram)      # projector onto U
        r = P @ W.basis - W.basis
        return float(np.max(np.abs(r))) <= tol * max(1.0, float(np.max(np.abs(W.basis))))


def twistor_point(curve: TwistorCurve, z) -> OrientedPositivePlane:
    return curve.point(z)


def random_twistor_curve(space: QuadraticSpace, rng: np.random.Generator,
                         scale: float = 0.6) -> TwistorCurve:
    """Random positive 3-frame: rotate the leading positive block by a
    random isometry (requires at least three positive directions)."""
    from .posgrass import _random_isometry_matrix
    F, eps = orthogonal_frame(space)
    if int(np.sum(eps > 0)) < 3:
        raise ValueError("need at least three positive directions")
    Q = _random_isometry_matrix(space, rng, scale)
    return TwistorCurve(space, Q @ F[:, :3])


def twistor_through(W: OrientedPositivePlane,
                    rng: np.random.Generator | None = None) -> TwistorCurve:
    """A twistor curve through W: extend its frame by a positive normal."""
    amb = W.ambient
    E = W.orthonormal_basis()
    K = orthogonal_complement(Subspace(amb, E)).basis
    sub = QuadraticSpace(K.T @ amb.gram @ K, tol=amb.tol)
    F, eps = orthogonal_frame(sub)
    npos = int(np.sum(eps > 0))
    if npos == 0:
        raise ValueError("no positive direction orthogonal to the plane")
    if rng is None:
        c = F[:, 0]
    else:
        coef = rng.standard_normal(npos)
        coef /= np.linalg.norm(coef)
        c = F[:, :npos] @ coef
    return TwistorCurve(amb, np.column_stack([E, K @ c]))


# ---------------------------------------------------------------------------
# Cauchy divisors
# ---------------------------------------------------------------------------

class CauchyDivisor:
    """Divisor Cau_v = {W in Gr++ : W perp v} for a positive-norm vector v."""

    def __init__(self, ambient: QuadraticSpace, v):
        self.ambient = ambient
        v = np.asarray(v, dtype=float)
        nrm = float(ambient.q(v, v))
        if nrm <= ambient.tol * max(1.0, float(np.max(np.abs(v))) ** 2):
            raise ValueError("Cauchy divisor requires a positive-norm vector")
        self.v = v
        self.norm = nrm


def cauchy_contains(divisor: CauchyDivisor, W: OrientedPositivePlane,
                    tol: float = 1e-9) -> bool:
    E = W.orthonormal_basis()
    r = np.abs(E.T @ divisor.ambient.gram @ divisor.v) / math.sqrt(divisor.norm)
    return float(np.max(r)) <= tol


@dataclass
class CauchyPencil:
    """Cauchy divisors through a fixed plane W: positive vectors in W^perp."""
    plane: OrientedPositivePlane
    complement: Subspace

    def contains(self, v, tol: float = 1e-9) -> bool:
        amb = self.plane.ambient
        v = np.asarray(v, dtype=float)
        E = self.plane.orthonormal_basis()
        r = float(np.max(np.abs(E.T @ amb.gram @ v)))
        scale = max(1.0, float(np.max(np.abs(v))))
        return r <= tol * scale and float(amb.q(v, v)) > 0

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Random positive vector orthogonal to the plane."""
        amb = self.plane.ambient
        K = self.complement.basis
        sub = QuadraticSpace(K.T @ amb.gram @ K, tol=amb.tol)
        F, eps = orthogonal_frame(sub)
        pos = F[:, eps > 0]
        neg = F[:, eps < 0]
        c = rng.standard_normal(pos.shape[1])
        c /= np.linalg.norm(c)
        t = rng.standard_normal(neg.shape[1]) if neg.shape[1] else np.zeros(0)
        if t.size:
            t *= 0.7 * rng.uniform() / np.linalg.norm(t)
        return K @ (pos @ c + (neg @ t if t.size else 0.0))


def cauchy_through(W: OrientedPositivePlane) -> CauchyPencil:
    comp = orthogonal_complement(Subspace(W.ambient, W.orthonormal_basis()))
    return CauchyPencil(plane=W, complement=comp)


# ---------------------------------------------------------------------------
# twistor / Cauchy intersection
# ---------------------------------------------------------------------------

class IntersectionKind(Enum):
    HITS = "hits"
    CONTAINED = "contained"
    EMPTY = "empty"      # provably unreachable: kept for a total case split


@dataclass
class TwistorCauchyIntersection:
    kind: IntersectionKind
    planes: tuple[OrientedPositivePlane, ...]

    @property
    def unoriented_count(self) -> int:
        return 1 if self.kind is IntersectionKind.HITS else 0


def twistor_cauchy_intersection(curve: TwistorCurve, divisor: CauchyDivisor,
                                tol: float = 1e-9) -> TwistorCauchyIntersection:
    """Intersection of a twistor curve with a Cauchy divisor.

    With p the projection of v into U: if p = 0 the whole curve lies in the
    divisor (possible only when U^perp contains positive vectors); otherwise
    the intersection is the plane U meet p^perp in its two orientations, a
    conjugate pair of points of the curve.
    """
    F = curve.frame
    v = divisor.v
    c = F.T @ curve.ambient.gram @ v          # frame coordinates of proj_U(v)
    scale = max(1.0, float(np.max(np.abs(v))))
    if float(np.linalg.norm(c)) <= tol * scale:
        return TwistorCauchyIntersection(IntersectionKind.CONTAINED, ())
    s = c / np.linalg.norm(c)
    j = int(np.argmin(np.abs(s)))
    p1 = np.eye(3)[j] - s[j] * s
    p1 /= np.linalg.norm(p1)
    p2 = np.cross(s, p1)                      # det[s, p1, p2] = +1
    P1 = OrientedPositivePlane(curve.ambient,
                               np.column_stack([F @ p1, F @ p2]), check=False)
    return TwistorCauchyIntersection(IntersectionKind.HITS, (P1, P1.reverse()))


# ---------------------------------------------------------------------------
# Fujiki functionals
# ---------------------------------------------------------------------------

class NotFujikiError(ValueError):
    """The functional is not of the form c * q(.)^n with q nondegenerate."""


class FujikiForm:
    """Homogeneous degree-2n functional assumed of the shape c q(.)^n.

    ``func`` maps a coefficient vector to a number; with ``exact=True`` it
    must accept Fraction inputs and return Fractions.
    """

    def __init__(self, dim: int, n: int, func: Callable, exact: bool = False):
        if n < 1:
            raise ValueError("n must be a positive integer")
        self.dim, self.n, self.func, self.exact = int(dim), int(n), func, bool(exact)
        probe = self._vec([(i % 3) + 1 for i in range(dim)])
        two = Fraction(2) if exact else 2.0
        lhs, rhs = func(two * probe), (two ** (2 * n)) * func(probe)
        if exact:
            ok = lhs == rhs
        else:
            ok = abs(lhs - rhs) <= 1e-6 * max(1.0, abs(rhs))
        if not ok:
            raise ValueError(f"functional is not homogeneous of degree {2 * n}")

    def _vec(self, entries) -> np.ndarray:
        if self.exact:
            out = np.empty(len(entries), dtype=object)
            out[:] = [Fraction(e) for e in entries]
            return out
        return np.asarray(entries, dtype=float)

    def __call__(self, alpha):
        return self.func(alpha)


def monomial_form(dim: int, n: int, terms, exact: bool = False) -> FujikiForm:
    """Functional from a list of (exponent vector, coefficient) monomials.

    This is the text-file interchange format of the polarization CLI: each
    term contributes coeff * prod alpha_i^(e_i) and must have total degree
    2n for the homogeneity check to pass.
    """
    parsed = []
    for expo, coeff in terms:
        expo = tuple(int(e) for e in expo)
        if len(expo) != dim or any(e < 0 for e in expo):
            raise ValueError("exponent vectors must be nonnegative, length dim")
        parsed.append((expo, Fraction(coeff) if exact else float(coeff)))

    def func(alpha):
        total = Fraction(0) if exact else 0.0
        for expo, coeff in parsed:
            term = coeff
            for i, e in enumerate(expo):
                if e:
                    term = term * alpha[i] ** e
            total = total + term
        return total

    return FujikiForm(dim, n, func, exact=exact)


def power_form(gram, c0, n: int, exact: bool = False) -> FujikiForm:
    """The model functional F(a) = c0 * (a^T Q a)^n."""
    if exact:
        Q = fraction_matrix(np.asarray(gram))
        c = Fraction(c0)
    else:
        Q = np.asarray(gram, dtype=float)
        c = float(c0)

    def func(alpha):
        return c * np.dot(alpha, np.dot(Q, alpha)) ** n

    return FujikiForm(Q.shape[0], n, func, exact=exact)


@dataclass
class PolarizationResult:
    gram: np.ndarray
    constant: object
    residual: float
    base_point: np.ndarray


def _poly_coeffs(F: FujikiForm, base, direction):
    """Coefficients of t -> F(base + t direction), by Vandermonde solve.

    Integer nodes -n..n make this exact finite differencing for polynomial
    F with rational coefficients; the float path uses the same nodes.
    """
    deg = 2 * F.n
    nodes = list(range(-F.n, F.n + 1))
    if F.exact:
        ys = [F(base + Fraction(t) * direction) for t in nodes]
        V = fraction_matrix([[Fraction(t) ** j for j in range(deg + 1)] for t in nodes])
        from .quadspace import _exact_solve
        return _exact_solve(V, ys)
    ys = np.array([F(base + float(t) * direction) for t in nodes], dtype=float)
    V = np.vander(np.array(nodes, dtype=float), deg + 1, increasing=True)
    return np.linalg.solve(V, ys)


def fujiki_polarize(F: FujikiForm, normalize: str = "leading",
                    tol: float = 1e-8) -> PolarizationResult:
    """Recover (q, c) with F = c q^n, q up to the chosen normalization.

    Strategy: pick a probe a0 with F(a0) != 0 and declare q(a0) = 1, so
    c = F(a0). For any b, the t and t^2 coefficients of F(a0 + t b) are
    2 n c q(a0, b) and c (n q(b) + 2 n (n-1) q(a0, b)^2), giving q(b) for
    b in {e_i, e_i + e_j}; polarization fills in the matrix. The result is
    verified a posteriori (nondegeneracy + residual on probes).
    """
    d, n = F.dim, F.n
    one = Fraction(1) if F.exact else 1.0
    basis = []
    for i in range(d):
        e = F._vec([0] * d)
        e[i] = one
        basis.append(e)
    candidates = list(basis)
    for i in range(d):
        for j in range(i + 1, d):
            candidates.append(basis[i] + basis[j])
            candidates.append(basis[i] - basis[j])
    vals = [F(a) for a in candidates]
    k = max(range(len(vals)), key=lambda i: abs(vals[i]))
    if abs(vals[k]) == 0 or (not F.exact and abs(vals[k]) < 1e-12):
        raise NotFujikiError("functional vanishes on the probe set")
    a0, c = candidates[k], vals[k]

    def norm_of(b):
        coef = _poly_coeffs(F, a0, b)
        y = coef[1] / (2 * n * c)
        return (coef[2] / c - 2 * n * (n - 1) * y * y) / n

    diag = [norm_of(e) for e in basis]
    Q = np.empty((d, d), dtype=object if F.exact else float)
    for i in range(d):
        Q[i, i] = diag[i]
    for i in range(d):
        for j in range(i + 1, d):
            z = norm_of(basis[i] + basis[j])
            Q[i, j] = Q[j, i] = (z - diag[i] - diag[j]) / 2

    if F.exact:
        if exact_det(Q) == 0:
            raise NotFujikiError("recovered form is degenerate: not of Fujiki type")
    else:
        s = np.linalg.svd(Q.astype(float), compute_uv=False)
        if s[-1] <= 1e-8 * max(1.0, s[0]):
            raise NotFujikiError("recovered form is degenerate: not of Fujiki type")

    # normalization convention
    flat = Q.reshape(-1)
    if normalize == "leading":
        mx = max(abs(x) for x in flat)
        idx = next(i for i, x in enumerate(flat)
                   if abs(x) > (0 if F.exact else 1e-12 * float(mx)))
    elif normalize == "max":
        idx = max(range(len(flat)), key=lambda i: abs(flat[i]))
    else:
        raise ValueError("normalize must be 'leading' or 'max'")
    s0 = flat[idx]
    Q = Q / s0
    c = c * s0 ** n

    # a posteriori residual on deterministic pseudo-random probes
    worst = 0.0
    for m in range(8):
        entries = [((7 * m + 3 * i + 1) % 11) - 5 for i in range(d)]
        a = F._vec(entries)
        lhs, rhs = F(a), c * np.dot(a, np.dot(Q, a)) ** n
        err = abs(lhs - rhs)
        if F.exact:
            if err != 0:
                raise NotFujikiError("functional is not of Fujiki type")
        else:
            rel = float(err) / max(1.0, abs(float(lhs)))
            worst = max(worst, rel)
    if not F.exact and worst > tol:
        raise NotFujikiError("functional is not of Fujiki type")
    return PolarizationResult(gram=Q, constant=c, residual=worst,
                              base_point=a0)


# ---------------------------------------------------------------------------
# cup functionals and the two-term degree-2 recovery
# ---------------------------------------------------------------------------

def _matchings(items: tuple[int, ...]):
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for i, second in enumerate(rest):
        for tail in _matchings(rest[:i] + rest[i + 1:]):
            yield ((first, second),) + tail


def power_cup(gram, c0, n: int) -> Callable:
    """Symmetric 2n-linear extension of F(a) = c0 q(a)^n.

    cup(v_1, ..., v_2n) averages prod q(v_a, v_b) over perfect matchings
    with weight n! 2^n / (2n)! so that cup(a, ..., a) = c0 q(a)^n.
    """
    Q = np.asarray(gram, dtype=float)
    weight = (math.factorial(n) * 2 ** n / math.factorial(2 * n)) * c0
    pair_list = list(_matchings(tuple(range(2 * n))))

    def cup(*args):
        if len(args) == 1 and isinstance(args[0], (list, tuple)):
            args = tuple(args[0])
        if len(args) != 2 * n:
            raise ValueError(f"cup expects {2 * n} arguments")
        vs = [np.asarray(v, dtype=complex) for v in args]
        P = np.array([[vi @ Q @ vj for vj in vs] for vi in vs])
        total = 0j
        for matching in pair_list:
            prod = 1.0 + 0j
            for a, b in matching:
                prod *= P[a, b]
            total += prod
        return weight * total

    return cup


def bbf_explicit(cup: Callable, n: int, omega, alpha, beta) -> float:
    """Two-term recovery of the quadratic form from cup products.

    For a symmetric 2n-linear functional obeying the Fujiki relation and a
    null class Omega (q(Omega, Omega) = 0, q(Omega, Omegabar) > 0),

        2 cup(a, b, Om^{n-1}, Ob^{n-1})
          - (2(n-1)/n) [P_a^- P_b^+ + P_b^- P_a^+] / cup(Om^n, Ob^n)

    with P_x^- = cup(x, Om^{n-1}, Ob^n) and P_x^+ = cup(x, Om^n, Ob^{n-1})
    is proportional to q(a, b); at n = 1 it reduces to 2 cup(a, b).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    om = np.asarray(omega, dtype=complex)
    ob = np.conj(om)
    a = np.asarray(alpha, dtype=complex)
    b = np.asarray(beta, dtype=complex)
    t1 = 2 * cup(*([a, b] + [om] * (n - 1) + [ob] * (n - 1)))
    if n == 1:
        val = t1
    else:
        N = cup(*([om] * n + [ob] * n))
        if abs(N) < 1e-14:
            raise ZeroDivisionError("cup(Om^n, Obar^n) vanishes")
        pam = cup(*([a] + [om] * (n - 1) + [ob] * n))
        pap = cup(*([a] + [om] * n + [ob] * (n - 1)))
        pbm = cup(*([b] + [om] * (n - 1) + [ob] * n))
        pbp = cup(*([b] + [om] * n + [ob] * (n - 1)))
        val = t1 - (2 * (n - 1) / n) * (pam * pbp + pbm * pap) / N
    val = complex(val)
    if abs(val.imag) > 1e-8 * max(1.0, abs(val.real)):
        raise ValueError("recovery produced a non-real value")
    return val.real


# ---------------------------------------------------------------------------
# essential dimension of period maps
# ---------------------------------------------------------------------------

def _null_chart(W: OrientedPositivePlane, k: int) -> np.ndarray:
    w = plane_to_null(W).vec
    w = w / w[k]
    return np.delete(w, k)


def period_image_rank(phi: Callable[[np.ndarray], OrientedPositivePlane],
                      base_points: Sequence, step: float = 1e-5,
                      rank_tol: float = 1e-6) -> int:
    """Max numeric rank of d(plane_to_null . phi) over the base points.

    The differential is estimated by central differences of the null image
    in a fixed affine chart; singular values above rank_tol (relative to
    max(1, sigma_1)) count toward the rank.
    """
    best = 0
    for b in base_points:
        b = np.asarray(b, dtype=float)
        w0 = plane_to_null(phi(b)).vec
        k = int(np.argmax(np.abs(w0)))
        cols = []
        for i in range(b.size):
            e = np.zeros_like(b)
            e[i] = step
            dw = (_null_chart(phi(b + e), k) - _null_chart(phi(b - e), k)) / (2 * step)
            cols.append(np.concatenate([dw.real, dw.imag]))
        J = np.column_stack(cols)
        s = np.linalg.svd(J, compute_uv=False)
        rank = int(np.sum(s > rank_tol * max(1.0, s[0] if s.size else 0.0)))
        best = max(best, rank)
    return best
