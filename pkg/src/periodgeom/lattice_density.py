"""Integral lattices and the Cauchy-divisor density experiment.

A holomorphic disc is a polynomial null lift t -> w(t) into V tensor C on
|t| < 1; an integral vector v with q(v, v) > 0 cuts the disc where the
degree-d polynomial q(w(t), v) vanishes. Sweeping all primitive positive
vectors up to a coordinate height and collecting the root parameters
measures how quickly the divisors fill the disc (hit counts and covering
radii against a fixed probe grid).

"Height" is the sup-norm coordinate bound: indefinite lattices have
infinitely many vectors of a fixed norm, so a box sweep is the only finite
one. Enumeration order is lexicographic over the box, restricted to one
canonical representative per line (first nonzero coordinate positive).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .quadspace import (
    QuadraticSpace,
    Signature,
    exact_det,
    fraction_matrix,
    orthogonal_frame,
    signature,
)
from .perigeo import TwistorCurve

__all__ = [
    "IntegralLattice",
    "standard_lattice",
    "primitive_test",
    "enumerate_positive",
    "HolomorphicDisc",
    "DiscContainedError",
    "disc_from_curve",
    "random_disc",
    "disc_hits",
    "HitRecord",
    "DensityRow",
    "DensityReport",
    "density_report",
    "density_csv",
    "NO_HIT_RADIUS",
    "PROBE_GRID_SIDE",
]

# covering radius reported when no divisor has hit the disc yet (larger
# than any distance within the |t| <= 0.9 probe disc)
NO_HIT_RADIUS = 2.0
PROBE_GRID_SIDE = 32

# full-box enumeration switches to a depth-first generator above this size
_VECTORIZE_LIMIT = 2_000_000


class IntegralLattice:
    """Free Z-module with an integral symmetric nondegenerate Gram matrix."""

    def __init__(self, gram):
        G = np.asarray(gram)
        if G.dtype == object:
            if not all(Fraction(x).denominator == 1 for x in G.reshape(-1)):
                raise ValueError("Gram matrix must be integral")
            G = np.array([[int(x) for x in row] for row in G], dtype=np.int64)
        else:
            Gf = np.asarray(G, dtype=float)
            if np.max(np.abs(Gf - np.round(Gf))) > 0:
                raise ValueError("Gram matrix must be integral")
            G = np.asarray(np.round(Gf), dtype=np.int64)
        if G.ndim != 2 or G.shape[0] != G.shape[1] or (G != G.T).any():
            raise ValueError("Gram matrix must be square symmetric")
        if exact_det(G) == 0:
            raise ValueError("Gram matrix must be nondegenerate")
        self.gram = G
        self._space: QuadraticSpace | None = None

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    def q(self, u, v) -> int:
        return int(np.asarray(u) @ self.gram @ np.asarray(v))

    def norm(self, v) -> int:
        return self.q(v, v)

    def signature(self) -> Signature:
        return signature(fraction_matrix(self.gram))

    def det(self) -> int:
        return int(exact_det(self.gram))

    def space(self, tol: float | None = None) -> QuadraticSpace:
        """Float quadratic space over the same Gram matrix."""
        if self._space is None or tol is not None:
            sp = QuadraticSpace(self.gram.astype(float),
                                **({} if tol is None else {"tol": tol}))
            if tol is not None:
                return sp
            self._space = sp
        return self._space

    def __repr__(self) -> str:
        p, m, z = self.signature()
        return f"IntegralLattice(dim={self.dim}, signature=({p},{m}))"


def _e8_gram() -> np.ndarray:
    # Bourbaki numbering: chain 1-3-4-5-6-7-8 with node 2 attached to 4
    edges = [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)]
    A = 2 * np.eye(8, dtype=np.int64)
    for i, j in edges:
        A[i - 1, j - 1] = A[j - 1, i - 1] = -1
    return A


def _direct_sum(*blocks: np.ndarray) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.int64)
    k = 0
    for b in blocks:
        m = b.shape[0]
        out[k:k + m, k:k + m] = b
        k += m
    return out


def standard_lattice(name: str) -> IntegralLattice:
    """U, E8minus, K3 = U^3 + E8(-1)^2, or diag:p,m."""
    U = np.array([[0, 1], [1, 0]], dtype=np.int64)
    if name == "U":
        return IntegralLattice(U)
    if name == "E8minus":
        return IntegralLattice(-_e8_gram())
    if name == "K3":
        E8m = -_e8_gram()
        return IntegralLattice(_direct_sum(U, U, U, E8m, E8m))
    if name.startswith("diag:"):
        try:
            p, m = (int(tok) for tok in name[5:].split(","))
        except ValueError:
            raise ValueError(f"malformed diagonal lattice name: {name!r}")
        if p < 0 or m < 0 or p + m == 0:
            raise ValueError("diag:p,m needs nonnegative p, m with p + m > 0")
        return IntegralLattice(np.diag([1] * p + [-1] * m))
    raise ValueError(f"unknown lattice name: {name!r}")


def primitive_test(v) -> bool:
    """gcd of the coordinates is 1 (zero vectors are rejected)."""
    arr = np.asarray(v)
    flat = [int(x) for x in arr.reshape(-1)]
    if any(float(x) != int(x) for x in np.asarray(v).reshape(-1)):
        raise ValueError("primitivity is defined for integer vectors")
    g = 0
    for x in flat:
        g = math.gcd(g, abs(x))
    if g == 0:
        raise ValueError("zero vector has no primitivity")
    return g == 1


def _canonical_mask(V: np.ndarray) -> np.ndarray:
    """Rows whose first nonzero coordinate is positive."""
    nz = V != 0
    first = np.argmax(nz, axis=1)
    lead = V[np.arange(V.shape[0]), first]
    return (lead > 0) & nz.any(axis=1)


def _enumerate_box_vectorized(lattice: IntegralLattice, H: int,
                              norm_sign: int) -> Iterator[np.ndarray]:
    d = lattice.dim
    axes = [np.arange(-H, H + 1, dtype=np.int64)] * d
    V = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    keep = _canonical_mask(V)
    V = V[keep]
    norms = np.einsum("ij,jk,ik->i", V, lattice.gram, V)
    V = V[norm_sign * norms > 0]
    if V.shape[0]:
        V = V[np.gcd.reduce(np.abs(V), axis=1) == 1]
    for row in V:
        yield row.copy()


def _enumerate_box_dfs(lattice: IntegralLattice, H: int,
                       norm_sign: int) -> Iterator[np.ndarray]:
    d = lattice.dim
    vec = np.zeros(d, dtype=np.int64)

    def rec(i: int, leading_zero: bool) -> Iterator[np.ndarray]:
        if i == d:
            if leading_zero:
                return
            if norm_sign * lattice.norm(vec) > 0 and \
                    np.gcd.reduce(np.abs(vec)) == 1:
                yield vec.copy()
            return
        lo = 0 if leading_zero else -H
        for x in range(lo, H + 1):
            vec[i] = x
            yield from rec(i + 1, leading_zero and x == 0)
        vec[i] = 0

    yield from rec(0, True)


def enumerate_positive(lattice: IntegralLattice, height: int,
                       norm_sign: int = 1) -> Iterator[np.ndarray]:
    """Primitive vectors with q(v,v) > 0, sup-norm <= height, one per line.

    Canonical representatives (first nonzero coordinate positive) stream in
    lexicographic order. ``norm_sign=-1`` switches to negative-norm vectors
    (the classical Noether-Lefschetz sweep); the default follows divisors
    orthogonal to positive vectors.
    """
    if height < 1:
        raise ValueError("height bound must be >= 1")
    if norm_sign not in (1, -1):
        raise ValueError("norm_sign must be +1 or -1")
    if (2 * height + 1) ** lattice.dim <= _VECTORIZE_LIMIT:
        yield from _enumerate_box_vectorized(lattice, height, norm_sign)
    else:
        yield from _enumerate_box_dfs(lattice, height, norm_sign)


# ---------------------------------------------------------------------------
# holomorphic discs
# ---------------------------------------------------------------------------

class DiscContainedError(ValueError):
    """The disc lies inside the divisor: q(w(t), v) vanishes identically."""


class HolomorphicDisc:
    """Polynomial null lift w(t) = sum_k coeffs[k] t^k on the unit disc.

    ``coeffs`` has shape (degree+1, dim), complex. The lift must satisfy
    q(w, w) = 0 identically and q(w, wbar) > 0 on the open disc; both are
    checked on a sample circle at construction.
    """

    def __init__(self, space: QuadraticSpace, coeffs, check: bool = True):
        self.space = space
        C = np.asarray(coeffs, dtype=complex)
        if C.ndim != 2 or C.shape[1] != space.dim or C.shape[0] < 1:
            raise ValueError("coefficients must be a (degree+1) x dim matrix")
        self.coeffs = C
        if check:
            for t in 0.85 * np.exp(2j * np.pi * np.arange(12) / 12):
                w = self(t)
                h = complex(space.q(w, np.conj(w))).real
                if h <= 0:
                    raise ValueError("lift is not positive on the sample circle")
                if abs(complex(space.q(w, w))) > 1e-8 * h:
                    raise ValueError("lift is not null on the sample circle")

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def __call__(self, t) -> np.ndarray:
        t = complex(t)
        powers = t ** np.arange(self.coeffs.shape[0])
        return powers @ self.coeffs


def disc_from_curve(curve: TwistorCurve) -> HolomorphicDisc:
    """Unit-disc restriction of the curve's quadratic null lift."""
    f1, f2, f3 = curve.frame.T
    coeffs = np.stack([f1 - 1j * f2, 2.0 * f3 + 0j, -f1 - 1j * f2])
    return HolomorphicDisc(curve.ambient, coeffs, check=False)


def _random_disc_map(rng: np.random.Generator, degree: int = 2) -> np.ndarray:
    """Polynomial self-map of the disc, sup-norm <= 0.85, zero at 0."""
    c = rng.standard_normal(degree) + 1j * rng.standard_normal(degree)
    c *= rng.uniform(0.5, 0.85) / np.sum(np.abs(c))
    return np.concatenate([[0.0 + 0.0j], c])


def random_disc(space: QuadraticSpace, seed, scale: float = 0.6) -> HolomorphicDisc:
    """Seeded random polynomial null lift on the unit disc.

    With three positive directions available the disc is an off-center
    patch of a random twistor curve: a Mobius map m(t) = (t+a)/(1+conj(a)t)
    composed with the quadratic lift stays polynomial after clearing the
    denominator (harmless: rescaling w by a nonvanishing holomorphic factor
    keeps the same null line).

    With exactly two positive directions the null quadric restricted to a
    pseudo-orthonormal frame (f1, f2, n1, n2) of norms (1, 1, -1, -1)
    factors as a product of two discs, and for any pair of polynomial disc
    maps mu, nu

        w = (1 + mu nu) f1 - i (1 - mu nu) f2 + (mu + nu) n1 - i (nu - mu) n2

    satisfies q(w, w) = 0 identically with q(w, wbar) =
    2 (1 - |mu|^2)(1 - |nu|^2) > 0.  In signature (2, 1) the two factors
    must mirror each other: nu = -mu drops the n1 term and leaves the
    quadratic lift (1 - mu^2) f1 - i (1 + mu^2) f2 + 2 i mu n2 over the
    single negative direction.
    """
    from .perigeo import random_twistor_curve
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(seed)
    p = space.signature().positive
    if p >= 3:
        curve = random_twistor_curve(space, rng, scale)
        c0, c1, c2 = disc_from_curve(curve).coeffs
        r = rng.uniform(0.2, 0.6)
        theta = rng.uniform(0.0, 2.0 * np.pi)
        a = r * np.exp(1j * theta)
        ac = np.conj(a)
        coeffs = np.stack([
            c0 + a * c1 + a * a * c2,
            2 * ac * c0 + (1 + abs(a) ** 2) * c1 + 2 * a * c2,
            ac * ac * c0 + ac * c1 + c2,
        ])
        return HolomorphicDisc(space, coeffs, check=False)
    if p != 2:
        raise ValueError("a positive-plane disc needs at least two "
                         "positive directions")
    F, eps = orthogonal_frame(space)
    pos, neg = F[:, eps > 0], F[:, eps < 0]
    th = rng.uniform(0.0, 2.0 * np.pi)
    f1 = math.cos(th) * pos[:, 0] + math.sin(th) * pos[:, 1]
    f2 = -math.sin(th) * pos[:, 0] + math.cos(th) * pos[:, 1]
    mu = _random_disc_map(rng)
    if neg.shape[1] >= 2:
        n1, n2 = neg[:, 0], neg[:, 1]
        nu = _random_disc_map(rng)
    else:
        n1 = np.zeros_like(neg[:, 0])
        n2 = neg[:, 0]
        nu = -mu
    prod = np.polynomial.polynomial.polymul(mu, nu)
    deg = max(mu.size, nu.size, prod.size)
    mu = np.pad(mu, (0, deg - mu.size))
    nu = np.pad(nu, (0, deg - nu.size))
    prod = np.pad(prod, (0, deg - prod.size))
    one = np.zeros(deg, dtype=complex)
    one[0] = 1.0
    coeffs = (np.outer(one + prod, f1) - 1j * np.outer(one - prod, f2)
              + np.outer(mu + nu, n1) - 1j * np.outer(nu - mu, n2))
    return HolomorphicDisc(space, coeffs, check=False)


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def _polish_root(p: np.ndarray, t: complex, iterations: int = 3) -> complex:
    dp = np.polynomial.polynomial.polyder(p)
    for _ in range(iterations):
        denom = np.polynomial.polynomial.polyval(t, dp)
        if abs(denom) < 1e-300:
            break
        t = t - np.polynomial.polynomial.polyval(t, p) / denom
    return t


def _quadratic_roots(p0: complex, p1: complex, p2: complex) -> list[complex]:
    disc = np.sqrt(complex(p1 * p1 - 4 * p2 * p0))
    if (np.conj(p1) * disc).real < 0:
        disc = -disc
    qq = -0.5 * (p1 + disc)
    roots = []
    if abs(qq) > 0:
        roots.append(qq / p2)
        roots.append(p0 / qq)
    else:
        roots.extend([(-p1 / (2 * p2))] * 2)
    return [complex(r) for r in roots]


def _roots_in_disc(pcoeffs: np.ndarray, tol: float,
                   ref_scale: float = 0.0) -> list[complex]:
    """Roots of the polynomial (ascending coeffs) in |t| < 1, polished.

    ``ref_scale`` is the natural size of the coefficients (|coeffs|·|G|·|v|);
    a polynomial negligible against it counts as identically zero.
    """
    p = np.asarray(pcoeffs, dtype=complex)
    scale = float(np.max(np.abs(p))) if p.size else 0.0
    if scale <= 1e-12 * ref_scale or scale == 0.0:
        raise DiscContainedError("q(w(t), v) vanishes identically")
    keep = np.abs(p) > 1e-13 * scale
    deg = int(np.max(np.nonzero(keep)[0]))
    p = p[:deg + 1]
    if deg == 0:
        return []
    if deg == 1:
        seeds = [complex(-p[0] / p[1])]
    elif deg == 2:
        seeds = _quadratic_roots(p[0], p[1], p[2])
    else:
        seeds = [complex(r) for r in np.roots(p[::-1])]
    pn = p / scale
    out = []
    for s in seeds:
        t = _polish_root(pn, s)
        if abs(t) < 1.0 and \
                abs(np.polynomial.polynomial.polyval(t, pn)) < tol:
            out.append(complex(t))
    out.sort(key=lambda c: (c.real, c.imag))
    return out


def disc_hits(disc: HolomorphicDisc, v, tol: float = 1e-10) -> list[complex]:
    """Parameters t in the open disc with q(w(t), v) = 0.

    Residuals are measured on the max-coefficient-normalized polynomial;
    an identically vanishing polynomial raises DiscContainedError (the disc
    lies inside the divisor of v).
    """
    v = np.asarray(v, dtype=float)
    weights = disc.space.gram @ v
    ref = float(np.max(np.abs(disc.coeffs)) * np.max(np.abs(weights)))
    return _roots_in_disc(disc.coeffs @ weights, tol, ref_scale=ref)


# ---------------------------------------------------------------------------
# density experiment
# ---------------------------------------------------------------------------

@dataclass
class HitRecord:
    v: np.ndarray
    roots: tuple[complex, ...]
    height: int


@dataclass
class DensityRow:
    height: int
    n_vectors: int
    n_hits: int
    covering_radius: float
    wall_time_ms: float


@dataclass
class DensityReport:
    rows: list[DensityRow]
    hits: np.ndarray                # deduplicated parameters at the top height
    records: list[HitRecord] = field(repr=False, default_factory=list)
    contained: int = 0


def _probe_grid() -> np.ndarray:
    xs = np.linspace(-0.9, 0.9, PROBE_GRID_SIDE)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    pts = (X + 1j * Y).ravel()
    return pts[np.abs(pts) <= 0.9]


def _dedupe(points: np.ndarray, tol: float) -> np.ndarray:
    if points.size == 0:
        return points
    order = np.lexsort((points.imag, points.real))
    pts = points[order]
    kept = [pts[0]]
    for p in pts[1:]:
        if abs(p - kept[-1]) > tol:
            kept.append(p)
    return np.asarray(kept)


def _covering_radius(hits: np.ndarray, probes: np.ndarray) -> float:
    if hits.size == 0:
        return NO_HIT_RADIUS
    from scipy.spatial import cKDTree
    tree = cKDTree(np.column_stack([hits.real, hits.imag]))
    dist, _ = tree.query(np.column_stack([probes.real, probes.imag]))
    return float(np.max(dist))


def density_report(disc: HolomorphicDisc, lattice: IntegralLattice,
                   heights: Sequence[int], norm_sign: int = 1,
                   tol: float = 1e-10, dedupe_tol: float = 1e-8) -> DensityReport:
    """Cumulative hit statistics for each height in an increasing schedule.

    For each H the row reports the number of enumerated vectors of height
    <= H, the number of distinct hit parameters they produce (cluster
    tolerance ``dedupe_tol``), the covering radius over the fixed probe
    grid, and cumulative wall time. Hit sets grow with H by construction,
    so the covering radius is structurally nonincreasing.
    """
    heights = [int(h) for h in heights]
    if not heights or any(b <= a for a, b in zip(heights, heights[1:])):
        raise ValueError("height schedule must be strictly increasing")
    if lattice.dim != disc.space.dim:
        raise ValueError("disc and lattice dimensions differ")
    start = time.perf_counter()
    probes = _probe_grid()
    weights = disc.space.gram @ disc.coeffs.T       # (dim, deg+1)
    wscale = float(np.max(np.abs(weights)))
    top = heights[-1]
    buckets: dict[int, list[np.ndarray]] = {h: [] for h in heights}
    for v in enumerate_positive(lattice, top, norm_sign):
        hv = int(np.max(np.abs(v)))
        for h in heights:
            if hv <= h:
                buckets[h].append(v)
                break
    records: list[HitRecord] = []
    contained = 0
    roots_so_far: list[complex] = []
    seen_vectors = 0
    rows = []
    hits_top = np.zeros(0, dtype=complex)
    for h in heights:
        for v in buckets[h]:
            hv = int(np.max(np.abs(v)))
            pcoeffs = v.astype(float) @ weights
            try:
                roots = _roots_in_disc(pcoeffs, tol, ref_scale=wscale * hv)
            except DiscContainedError:
                contained += 1
                continue
            seen_vectors += 1
            if roots:
                records.append(HitRecord(v=v, roots=tuple(roots), height=hv))
                roots_so_far.extend(roots)
        pts = _dedupe(np.asarray(roots_so_far, dtype=complex), dedupe_tol)
        radius = _covering_radius(pts, probes)
        rows.append(DensityRow(
            height=h, n_vectors=seen_vectors, n_hits=int(pts.size),
            covering_radius=radius,
            wall_time_ms=(time.perf_counter() - start) * 1e3))
        if h == top:
            hits_top = pts
    return DensityReport(rows=rows, hits=hits_top, records=records,
                         contained=contained)


def density_csv(report: DensityReport) -> str:
    """CSV text, header mandated: H,n_vectors,n_hits,covering_radius,wall_time_ms."""
    lines = ["H,n_vectors,n_hits,covering_radius,wall_time_ms"]
    for r in report.rows:
        lines.append(f"{r.height},{r.n_vectors},{r.n_hits},"
                     f"{repr(r.covering_radius)},{r.wall_time_ms:.1f}")
    return "\n".join(lines) + "\n"
