"""Linear complex structures on R^2n and their compatibility loci.

Three players: a Euclidean metric g, a symplectic form psi, and a complex
structure J. The loci studied are all complex structures (J^2 = -Id), the
g-orthogonal ones (J^T G J = G) and the psi-compatible ones (Psi J symmetric
positive definite, written Cau here). A metric and a symplectic form
together determine a unique compatible J (2-out-of-3, by polar
decomposition), the two loci through it meet transversally, and the Cau
locus is parametrized by the Siegel upper half space.

Conventions: the standard pair is J0 = [[0, -I], [I, 0]] and
Psi_std = [[0, I], [-I, 0]], chosen so that Psi_std J0 = Id. Tangent
dimensions are nullities of explicit Kronecker-product constraint systems,
computed exactly over the rationals when the inputs are rational.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .quadspace import _rref, fraction_matrix, is_positive_definite

__all__ = [
    "standard_complex_structure",
    "standard_symplectic",
    "is_complex_structure",
    "is_orthogonal_structure",
    "is_cau_member",
    "two_out_of_three",
    "orientation_class",
    "tangent_dimension",
    "transversality_defect",
    "darboux_basis",
    "siegel_point",
    "random_metric",
    "random_symplectic",
    "random_pair",
]

_TOL = 1e-10


def standard_complex_structure(n: int) -> np.ndarray:
    """J0 = [[0, -I], [I, 0]] (e_k -> e_{n+k} -> -e_k)."""
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, -I], [I, Z]])


def standard_symplectic(n: int) -> np.ndarray:
    """Psi_std = [[0, I], [-I, 0]]; satisfies Psi_std J0 = Id."""
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, I], [-I, Z]])


def _even_dim(M: np.ndarray) -> int:
    m = M.shape[0]
    if M.ndim != 2 or M.shape[1] != m or m % 2:
        raise ValueError("expected a square matrix of even dimension")
    return m


def _scale(M: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(M))))


def is_complex_structure(J, tol: float = _TOL) -> bool:
    """J^2 = -Id (exactly for Fraction matrices, to tol in floats)."""
    J = np.asarray(J)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        return False
    if J.dtype == object:
        R = np.dot(J, J) + np.eye(J.shape[0], dtype=int)
        return all(x == 0 for x in R.reshape(-1))
    J = J.astype(float)
    R = J @ J + np.eye(J.shape[0])
    return float(np.max(np.abs(R))) <= tol * _scale(J) ** 2


def is_orthogonal_structure(g, J, tol: float = _TOL) -> bool:
    """J preserves the metric: J^T G J = G."""
    G = np.asarray(g, dtype=float)
    Jf = np.asarray(J, dtype=float)
    return float(np.max(np.abs(Jf.T @ G @ Jf - G))) <= tol * _scale(G) * _scale(Jf) ** 2


def is_cau_member(psi, J, tol: float = _TOL) -> bool:
    """psi(u, Jv) is symmetric positive definite (the matrix Psi J)."""
    Psi = np.asarray(psi, dtype=float)
    Jf = np.asarray(J, dtype=float)
    M = Psi @ Jf
    if float(np.max(np.abs(M - M.T))) > tol * _scale(M):
        return False
    return is_positive_definite(0.5 * (M + M.T), tol=tol)


def _check_metric(g) -> np.ndarray:
    G = np.asarray(g, dtype=float)
    _even_dim(G)
    if float(np.max(np.abs(G - G.T))) > _TOL * _scale(G):
        raise ValueError("metric must be symmetric")
    if not is_positive_definite(G):
        raise ValueError("metric must be positive definite")
    return 0.5 * (G + G.T)


def _check_symplectic(psi) -> np.ndarray:
    Psi = np.asarray(psi, dtype=float)
    _even_dim(Psi)
    if float(np.max(np.abs(Psi + Psi.T))) > _TOL * _scale(Psi):
        raise ValueError("symplectic form must be antisymmetric")
    s = np.linalg.svd(Psi, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise ValueError("symplectic form is degenerate")
    return 0.5 * (Psi - Psi.T)


def two_out_of_three(g, psi) -> np.ndarray:
    """The unique complex structure compatible with both g and psi.

    With A defined by g(Au, v) = psi(u, v) (A = -G^{-1} Psi), conjugating
    into g-orthonormal coordinates makes A antisymmetric; its orthogonal
    polar factor is the complex structure, pulled back to the original
    coordinates. Guarantees: J^2 = -Id, J^T G J = G, Psi J symmetric
    positive definite.
    """
    from scipy.linalg import polar
    G = _check_metric(g)
    Psi = _check_symplectic(psi)
    if G.shape != Psi.shape:
        raise ValueError("metric and symplectic form have different sizes")
    A = -np.linalg.solve(G, Psi)
    L = np.linalg.cholesky(G)
    LT = L.T
    At = LT @ A @ np.linalg.inv(LT)
    U, _ = polar(At)
    J = np.linalg.solve(LT, U @ LT)
    resid = np.max(np.abs(J @ J + np.eye(G.shape[0])))
    if resid > 1e-8:
        raise ValueError("polar reconstruction failed (degenerate input?)")
    return J


def orientation_class(J) -> int:
    """+1 if a basis (v_1..v_n, J v_1..J v_n) is positively oriented.

    The class is independent of the greedy choice of v_i (GL(n, C) is
    connected); J0 is in the +1 class, and -J0 flips the class exactly
    when n is odd.
    """
    Jf = np.asarray(J, dtype=float)
    m = _even_dim(Jf)
    vs: list[np.ndarray] = []
    B = np.zeros((m, 0))
    for i in range(m):
        e = np.eye(m)[:, i]
        cand = np.column_stack([B, e])
        s = np.linalg.svd(cand, compute_uv=False)
        if s[-1] > 1e-10:
            vs.append(e)
            B = np.column_stack([B, e, Jf @ e])
        if 2 * len(vs) == m:
            break
    M = np.column_stack(vs + [Jf @ v for v in vs])
    return 1 if np.linalg.det(M) > 0 else -1


# ---------------------------------------------------------------------------
# tangent dimensions via Kronecker constraint systems
# ---------------------------------------------------------------------------

def _kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if A.dtype == object or B.dtype == object:
        m, n = A.shape
        p, q = B.shape
        out = np.empty((m * p, n * q), dtype=object)
        for i in range(m):
            for j in range(n):
                out[i * p:(i + 1) * p, j * q:(j + 1) * q] = A[i, j] * B
        return out
    return np.kron(A, B)


def _commutation(m: int, exact: bool) -> np.ndarray:
    """K with vec(X^T) = K vec(X), row-major vec."""
    K = np.zeros((m * m, m * m), dtype=object if exact else float)
    if exact:
        K[:, :] = Fraction(0)
    one = Fraction(1) if exact else 1.0
    for i in range(m):
        for j in range(m):
            K[i * m + j, j * m + i] = one
    return K


def _eye(m: int, exact: bool) -> np.ndarray:
    if exact:
        I = np.empty((m, m), dtype=object)
        I[:, :] = Fraction(0)
        for i in range(m):
            I[i, i] = Fraction(1)
        return I
    return np.eye(m)


def _constraint_rows(J: np.ndarray, g, psi, locus: str, exact: bool) -> np.ndarray:
    """Stacked linear system on vec(X) cutting out the locus tangent at J."""
    m = J.shape[0]
    I = _eye(m, exact)
    K = _commutation(m, exact)
    blocks = [_kron(I, J.T) + _kron(J, I)]          # X J + J X = 0
    if locus in ("orthogonal", "both"):
        G = g
        GJ = np.dot(G, J)
        JTG = np.dot(J.T, G)
        blocks.append(np.dot(_kron(I, GJ.T), K) + _kron(JTG, I))
    if locus in ("cau", "both"):
        Psi = psi
        PX = _kron(Psi, I)
        blocks.append(PX - np.dot(K, PX))           # Psi X symmetric
    return np.vstack(blocks)


def _nullity(M: np.ndarray, exact: bool) -> int:
    cols = M.shape[1]
    if exact:
        return cols - len(_rref(M)[1])
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    rank = int(np.sum(s > 1e-8 * max(1.0, float(s[0]))))
    return cols - rank


def _to_exact(M) -> np.ndarray:
    return fraction_matrix(np.asarray(M))


def tangent_dimension(locus: str, J, g=None, psi=None, exact: bool = False) -> int:
    """Real dimension of the locus at J: 2n^2 / n^2 - n / n^2 + n.

    ``locus`` is "all", "orthogonal" (needs g) or "cau" (needs psi). The
    point J must belong to the locus; rational inputs with exact=True give
    tolerance-free nullities.
    """
    if locus not in ("all", "orthogonal", "cau"):
        raise ValueError("locus must be 'all', 'orthogonal' or 'cau'")
    Jv = _to_exact(J) if exact else np.asarray(J, dtype=float)
    if not is_complex_structure(Jv):
        raise ValueError("J is not a complex structure")
    gv = psiv = None
    if locus == "orthogonal":
        if g is None:
            raise ValueError("orthogonal locus needs the metric g")
        if not is_orthogonal_structure(g, J):
            raise ValueError("J is not orthogonal for g")
        gv = _to_exact(g) if exact else np.asarray(g, dtype=float)
    if locus == "cau":
        if psi is None:
            raise ValueError("cau locus needs the symplectic form psi")
        if not is_cau_member(psi, J):
            raise ValueError("J is not a member of Cau(psi)")
        psiv = _to_exact(psi) if exact else np.asarray(psi, dtype=float)
    M = _constraint_rows(Jv, gv, psiv, locus, exact)
    return _nullity(M, exact)


def transversality_defect(g, psi, J=None, exact: bool = False) -> int:
    """dim of the intersection of the two tangent spaces at the common J.

    Both loci share the anticommutation constraints, so the intersection is
    the nullspace of the full stacked system; the expected value is 0.
    """
    if J is None:
        J = two_out_of_three(g, psi)
    if exact:
        Jv, gv, psiv = _to_exact(J), _to_exact(g), _to_exact(psi)
    else:
        Jv = np.asarray(J, dtype=float)
        gv = np.asarray(g, dtype=float)
        psiv = np.asarray(psi, dtype=float)
    M = _constraint_rows(Jv, gv, psiv, "both", exact)
    return _nullity(M, exact)


# ---------------------------------------------------------------------------
# Darboux bases and Siegel coordinates
# ---------------------------------------------------------------------------

def darboux_basis(psi) -> np.ndarray:
    """Columns (u_1..u_n, v_1..v_n) with T^T Psi T = Psi_std.

    Symplectic Gram-Schmidt: each round takes the first remaining candidate
    u, scales a partner v with psi(u, v) = 1, and projects the rest into the
    psi-complement of span(u, v).
    """
    Psi = _check_symplectic(psi)
    m = Psi.shape[0]
    pool = [np.eye(m)[:, i] for i in range(m)]
    us, vs = [], []
    while pool:
        pool = [x for x in pool if np.linalg.norm(x) > 1e-12]
        if not pool:
            break
        u = pool.pop(0)
        pairings = [abs(u @ Psi @ x) for x in pool]
        if not pairings or max(pairings) <= 1e-12:
            raise ValueError("symplectic form is degenerate on the candidates")
        k = int(np.argmax(pairings))
        v = pool.pop(k)
        v = v / float(u @ Psi @ v)
        pool = [x - float(x @ Psi @ v) * u + float(x @ Psi @ u) * v for x in pool]
        us.append(u)
        vs.append(v)
    T = np.column_stack(us + vs)
    resid = np.max(np.abs(T.T @ Psi @ T - standard_symplectic(m // 2)))
    if resid > 1e-8:
        raise ValueError("Darboux reduction failed")
    return T


def siegel_point(psi, J, tol: float = _TOL) -> np.ndarray:
    """Siegel coordinates of a Cau member: Z symmetric with Im Z > 0.

    In a Darboux basis the +i-eigenspace of J is spanned by the columns of
    I - i J; positivity makes it a graph over the second (v) block, and Z
    is the graph matrix. The standard pair (Psi_std, J0) maps to i Id.
    """
    from scipy.linalg import qr
    if not is_cau_member(psi, J, tol=max(tol, 1e-8)):
        raise ValueError("J is not a member of Cau(psi)")
    Jf = np.asarray(J, dtype=float)
    m = _even_dim(Jf)
    n = m // 2
    T = darboux_basis(psi)
    Jt = np.linalg.solve(T, Jf @ T)
    M = np.eye(m) - 1j * Jt
    Ma, Mb = M[:n, :], M[n:, :]
    _, _, piv = qr(Mb, pivoting=True)
    cols = np.sort(piv[:n])
    Z = Ma[:, cols] @ np.linalg.inv(Mb[:, cols])
    asym = float(np.max(np.abs(Z - Z.T)))
    if asym > 1e-8 * max(1.0, float(np.max(np.abs(Z)))):
        raise ValueError("Siegel coordinates came out non-symmetric")
    return 0.5 * (Z + Z.T)


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def random_metric(n: int, rng: np.random.Generator) -> np.ndarray:
    M = rng.standard_normal((2 * n, 2 * n))
    return M @ M.T + np.eye(2 * n)


def random_symplectic(n: int, rng: np.random.Generator) -> np.ndarray:
    """S^T Psi_std S with det S > 0 (stays in the standard component)."""
    m = 2 * n
    for _ in range(64):
        S = rng.standard_normal((m, m))
        d = np.linalg.det(S)
        if abs(d) > 1e-6:
            if d < 0:
                S[[0, 1], :] = S[[1, 0], :]
            return S.T @ standard_symplectic(n) @ S
    raise RuntimeError("could not sample an invertible matrix")


def random_pair(n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Seeded (metric, symplectic form) pair for reconstruction sweeps."""
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(seed)
    return random_metric(n, rng), random_symplectic(n, rng)
