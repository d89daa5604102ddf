"""Quadratic spaces over R and Q: signatures, subspaces, complements.

Everything downstream (positive Grassmannians, twistor curves, lattice
experiments) reduces to linear algebra against a fixed symmetric bilinear
form, so this module keeps two parallel arithmetic paths:

* float64 with a relative tolerance (default ``1e-9``) for sampling and
  differential-geometry code, and
* exact ``fractions.Fraction`` arithmetic for answers that must not depend
  on a tolerance (signatures of integral lattices, exact dimension counts).

Signatures are computed by symmetric congruence reduction (LDL^T-style
diagonal pivoting with the hyperbolic-pair fallback), which needs only
field operations and therefore runs unchanged over the rationals.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

DEFAULT_TOL = 1e-9

__all__ = [
    "DEFAULT_TOL",
    "DegenerateFormError",
    "NullLineError",
    "Signature",
    "QuadraticSpace",
    "Subspace",
    "signature",
    "is_positive_definite",
    "orthogonal_complement",
    "restriction_is_nondegenerate",
    "project_along",
    "restrict_form",
    "orthogonal_frame",
    "fraction_matrix",
    "read_gram",
    "exact_rank",
    "exact_det",
]


class DegenerateFormError(ValueError):
    """A Gram matrix that must be nondegenerate is singular."""


class NullLineError(ValueError):
    """Projection along a line on which the form vanishes."""


class Signature(NamedTuple):
    positive: int
    negative: int
    zero: int


# ---------------------------------------------------------------------------
# exact (Fraction) helpers
# ---------------------------------------------------------------------------

def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def fraction_matrix(data) -> np.ndarray:
    """Coerce nested data to a 2-d object array of Fractions."""
    rows = [[_as_fraction(x) for x in row] for row in data]
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ValueError("ragged matrix data")
    out = np.empty((len(rows), width.pop()), dtype=object)
    for i, r in enumerate(rows):
        out[i, :] = r
    return out


def _fraction_vector(data) -> np.ndarray:
    out = np.empty(len(data), dtype=object)
    out[:] = [_as_fraction(x) for x in data]
    return out


def _rref(mat: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over Q. Returns (R, pivot column list)."""
    R = mat.copy()
    m, n = R.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        pivot = next((r for r in range(row, m) if R[r, col] != 0), None)
        if pivot is None:
            continue
        if pivot != row:
            R[[row, pivot], :] = R[[pivot, row], :]
        R[row, :] = R[row, :] / R[row, col]
        for r in range(m):
            if r != row and R[r, col] != 0:
                R[r, :] = R[r, :] - R[r, col] * R[row, :]
        pivots.append(col)
        row += 1
        if row == m:
            break
    return R, pivots


def exact_rank(mat: np.ndarray) -> int:
    return len(_rref(fraction_matrix(mat))[1])


def _exact_nullspace(mat: np.ndarray) -> np.ndarray:
    """Basis (columns) of the rational nullspace of ``mat``."""
    R, pivots = _rref(mat)
    n = mat.shape[1]
    free = [c for c in range(n) if c not in pivots]
    basis = np.empty((n, len(free)), dtype=object)
    basis[:, :] = Fraction(0)
    for j, fc in enumerate(free):
        basis[fc, j] = Fraction(1)
        for r, pc in enumerate(pivots):
            basis[pc, j] = -R[r, fc]
    return basis


def exact_det(mat: np.ndarray) -> Fraction:
    A = fraction_matrix(mat)
    n = A.shape[0]
    if A.shape[1] != n:
        raise ValueError("determinant of a non-square matrix")
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r, col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            A[[col, pivot], :] = A[[pivot, col], :]
            det = -det
        det *= A[col, col]
        for r in range(col + 1, n):
            if A[r, col] != 0:
                A[r, col:] = A[r, col:] - (A[r, col] / A[col, col]) * A[col, col:]
    return det


def _exact_solve(A: np.ndarray, y: Sequence) -> np.ndarray:
    """Solve A x = y over Q (A square nonsingular)."""
    n = A.shape[0]
    M = np.empty((n, n + 1), dtype=object)
    M[:, :n] = fraction_matrix(A)
    M[:, n] = _fraction_vector(y)
    R, pivots = _rref(M[:, :])
    if pivots != list(range(n)):
        raise DegenerateFormError("singular linear system in exact solve")
    return R[:, n].copy()


# ---------------------------------------------------------------------------
# signature by congruence reduction
# ---------------------------------------------------------------------------

def _congruence_signature(mat: np.ndarray, zero) -> Signature:
    A = mat.copy()
    pos = neg = null = 0
    while A.shape[0]:
        m = A.shape[0]
        diag = [abs(A[i, i]) for i in range(m)]
        k = max(range(m), key=diag.__getitem__)
        if not zero(A[k, k]):
            d = A[k, k]
            if d > 0:
                pos += 1
            else:
                neg += 1
            if k != 0:
                A[[0, k], :] = A[[k, 0], :]
                A[:, [0, k]] = A[:, [k, 0]]
            v = A[1:, 0].copy()
            A = A[1:, 1:] - np.outer(v, v) / d
            continue
        # every diagonal entry is (numerically) zero: hunt for an
        # off-diagonal pivot and fold it onto the diagonal
        best, bi, bj = None, -1, -1
        for i in range(m):
            for j in range(i + 1, m):
                a = abs(A[i, j])
                if best is None or a > best:
                    best, bi, bj = a, i, j
        if best is None or zero(A[bi, bj]):
            null += m
            break
        A[bi, :] = A[bi, :] + A[bj, :]
        A[:, bi] = A[:, bi] + A[:, bj]
    return Signature(pos, neg, null)


def signature(form, tol: float | None = None) -> Signature:
    """Signature (p, m, z) of a symmetric form.

    ``form`` may be a QuadraticSpace, an object array of Fractions (exact
    path), or a float array (congruence reduction with relative tolerance
    ``tol``, default 1e-9).
    """
    if isinstance(form, QuadraticSpace):
        return form.signature()
    M = np.asarray(form)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("form must be a square matrix")
    if M.dtype == object:
        F = fraction_matrix(M)
        if not np.array_equal(F, F.T):
            raise ValueError("form must be symmetric")
        return _congruence_signature(F, lambda x: x == 0)
    M = M.astype(float)
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    t = DEFAULT_TOL if tol is None else tol
    if M.size and float(np.max(np.abs(M - M.T))) > t * scale:
        raise ValueError("form must be symmetric")
    return _congruence_signature(M, lambda x: abs(x) <= t * scale)


def is_positive_definite(form, tol: float | None = None) -> bool:
    """Sylvester pivots > 0 (exact) / Cholesky with pivots above tol (float)."""
    if isinstance(form, QuadraticSpace):
        return is_positive_definite(form.gram, form.tol if tol is None else tol)
    M = np.asarray(form)
    if M.dtype == object:
        A = fraction_matrix(M)
        n = A.shape[0]
        for k in range(n):
            d = A[k, k]
            if d <= 0:
                return False
            if k + 1 < n:
                v = A[k + 1:, k].copy()
                A[k + 1:, k + 1:] = A[k + 1:, k + 1:] - np.outer(v, v) / d
        return True
    M = M.astype(float)
    M = 0.5 * (M + M.T)
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return False
    t = DEFAULT_TOL if tol is None else tol
    scale = max(1.0, float(np.max(np.abs(M))))
    return float(np.min(np.diag(L)) ** 2) > t * scale


# ---------------------------------------------------------------------------
# spaces and subspaces
# ---------------------------------------------------------------------------

class QuadraticSpace:
    """R^n (or Q^n) with a fixed nondegenerate symmetric bilinear form."""

    def __init__(self, gram, exact: bool = False, tol: float = DEFAULT_TOL):
        if exact:
            G = fraction_matrix(np.asarray(gram))
            if not (G == G.T).all():
                raise ValueError("Gram matrix must be symmetric")
        else:
            G = np.asarray(gram)
            if G.dtype == object:
                G = np.vectorize(float)(G)
            G = G.astype(float)
            scale = max(1.0, float(np.max(np.abs(G))) if G.size else 1.0)
            if float(np.max(np.abs(G - G.T))) > tol * scale:
                raise ValueError("Gram matrix must be symmetric")
            G = 0.5 * (G + G.T)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValueError("Gram matrix must be square")
        self.gram = G
        self.exact = bool(exact)
        self.tol = float(tol)
        self._signature: Signature | None = None
        sig = self.signature()
        if sig.zero:
            raise DegenerateFormError("Gram matrix is degenerate")

    @classmethod
    def diagonal(cls, positive: int, negative: int, exact: bool = False,
                 tol: float = DEFAULT_TOL) -> "QuadraticSpace":
        entries = [1] * positive + [-1] * negative
        return cls(np.diag(entries), exact=exact, tol=tol)

    @classmethod
    def from_text(cls, text: str, exact: bool = False,
                  tol: float = DEFAULT_TOL) -> "QuadraticSpace":
        return cls(read_gram(text), exact=exact, tol=tol)

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    def coerce_vector(self, x) -> np.ndarray:
        if self.exact:
            return _fraction_vector(list(x))
        return np.asarray(x, dtype=complex if np.iscomplexobj(x) else float)

    def q(self, x, y):
        """Bilinear form q(x, y); extends complex-bilinearly in float mode."""
        return np.dot(np.asarray(x), np.dot(self.gram, np.asarray(y)))

    def norm(self, x):
        return self.q(x, x)

    def signature(self) -> Signature:
        if self._signature is None:
            self._signature = signature(self.gram, tol=self.tol)
        return self._signature

    def is_positive_definite(self) -> bool:
        return is_positive_definite(self.gram, tol=self.tol)

    def subspace(self, basis) -> "Subspace":
        return Subspace(self, basis)

    def __repr__(self) -> str:
        p, m, z = self.signature()
        mode = "exact" if self.exact else "float"
        return f"QuadraticSpace(dim={self.dim}, signature=({p},{m}), {mode})"


class Subspace:
    """Subspace of a QuadraticSpace given by an explicit column basis."""

    def __init__(self, ambient: QuadraticSpace, basis):
        self.ambient = ambient
        if ambient.exact:
            B = fraction_matrix(np.asarray(basis)) if np.asarray(basis).ndim == 2 \
                else fraction_matrix(np.asarray(basis).reshape(-1, 1))
        else:
            B = np.asarray(basis, dtype=float)
            if B.ndim == 1:
                B = B.reshape(-1, 1)
        if B.shape[0] != ambient.dim or not 1 <= B.shape[1] <= ambient.dim:
            raise ValueError("basis must be an (ambient dim) x k matrix, 1 <= k <= dim")
        if ambient.exact:
            if len(_rref(B.T.copy())[1]) != B.shape[1]:
                raise ValueError("basis columns are linearly dependent")
        else:
            s = np.linalg.svd(B, compute_uv=False)
            if s[-1] <= ambient.tol * max(1.0, s[0]):
                raise ValueError("basis columns are linearly dependent")
        self.basis = B

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def restricted_gram(self) -> np.ndarray:
        B, G = self.basis, self.ambient.gram
        return np.dot(B.T, np.dot(G, B))


def restrict_form(sub: Subspace) -> np.ndarray:
    """Gram matrix of the ambient form on the subspace basis.

    Returned as a plain matrix: the restriction is allowed to be degenerate
    (e.g. a null line), which a QuadraticSpace would reject.
    """
    return sub.restricted_gram()


def restriction_is_nondegenerate(sub: Subspace) -> bool:
    R = sub.restricted_gram()
    if sub.ambient.exact:
        return exact_det(R) != 0
    s = np.linalg.svd(R.astype(float), compute_uv=False)
    return bool(s[-1] > sub.ambient.tol * max(1.0, s[0]))


def orthogonal_complement(sub: Subspace) -> Subspace:
    """q-orthogonal complement {x : q(b, x) = 0 for all basis vectors b}.

    Always has dimension dim(ambient) - dim(sub); when the restriction of q
    to ``sub`` is degenerate the complement meets ``sub`` (flag it with
    restriction_is_nondegenerate).
    """
    amb = sub.ambient
    M = np.dot(sub.basis.T, amb.gram)
    if amb.exact:
        N = _exact_nullspace(M)
        return Subspace(amb, N)
    _, s, vh = np.linalg.svd(M.astype(float))
    rank = int(np.sum(s > amb.tol * max(1.0, s[0] if s.size else 1.0)))
    return Subspace(amb, vh[rank:].T.copy())


def project_along(line: Subspace, x) -> np.ndarray:
    """Project x into the q-orthogonal complement of a non-null line."""
    if line.dim != 1:
        raise ValueError("project_along expects a 1-dimensional subspace")
    amb = line.ambient
    u = line.basis[:, 0]
    d = amb.q(u, u)
    if amb.exact:
        if d == 0:
            raise NullLineError("cannot project along a null line")
        xv = _fraction_vector(list(x))
        return xv - (amb.q(xv, u) / d) * u
    scale = float(np.dot(np.abs(u), np.dot(np.abs(amb.gram), np.abs(u))))
    if abs(d) <= amb.tol * max(1.0, scale):
        raise NullLineError("cannot project along a null line")
    xv = np.asarray(x, dtype=float)
    return xv - (amb.q(xv, u) / d) * u


def orthogonal_frame(space: QuadraticSpace) -> tuple[np.ndarray, np.ndarray]:
    """Pseudo-orthonormal frame: columns F with q(f_i, f_j) = eps_i delta_ij.

    Positive directions come first (descending eigenvalue), then negative.
    Float mode only.
    """
    G = np.asarray(space.gram, dtype=float)
    lam, E = np.linalg.eigh(G)
    idx = np.argsort(-lam)
    lam, E = lam[idx], E[:, idx]
    F = E / np.sqrt(np.abs(lam))
    eps = np.sign(lam)
    return F, eps


def read_gram(text: str) -> np.ndarray:
    """Parse a Gram matrix: first line the dimension, then rows of numbers.

    Entries may be integers, rationals ``p/q`` or decimals. Blank lines and
    ``#`` comments are skipped. Returns an exact Fraction matrix; pass it to
    QuadraticSpace with exact=False to work in floats.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty Gram matrix text")
    dim = int(lines[0])
    rows = []
    for ln in lines[1:1 + dim]:
        row = [Fraction(tok) for tok in ln.split()]
        if len(row) != dim:
            raise ValueError(f"expected {dim} entries per row, got {len(row)}")
        rows.append(row)
    if len(rows) != dim:
        raise ValueError(f"expected {dim} rows, got {len(rows)}")
    return fraction_matrix(rows)
