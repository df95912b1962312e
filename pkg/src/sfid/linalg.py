"""Linear algebra over complex matrices in two arithmetic modes.

Float mode works on ``complex128`` arrays and decides ranks with a relative
singular-value threshold.  Exact mode works on object arrays of
:class:`GaussianRational` and never rounds.  Every function takes a
:class:`Tolerance` that selects the mode.
"""
from dataclasses import dataclass
from itertools import combinations
from math import lcm

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, PreconditionNotMet, ZeroColumn
from .gaussian import ONE, ZERO, GaussianRational


@dataclass(frozen=True)
class Tolerance:
    relative_eps: float = 1e-10
    exact: bool = False

    def __post_init__(self):
        if not self.relative_eps > 0:
            raise PreconditionNotMet("relative_eps must be positive")

    @property
    def mode(self):
        return "exact" if self.exact else "float"

    def loosened(self, factor=10.0):
        return Tolerance(self.relative_eps * factor, self.exact)


DEFAULT_TOL = Tolerance()
EXACT = Tolerance(exact=True)


# ---------------------------------------------------------------- conversion

def as_matrix(data, tol=DEFAULT_TOL):
    """Validated 2-D matrix in the arithmetic of ``tol``."""
    if tol.exact:
        if isinstance(data, np.ndarray) and data.dtype == object and data.ndim == 2:
            flat = [GaussianRational.coerce(v) for v in data.ravel()]
            out = np.empty(data.shape, dtype=object)
            out.ravel()[:] = flat
            return out
        arr = np.asarray(data, dtype=object)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected a matrix, got {arr.ndim} dimensions")
        out = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            if isinstance(v, float) and not np.isfinite(v):
                raise PreconditionNotMet("matrix entries must be finite")
            out[idx] = GaussianRational.coerce(v)
        return out
    if isinstance(data, np.ndarray) and data.dtype == object:
        arr = np.array([[complex(v) for v in row] for row in data], dtype=complex)
        arr = arr.reshape(data.shape)
    else:
        arr = np.array(data, dtype=complex)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got {arr.ndim} dimensions")
    if not np.all(np.isfinite(arr)):
        raise PreconditionNotMet("matrix entries must be finite")
    return arr


def as_vector(data, tol=DEFAULT_TOL):
    arr = np.asarray(data, dtype=object if tol.exact else complex)
    return as_matrix(arr.reshape(-1, 1), tol)[:, 0]


def is_exact_array(M):
    return isinstance(M, np.ndarray) and M.dtype == object


def zeros(shape, tol=DEFAULT_TOL):
    if tol.exact:
        out = np.empty(shape, dtype=object)
        out.fill(ZERO)
        return out
    return np.zeros(shape, dtype=complex)


def matmul(A, B):
    """Matrix product that keeps object arrays well formed for empty inner sizes."""
    if is_exact_array(A) or is_exact_array(B):
        out = np.empty((A.shape[0], B.shape[1]), dtype=object)
        for i in range(A.shape[0]):
            for j in range(B.shape[1]):
                acc = ZERO
                for k in range(A.shape[1]):
                    acc = acc + A[i, k] * B[k, j]
                out[i, j] = acc
        return out
    return A @ B


def product(X, Y):
    """X @ Y.T (plain transpose)."""
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatch(f"inner sizes differ: {X.shape[1]} vs {Y.shape[1]}")
    return matmul(X, Y.T)


def max_abs(M):
    if M.size == 0:
        return 0.0
    if is_exact_array(M):
        return max(abs(complex(v)) for v in M.ravel())
    return float(np.abs(M).max())


# ------------------------------------------------------------ zero patterns

def entry_mask(M, tol=DEFAULT_TOL):
    """Boolean array of entries treated as nonzero."""
    if is_exact_array(M):
        out = np.zeros(M.shape, dtype=bool)
        for idx, v in np.ndenumerate(M):
            out[idx] = bool(v)
        return out
    scale = max_abs(M)
    if scale == 0:
        return np.zeros(M.shape, dtype=bool)
    return np.abs(M) > tol.relative_eps * scale


def column_nonzero(M, tol=DEFAULT_TOL):
    return entry_mask(M, tol).any(axis=0)


def colsupp(M, tol=DEFAULT_TOL):
    """Indices of nonzero columns, ascending."""
    return tuple(int(i) for i in np.flatnonzero(column_nonzero(M, tol)))


def is_zero(M, tol=DEFAULT_TOL, scale=None):
    if is_exact_array(M):
        return not any(bool(v) for v in M.ravel())
    if scale is None:
        return max_abs(M) == 0
    return max_abs(M) <= tol.relative_eps * scale


def close(A, B, tol=DEFAULT_TOL, scale=0.0):
    """Entrywise equality, relative to the larger operand or ``scale``."""
    if A.shape != B.shape:
        return False
    if is_exact_array(A) and is_exact_array(B):
        return all(a == b for a, b in zip(A.ravel(), B.ravel()))
    a = to_float(A)
    b = to_float(B)
    ref = max(scale, max_abs(a), max_abs(b))
    if ref == 0:
        return True
    return max_abs(a - b) <= tol.relative_eps * ref


def to_float(M):
    if is_exact_array(M):
        return np.array([complex(v) for v in M.ravel()], dtype=complex).reshape(M.shape)
    return np.asarray(M, dtype=complex)


def to_exact(M):
    return as_matrix(M, EXACT)


# ------------------------------------------------------------------- ranks

def _gaussian_integer_parts(M):
    """Integer matrices (re, im) proportional to an exact matrix."""
    den = 1
    for v in M.ravel():
        den = lcm(den, v.re.denominator, v.im.denominator)
    re = [[int(v.re * den) for v in row] for row in M]
    im = [[int(v.im * den) for v in row] for row in M]
    return re, im


def numerical_rank(M, tol=DEFAULT_TOL):
    if M.ndim != 2:
        raise DimensionMismatch("expected a matrix")
    if M.size == 0:
        return 0
    if tol.exact or is_exact_array(M):
        E = M if is_exact_array(M) else to_exact(M)
        re, im = _gaussian_integer_parts(E)
        return _kernels.gauss_int_rank(re, im)
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol.relative_eps * s[0] * max(M.shape)))


def independent(M, tol=DEFAULT_TOL):
    """True if the columns of M are linearly independent (vacuous for none)."""
    if M.shape[1] == 0:
        return True
    if M.shape[1] > M.shape[0]:
        return False
    return numerical_rank(M, tol) == M.shape[1]


def in_span(v, M, tol=DEFAULT_TOL):
    """True if the vector v lies in the column span of M."""
    v = v.reshape(-1, 1)
    if tol.exact or is_exact_array(M) or is_exact_array(v):
        E = M if is_exact_array(M) else to_exact(M)
        w = v if is_exact_array(v) else to_exact(v)
        if is_zero(w):
            return True
        if E.shape[1] == 0:
            return False
        return numerical_rank(np.hstack([E, w]), EXACT) == numerical_rank(E, EXACT)
    norm = float(np.linalg.norm(v))
    if norm == 0:
        return True
    if M.shape[1] == 0:
        return False
    coef, *_ = np.linalg.lstsq(M, v, rcond=None)
    resid = float(np.linalg.norm(M @ coef - v))
    return resid <= tol.relative_eps * max(1.0, norm)


def kruskal_rank(M, tol=DEFAULT_TOL, chunk=4096):
    """Largest k such that every k columns of M are independent."""
    m, r = M.shape
    if r == 0 or m == 0:
        return 0
    if tol.exact or is_exact_array(M):
        E = M if is_exact_array(M) else to_exact(M)
        re, im = _gaussian_integer_parts(E)
        return _kernels.gauss_int_kruskal(re, im)
    top = min(m, r)
    for size in range(1, top + 1):
        combos = combinations(range(r), size)
        while True:
            batch = [c for _, c in zip(range(chunk), combos)]
            if not batch:
                break
            sub = M[:, np.array(batch)].transpose(1, 0, 2)
            s = np.linalg.svd(sub, compute_uv=False)
            thr = tol.relative_eps * s[:, :1] * max(m, size)
            ranks = np.count_nonzero(s > thr, axis=1)
            ranks[s[:, 0] == 0] = 0
            if np.any(ranks < size):
                return size - 1
    return top


def dependent_subset(M, tol=DEFAULT_TOL, max_size=None):
    """Smallest dependent set of columns (first in lexicographic order)."""
    m, r = M.shape
    limit = r if max_size is None else min(r, max_size)
    for size in range(1, limit + 1):
        for subset in combinations(range(r), size):
            if not independent(M[:, list(subset)], tol):
                return subset
    return None


# ------------------------------------------------------ solving and kernels

def _rref(rows, ncols):
    """Gauss-Jordan elimination on a list of GaussianRational rows (in place)."""
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        rows[r] = [x / p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def solve_affine(A, b, tol=DEFAULT_TOL):
    """Solutions of A x = b as (particular, kernel basis), or None if infeasible.

    The kernel basis is returned as a list of vectors.  In float mode a
    solution is accepted when its residual passes the span test.
    """
    n = A.shape[1]
    if tol.exact or is_exact_array(A):
        E = A if is_exact_array(A) else to_exact(A)
        w = as_vector(b, EXACT) if not is_exact_array(b) else b.reshape(-1)
        rows = [list(E[i]) + [w[i]] for i in range(E.shape[0])]
        pivots = _rref(rows, n)
        for row in rows[len(pivots):]:
            if row[n]:
                return None
        x = np.empty(n, dtype=object)
        x.fill(ZERO)
        for i, c in enumerate(pivots):
            x[c] = rows[i][n]
        basis = []
        for free in (c for c in range(n) if c not in pivots):
            k = np.empty(n, dtype=object)
            k.fill(ZERO)
            k[free] = ONE
            for i, c in enumerate(pivots):
                k[c] = -rows[i][free]
            basis.append(k)
        return x, basis
    b = np.asarray(b, dtype=complex).reshape(-1)
    if not in_span(b, A, tol):
        return None
    if n == 0:
        return np.zeros(0, dtype=complex), []
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    return x, list(nullspace(A, tol).T)


def nullspace(A, tol=DEFAULT_TOL):
    """Columns spanning the kernel of A."""
    n = A.shape[1]
    if tol.exact or is_exact_array(A):
        sol = solve_affine(A, zeros(A.shape[0], EXACT), EXACT)
        basis = sol[1]
        out = zeros((n, len(basis)), EXACT)
        for j, k in enumerate(basis):
            out[:, j] = k
        return out
    if A.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(A)
    rank = numerical_rank(A, tol)
    return vh[rank:].conj().T


def kernel_vector(A, tol=DEFAULT_TOL):
    """One nonzero kernel vector scaled so its first nonzero entry is 1."""
    N = nullspace(A, tol)
    if N.shape[1] == 0:
        return None
    v = N[:, 0]
    mask = entry_mask(v.reshape(-1, 1), tol)[:, 0]
    first = int(np.flatnonzero(mask)[0])
    return v / v[first]


# ------------------------------------------------------ column structure

def normalize_columns(M, tol=DEFAULT_TOL):
    """Scale columns so the first nonzero entry of each is 1.

    Returns (normalized, scales) with ``normalized = M @ diag(scales)``.
    """
    mask = entry_mask(M, tol)
    if not mask.any(axis=0).all():
        raise ZeroColumn("cannot normalize a zero column")
    out = M.copy()
    scales = []
    for j in range(M.shape[1]):
        first = int(np.flatnonzero(mask[:, j])[0])
        s = ONE / M[first, j] if is_exact_array(M) else 1.0 / M[first, j]
        out[:, j] = M[:, j] * s
        if not is_exact_array(M):
            out[first, j] = 1.0
        scales.append(s)
    return out, scales


def collinear(u, v, tol=DEFAULT_TOL):
    return numerical_rank(np.column_stack([u, v]), tol) <= 1


def collinearity_partition(M, tol=DEFAULT_TOL):
    """Classes of pairwise collinear nonzero columns, ordered by smallest index."""
    if not column_nonzero(M, tol).all():
        raise ZeroColumn("collinearity classes need nonzero columns")
    classes = []
    for j in range(M.shape[1]):
        for cls in classes:
            if collinear(M[:, cls[0]], M[:, j], tol):
                cls.append(j)
                break
        else:
            classes.append([j])
    return [tuple(c) for c in classes]


def rank_at_most_one_on(Z, cells, tol=DEFAULT_TOL):
    """True if Z restricted to ``cells`` (zero elsewhere) has rank at most one."""
    mode = EXACT if tol.exact or is_exact_array(Z) else tol
    Z = as_matrix(Z, mode)
    R = zeros(Z.shape, mode)
    for (i, j) in cells:
        R[i, j] = Z[i, j]
    return numerical_rank(R, tol) <= 1
