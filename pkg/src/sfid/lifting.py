"""Lifting factor pairs to tuples of rank-one matrices and back.

A factor pair (X, Y) with r columns lifts to the tuple whose i-th member is
the outer product of column i of X with column i of Y.  Tuples are stored as
arrays of shape (r, m, n).
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import linalg as la
from .errors import DimensionMismatch, NotRankOne
from .gaussian import ONE
from .supports import SupportMatrix


@dataclass(frozen=True)
class FactorPair:
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        if self.X.ndim != 2 or self.Y.ndim != 2 or self.X.shape[1] != self.Y.shape[1]:
            raise DimensionMismatch(f"factor shapes {self.X.shape} and {self.Y.shape} do not pair")

    @classmethod
    def of(cls, X, Y, tol=la.DEFAULT_TOL):
        return cls(la.as_matrix(X, tol), la.as_matrix(Y, tol))

    @property
    def rank(self):
        return self.X.shape[1]

    @property
    def exact(self):
        return la.is_exact_array(self.X)

    def product(self):
        return la.product(self.X, self.Y)

    def scale(self):
        """Magnitude used to judge residuals of the product."""
        return max(1e-300, la.max_abs(self.X) * la.max_abs(self.Y) * max(1, self.rank))

    def permuted(self, perm):
        return FactorPair(self.X[:, list(perm)], self.Y[:, list(perm)])


def outer(x, y):
    return la.matmul(x.reshape(-1, 1), y.reshape(1, -1))


def phi(pair):
    """Tuple of rank-one contributions, shape (r, m, n)."""
    X, Y = pair.X, pair.Y
    m, r = X.shape
    n = Y.shape[0]
    out = np.empty((r, m, n), dtype=X.dtype if X.dtype == Y.dtype else object)
    for i in range(r):
        out[i] = outer(X[:, i], Y[:, i])
    return out


def phi_supports(support_pair):
    """Rank-one supports left column i times right column i."""
    L, R = support_pair.left, support_pair.right
    return tuple(SupportMatrix.product_set(L.rows, R.rows, L.column(i), R.column(i))
                 for i in range(L.cols))


def sum_tuple(C):
    if C.shape[0] == 0:
        raise DimensionMismatch("empty tuple has no shape to sum into")
    if la.is_exact_array(C):
        acc = C[0].copy()
        for k in range(1, C.shape[0]):
            acc = acc + C[k]
        return acc
    return C.sum(axis=0)


def tuple_supports(C, tol=la.DEFAULT_TOL):
    """Support of each member, judged against the scale of the whole tuple."""
    if la.is_exact_array(C):
        return tuple(SupportMatrix.from_array(la.entry_mask(C[k])) for k in range(C.shape[0]))
    scale = la.max_abs(C)
    return tuple(SupportMatrix.from_array(np.abs(C[k]) > tol.relative_eps * scale)
                 for k in range(C.shape[0]))


def perfect_matching(edges):
    """Perfect matching in a square boolean bipartite graph, or None.

    Returns ``sigma`` with ``edges[sigma[j], j]`` true for every j.
    """
    edges = np.asarray(edges, dtype=bool)
    r = edges.shape[0]
    if r == 0:
        return ()
    rows, cols = linear_sum_assignment(np.where(edges, 0, 1))
    if not np.all(edges[rows, cols]):
        return None
    sigma = [0] * r
    for a, b in zip(rows, cols):
        sigma[b] = int(a)
    return tuple(sigma)


def tuple_equivalent(A, B, tol=la.DEFAULT_TOL):
    """Permutation sigma with B[j] == A[sigma[j]] for all j, or None."""
    if A.shape != B.shape:
        return None
    r = A.shape[0]
    scale = max(la.max_abs(la.to_float(A)), la.max_abs(la.to_float(B)))
    edges = np.zeros((r, r), dtype=bool)
    for i in range(r):
        for j in range(r):
            edges[i, j] = la.close(A[i], B[j], tol, scale)
    return perfect_matching(edges)


def factor_from_rank_one(C, tol=la.DEFAULT_TOL):
    """(x, y) with outer(x, y) == C and the first nonzero entry of x equal to 1."""
    if la.numerical_rank(C, tol) > 1:
        raise NotRankOne("matrix has rank above one")
    m, n = C.shape
    mask = la.entry_mask(C, tol)
    if not mask.any():
        return la.zeros(m, tol), la.zeros(n, tol)
    if la.is_exact_array(C):
        j = int(np.flatnonzero(mask.any(axis=0))[0])
        p = int(np.flatnonzero(mask[:, j])[0])
        x = np.array([v / C[p, j] for v in C[:, j]], dtype=object)
        y = C[p, :].copy()
        if not la.close(outer(x, y), C):
            raise NotRankOne("matrix has rank above one")
        return x, y
    u, s, vh = np.linalg.svd(C)
    x = u[:, 0]
    y = s[0] * vh[0]
    xm = np.abs(x) > tol.relative_eps * np.abs(x).max()
    p = int(np.flatnonzero(xm)[0])
    piv = x[p]
    x = x / piv
    x[~xm] = 0
    x[p] = 1.0
    y = y * piv
    return x, y


@dataclass(frozen=True)
class Equivalence:
    """B equals A after scaling column i by scaling[i] and then permuting.

    Column j of B.X is scaling[perm[j]] * A.X[:, perm[j]] and column j of
    B.Y is A.Y[:, perm[j]] / scaling[perm[j]].
    """
    perm: tuple
    scaling: tuple

    def apply(self, pair):
        X = pair.X.copy()
        Y = pair.Y.copy()
        for j, i in enumerate(self.perm):
            d = self.scaling[i]
            X[:, j] = pair.X[:, i] * d
            Y[:, j] = pair.Y[:, i] / d
        return FactorPair(X, Y)


def _first_nonzero(v, tol):
    mask = la.entry_mask(v.reshape(-1, 1), tol)[:, 0]
    idx = np.flatnonzero(mask)
    return int(idx[0]) if idx.size else None


def _column_match(ax, ay, bx, by, tol, xs, ys):
    """Scale d with (bx, by) == (d ax, ay / d), or None."""
    exact = la.is_exact_array(ax)
    one = ONE if exact else 1.0
    az = la.is_zero(ax, tol, xs)
    bz = la.is_zero(bx, tol, xs)
    ayz = la.is_zero(ay, tol, ys)
    byz = la.is_zero(by, tol, ys)
    if az != bz or ayz != byz:
        return None
    if az and ayz:
        return one
    if not az:
        p = _first_nonzero(ax, tol)
        d = bx[p] / ax[p]
        if not la.close(ax * d, bx, tol, xs):
            return None
        if ayz:
            return d
        if not la.close(ay / d, by, tol, ys):
            return None
        return d
    p = _first_nonzero(ay, tol)
    if not la.entry_mask(by.reshape(-1, 1), tol)[p, 0]:
        return None
    d = ay[p] / by[p]
    if not la.close(ay / d, by, tol, ys):
        return None
    return d


def pairs_equivalent(A, B, tol=la.DEFAULT_TOL):
    """Scaling and permutation taking A to B, or None when inequivalent."""
    if A.X.shape != B.X.shape or A.Y.shape != B.Y.shape:
        return None
    r = A.rank
    xs = max(la.max_abs(la.to_float(A.X)), la.max_abs(la.to_float(B.X)))
    ys = max(la.max_abs(la.to_float(A.Y)), la.max_abs(la.to_float(B.Y)))
    scales = {}
    edges = np.zeros((r, r), dtype=bool)
    for i in range(r):
        for j in range(r):
            d = _column_match(A.X[:, i], A.Y[:, i], B.X[:, j], B.Y[:, j], tol, xs, ys)
            if d is not None:
                edges[i, j] = True
                scales[i, j] = d
    sigma = perfect_matching(edges)
    if sigma is None:
        return None
    scaling = [None] * r
    for j, i in enumerate(sigma):
        scaling[i] = scales[i, j]
    return Equivalence(sigma, tuple(scaling))


def pairs_equivalent_perm_only(A, B, tol=la.DEFAULT_TOL):
    """Permutation taking A to B without rescaling, or None."""
    if A.X.shape != B.X.shape or A.Y.shape != B.Y.shape:
        return None
    r = A.rank
    xs = max(la.max_abs(la.to_float(A.X)), la.max_abs(la.to_float(B.X)))
    ys = max(la.max_abs(la.to_float(A.Y)), la.max_abs(la.to_float(B.Y)))
    edges = np.zeros((r, r), dtype=bool)
    for i in range(r):
        for j in range(r):
            edges[i, j] = (la.close(A.X[:, i], B.X[:, j], tol, xs)
                           and la.close(A.Y[:, i], B.Y[:, j], tol, ys))
    sigma = perfect_matching(edges)
    if sigma is None:
        return None
    exact = A.exact
    return Equivalence(sigma, tuple(ONE if exact else 1.0 for _ in range(r)))
