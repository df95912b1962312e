"""Brute-force and constructive ground truth for the decision procedures.

Nothing here relies on the structural characterizations in ``checks`` or
``uniform``.  Right identifiability is decided by solving the linear system
for every allowed support; Kruskal ranks are found by plain elimination over
every column subset; injectivity of the tuple-sum map is read off a kernel.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import factorial

import numpy as np

from . import linalg as la
from .errors import CapExceeded, DimensionMismatch, NotInFamily
from .gaussian import ONE, ZERO
from .lifting import FactorPair, pairs_equivalent
from .supports import Bounded, ColumnSparse, GlobalSparse, Intersection, Product, RowSparse, \
    SupportMatrix
from .verdict import FactorCounterexample, TupleCounterexample

UNIQUE = "Unique"
NOT_UNIQUE = "NotUnique"
INCONCLUSIVE = "Inconclusive"

KRANK_CAP = 20


@dataclass(frozen=True)
class OracleReport:
    verdict: str
    counterexample: object = None
    solutions_examined: int = 0
    method: str = ""
    details: dict = field(default_factory=dict)

    @property
    def unique(self):
        return self.verdict == UNIQUE


def _support(M, tol):
    return SupportMatrix.from_array(la.entry_mask(M, tol))


# ------------------------------------------------- right identifiability

def _orbit_bound(r):
    """Orbit size of Y under the scalings and permutations fixing X, once Y
    vanishes wherever X does."""
    return factorial(r)


def oracle_right_identifiability(pair, theta, tol=la.EXACT, budget=None):
    """Decide right identifiability by solving for every support in theta."""
    if theta.shape != pair.Y.shape:
        raise DimensionMismatch(f"family shape {theta.shape} does not match Y {pair.Y.shape}")
    mode = la.EXACT if tol.exact or pair.exact else tol
    if mode.exact and not pair.exact:
        pair = FactorPair(la.to_exact(pair.X), la.to_exact(pair.Y))
    X, Y = pair.X, pair.Y
    if not theta.covers(_support(Y, mode)):
        raise NotInFamily("Y is not supported on a member of the family")
    n, r = Y.shape
    Z = pair.product()
    xzero = [i for i in range(r) if not la.column_nonzero(X, mode)[i]]
    ynz = la.column_nonzero(Y, mode)
    if any(ynz[i] for i in xzero):
        Y2 = Y.copy()
        for i in xzero:
            Y2[:, i] = ZERO if mode.exact else 0.0
        return _report(pair, Y2, mode, 0, "zero column of X")

    examined = 0
    tries = _orbit_bound(r) + 1
    for S in theta.members(budget):
        examined += 1
        Yp = la.zeros((n, r), mode)
        directions = []
        feasible = True
        for j in range(n):
            cols = S.row(j)
            if not cols:
                if not la.is_zero(Z[:, j], mode, pair.scale()):
                    feasible = False
                    break
                continue
            sol = la.solve_affine(X[:, cols], Z[:, j], mode)
            if sol is None:
                feasible = False
                break
            x, kernel = sol
            for c, v in zip(cols, x):
                Yp[j, c] = v
            for k in kernel:
                D = la.zeros((n, r), mode)
                for c, v in zip(cols, k):
                    D[j, c] = v
                directions.append(D)
        if not feasible:
            continue
        if not directions:
            if pairs_equivalent(pair, FactorPair(X, Yp), mode) is None:
                return _report(pair, Yp, mode, examined, "isolated solution")
            continue
        # a line of solutions meets the finite orbit of Y in at most
        # orbit-size points, so one more sample must leave it
        D = directions[0]
        for t in range(tries + 1):
            step = ONE * t if mode.exact else float(t)
            Yt = Yp + D * step
            if pairs_equivalent(pair, FactorPair(X, Yt), mode) is None:
                return _report(pair, Yt, mode, examined, "solution line")
    return OracleReport(UNIQUE, None, examined, "exhaustive supports")


def _report(pair, Y2, mode, examined, method):
    cx = FactorCounterexample(pair, FactorPair(pair.X, Y2))
    if not cx.verify(mode):
        return OracleReport(INCONCLUSIVE, None, examined, method,
                            {"reason": "counterexample failed re-verification"})
    return OracleReport(NOT_UNIQUE, cx, examined, method)


# ----------------------------------------------------------- Kruskal rank

def _exact_rank(cols):
    """Rank of a list of exact column vectors by row reduction on Fractions."""
    if not cols:
        return 0
    m = len(cols[0])
    # real 2m x 2k embedding of the complex columns keeps everything in Q
    rows = []
    for i in range(m):
        rows.append([c[i].re for c in cols] + [-c[i].im for c in cols])
        rows.append([c[i].im for c in cols] + [c[i].re for c in cols])
    rows = [[Fraction(v) for v in row] for row in rows]
    width = len(rows[0])
    rank = 0
    for c in range(width):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank][c]
        for i in range(rank + 1, len(rows)):
            if rows[i][c] != 0:
                f = rows[i][c] / p
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    # the real embedding doubles the complex rank
    return rank // 2


def _float_rank(M, tol):
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol.relative_eps * s[0] * max(M.shape)))


def oracle_kruskal_rank(M, tol=la.EXACT):
    """Kruskal rank by checking every column subset in increasing size."""
    m, r = M.shape
    if r > KRANK_CAP:
        raise CapExceeded(f"{r} columns exceed the cap of {KRANK_CAP}")
    exact = tol.exact or la.is_exact_array(M)
    E = la.to_exact(M) if exact and not la.is_exact_array(M) else M
    best = 0
    for size in range(1, r + 1):
        for subset in combinations(range(r), size):
            if exact:
                rank = _exact_rank([list(E[:, j]) for j in subset])
            else:
                rank = _float_rank(np.asarray(E[:, list(subset)], dtype=complex), tol)
            if rank < size:
                return best
        best = size
    return best


# ------------------------------------------------ tuple-sum injectivity

def oracle_A_injectivity(supports, tol=la.DEFAULT_TOL):
    """Kernel test of the sum map on tuples constrained to the given supports."""
    supports = tuple(supports)
    if not supports:
        return OracleReport(UNIQUE, None, 0, "kernel of the sum map")
    m, n = supports[0].shape
    variables = [(k, cell) for k, S in enumerate(supports) for cell in S.cells]
    if not variables:
        return OracleReport(UNIQUE, None, 0, "kernel of the sum map")
    A = np.zeros((m * n, len(variables)))
    for v, (k, (i, j)) in enumerate(variables):
        A[i * n + j, v] = 1.0
    N = la.nullspace(A.astype(complex), tol)
    if N.shape[1] == 0:
        return OracleReport(UNIQUE, None, len(variables), "kernel of the sum map")
    h = N[:, 0]
    live = [v for v in range(len(variables)) if abs(h[v]) > 1e-8 * np.abs(h).max()]
    k1, cell = variables[live[0]]
    k2 = next(variables[v][0] for v in live[1:] if variables[v][1] == cell)
    r = len(supports)
    C = np.zeros((r, m, n))
    C2 = np.zeros((r, m, n))
    C[k1][cell], C[k2][cell] = 1.0, -1.0
    C2[k1][cell], C2[k2][cell] = 2.0, -2.0
    cx = TupleCounterexample(C.astype(complex), C2.astype(complex))
    return OracleReport(NOT_UNIQUE, cx, len(variables), "kernel of the sum map",
                        {"overlap": [k1, k2, list(cell)]})


# --------------------------------------------- uniform counterexamples

def classical_family(kind, params, n, r):
    """Right-factor family on n x r for a classical kind and its parameters."""
    if kind == "row":
        return RowSparse(n, r, params[0])
    if kind == "col":
        return ColumnSparse(n, r, params[0])
    if kind == "rowcol":
        return Intersection([RowSparse(n, r, params[0]), ColumnSparse(n, r, params[1])])
    if kind == "global":
        return GlobalSparse(n, r, params[0])
    raise ValueError(f"unknown classical kind {kind!r}")


def classical_threshold(kind, params, r):
    if kind == "col":
        return r
    return min(r, 2 * params[0])


def _budgets(kind, params, n, r):
    """Largest number of nonzeros allowed in one row and in one column of Y."""
    row = {"row": params[0], "rowcol": params[0], "global": params[0], "col": r}[kind]
    col = {"row": n, "col": params[0], "rowcol": params[-1], "global": params[0]}[kind]
    return min(row, r), min(col, n)


def construct_uniform_counterexample(X, kind, params, n, tol=la.DEFAULT_TOL):
    """Two right factors with the same product that are not equivalent, or None.

    A smallest dependent set of columns of X supplies a kernel vector whose
    two halves go into one row of Y and Y' with opposite signs.  A collinear
    pair needs either two entries in a row or, failing that, two entries in
    a column spread over two rows.
    """
    mode = la.EXACT if tol.exact or la.is_exact_array(X) else tol
    m, r = X.shape
    params = tuple(params)
    family = classical_family(kind, params, n, r)
    threshold = classical_threshold(kind, params, r)
    row_budget, col_budget = _budgets(kind, params, n, r)
    D = la.dependent_subset(X, mode, max_size=threshold)
    if D is None:
        return None
    zero, one = (ZERO, ONE) if mode.exact else (0.0, 1.0)
    Y = la.zeros((n, r), mode)
    Y2 = la.zeros((n, r), mode)
    if len(D) == 2:
        a, b = D
        p = la.entry_mask(X[:, [a]], mode)[:, 0].argmax()
        c = X[p, b] / X[p, a]
        if row_budget >= 2:
            # Y' = (1 + lam, 1 - lam / c) keeps the product; lam avoids the
            # values 0 and c - 1 at which it is a rescaled permutation of Y
            forbidden = {0, c - 1} if mode.exact else {0.0, complex(c) - 1}
            lam = 1
            while any(abs(complex(lam) - complex(f)) < 1e-9 for f in forbidden):
                lam += 1
            Y[0, a], Y[0, b] = one, one
            Y2[0, a], Y2[0, b] = one + lam, one - one * lam / c
        elif n >= 2 and col_budget >= 2:
            Y[0, a], Y[1, b] = one, one
            Y2[0, a], Y2[1, a] = one, c
        else:
            return None
    else:
        sub = X[:, list(D)]
        h = la.kernel_vector(sub, mode)
        if h is None:
            return None
        half = (len(D) + 1) // 2
        if half > row_budget or len(D) - half > row_budget:
            return None
        for t, idx in enumerate(D):
            if t < half:
                Y[0, idx] = h[t]
            else:
                Y2[0, idx] = -h[t]
    for M in (Y, Y2):
        if not family.covers(_support(M, mode)):
            return None
    cx = FactorCounterexample(FactorPair(X, Y), FactorPair(X, Y2))
    if not cx.verify(mode):
        return None
    return Y, Y2


# ----------------------------------------------------- randomized search

def _generator(seed, trial):
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    return np.random.Generator(np.random.Philox(key=np.array([seed, trial], dtype=np.uint64)))


def _greedy_member(family, rng):
    """A random maximal member of a sub-pattern closed family."""
    S = SupportMatrix(family.rows, family.cols, 0)
    for p in rng.permutation(family.rows * family.cols):
        i, j = divmod(int(p), family.cols)
        T = S | SupportMatrix.from_cells(family.rows, family.cols, [(i, j)])
        if family.contains(T):
            S = T
    return S


def _sampler(family, budget):
    if (isinstance(family, Product) and isinstance(family.left, Bounded)
            and isinstance(family.right, Bounded)):
        return lambda rng: (_greedy_member(family.left, rng), _greedy_member(family.right, rng))
    pairs = list(family.pairs(budget))
    return lambda rng: (lambda P: (P.left, P.right))(pairs[int(rng.integers(len(pairs)))])


def _masked_normal(rng, S):
    M = rng.standard_normal(S.shape) + 1j * rng.standard_normal(S.shape)
    return M * S.to_array()


def _solve_rows(A, T, S):
    """Rows W[j] supported on S.row(j) minimizing |A W[j]^T - T[:, j]|."""
    W = np.zeros(S.shape, dtype=complex)
    for j in range(S.rows):
        cols = S.row(j)
        if cols:
            W[j, cols] = np.linalg.lstsq(A[:, cols], T[:, j], rcond=None)[0]
    return W


def randomized_counterexample_search(pair, family, trials=1000, seed=0, tol=la.DEFAULT_TOL,
                                     max_iter=300, budget=None):
    """Alternating least squares from random starts on random supports.

    Returns the first alternative factor pair (by trial index) whose product
    matches and which is not equivalent to the input, or None.  Absence
    proves nothing.
    """
    base = FactorPair(la.to_float(pair.X), la.to_float(pair.Y))
    Z = base.product()
    znorm = max(np.abs(Z).max(), 1e-300)
    sample = _sampler(family, budget)
    loose = la.Tolerance(max(1e-6, tol.relative_eps))
    for trial in range(trials):
        rng = _generator(seed, trial)
        L, R = sample(rng)
        X2 = _masked_normal(rng, L)
        Y2 = None
        best = np.inf
        for it in range(max_iter):
            Y2 = _solve_rows(X2, Z, R)
            X2 = _solve_rows(Y2, Z.T, L)
            res = np.abs(X2 @ Y2.T - Z).max() / znorm
            if res <= tol.relative_eps:
                break
            if it % 50 == 49:
                if res > 0.5 * best:
                    break
                best = res
        alt = FactorPair(X2, Y2)
        scale = max(base.scale(), alt.scale())
        if not la.close(alt.product(), Z, tol.loosened(10), scale):
            continue
        if pairs_equivalent(base, alt, loose) is not None:
            continue
        if FactorCounterexample(base, alt).verify(tol):
            return alt
    return None
