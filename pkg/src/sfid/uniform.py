"""Uniform identifiability: every factorization in a family, not one instance."""
from itertools import product as cartesian

import numpy as np

from . import linalg as la
from .checks import TAG_IC, TAG_MC, ic_counterexample, mc_counterexample, pattern, support_of
from .errors import DimensionMismatch, EnumerationBudgetExceeded, NotInSupport, \
    PreconditionNotMet
from .gaussian import ONE, ZERO
from .lifting import FactorPair, perfect_matching, phi_supports
from .oracle import classical_family, classical_threshold, construct_uniform_counterexample
from .supports import Bounded, Enumerated, Product, SupportMatrix, completion, default_budget, \
    fingerprint, fingerprint_source, signature
from .verdict import FactorCounterexample, TupleCounterexample, fails, holds, unknown

TAG_DISJOINT = "disjoint rank-one supports"
TAG_EQUAL_UNIONS = "equal-union completion tuples"
TAG_ZERO_COLUMNS = "zero-column reduction"
TAG_INJECTIVE = "block-sum injectivity"
TAG_CLASS_DISJOINT = "per-class disjoint columns"
TAG_CLASS_UNIONS = "per-class equal unions"
TAG_KRUSKAL = "Kruskal rank threshold"
TAG_FALLBACK = "side condition fallback"


def _pairwise_disjoint(supports):
    return all(supports[i].isdisjoint(supports[j])
               for i in range(len(supports)) for j in range(i + 1, len(supports)))


def uniform_emd_fixed_support(supports):
    """True if the rank-one supports are pairwise disjoint."""
    return _pairwise_disjoint(tuple(supports))


def s_uniqueness_fixed_support(pair, support_pair, tol=la.DEFAULT_TOL):
    """Uniqueness up to scaling on a support pair with disjoint rank-one supports."""
    L, R = support_pair.left, support_pair.right
    if L.shape != pair.X.shape or R.shape != pair.Y.shape:
        raise DimensionMismatch("support shapes do not match the factors")
    if not (support_of(pair.X, tol).issubset(L) and support_of(pair.Y, tol).issubset(R)):
        raise NotInSupport("factors are not supported on the given supports")
    if not uniform_emd_fixed_support(phi_supports(support_pair)):
        raise PreconditionNotMet("rank-one supports overlap")
    family = Product(Enumerated(*L.shape, [L]), Enumerated(*R.shape, [R]))

    def in_family(alt):
        return family.covers(support_of(alt.X, tol), support_of(alt.Y, tol))

    cx = la.colsupp(pair.X, tol)
    cy = la.colsupp(pair.Y, tol)
    if cx != cy:
        return fails(ic_counterexample(pair, tol), [TAG_IC], tol, in_family)
    if cx != L.colsupp() or cy != R.colsupp():
        return fails(mc_counterexample(pair, support_pair, tol), [TAG_MC], tol, in_family)
    return holds([TAG_DISJOINT, TAG_IC, TAG_MC], tol)


# --------------------------------------------------------- pair families

def _rectangles(S):
    """Every rank-one sub-support of a rank-one support, the empty one first."""
    rows, cols = S.row_and_column_sets()
    out = [SupportMatrix(S.rows, S.cols, 0)]
    for rmask in range(1, 1 << len(rows)):
        rsel = [rows[t] for t in range(len(rows)) if rmask >> t & 1]
        for cmask in range(1, 1 << len(cols)):
            csel = [cols[t] for t in range(len(cols)) if cmask >> t & 1]
            out.append(SupportMatrix.product_set(S.rows, S.cols, rsel, csel))
    return out


def _tuple_array(supports):
    r = len(supports)
    m, n = supports[0].shape
    C = np.zeros((r, m, n), dtype=complex)
    for k, S in enumerate(supports):
        C[k] = S.to_array()
    return C


def _tuple_in(supports):
    def check(alt):
        return all(SupportMatrix.from_array(np.abs(alt[k]) > 0).issubset(S)
                   for k, S in enumerate(supports))
    return check


def uniform_emd_family(family, tol=la.DEFAULT_TOL, budget=None):
    """Unique recovery of every rank-one tuple in the lifted pair family from its sum."""
    budget = default_budget() if budget is None else budget
    pairs = list(family.pairs(budget))
    lifted = [phi_supports(P) for P in pairs]
    for P, S in zip(pairs, lifted):
        for i in range(len(S)):
            for j in range(i + 1, len(S)):
                common = S[i] & S[j]
                if len(common):
                    cell = common.cells[0]
                    r = len(S)
                    m, n = S[0].shape
                    C = np.zeros((r, m, n), dtype=complex)
                    C2 = np.zeros((r, m, n), dtype=complex)
                    C[i][cell], C[j][cell] = 1, -1
                    C2[i][cell], C2[j][cell] = 2, -2
                    return fails(TupleCounterexample(C, C2), [TAG_DISJOINT], tol, _tuple_in(S),
                                 support_pair=P, members=[i, j], cell=list(cell))
    options = [[_rectangles(Si) for Si in S] for S in lifted]
    needed = sum(int(np.prod([len(o) for o in opts])) for opts in options)
    if needed > budget:
        raise EnumerationBudgetExceeded(needed, budget)
    seen = {}
    for P, S, opts in zip(pairs, lifted, options):
        for members in cartesian(*opts):
            union = 0
            for T in members:
                union |= T.mask
            key = tuple(sorted(T.mask for T in members))
            first = seen.setdefault(union, (key, members, S))
            if first[0] != key:
                C = _tuple_array(first[1])
                C2 = _tuple_array(members)
                return fails(TupleCounterexample(C, C2), [TAG_DISJOINT, TAG_EQUAL_UNIONS], tol,
                             _tuple_in(S), support_pair=P)
    return holds([TAG_DISJOINT, TAG_EQUAL_UNIONS], tol, completion_tuples=needed)


# ----------------------------------------------- right factor, uniformly

class _Uniform:
    def __init__(self, X, theta, tol, budget):
        self.X = X
        self.theta = theta
        self.tol = tol
        self.budget = budget
        self.mode = la.EXACT if la.is_exact_array(X) else tol
        self.n, self.r = theta.shape
        self.zero, self.one = (ZERO, ONE) if self.mode.exact else (0.0, 1.0)

    def in_family(self, alt):
        return la.close(alt.X, self.X, self.tol) and self.theta.covers(support_of(alt.Y, self.tol))

    def fail(self, Y, Y2, tags, **details):
        cx = FactorCounterexample(FactorPair(self.X, Y), FactorPair(self.X, Y2))
        return fails(cx, tags, self.tol, self.in_family, **details)

    def run(self):
        J = list(la.colsupp(self.X, self.tol))
        Jc = [i for i in range(self.r) if i not in J]
        for i in Jc:
            for p in range(self.n):
                if self.theta.covers(SupportMatrix.from_cells(self.n, self.r, [(p, i)])):
                    Y = la.zeros((self.n, self.r), self.mode)
                    Y[p, i] = self.one
                    return self.fail(Y, la.zeros((self.n, self.r), self.mode),
                                     [TAG_ZERO_COLUMNS], cell=[p, i])
        if not J:
            return holds([TAG_ZERO_COLUMNS], self.tol)
        self.J = J
        XJ = self.X[:, J]
        self.thetaJ = signature(self.theta, J, self.budget)
        Xn, self.scales = la.normalize_columns(XJ, self.tol)
        self.classes = la.collinearity_partition(Xn, self.tol)
        self.reps = Xn[:, [c[0] for c in self.classes]]
        verdict = self.injectivity()
        if verdict is not None:
            return verdict
        verdict = self.per_class()
        if verdict is not None:
            return verdict
        return holds([TAG_ZERO_COLUMNS, TAG_INJECTIVE, TAG_CLASS_DISJOINT, TAG_CLASS_UNIONS],
                     self.tol, classes=[list(c) for c in self.classes])

    def lift(self, Yn):
        """Undo the normalization and pad the zero columns of X."""
        Y = la.zeros((self.n, self.r), self.mode)
        for c, s in enumerate(self.scales):
            Y[:, self.J[c]] = Yn[:, c] * s
        return Y

    def distribute(self, Ybar, source):
        """Spread block sums over the columns of each class inside a member."""
        Yn = la.zeros((self.n, len(self.J)), self.mode)
        mask = la.entry_mask(Ybar, self.tol)
        for k, cls in enumerate(self.classes):
            for p in range(self.n):
                if mask[p, k]:
                    c = next(c for c in cls if (p, c) in source)
                    Yn[p, c] = Ybar[p, k]
        return Yn

    def split_witness(self, row, D, first, src_a=None, src_b=None):
        """Kernel vector on the dependent classes D split across two block-sum rows."""
        h = la.kernel_vector(self.reps[:, list(D)], self.tol)
        K = len(self.classes)
        A = la.zeros((self.n, K), self.mode)
        B = la.zeros((self.n, K), self.mode)
        for t, v in zip(D, h):
            if t in first:
                A[row, t] = v
            else:
                B[row, t] = -v
        Y = self.lift(self.distribute(A, src_a or self.source(A)))
        Y2 = self.lift(self.distribute(B, src_b or self.source(B)))
        return self.fail(Y, Y2, [TAG_ZERO_COLUMNS, TAG_INJECTIVE], row=row,
                         dependent_classes=list(D))

    def source(self, Ybar):
        target = SupportMatrix.from_array(la.entry_mask(Ybar, self.tol))
        return fingerprint_source(self.thetaJ, self.classes, target, self.budget)

    def injectivity(self):
        fp = fingerprint(self.thetaJ, self.classes, self.budget)
        K = len(self.classes)
        if isinstance(fp, Bounded):
            allowed = [k for k in range(K) if fp.col_caps is None or fp.col_caps[k] >= 1]
            for row in range(self.n):
                b = K
                if fp.row_caps is not None:
                    b = min(b, fp.row_caps[row])
                if fp.total is not None:
                    b = min(b, fp.total)
                need = min(2 * b, len(allowed))
                if need == 0:
                    continue
                sub = self.reps[:, allowed]
                if la.kruskal_rank(sub, self.tol) >= need:
                    continue
                D = [allowed[t] for t in la.dependent_subset(sub, self.tol, max_size=need)]
                half = set(D[:(len(D) + 1) // 2])
                return self.split_witness(row, D, half)
            return None
        members = list(fp.members(self.budget))
        for row in range(self.n):
            rowsets = sorted({S.row(row) for S in members})
            done = set()
            for a, T in enumerate(rowsets):
                for T2 in rowsets[a:]:
                    U = tuple(sorted(set(T) | set(T2)))
                    if U in done or not U:
                        continue
                    done.add(U)
                    if la.independent(self.reps[:, list(U)], self.tol):
                        continue
                    D = [U[t] for t in la.dependent_subset(self.reps[:, list(U)], self.tol)]
                    first = set(D) & set(T)
                    fa = next(S for S in members if S.row(row) == T)
                    fb = next(S for S in members if S.row(row) == T2)
                    sa = fingerprint_source(self.thetaJ, self.classes, fa, self.budget)
                    sb = fingerprint_source(self.thetaJ, self.classes, fb, self.budget)
                    return self.split_witness(row, D, first, sa, sb)
        return None

    def per_class(self):
        for k, cls in enumerate(self.classes):
            if len(cls) < 2:
                continue
            thetak = completion(signature(self.thetaJ, cls, self.budget), self.budget)
            seen = {}
            for S in thetak.members(self.budget):
                cols = [S.column_mask(a) for a in range(len(cls))]
                overlap = next(((a, b) for a in range(len(cls)) for b in range(a + 1, len(cls))
                                if cols[a] & cols[b]), None)
                if overlap is not None:
                    return self.overlap_witness(k, S, overlap)
                union = 0
                for c in cols:
                    union |= c
                key = tuple(sorted(cols))
                first = seen.setdefault(union, (key, S))
                if first[0] != key:
                    return self.class_witness(k, pattern(first[1], self.mode),
                                              pattern(S, self.mode), [TAG_CLASS_UNIONS])
        return None

    def overlap_witness(self, k, S, overlap):
        a, b = overlap
        common = S.column_mask(a) & S.column_mask(b)
        p = (common & -common).bit_length() - 1
        W = pattern(S, self.mode)
        for lam in range(1, 4 * S.cols ** 2 + 8):
            W2 = W.copy()
            W2[p, a] = W2[p, a] + lam
            W2[p, b] = W2[p, b] - lam
            if not _columns_permuted(W, W2, self.tol):
                return self.class_witness(k, W, W2, [TAG_CLASS_DISJOINT])
        return None

    def class_witness(self, k, W, W2, tags):
        Yn = la.zeros((self.n, len(self.J)), self.mode)
        Yn2 = la.zeros((self.n, len(self.J)), self.mode)
        for a, c in enumerate(self.classes[k]):
            Yn[:, c] = W[:, a]
            Yn2[:, c] = W2[:, a]
        return self.fail(self.lift(Yn), self.lift(Yn2), [TAG_ZERO_COLUMNS, TAG_INJECTIVE] + tags,
                         cls=list(self.classes[k]))


def _columns_permuted(A, B, tol):
    c = A.shape[1]
    scale = max(la.max_abs(la.to_float(A)), la.max_abs(la.to_float(B)))
    edges = np.zeros((c, c), dtype=bool)
    for i in range(c):
        for j in range(c):
            edges[i, j] = la.close(A[:, i], B[:, j], tol, scale)
    return perfect_matching(edges) is not None


def uniform_right_identifiability(X, theta, tol=la.DEFAULT_TOL, budget=None):
    """Is every Y in the family recovered from X Y^T up to equivalence?"""
    if X.shape[1] != theta.cols:
        raise DimensionMismatch(f"X has {X.shape[1]} columns, family has {theta.cols}")
    try:
        return _Uniform(X, theta, tol, budget).run()
    except EnumerationBudgetExceeded as exc:
        return unknown(["enumeration budget"], tol, str(exc))


# ------------------------------------------------------ classical kinds

def side_condition(kind, params, n):
    """Whether the Kruskal threshold characterizes the classical kind."""
    if any(p < 1 for p in params):
        return False
    if kind == "row":
        return n >= 2 or params[0] >= 2
    if kind == "col":
        return True
    if kind == "rowcol":
        return params[0] >= 2 or (n >= 2 and params[1] >= 2)
    if kind == "global":
        # with a single nonzero, duplicated columns are indistinguishable
        # yet interchangeable, so the threshold is not necessary
        return params[0] >= 2
    raise ValueError(f"unknown classical kind {kind!r}")


def uniform_right_classical(X, kind, params, n, tol=la.DEFAULT_TOL, budget=None):
    """Uniform right identifiability for a classical family via the Kruskal rank."""
    params = tuple(params)
    r = X.shape[1]
    family = classical_family(kind, params, n, r)
    if not side_condition(kind, params, n):
        v = uniform_right_identifiability(X, family, tol, budget)
        return type(v)(v.status, v.witness, (TAG_FALLBACK,) + v.provenance, v.tolerance,
                       dict(v.details, kind=kind, params=list(params)))
    krank = la.kruskal_rank(X, tol)
    threshold = classical_threshold(kind, params, r)
    details = {"kind": kind, "params": list(params), "krank": krank, "threshold": threshold}
    if krank >= threshold:
        return holds([TAG_KRUSKAL], tol, **details)
    built = construct_uniform_counterexample(X, kind, params, n, tol)
    if built is None:
        return unknown([TAG_KRUSKAL], tol, "no counterexample could be constructed", **details)
    Y, Y2 = built

    def in_family(alt):
        return la.close(alt.X, X, tol) and family.covers(support_of(alt.Y, tol))

    return fails(FactorCounterexample(FactorPair(X, Y), FactorPair(X, Y2)), [TAG_KRUSKAL], tol,
                 in_family, **details)
