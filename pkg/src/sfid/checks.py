"""Instance-level identifiability decisions.

Every decision returns a :class:`~sfid.verdict.Verdict`.  ``Fails`` always
carries a counterexample that has been re-verified: a second factor pair
(or rank-one tuple) with the same product that is not equivalent to the
input.
"""
import numpy as np

from . import linalg as la
from .gaussian import ONE, ZERO
from .errors import DimensionMismatch, EnumerationBudgetExceeded, NotInFamily, NotInSupport, NotStable
from .lifting import FactorPair, factor_from_rank_one, perfect_matching, phi, phi_supports, \
    sum_tuple, tuple_supports
from .supports import Bounded, Enumerated, Product, SupportMatrix, SupportPair, \
    fingerprint, fingerprint_of, fingerprint_source, is_stable_by_permutation, signature
from .verdict import FactorCounterexample, Status, TupleCounterexample, Verdict, fails, holds, \
    merge, unknown

TAG_IC = "identical column supports"
TAG_MC = "maximal column supports"
TAG_CONTAINMENT = "column-support containment"
TAG_ZERO_COLUMNS = "zero-column reduction"
TAG_NORMALIZE = "first-entry normalization"
TAG_BLOCK_SUMS = "block-sum injectivity"
TAG_BLOCK_PERM = "per-class permutation uniqueness"
TAG_DISJOINT = "disjoint rank-one supports"
TAG_CHAIN = "two-term overlap closure"
TAG_NC_SPAN = "shared-span disjointness"
TAG_NC_INDEP = "per-row independence"
TAG_SUPPORT_ID = "support identifiability"
TAG_BUDGET = "enumeration budget"
TAG_SEARCH = "randomized search"


def support_of(M, tol=la.DEFAULT_TOL):
    return SupportMatrix.from_array(la.entry_mask(M, tol))


def pattern(S, tol=la.DEFAULT_TOL):
    """Matrix with ones on the support S."""
    out = la.zeros(S.shape, tol)
    for cell in S.cells:
        out[cell] = _one(tol)
    return out


def _mode(pair, tol):
    return la.EXACT if pair.exact else tol


def _zero(pair):
    return ZERO if pair.exact else 0.0


def _one(mode):
    return ONE if mode.exact else 1.0


def _in_pair_family(family, tol):
    def check(alt):
        return family.covers(support_of(alt.X, tol), support_of(alt.Y, tol))
    return check


# --------------------------------------------------- column support checks

def in_IC(pair, tol=la.DEFAULT_TOL):
    """True if X and Y have the same nonzero columns."""
    return la.colsupp(pair.X, tol) == la.colsupp(pair.Y, tol)


def ic_counterexample(pair, tol=la.DEFAULT_TOL):
    """Drop a column that is nonzero on one side only; the product is unchanged."""
    cx = set(la.colsupp(pair.X, tol))
    cy = set(la.colsupp(pair.Y, tol))
    for i in range(pair.rank):
        if i in cy and i not in cx:
            Y2 = pair.Y.copy()
            Y2[:, i] = _zero(pair)
            return FactorCounterexample(pair, FactorPair(pair.X, Y2))
        if i in cx and i not in cy:
            X2 = pair.X.copy()
            X2[:, i] = _zero(pair)
            return FactorCounterexample(pair, FactorPair(X2, pair.Y))
    return None


def mc_counterexample(pair, support_pair, tol=la.DEFAULT_TOL):
    """Fill a column allowed by the support but zero in the factor.

    The opposite column must vanish for the product to stay the same; when
    it does not, the identical-column-support counterexample applies.
    """
    mode = _mode(pair, tol)
    cx = set(la.colsupp(pair.X, tol))
    cy = set(la.colsupp(pair.Y, tol))
    L, R = support_pair.left, support_pair.right
    for i in L.colsupp():
        if i not in cx:
            if i in cy:
                return ic_counterexample(pair, tol)
            X2 = pair.X.copy()
            X2[:, i] = pattern(L, mode)[:, i]
            return FactorCounterexample(pair, FactorPair(X2, pair.Y))
    for i in R.colsupp():
        if i not in cy:
            if i in cx:
                return ic_counterexample(pair, tol)
            Y2 = pair.Y.copy()
            Y2[:, i] = pattern(R, mode)[:, i]
            return FactorCounterexample(pair, FactorPair(pair.X, Y2))
    return None


def mc_violation(pair, family, tol=la.DEFAULT_TOL, budget=None):
    """A member containing the supports of (X, Y) with more nonzero columns, or None."""
    sx = support_of(pair.X, tol)
    sy = support_of(pair.Y, tol)
    cx = sx.colsupp()
    cy = sy.colsupp()
    if isinstance(family, Product) and family.left.downward_closed and family.right.downward_closed:
        # enough to try adding a single cell in a zero column
        for side, base, fam in (("left", sx, family.left), ("right", sy, family.right)):
            cs = base.colsupp()
            for i in range(base.cols):
                if i in cs:
                    continue
                for p in range(base.rows):
                    grown = base | SupportMatrix.from_cells(base.rows, base.cols, [(p, i)])
                    if fam.covers(grown):
                        if side == "left" and family.right.covers(sy):
                            return SupportPair(grown, sy)
                        if side == "right" and family.left.covers(sx):
                            return SupportPair(sx, grown)
        return None
    for P in family.covering_pairs(sx, sy, budget):
        if P.left.colsupp() != cx or P.right.colsupp() != cy:
            return P
    return None


def in_MC(pair, family, tol=la.DEFAULT_TOL, budget=None):
    try:
        P = mc_violation(pair, family, tol, budget)
    except EnumerationBudgetExceeded as exc:
        return unknown([TAG_MC, TAG_BUDGET], tol, str(exc))
    if P is None:
        return holds([TAG_MC], tol)
    return fails(mc_counterexample(pair, P, tol), [TAG_MC], tol, _in_pair_family(family, tol),
                 support_pair=P)


# ------------------------------------------------ right identifiability

class _RightProblem:
    """Right factor recovery with X fixed, Y constrained to a support family."""

    def __init__(self, pair, theta, tol, budget):
        self.pair = pair
        self.X = pair.X
        self.Y = pair.Y
        self.theta = theta
        self.tol = tol
        self.budget = budget
        self.mode = _mode(pair, tol)
        self.n, self.r = self.Y.shape
        self.Z = pair.product()
        self._span = {}

    def in_family(self, alt):
        return (la.close(alt.X, self.X, self.tol)
                and self.theta.covers(support_of(alt.Y, self.tol)))

    def fail(self, Y2, tags, **details):
        cx = FactorCounterexample(self.pair, FactorPair(self.X, Y2))
        return fails(cx, tags, self.tol, self.in_family, **details)

    def spans(self, A, key, j, cols):
        """Column j of the product lies in the span of the selected columns of A."""
        k = (key, j, cols)
        if k not in self._span:
            self._span[k] = la.in_span(self.Z[:, j], A[:, list(cols)], self.mode)
        return self._span[k]

    def solve_rows(self, A, rows_of, width):
        """Matrix W (n x width) with A W^T equal to the product, W supported on rows_of(j)."""
        W = la.zeros((self.n, width), self.mode)
        for j in range(self.n):
            cols = list(rows_of(j))
            if not cols:
                continue
            x, _ = la.solve_affine(A[:, cols], self.Z[:, j], self.mode)
            for c, v in zip(cols, x):
                W[j, c] = v
        return W

    # ---------------------------------------------------------------- steps

    def run(self):
        J = la.colsupp(self.X, self.tol)
        Jc = [i for i in range(self.r) if i not in J]
        ycols = set(la.colsupp(self.Y, self.tol))
        for i in Jc:
            if i in ycols:
                Y2 = self.Y.copy()
                Y2[:, i] = _zero(self.pair)
                return self.fail(Y2, [TAG_CONTAINMENT], column=i)
        if Jc:
            verdict = self.mass_outside(J, Jc)
            if verdict is not None:
                return verdict
        if not J:
            return holds([TAG_CONTAINMENT, TAG_ZERO_COLUMNS], self.tol)
        return self.reduced(list(J))

    def mass_outside(self, J, Jc):
        """Look for a solution putting mass on a column where X vanishes."""
        sy = support_of(self.Y, self.tol)
        for i in Jc:
            for p in range(self.n):
                grown = sy | SupportMatrix.from_cells(self.n, self.r, [(p, i)])
                if self.theta.covers(grown):
                    Y2 = self.Y.copy()
                    Y2[p, i] = _one(self.mode)
                    return self.fail(Y2, [TAG_ZERO_COLUMNS], cell=(p, i))
        XJ = self.X[:, J]
        jc = set(Jc)
        for S in self.theta.members(self.budget):
            outside = [c for c in S.cells if c[1] in jc]
            if not outside:
                continue
            SJ = S.restrict_columns(J)
            if all(self.spans(XJ, "J", j, SJ.row(j)) for j in range(self.n)):
                WJ = self.solve_rows(XJ, SJ.row, len(J))
                Y2 = la.zeros((self.n, self.r), self.mode)
                Y2[:, J] = WJ
                Y2[outside[0]] = _one(self.mode)
                return self.fail(Y2, [TAG_ZERO_COLUMNS], cell=outside[0])
        return None

    def reduced(self, J):
        tol, mode = self.tol, self.mode
        XJ = self.X[:, J]
        YJ = self.Y[:, J]
        thetaJ = signature(self.theta, J, self.budget)
        Xn, scales = la.normalize_columns(XJ, tol)
        Yn = YJ.copy()
        for c, s in enumerate(scales):
            Yn[:, c] = YJ[:, c] / s
        classes = la.collinearity_partition(Xn, tol)
        reps = Xn[:, [c[0] for c in classes]]
        K = len(classes)
        Ybar = la.zeros((self.n, K), mode)
        for k, cls in enumerate(classes):
            for c in cls:
                Ybar[:, k] = Ybar[:, k] + Yn[:, c]
        sbar = self._bar_support(Ybar, Yn)

        def lift(Yn2):
            Y2 = la.zeros((self.n, self.r), mode)
            for c, s in enumerate(scales):
                Y2[:, J[c]] = Yn2[:, c] * s
            return Y2

        def distribute(Ybar2, St):
            S = fingerprint_source(thetaJ, classes, St, self.budget)
            Yn2 = la.zeros((self.n, len(J)), mode)
            for k, cls in enumerate(classes):
                for p in St.column(k):
                    c = next(c for c in cls if (p, c) in S)
                    Yn2[p, c] = Ybar2[p, k]
            return Yn2

        # block sums must be recovered uniquely from the product
        fp = fingerprint(thetaJ, classes, self.budget)
        indep = {}
        for St in fp.members(self.budget):
            if sbar.issubset(St):
                for j in range(self.n):
                    T = St.row(j)
                    if T not in indep:
                        indep[T] = la.independent(reps[:, list(T)], tol)
                    if not indep[T]:
                        h = la.kernel_vector(reps[:, list(T)], tol)
                        Ybar2 = Ybar.copy()
                        for t, v in zip(T, h):
                            Ybar2[j, t] = Ybar2[j, t] + v
                        Y2 = lift(distribute(Ybar2, St))
                        return self.fail(Y2, [TAG_NORMALIZE, TAG_BLOCK_SUMS], row=j,
                                         dependent_classes=list(T))
            elif all(self.spans(reps, "bar", j, St.row(j)) for j in range(self.n)):
                Ybar2 = self.solve_rows(reps, St.row, K)
                Y2 = lift(distribute(Ybar2, St))
                return self.fail(Y2, [TAG_NORMALIZE, TAG_BLOCK_SUMS], support=St.cells)

        # each class must be recovered up to permutation from its block sums
        if all(len(c) == 1 for c in classes):
            return holds([TAG_CONTAINMENT, TAG_ZERO_COLUMNS, TAG_NORMALIZE, TAG_BLOCK_SUMS,
                          TAG_BLOCK_PERM], tol, classes=[list(c) for c in classes])
        scale = la.max_abs(la.to_float(Yn))
        for S in thetaJ.members(self.budget):
            if not sbar.issubset(fingerprint_of(S, classes)):
                continue
            for k, cls in enumerate(classes):
                if len(cls) < 2:
                    continue
                W = self._class_alternative(S, classes, k, Ybar, Yn, sbar, scale)
                if W is None:
                    continue
                Yn2 = la.zeros((self.n, len(J)), mode)
                for k2, cls2 in enumerate(classes):
                    if k2 == k:
                        for a, c in enumerate(cls2):
                            Yn2[:, c] = W[:, a]
                    else:
                        for p in sbar.column(k2):
                            c = next(c for c in cls2 if (p, c) in S)
                            Yn2[p, c] = Ybar[p, k2]
                return self.fail(lift(Yn2), [TAG_NORMALIZE, TAG_BLOCK_PERM], cls=list(cls),
                                 support=S.cells)
        return holds([TAG_CONTAINMENT, TAG_ZERO_COLUMNS, TAG_NORMALIZE, TAG_BLOCK_SUMS,
                      TAG_BLOCK_PERM], tol, classes=[list(c) for c in classes])

    def _bar_support(self, Ybar, Yn):
        if la.is_exact_array(Ybar):
            return support_of(Ybar, self.tol)
        scale = la.max_abs(Yn)
        return SupportMatrix.from_array(np.abs(Ybar) > self.tol.relative_eps * scale)

    def _class_alternative(self, S, classes, k, Ybar, Yn, sbar, scale):
        """Block for class k inside S with the same row sums but not a column permutation."""
        cls = classes[k]
        T = S.restrict_columns(cls)
        Yk = Yn[:, list(cls)]
        rows = sbar.column(k)
        c = len(cls)
        base = la.zeros((self.n, c), self.mode)
        for p in rows:
            a = next(a for a in range(c) if (p, a) in T)
            base[p, a] = Ybar[p, k]
        overlap = None
        for a in range(c):
            for b in range(a + 1, c):
                common = T.column_mask(a) & T.column_mask(b)
                if common:
                    overlap = ((common & -common).bit_length() - 1, a, b)
                    break
            if overlap:
                break
        if overlap is None:
            return None if self._block_perm_equal(base, Yk, scale) else base
        p, a, b = overlap
        for lam in range(1, 4 * c * c + 8):
            W = base.copy()
            W[p, a] = W[p, a] + lam
            W[p, b] = W[p, b] - lam
            if not self._block_perm_equal(W, Yk, scale):
                return W
        return None

    def _block_perm_equal(self, A, B, scale):
        c = A.shape[1]
        edges = np.zeros((c, c), dtype=bool)
        for i in range(c):
            for j in range(c):
                edges[i, j] = la.close(B[:, i], A[:, j], self.tol, scale)
        return perfect_matching(edges) is not None


def check_right_identifiability(pair, theta, tol=la.DEFAULT_TOL, budget=None):
    """Is Y recovered from X Y^T, up to equivalence, among right factors in theta?"""
    if theta.shape != pair.Y.shape:
        raise DimensionMismatch(f"family shape {theta.shape} does not match Y {pair.Y.shape}")
    if not theta.covers(support_of(pair.Y, tol)):
        raise NotInFamily("Y is not supported on a member of the family")
    try:
        return _RightProblem(pair, theta, tol, budget).run()
    except EnumerationBudgetExceeded as exc:
        return unknown([TAG_BUDGET], tol, str(exc))


def _transpose_counterexample(cx):
    if cx is None:
        return None
    o, a = cx.original, cx.alternative
    return FactorCounterexample(FactorPair(o.Y, o.X), FactorPair(a.Y, a.X))


# ------------------------------------------------------- fixed support

def flop_model(m, n, r):
    """Operation count model for evaluating the fixed-support conditions."""
    return r * (r - 1) / 2 * (n + m) + m * (n * r**2 - r**3 / 3) + n * (m * r**2 - r**3 / 3)


def _classes_of(M, tol):
    """Collinearity classes among the nonzero columns (original indices)."""
    nz = list(la.colsupp(M, tol))
    if not nz:
        return [], None
    Mn, _ = la.normalize_columns(M[:, nz], tol)
    classes = [tuple(nz[c] for c in cls) for cls in la.collinearity_partition(Mn, tol)]
    reps = Mn[:, [nz.index(cls[0]) for cls in classes]]
    return classes, reps


def _chain_closure(pair, S, tol):
    """Two contributions whose supports overlap but each keeps a private part."""
    if pair.rank != 2:
        return False
    for X, Y, L, R in ((pair.X, pair.Y, S.left, S.right), (pair.Y, pair.X, S.right, S.left)):
        c0, c1 = set(R.column(0)), set(R.column(1))
        if not (c0 & c1):
            continue
        mask = la.entry_mask(Y, tol)
        own0 = any(mask[p, 0] for p in c0 - c1)
        own1 = any(mask[p, 1] for p in c1 - c0)
        if own0 and own1 and la.independent(X, tol):
            return True
    return False


def check_fixed_support_nc(pair, support_pair, tol=la.DEFAULT_TOL, closure=True):
    """Uniqueness of (X, Y) among factor pairs supported on one fixed support pair."""
    L, R = support_pair.left, support_pair.right
    if L.shape != pair.X.shape or R.shape != pair.Y.shape:
        raise DimensionMismatch("support shapes do not match the factors")
    if not (support_of(pair.X, tol).issubset(L) and support_of(pair.Y, tol).issubset(R)):
        raise NotInSupport("factors are not supported on the given supports")
    m, r = pair.X.shape
    n = pair.Y.shape[0]
    family = Product(Enumerated(m, r, [L]), Enumerated(n, r, [R]))
    in_family = _in_pair_family(family, tol)
    details = {"flop_model": flop_model(m, n, r)}

    cx = la.colsupp(pair.X, tol)
    cy = la.colsupp(pair.Y, tol)
    if cx != cy:
        return fails(ic_counterexample(pair, tol), [TAG_IC], tol, in_family, **details)
    if cx != L.colsupp() or cy != R.colsupp():
        return fails(mc_counterexample(pair, support_pair, tol), [TAG_MC], tol, in_family,
                     **details)

    rank_one = phi_supports(support_pair)
    violations = []
    tests = 0
    for X, side, supp in ((pair.X, "right", R), (pair.Y, "left", L)):
        classes, reps = _classes_of(X, tol)
        for cls in classes:
            for a in range(len(cls)):
                for b in range(a + 1, len(cls)):
                    i, j = cls[a], cls[b]
                    if not rank_one[i].isdisjoint(rank_one[j]):
                        violations.append({"condition": TAG_NC_SPAN, "side": side,
                                           "columns": [i, j]})
        for row in range(supp.rows):
            hit = [k for k, cls in enumerate(classes) if any((row, c) in supp for c in cls)]
            tests += 1
            if hit and not la.independent(reps[:, hit], tol):
                violations.append({"condition": TAG_NC_INDEP, "side": side, "row": row,
                                   "classes": hit})
    details["independence_tests"] = tests
    if violations:
        details["violations"] = violations
        tags = sorted({v["condition"] for v in violations})
        if any(v["side"] == "right" for v in violations):
            sub = check_right_identifiability(pair, Enumerated(n, r, [R]), tol)
            witness = sub.witness
        else:
            sub = check_right_identifiability(FactorPair(pair.Y, pair.X), Enumerated(m, r, [L]), tol)
            witness = _transpose_counterexample(sub.witness)
        if sub.fails:
            return fails(witness, tags, tol, in_family, **details)
        return unknown(tags, tol, "violated condition without a verified counterexample",
                       **details)
    if closure:
        if all(rank_one[i].isdisjoint(rank_one[j]) for i in range(r) for j in range(i + 1, r)):
            return holds([TAG_IC, TAG_MC, TAG_DISJOINT], tol, **details)
        if _chain_closure(pair, support_pair, tol):
            return holds([TAG_IC, TAG_MC, TAG_NC_SPAN, TAG_NC_INDEP, TAG_CHAIN], tol, **details)
    return unknown([TAG_NC_SPAN, TAG_NC_INDEP], tol, "necessary conditions hold", **details)


# ------------------------------------------------- support identifiability

def _multiset(supports):
    return sorted(S.mask for S in supports)


def check_support_identifiability_sc(C, family, tol=la.DEFAULT_TOL, budget=None):
    """Sufficient test that the rank-one supports of C are determined by their sum.

    Requires every lifted member of the family to have pairwise disjoint
    rank-one supports; otherwise the answer is Unknown.  Under that
    assumption any other partition of the support of the sum into rank-one
    blocks yields an explicit alternative tuple.
    """
    Z = sum_tuple(C)
    zmask = SupportMatrix.from_array(la.entry_mask(Z, tol))
    mine = _multiset(tuple_supports(C, tol))
    pairs = list(family.pairs(budget))
    lifted = [phi_supports(P) for P in pairs]
    for P, S in zip(pairs, lifted):
        if any(not S[i].isdisjoint(S[j]) for i in range(len(S)) for j in range(i + 1, len(S))):
            return unknown([TAG_SUPPORT_ID], tol, "overlapping rank-one supports in the family",
                           support_pair=P)
    exact = la.is_exact_array(C)
    for P, S in zip(pairs, lifted):
        union = SupportMatrix(zmask.rows, zmask.cols, 0)
        for Si in S:
            union = union | Si
        if not zmask.issubset(union):
            continue
        parts = [Si & zmask for Si in S]
        if not all(p.is_rank_one() for p in parts):
            continue
        if not all(la.rank_at_most_one_on(Z, p.cells, tol) for p in parts):
            continue
        if _multiset(parts) == mine:
            continue
        alt = np.empty(C.shape, dtype=C.dtype)
        for k, p in enumerate(parts):
            block = la.zeros(Z.shape, la.EXACT if exact else tol)
            for cell in p.cells:
                block[cell] = Z[cell]
            alt[k] = block
        return fails(TupleCounterexample(C, alt), [TAG_SUPPORT_ID], tol, support_pair=P)
    return holds([TAG_SUPPORT_ID], tol)


def _tuple_to_pair(C, tol):
    r, m, n = C.shape
    exact = la.is_exact_array(C)
    mode = la.EXACT if exact else tol
    X = la.zeros((m, r), mode)
    Y = la.zeros((n, r), mode)
    for i in range(r):
        x, y = factor_from_rank_one(C[i], mode)
        X[:, i] = x
        Y[:, i] = y
    return FactorPair(X, Y)


# --------------------------------------------------------- instance level

def _maximal(pairs):
    pairs = list(pairs)
    out = []
    for P in pairs:
        if not any(Q != P and P.left.issubset(Q.left) and P.right.issubset(Q.right) for Q in pairs):
            out.append(P)
    return out


def check_instance_ps_uniqueness(pair, family, tol=la.DEFAULT_TOL, budget=None,
                                 search_trials=0, seed=0):
    """Uniqueness of (X, Y) up to scaling and permutation in a pair family."""
    if not is_stable_by_permutation(family, budget):
        raise NotStable("the pair family is not stable under column permutations")
    sx = support_of(pair.X, tol)
    sy = support_of(pair.Y, tol)
    if not family.covers(sx, sy, budget):
        raise NotInFamily("(X, Y) is not supported on a member of the family")
    in_family = _in_pair_family(family, tol)
    if not in_IC(pair, tol):
        return fails(ic_counterexample(pair, tol), [TAG_IC], tol, in_family)
    mc = in_MC(pair, family, tol, budget)
    if not mc.holds:
        return mc
    try:
        C = phi(pair)
        sc = check_support_identifiability_sc(C, family, tol, budget)
        covering = _maximal(family.covering_pairs(sx, sy, budget))
    except EnumerationBudgetExceeded as exc:
        return _maybe_search(pair, family, tol, search_trials, seed,
                             unknown([TAG_BUDGET], tol, str(exc)))
    fixed = [check_fixed_support_nc(pair, P, tol) for P in covering]
    failing = next((v for v in fixed if v.fails), None)
    if failing is not None:
        return fails(failing.witness, (TAG_IC, TAG_MC) + failing.provenance, tol, in_family)
    if sc.fails:
        alt = _tuple_to_pair(sc.witness.alternative, tol)
        witness = FactorCounterexample(pair, alt)
        return fails(witness, (TAG_IC, TAG_MC, TAG_SUPPORT_ID), tol, in_family)
    verdict = merge([holds([TAG_IC, TAG_MC], tol), sc] + fixed)
    if verdict.holds:
        return Verdict(Status.HOLDS, None, verdict.provenance, tol,
                       {"support_pairs_checked": len(covering)})
    return _maybe_search(pair, family, tol, search_trials, seed, verdict)


def _maybe_search(pair, family, tol, trials, seed, verdict):
    if trials <= 0:
        return verdict
    from .oracle import randomized_counterexample_search
    found = randomized_counterexample_search(pair, family, trials, seed, tol)
    if found is None:
        return verdict
    return fails(FactorCounterexample(pair, found), verdict.provenance + (TAG_SEARCH,), tol,
                 _in_pair_family(family, tol), seed=seed)
