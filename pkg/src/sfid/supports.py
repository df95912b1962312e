"""Binary support patterns, support families and their derived families.

A support is stored as an integer bit mask, cell ``(i, j)`` of an
``rows x cols`` pattern living at bit ``i * cols + j``.  Enumeration order
is lexicographic on the row-major bit string (first cell most significant,
zero before one), which is also the order of :attr:`SupportMatrix.key`.
Indices are zero-based throughout.
"""
import os
from itertools import permutations
from math import comb, prod

import numpy as np

from .errors import DimensionMismatch, EnumerationBudgetExceeded, PreconditionNotMet

DEFAULT_BUDGET = 10**6


def default_budget():
    value = os.environ.get("SFID_BUDGET")
    return int(value) if value else DEFAULT_BUDGET


class SupportMatrix:
    __slots__ = ("rows", "cols", "mask")

    def __init__(self, rows, cols, mask=0):
        rows, cols, mask = int(rows), int(cols), int(mask)
        if rows < 0 or cols < 0:
            raise DimensionMismatch("negative shape")
        if mask < 0 or mask >> (rows * cols):
            raise PreconditionNotMet("mask has bits outside the pattern")
        self.rows = rows
        self.cols = cols
        self.mask = mask

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise DimensionMismatch("support must be a matrix")
        rows, cols = arr.shape
        mask = 0
        for p, v in enumerate(arr.ravel()):
            if v:
                mask |= 1 << p
        return cls(rows, cols, mask)

    @classmethod
    def from_cells(cls, rows, cols, cells):
        mask = 0
        for i, j in cells:
            i, j = int(i), int(j)
            if not (0 <= i < rows and 0 <= j < cols):
                raise DimensionMismatch(f"cell {(i, j)} outside {rows}x{cols}")
            mask |= 1 << (i * cols + j)
        return cls(rows, cols, mask)

    @classmethod
    def product_set(cls, rows, cols, row_set, col_set):
        """The rank-one support row_set x col_set."""
        return cls.from_cells(rows, cols, [(i, j) for i in row_set for j in col_set])

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __eq__(self, other):
        if not isinstance(other, SupportMatrix):
            return NotImplemented
        return self.shape == other.shape and self.mask == other.mask

    def __hash__(self):
        return hash((self.rows, self.cols, self.mask))

    def __repr__(self):
        return f"SupportMatrix({self.rows}, {self.cols}, cells={list(self.cells)})"

    def __contains__(self, cell):
        i, j = cell
        return bool(self.mask >> (i * self.cols + j) & 1)

    def __len__(self):
        return self.mask.bit_count()

    def __or__(self, other):
        self._check(other)
        return SupportMatrix(self.rows, self.cols, self.mask | other.mask)

    def __and__(self, other):
        self._check(other)
        return SupportMatrix(self.rows, self.cols, self.mask & other.mask)

    def _check(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch(f"shapes differ: {self.shape} vs {other.shape}")

    def issubset(self, other):
        self._check(other)
        return self.mask & ~other.mask == 0

    def isdisjoint(self, other):
        self._check(other)
        return self.mask & other.mask == 0

    @property
    def cells(self):
        out = []
        m = self.mask
        while m:
            low = m & -m
            p = low.bit_length() - 1
            out.append(divmod(p, self.cols))
            m ^= low
        return tuple(out)

    @property
    def key(self):
        """Sort key realizing lexicographic order on the row-major bit string."""
        n = self.rows * self.cols
        return sum(1 << (n - 1 - p) for p in self._positions())

    def _positions(self):
        m = self.mask
        while m:
            low = m & -m
            yield low.bit_length() - 1
            m ^= low

    def to_array(self):
        arr = np.zeros(self.shape, dtype=int)
        for i, j in self.cells:
            arr[i, j] = 1
        return arr

    def column(self, j):
        return tuple(i for i in range(self.rows) if (i, j) in self)

    def row(self, i):
        return tuple(j for j in range(self.cols) if (i, j) in self)

    def column_mask(self, j):
        """Rows of column j as a bit mask."""
        return sum(1 << i for i in range(self.rows) if (i, j) in self)

    def row_mask(self, i):
        return (self.mask >> (i * self.cols)) & ((1 << self.cols) - 1)

    def colsupp(self):
        return tuple(j for j in range(self.cols) if self.column_mask(j))

    def restrict_columns(self, columns):
        columns = list(columns)
        return SupportMatrix.from_cells(
            self.rows, len(columns),
            [(i, k) for k, j in enumerate(columns) for i in self.column(j)])

    def permute_columns(self, perm):
        """Pattern whose column k is column perm[k] of this one."""
        return self.restrict_columns(perm)

    def is_rank_one(self):
        """True for empty patterns and for products of a row set and a column set."""
        if not self.mask:
            return True
        rows = {i for i, _ in self.cells}
        cols = {j for _, j in self.cells}
        return len(self) == len(rows) * len(cols)

    def row_and_column_sets(self):
        return (tuple(sorted({i for i, _ in self.cells})),
                tuple(sorted({j for _, j in self.cells})))


class SupportPair:
    """Left support (m x r) and right support (n x r) sharing r columns."""
    __slots__ = ("left", "right")

    def __init__(self, left, right):
        if left.cols != right.cols:
            raise DimensionMismatch("left and right supports need the same number of columns")
        self.left = left
        self.right = right

    @property
    def rank(self):
        return self.left.cols

    def __eq__(self, other):
        if not isinstance(other, SupportPair):
            return NotImplemented
        return self.left == other.left and self.right == other.right

    def __hash__(self):
        return hash((self.left, self.right))

    def __repr__(self):
        return f"SupportPair({self.left!r}, {self.right!r})"

    @property
    def key(self):
        return (self.left.key, self.right.key)

    def permute_columns(self, perm):
        return SupportPair(self.left.permute_columns(perm), self.right.permute_columns(perm))

    def covers(self, left, right):
        return left.issubset(self.left) and right.issubset(self.right)


def colsupp(S):
    return S.colsupp()


# ------------------------------------------------------------------ families

class SupportFamily:
    """Abstract family of supports with a common shape."""
    rows = 0
    cols = 0
    label = "family"

    @property
    def shape(self):
        return (self.rows, self.cols)

    def contains(self, S):
        raise NotImplementedError

    def covers(self, T):
        """True if some member contains the pattern T."""
        raise NotImplementedError

    def count(self):
        """(number of members or an upper bound, exactness flag)."""
        raise NotImplementedError

    def members(self, budget=None):
        raise NotImplementedError

    @property
    def downward_closed(self):
        return False

    def __contains__(self, S):
        return self.contains(S)


class Bounded(SupportFamily):
    """All patterns satisfying count bounds on the total, columns and rows.

    ``None`` means unbounded.  Every such family is closed under taking
    sub-patterns.
    """

    def __init__(self, rows, cols, total=None, col_caps=None, row_caps=None, label=None):
        self.rows = rows
        self.cols = cols
        for cap in ([total] + list(col_caps or []) + list(row_caps or [])):
            if cap is not None and cap < 0:
                raise PreconditionNotMet("sparsity bounds must be nonnegative")
        self.total = None if total is None or total >= rows * cols else total
        self.col_caps = None if col_caps is None else tuple(min(c, rows) for c in col_caps)
        self.row_caps = None if row_caps is None else tuple(min(c, cols) for c in row_caps)
        if self.col_caps is not None and len(self.col_caps) != cols:
            raise DimensionMismatch("one column cap per column expected")
        if self.row_caps is not None and len(self.row_caps) != rows:
            raise DimensionMismatch("one row cap per row expected")
        if self.col_caps is not None and all(c == rows for c in self.col_caps):
            self.col_caps = None
        if self.row_caps is not None and all(c == cols for c in self.row_caps):
            self.row_caps = None
        self.label = label or self._default_label()

    def _default_label(self):
        parts = []
        if self.total is not None:
            parts.append(f"total<={self.total}")
        if self.col_caps is not None:
            parts.append(f"columns<={list(self.col_caps)}")
        if self.row_caps is not None:
            parts.append(f"rows<={list(self.row_caps)}")
        return "bounded(" + ", ".join(parts) + ")"

    def __repr__(self):
        return f"{self.label} on {self.rows}x{self.cols}"

    def _ident(self):
        return (self.rows, self.cols, self.total, self.col_caps, self.row_caps)

    def __eq__(self, other):
        if not isinstance(other, Bounded):
            return NotImplemented
        return self._ident() == other._ident()

    def __hash__(self):
        return hash(self._ident())

    @property
    def downward_closed(self):
        return True

    def contains(self, S):
        if S.shape != self.shape:
            return False
        if self.total is not None and len(S) > self.total:
            return False
        if self.col_caps is not None:
            for j, cap in enumerate(self.col_caps):
                if S.column_mask(j).bit_count() > cap:
                    return False
        if self.row_caps is not None:
            for i, cap in enumerate(self.row_caps):
                if S.row_mask(i).bit_count() > cap:
                    return False
        return True

    covers = contains

    def count(self):
        n = self.rows * self.cols
        counts = []
        if self.total is not None:
            counts.append(sum(comb(n, t) for t in range(self.total + 1)))
        if self.col_caps is not None:
            counts.append(prod(sum(comb(self.rows, t) for t in range(c + 1)) for c in self.col_caps))
        if self.row_caps is not None:
            counts.append(prod(sum(comb(self.cols, t) for t in range(c + 1)) for c in self.row_caps))
        if not counts:
            return 2 ** n, True
        return min(counts), len(counts) == 1

    def members(self, budget=None):
        budget = default_budget() if budget is None else budget
        bound, exact = self.count()
        if exact and bound > budget:
            raise EnumerationBudgetExceeded(bound, budget)
        emitted = 0
        for mask in self._masks():
            emitted += 1
            if emitted > budget:
                raise EnumerationBudgetExceeded(f"more than {budget}", budget)
            yield SupportMatrix(self.rows, self.cols, mask)

    def _masks(self):
        rows, cols = self.rows, self.cols
        n = rows * cols
        total = n if self.total is None else self.total
        ccap = self.col_caps or (rows,) * cols
        rcap = self.row_caps or (cols,) * rows
        ccount = [0] * cols
        rcount = [0] * rows

        def rec(p, mask, used):
            if p == n:
                yield mask
                return
            i, j = divmod(p, cols)
            yield from rec(p + 1, mask, used)
            if used < total and ccount[j] < ccap[j] and rcount[i] < rcap[i]:
                ccount[j] += 1
                rcount[i] += 1
                yield from rec(p + 1, mask | (1 << p), used + 1)
                ccount[j] -= 1
                rcount[i] -= 1

        return rec(0, 0, 0)

    def restrict(self, columns):
        columns = list(columns)
        return Bounded(self.rows, len(columns), self.total,
                       None if self.col_caps is None else [self.col_caps[j] for j in columns],
                       self.row_caps)

    @property
    def kinds(self):
        return {name for name, v in (("total", self.total), ("col", self.col_caps),
                                     ("row", self.row_caps)) if v is not None}


class GlobalSparse(Bounded):
    def __init__(self, rows, cols, s):
        super().__init__(rows, cols, total=s, label=f"global:s={s}")
        self.param = s


class ColumnSparse(Bounded):
    def __init__(self, rows, cols, k):
        super().__init__(rows, cols, col_caps=[k] * cols, label=f"col:k={k}")
        self.param = k


class RowSparse(Bounded):
    def __init__(self, rows, cols, l):
        super().__init__(rows, cols, row_caps=[l] * rows, label=f"row:l={l}")
        self.param = l


class Regular(Bounded):
    def __init__(self, rows, cols, k):
        if rows != cols:
            raise DimensionMismatch("regular families are defined on square patterns")
        super().__init__(rows, cols, col_caps=[k] * cols, row_caps=[k] * rows,
                         label=f"regular:k={k}")
        self.param = k


class Enumerated(SupportFamily):
    """An explicit finite list of supports."""

    def __init__(self, rows, cols, members, label=None):
        self.rows = rows
        self.cols = cols
        uniq = set()
        for S in members:
            if S.shape != (rows, cols):
                raise DimensionMismatch(f"member of shape {S.shape} in a {rows}x{cols} family")
            uniq.add(S)
        self._members = tuple(sorted(uniq, key=lambda S: S.key))
        self.label = label or f"list({len(self._members)})"

    def __repr__(self):
        return f"Enumerated({self.rows}x{self.cols}, {len(self._members)} members)"

    def __eq__(self, other):
        if not isinstance(other, Enumerated):
            return NotImplemented
        return self.shape == other.shape and self._members == other._members

    def __hash__(self):
        return hash((self.shape, self._members))

    def __len__(self):
        return len(self._members)

    def contains(self, S):
        return S in set(self._members)

    def covers(self, T):
        return any(T.shape == S.shape and T.issubset(S) for S in self._members)

    def count(self):
        return len(self._members), True

    def members(self, budget=None):
        budget = default_budget() if budget is None else budget
        if len(self._members) > budget:
            raise EnumerationBudgetExceeded(len(self._members), budget)
        return iter(self._members)

    @property
    def downward_closed(self):
        present = set(self._members)
        for S in self._members:
            for p in S._positions():
                if SupportMatrix(S.rows, S.cols, S.mask & ~(1 << p)) not in present:
                    return False
        return True


class Intersection(Bounded):
    """Conjunction of bounded families (the bounds combine cap by cap)."""

    def __init__(self, families):
        families = list(families)
        if not families:
            raise PreconditionNotMet("empty intersection")
        rows, cols = families[0].shape
        total = None
        ccap = [rows] * cols
        rcap = [cols] * rows
        for F in families:
            if F.shape != (rows, cols):
                raise DimensionMismatch("intersected families need a common shape")
            if F.total is not None:
                total = F.total if total is None else min(total, F.total)
            if F.col_caps is not None:
                ccap = [min(a, b) for a, b in zip(ccap, F.col_caps)]
            if F.row_caps is not None:
                rcap = [min(a, b) for a, b in zip(rcap, F.row_caps)]
        label = "and:" + "+".join(F.label for F in families)
        super().__init__(rows, cols, total, ccap, rcap, label=label)


def intersect(*families, budget=None):
    """Intersection of families; explicit lists are filtered eagerly."""
    if all(isinstance(F, Bounded) for F in families):
        return Intersection(families)
    base = next(F for F in families if isinstance(F, Enumerated))
    keep = [S for S in base.members(budget) if all(F.contains(S) for F in families)]
    label = "and:" + "+".join(F.label for F in families)
    return Enumerated(base.rows, base.cols, keep, label=label)


def member(S, family):
    return family.contains(S)


def enumerate_family(family, budget=None):
    """Members in lexicographic order on the row-major bit string."""
    return family.members(budget)


def signature(family, columns, budget=None):
    """Family of members restricted to the given columns."""
    columns = list(columns)
    if isinstance(family, Bounded):
        return family.restrict(columns)
    return Enumerated(family.rows, len(columns),
                      [S.restrict_columns(columns) for S in family.members(budget)])


def fingerprint_of(S, partition):
    """Pattern whose column k is the union of the columns of S in block k."""
    cells = []
    for k, block in enumerate(partition):
        rows = 0
        for j in block:
            rows |= S.column_mask(j)
        cells.extend((i, k) for i in range(S.rows) if rows >> i & 1)
    return SupportMatrix.from_cells(S.rows, len(partition), cells)


def _check_partition(partition, cols):
    seen = sorted(j for block in partition for j in block)
    if seen != list(range(cols)) or any(len(b) == 0 for b in partition):
        raise PreconditionNotMet("blocks must be nonempty and partition the columns")


def fingerprint(family, partition, budget=None):
    """Family of block-union patterns of the members."""
    partition = [tuple(b) for b in partition]
    _check_partition(partition, family.cols)
    K = len(partition)
    if isinstance(family, Bounded):
        kinds = family.kinds
        if kinds <= {"total", "row"}:
            return Bounded(family.rows, K, family.total,
                           None, None if family.row_caps is None
                           else [min(c, K) for c in family.row_caps])
        if kinds == {"col"}:
            caps = [min(family.rows, sum(family.col_caps[j] for j in b)) for b in partition]
            return Bounded(family.rows, K, col_caps=caps)
    return Enumerated(family.rows, K,
                      [fingerprint_of(S, partition) for S in family.members(budget)])


def fingerprint_source(family, partition, target, budget=None):
    """A member of ``family`` whose block-union pattern equals ``target``."""
    partition = [tuple(b) for b in partition]
    if isinstance(family, Bounded):
        # put each target cell on a column of its block, spreading round robin
        cells = []
        for k, block in enumerate(partition):
            for t, i in enumerate(target.column(k)):
                cells.append((i, block[t % len(block)]))
        S = SupportMatrix.from_cells(family.rows, family.cols, cells)
        if family.contains(S) and fingerprint_of(S, partition) == target:
            return S
        cells = [(i, block[0]) for k, block in enumerate(partition) for i in target.column(k)]
        S = SupportMatrix.from_cells(family.rows, family.cols, cells)
        if family.contains(S):
            return S
    for S in family.members(budget):
        if fingerprint_of(S, partition) == target:
            return S
    return None


def completion(family, budget=None):
    """Downward closure: every sub-pattern of every member."""
    if family.downward_closed:
        return family
    budget = default_budget() if budget is None else budget
    members = list(family.members(budget))
    needed = sum(2 ** len(S) for S in members)
    if needed > budget:
        raise EnumerationBudgetExceeded(needed, budget)
    out = set()
    for S in members:
        positions = list(S._positions())
        for sub in range(1 << len(positions)):
            mask = 0
            for b, p in enumerate(positions):
                if sub >> b & 1:
                    mask |= 1 << p
            out.add(SupportMatrix(S.rows, S.cols, mask))
    return Enumerated(family.rows, family.cols, out, label=f"completion({family.label})")


# ------------------------------------------------------------- pair families

class PairFamily:
    """Abstract family of support pairs."""
    label = "pairs"

    def pairs(self, budget=None):
        raise NotImplementedError

    def contains(self, pair):
        raise NotImplementedError

    def covering_pairs(self, left, right, budget=None):
        """Members containing the given left and right patterns."""
        return (P for P in self.pairs(budget) if P.covers(left, right))

    def covers(self, left, right, budget=None):
        return next(self.covering_pairs(left, right, budget), None) is not None


class Product(PairFamily):
    def __init__(self, left, right):
        if left.cols != right.cols:
            raise DimensionMismatch("left and right families need the same number of columns")
        self.left = left
        self.right = right
        self.label = f"{left.label}::{right.label}"

    def __repr__(self):
        return f"Product({self.left!r}, {self.right!r})"

    def contains(self, pair):
        return self.left.contains(pair.left) and self.right.contains(pair.right)

    def count(self):
        a, ea = self.left.count()
        b, eb = self.right.count()
        return a * b, ea and eb

    def pairs(self, budget=None):
        budget = default_budget() if budget is None else budget
        total, exact = self.count()
        if exact and total > budget:
            raise EnumerationBudgetExceeded(total, budget)
        rights = list(self.right.members(budget))
        emitted = 0
        for L in self.left.members(budget):
            for R in rights:
                emitted += 1
                if emitted > budget:
                    raise EnumerationBudgetExceeded(f"more than {budget}", budget)
                yield SupportPair(L, R)

    def covering_pairs(self, left, right, budget=None):
        if not (self.left.covers(left) and self.right.covers(right)):
            return iter(())
        return super().covering_pairs(left, right, budget)

    def covers(self, left, right, budget=None):
        return self.left.covers(left) and self.right.covers(right)


class EnumeratedPairs(PairFamily):
    def __init__(self, pairs, label=None):
        uniq = set(pairs)
        if not uniq:
            raise PreconditionNotMet("empty pair family")
        shapes = {(P.left.shape, P.right.shape) for P in uniq}
        if len(shapes) != 1:
            raise DimensionMismatch("all pairs need the same shapes")
        self._pairs = tuple(sorted(uniq, key=lambda P: P.key))
        self.label = label or f"pairs({len(self._pairs)})"

    def __len__(self):
        return len(self._pairs)

    def contains(self, pair):
        return pair in set(self._pairs)

    def pairs(self, budget=None):
        budget = default_budget() if budget is None else budget
        if len(self._pairs) > budget:
            raise EnumerationBudgetExceeded(len(self._pairs), budget)
        return iter(self._pairs)

    @classmethod
    def permutation_closure(cls, pairs, label=None):
        pairs = list(pairs)
        r = pairs[0].rank
        out = {P.permute_columns(perm) for P in pairs for perm in permutations(range(r))}
        return cls(out, label)


def _adjacent_swaps(r):
    for k in range(r - 1):
        perm = list(range(r))
        perm[k], perm[k + 1] = perm[k + 1], perm[k]
        yield perm


def _family_stable(family, budget):
    if isinstance(family, Bounded):
        return family.col_caps is None or len(set(family.col_caps)) <= 1
    present = set(family.members(budget))
    return all(S.permute_columns(p) in present
               for S in present for p in _adjacent_swaps(family.cols))


def is_stable_by_permutation(pair_family, budget=None):
    """True if the family is closed under simultaneous column permutations.

    Closure under adjacent transpositions suffices since they generate the
    symmetric group.
    """
    if isinstance(pair_family, Product):
        if pair_family.left.count()[0] == 0 or pair_family.right.count()[0] == 0:
            return True
        return (_family_stable(pair_family.left, budget)
                and _family_stable(pair_family.right, budget))
    present = set(pair_family.pairs(budget))
    r = next(iter(present)).rank
    return all(P.permute_columns(p) in present for P in present for p in _adjacent_swaps(r))
