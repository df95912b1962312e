import numpy as np
import pytest

from sfid import linalg as la
from sfid.errors import PreconditionNotMet
from sfid.lifting import FactorPair, phi_supports
from sfid.oracle import construct_uniform_counterexample
from sfid.supports import ColumnSparse, Enumerated, EnumeratedPairs, GlobalSparse, Product, \
    RowSparse, SupportMatrix, SupportPair
from sfid.uniform import s_uniqueness_fixed_support, side_condition, uniform_emd_family, \
    uniform_emd_fixed_support, uniform_right_classical, uniform_right_identifiability
from sfid.verdict import FactorCounterexample, Status

from conftest import assert_factor_witness, exact, supp

E = la.EXACT
I2 = supp(np.eye(2))
TWO_TERM = SupportPair(supp([[1, 1], [1, 1]]), supp([[1, 0], [1, 1], [0, 1]]))


# --------------------------------------------------------- fixed supports

def test_emd_fixed_support_examples():
    assert uniform_emd_fixed_support(phi_supports(SupportPair(I2, I2)))
    assert not uniform_emd_fixed_support(phi_supports(TWO_TERM))
    empty = SupportMatrix(2, 2, 0)
    assert uniform_emd_fixed_support([supp([[1, 0], [0, 0]]), empty, supp([[0, 0], [0, 1]])])
    assert uniform_emd_fixed_support([])


def test_s_uniqueness_examples():
    P = SupportPair(I2, I2)
    assert s_uniqueness_fixed_support(FactorPair(exact([[2, 0], [0, 3]]), exact([[1, 0], [0, 5]])),
                                      P, E).holds
    # zero column where the support allows a nonzero one
    v = s_uniqueness_fixed_support(FactorPair(exact([[2, 0], [0, 0]]), exact([[1, 0], [0, 0]])),
                                   P, E)
    assert v.fails and "maximal column supports" in v.provenance
    assert_factor_witness(v.witness)
    v = s_uniqueness_fixed_support(FactorPair(exact([[2, 0], [0, 1]]), exact([[1, 0], [0, 0]])),
                                   P, E)
    assert v.fails and "identical column supports" in v.provenance
    assert_factor_witness(v.witness)


def test_s_uniqueness_rejects_overlap():
    pair = FactorPair(exact([[1, 2], [3, 5]]), exact([[1, 0], [2, 3], [0, 1]]))
    with pytest.raises(PreconditionNotMet):
        s_uniqueness_fixed_support(pair, TWO_TERM, E)


# ---------------------------------------------------------- pair families

def test_emd_family_single_disjoint_pair_holds():
    v = uniform_emd_family(Product(Enumerated(2, 2, [I2]), Enumerated(2, 2, [I2])))
    assert v.holds
    assert v.details["completion_tuples"] == 4


def test_emd_family_overlap_fails():
    fam = Product(Enumerated(2, 2, [TWO_TERM.left]), Enumerated(3, 2, [TWO_TERM.right]))
    assert uniform_emd_family(fam).fails


def test_emd_family_two_tilings_fail():
    # the 2x2 block tiled by rows or by columns
    by_rows = SupportPair(I2, supp([[1, 1], [1, 1]]))
    by_cols = SupportPair(supp([[1, 1], [1, 1]]), I2)
    v = uniform_emd_family(EnumeratedPairs([by_rows, by_cols]))
    assert v.fails
    C, C2 = v.witness.original, v.witness.alternative
    assert np.array_equal(C.sum(axis=0), C2.sum(axis=0))


# ------------------------------------------------------ right, uniformly

def test_uniform_identity_holds():
    assert uniform_right_identifiability(exact(np.eye(3, dtype=int)), ColumnSparse(2, 3, 2),
                                         E).holds


def test_uniform_duplicated_columns_row_sparse_fails():
    X = exact([[1, 1, 0], [0, 0, 1]])
    v = uniform_right_identifiability(X, RowSparse(2, 3, 1), E)
    assert v.fails
    assert_factor_witness(v.witness)


def test_uniform_zero_column_fails():
    v = uniform_right_identifiability(exact([[1, 0], [0, 0]]), GlobalSparse(2, 2, 1), E)
    assert v.fails and v.provenance == ("zero-column reduction",)
    assert_factor_witness(v.witness)


# ------------------------------------------------------ classical kinds

def test_classical_identity_row_sparse_holds():
    v = uniform_right_classical(exact(np.eye(4, dtype=int)), "row", (1,), 2, E)
    assert v.holds
    assert v.details["krank"] == 4 and v.details["threshold"] == 2


def test_classical_column_sparse_deficient_fails():
    v = uniform_right_classical(exact([[1, 0, 1], [0, 1, 1]]), "col", (1,), 2, E)
    assert v.fails
    assert v.details["krank"] == 2 and v.details["threshold"] == 3
    assert_factor_witness(v.witness)


def test_classical_global_one_sparse_duplicated_column_falls_back():
    # a single nonzero per Y cannot tell the copies apart, but swapping them
    # is a permutation fixing X, so recovery still holds
    v = uniform_right_classical(exact([[1, 1], [2, 2]]), "global", (1,), 2, E)
    assert v.holds
    assert v.provenance[0] == "side condition fallback"


def test_side_conditions():
    assert side_condition("row", (1,), 2) and not side_condition("row", (1,), 1)
    assert side_condition("row", (2,), 1)
    assert side_condition("col", (1,), 1)
    assert side_condition("rowcol", (2, 1), 1)
    assert side_condition("rowcol", (1, 2), 2) and not side_condition("rowcol", (1, 1), 2)
    assert side_condition("global", (2,), 1) and not side_condition("global", (1,), 2)


# ------------------------------------------------------ the constructor

def test_kernel_split_counterexample():
    Y, Y2 = construct_uniform_counterexample(exact([[1, 0, 1], [0, 1, 1]]), "global", (2,), 1, E)
    assert [str(v) for v in Y.ravel()] == ["1", "1", "0"]
    assert [str(v) for v in Y2.ravel()] == ["0", "0", "1"]


def test_constructor_absent_at_full_krank():
    assert construct_uniform_counterexample(exact(np.eye(3, dtype=int)), "global", (2,), 1,
                                            E) is None


def test_constructor_duplicated_columns_row_sparse():
    X = exact([[1, 1, 0], [0, 0, 1], [2, 2, 1]])
    Y, Y2 = construct_uniform_counterexample(X, "row", (2,), 2, E)
    assert np.array_equal(X @ Y.T, X @ Y2.T)
    assert_factor_witness(FactorCounterexample(FactorPair(X, Y), FactorPair(X, Y2)))
