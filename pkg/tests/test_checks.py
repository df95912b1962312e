import numpy as np
import pytest

from sfid import linalg as la
from sfid.checks import check_fixed_support_nc, check_instance_ps_uniqueness, \
    check_right_identifiability, check_support_identifiability_sc, flop_model, in_IC, in_MC, \
    mc_violation
from sfid.errors import NotInFamily, NotInSupport, NotStable
from sfid.lifting import FactorPair, phi
from sfid.oracle import UNIQUE, oracle_right_identifiability
from sfid.supports import ColumnSparse, Enumerated, GlobalSparse, Product, RowSparse, \
    SupportPair
from sfid.verdict import Status

from conftest import assert_factor_witness, exact, supp

E = la.EXACT


def _pair(X, Y):
    return FactorPair(exact(X), exact(Y))


# ------------------------------------------------------------- IC and MC

def test_in_IC_examples():
    assert in_IC(_pair([[1, 0], [0, 1]], [[1, 0], [0, 1]]), E)
    assert not in_IC(_pair([[1, 0], [0, 1]], [[1, 0], [0, 0]]), E)
    # a column zero on both sides is fine
    assert in_IC(_pair([[1, 0], [1, 0]], [[2, 0]]), E)


def test_in_MC_full_support_holds():
    fam = Product(GlobalSparse(2, 2, 4), GlobalSparse(2, 2, 4))
    assert in_MC(_pair([[1, 2], [3, 4]], [[1, 1], [0, 1]]), fam, E).holds


def test_in_MC_zero_column_with_room_fails():
    # X has one nonzero cell; with s >= m a cell in the zero column fits
    pair = _pair([[1, 0], [0, 0]], [[1, 0], [1, 0]])
    fam = Product(GlobalSparse(2, 2, 2), GlobalSparse(2, 2, 4))
    P = mc_violation(pair, fam, E)
    assert P == SupportPair(supp([[1, 1], [0, 0]]), supp([[1, 0], [1, 0]]))
    v = in_MC(pair, fam, E)
    assert v.fails
    assert_factor_witness(v.witness)


def test_in_MC_zero_column_without_room_holds():
    pair = _pair([[1, 0], [2, 0]], [[1, 0], [1, 0]])
    fam = Product(GlobalSparse(2, 2, 2), GlobalSparse(2, 2, 2))
    assert in_MC(pair, fam, E).holds


# -------------------------------------------------- right identifiability

def test_identity_holds():
    pair = _pair(np.eye(3).astype(int), [[1, 2, 3], [4, 5, 6]])
    v = check_right_identifiability(pair, ColumnSparse(2, 3, 2), E)
    assert v.status is Status.HOLDS


def test_duplicated_column_two_sparse_fails():
    pair = _pair([[1, 1]], [[2, 5]])
    v = check_right_identifiability(pair, GlobalSparse(1, 2, 2), E)
    assert v.fails
    assert_factor_witness(v.witness)
    assert [str(z) for z in v.witness.alternative.Y.ravel()] == ["0", "7"]


def test_duplicated_column_one_sparse_holds():
    # Y = [z, 0] under a one-cell cap: any other Y' moves the mass, a permutation
    pair = _pair([[1, 1]], [[3, 0]])
    assert check_right_identifiability(pair, GlobalSparse(1, 2, 1), E).holds


def test_duplicated_column_column_sparse_fails():
    # one nonzero per column allows Y' = [a, b] with a + b = 3
    pair = _pair([[1, 1]], [[3, 0]])
    v = check_right_identifiability(pair, ColumnSparse(1, 2, 1), E)
    assert v.fails
    assert_factor_witness(v.witness)


def test_mass_on_zero_column_of_X_fails():
    # X = [1, 0]: Y may put anything in the second column
    pair = _pair([[1, 0]], [[1, 0]])
    v = check_right_identifiability(pair, GlobalSparse(1, 2, 2), E)
    assert v.fails
    assert_factor_witness(v.witness)
    assert oracle_right_identifiability(pair, GlobalSparse(1, 2, 2)).verdict != UNIQUE


def test_collinear_class_with_dependent_third_column_holds():
    # X = [v, v, w] and Y = [a, 0, b] with a two-cell cap: the oracle says unique
    pair = _pair([[1, 1, 0], [0, 0, 1]], [[2, 0, 3]])
    theta = GlobalSparse(1, 3, 2)
    assert check_right_identifiability(pair, theta, E).holds
    assert oracle_right_identifiability(pair, theta).verdict == UNIQUE


def test_right_identifiability_float_mode():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((4, 3))
    Y = np.array([[1.0, 0, 0], [0, 2.0, 0]])
    v = check_right_identifiability(FactorPair(X, Y), ColumnSparse(2, 3, 1))
    assert v.holds


def test_right_identifiability_rejects_nonmember():
    with pytest.raises(NotInFamily):
        check_right_identifiability(_pair([[1, 1]], [[1, 1]]), GlobalSparse(1, 2, 1), E)


# ------------------------------------------------- fixed support pairs

SL = supp([[1, 1], [1, 1]])
SR = supp([[1, 0], [1, 1], [0, 1]])
TWO_TERM = SupportPair(SL, SR)


def test_two_term_generic_holds_only_with_closure():
    pair = _pair([[1, 2], [3, 5]], [[1, 0], [2, 3], [0, 1]])
    assert check_fixed_support_nc(pair, TWO_TERM, E, closure=False).status is Status.UNKNOWN
    v = check_fixed_support_nc(pair, TWO_TERM, E)
    assert v.holds
    assert "two-term overlap closure" in v.provenance


def test_two_term_collinear_fails():
    pair = _pair([[1, 2], [3, 6]], [[1, 0], [2, 3], [0, 1]])
    v = check_fixed_support_nc(pair, TWO_TERM, E)
    assert v.fails
    assert_factor_witness(v.witness)


def test_fixed_support_disjoint_holds():
    I = supp(np.eye(2))
    v = check_fixed_support_nc(_pair([[1, 0], [0, 1]], [[1, 0], [0, 1]]), SupportPair(I, I), E)
    assert v.holds
    assert v.details["flop_model"] == flop_model(2, 2, 2)


def test_fixed_support_rejects_outside_support():
    I = supp(np.eye(2))
    with pytest.raises(NotInSupport):
        check_fixed_support_nc(_pair([[1, 1], [0, 1]], [[1, 0], [0, 1]]), SupportPair(I, I), E)


# ------------------------------------------------ support identifiability

ANTI = supp([[0, 1], [1, 0]])
DIAG = supp([[1, 0], [0, 1]])
DISJOINT = Product(Enumerated(2, 2, [DIAG, ANTI]), Enumerated(2, 2, [DIAG, ANTI]))


def test_sc_disjoint_family_holds():
    C = phi(_pair([[1, 0], [0, 1]], [[1, 0], [0, 1]]))
    assert check_support_identifiability_sc(C, DISJOINT, E).holds


def test_sc_overlapping_family_unknown():
    C = phi(_pair([[1, 0], [0, 1]], [[1, 0], [0, 1]]))
    fam = Product(ColumnSparse(2, 2, 1), ColumnSparse(2, 2, 1))
    assert check_support_identifiability_sc(C, fam, E).status is Status.UNKNOWN


def test_sc_finds_other_partition():
    # Z = ones(2,2) as one term, or split into its two rows
    col = supp([[1, 0], [1, 0]])
    fam = Product(Enumerated(2, 2, [col, DIAG]), Enumerated(2, 2, [col, supp([[1, 1], [1, 1]])]))
    C = phi(_pair([[1, 0], [1, 0]], [[1, 0], [1, 0]]))
    v = check_support_identifiability_sc(C, fam, E)
    assert v.fails
    alt = v.witness.alternative
    assert np.array_equal(alt[0] + alt[1], C[0] + C[1])
    assert [str(z) for z in alt[0].ravel()] == ["1", "1", "0", "0"]


# --------------------------------------------------------- instance level

def test_instance_identity_holds():
    v = check_instance_ps_uniqueness(_pair([[1, 0], [0, 1]], [[1, 0], [0, 1]]), DISJOINT, E)
    assert v.holds


def test_instance_ic_violation_fails():
    fam = Product(ColumnSparse(2, 2, 2), ColumnSparse(2, 2, 2))
    v = check_instance_ps_uniqueness(_pair([[1, 0], [0, 1]], [[1, 0], [0, 0]]), fam, E)
    assert v.fails and v.provenance == ("identical column supports",)
    assert_factor_witness(v.witness)


def test_instance_mc_violation_fails():
    fam = Product(ColumnSparse(2, 2, 2), ColumnSparse(2, 2, 2))
    v = check_instance_ps_uniqueness(_pair([[1, 0], [1, 0]], [[1, 0], [1, 0]]), fam, E)
    assert v.fails and v.provenance == ("maximal column supports",)
    assert_factor_witness(v.witness)


def test_instance_requires_stable_family():
    fam = Product(Enumerated(2, 2, [DIAG]), Enumerated(2, 2, [DIAG]))
    with pytest.raises(NotStable):
        check_instance_ps_uniqueness(_pair([[1, 0], [0, 1]], [[1, 0], [0, 1]]), fam, E)


def test_instance_requires_membership():
    fam = Product(RowSparse(2, 2, 1), RowSparse(2, 2, 1))
    with pytest.raises(NotInFamily):
        check_instance_ps_uniqueness(_pair([[1, 1], [0, 1]], [[1, 0], [0, 1]]), fam, E)
