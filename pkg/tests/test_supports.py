from math import comb
from itertools import permutations

import numpy as np
import pytest

from sfid.errors import DimensionMismatch, EnumerationBudgetExceeded, PreconditionNotMet
from sfid.supports import ColumnSparse, Enumerated, EnumeratedPairs, GlobalSparse, \
    Intersection, Product, Regular, RowSparse, SupportMatrix, SupportPair, colsupp, completion, \
    enumerate_family, fingerprint, fingerprint_of, fingerprint_source, intersect, \
    is_stable_by_permutation, member, signature

from conftest import supp


def test_colsupp_examples():
    assert colsupp(supp(np.eye(3))) == (0, 1, 2)
    assert colsupp(supp(np.zeros((2, 4)))) == ()
    assert colsupp(supp([[0, 1, 0], [0, 1, 0]])) == (1,)


def test_support_matrix_views_agree():
    S = supp([[1, 0, 1], [0, 1, 1]])
    assert len(S) == int(S.to_array().sum()) == 4
    assert S.cells == ((0, 0), (0, 2), (1, 1), (1, 2))
    assert SupportMatrix.from_cells(2, 3, S.cells) == S
    with pytest.raises(PreconditionNotMet):
        SupportMatrix.from_cells(2, 2, [(2, 0)])


def test_set_operations():
    A = supp([[1, 0], [0, 0]])
    B = supp([[1, 1], [0, 0]])
    assert A.issubset(B) and not B.issubset(A)
    assert (A | B) == B and (A & B) == A
    assert A.isdisjoint(supp([[0, 0], [1, 1]]))
    with pytest.raises(DimensionMismatch):
        A | supp([[1]])


def test_rank_one_patterns():
    assert supp([[1, 1], [1, 1]]).is_rank_one()
    assert supp([[1, 0], [0, 0]]).is_rank_one()
    assert supp([[0, 0], [0, 0]]).is_rank_one()
    assert not supp([[1, 0], [0, 1]]).is_rank_one()


def test_member_examples():
    assert member(supp(np.eye(3)), ColumnSparse(3, 3, 1))
    assert not member(supp(np.ones((2, 2))), GlobalSparse(2, 2, 3))
    for fam in (GlobalSparse(2, 3, 1), ColumnSparse(2, 3, 0), RowSparse(2, 3, 1), Regular(3, 3, 1)):
        assert member(SupportMatrix(*fam.shape), fam)


def test_classical_parameter_bounds():
    with pytest.raises(PreconditionNotMet):
        GlobalSparse(2, 2, -1)


def test_enumeration_examples():
    # lexicographic on the row-major bit string: 00 < 01 < 10
    assert [S.cells for S in enumerate_family(GlobalSparse(2, 1, 1))] == [(), ((1, 0),), ((0, 0),)]
    assert list(enumerate_family(ColumnSparse(3, 2, 0))) == [SupportMatrix(3, 2)]
    dup = Enumerated(1, 2, [supp([[1, 0]]), supp([[1, 0]]), supp([[0, 1]])])
    assert len(list(enumerate_family(dup))) == 2


@pytest.mark.parametrize("fam", [GlobalSparse(2, 3, 2), ColumnSparse(3, 2, 2), RowSparse(2, 3, 1),
                                 Regular(3, 3, 2),
                                 Intersection([RowSparse(3, 3, 2), ColumnSparse(3, 3, 1)])])
def test_enumeration_matches_predicate(fam):
    members = list(enumerate_family(fam))
    bound, exact = fam.count()
    assert len(members) == len(set(members))
    assert len(members) == bound if exact else len(members) <= bound
    keys = [S.key for S in members]
    assert keys == sorted(keys)
    everything = [SupportMatrix(fam.rows, fam.cols, mask) for mask in range(1 << fam.rows * fam.cols)]
    assert {S for S in everything if member(S, fam)} == set(members)


def test_global_count_is_sum_of_binomials():
    assert GlobalSparse(3, 3, 2).count() == (sum(comb(9, k) for k in range(3)), True)


def test_budget_guard():
    with pytest.raises(EnumerationBudgetExceeded):
        list(enumerate_family(GlobalSparse(5, 5, 12), budget=1000))


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("SFID_BUDGET", "10")
    with pytest.raises(EnumerationBudgetExceeded):
        list(enumerate_family(GlobalSparse(3, 3, 2)))


def test_signature_examples():
    theta = Enumerated(2, 2, [supp([[1, 0], [0, 1]])])
    assert set(signature(theta, [0]).members()) == {supp([[1], [0]])}
    assert set(signature(theta, [0, 1]).members()) == set(theta.members())
    assert signature(ColumnSparse(3, 4, 2), [1, 3]) == ColumnSparse(3, 2, 2)


def test_fingerprint_examples():
    theta = Enumerated(2, 2, [supp(np.eye(2))])
    assert set(fingerprint(theta, [[0, 1]]).members()) == {supp([[1], [1]])}
    assert set(fingerprint(theta, [[0], [1]]).members()) == set(theta.members())
    fp = fingerprint(ColumnSparse(4, 4, 1), [[0, 1], [2, 3]])
    assert fp == ColumnSparse(4, 2, 2)


@pytest.mark.parametrize("fam", [GlobalSparse(2, 3, 2), ColumnSparse(3, 3, 1), RowSparse(2, 4, 2),
                                 Intersection([RowSparse(2, 3, 1), GlobalSparse(2, 3, 2)])])
def test_fingerprint_closed_form_matches_enumeration(fam):
    for partition in ([[0, 1], [2]], [[0], [1, 2]], [[0, 2], [1]]):
        partition = [b for b in partition if all(j < fam.cols for j in b)]
        if sorted(j for b in partition for j in b) != list(range(fam.cols)):
            partition = partition + [[j] for j in range(3, fam.cols)]
        closed = set(fingerprint(fam, partition).members())
        brute = {fingerprint_of(S, partition) for S in fam.members()}
        assert closed == brute


def test_fingerprint_source_inverts():
    fam = GlobalSparse(2, 3, 2)
    part = [[0, 1], [2]]
    for T in fingerprint(fam, part).members():
        S = fingerprint_source(fam, part, T)
        assert fam.contains(S) and fingerprint_of(S, part) == T


def test_fingerprint_rejects_bad_partition():
    with pytest.raises(PreconditionNotMet):
        fingerprint(GlobalSparse(2, 3, 1), [[0, 1]])


def test_completion_examples():
    assert set(completion(Enumerated(1, 1, [supp([[1]])])).members()) == {supp([[1]]), supp([[0]])}
    assert completion(ColumnSparse(2, 2, 1)) == ColumnSparse(2, 2, 1)
    assert len(completion(Enumerated(2, 1, [supp([[1], [1]])]))) == 4


def test_intersect_combines_caps():
    fam = intersect(RowSparse(2, 3, 1), ColumnSparse(2, 3, 1))
    assert set(fam.members()) == {S for S in RowSparse(2, 3, 1).members() if ColumnSparse(2, 3, 1).contains(S)}
    listed = Enumerated(2, 2, [supp(np.eye(2)), supp(np.ones((2, 2)))])
    assert set(intersect(listed, GlobalSparse(2, 2, 2)).members()) == {supp(np.eye(2))}


def test_permutation_stability_examples():
    assert is_stable_by_permutation(Product(ColumnSparse(3, 3, 1), RowSparse(3, 3, 2)))
    asym = SupportPair(supp([[1, 0], [1, 0]]), supp([[1, 1], [0, 1]]))
    assert not is_stable_by_permutation(EnumeratedPairs([asym]))
    assert is_stable_by_permutation(EnumeratedPairs.permutation_closure([asym]))
    closure = EnumeratedPairs([asym.permute_columns(p) for p in permutations(range(2))])
    assert is_stable_by_permutation(closure)
    caps = Product(Intersection([ColumnSparse(2, 2, 1)]), ColumnSparse(2, 2, 2))
    assert is_stable_by_permutation(caps)


def test_product_pairs_and_covering():
    fam = Product(ColumnSparse(2, 2, 1), ColumnSparse(1, 2, 1))
    pairs = list(fam.pairs())
    assert len(pairs) == 9 * 4
    assert fam.covers(supp([[1, 0], [0, 0]]), supp([[1, 1]]))
    assert not fam.covers(supp([[1, 0], [1, 0]]), supp([[1, 1]]))
