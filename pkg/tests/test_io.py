import json

import numpy as np
import pytest

from sfid.errors import ParseError
from sfid.gaussian import GaussianRational as G
from sfid.io import format_entry, format_matrix, parse_entry, parse_family, parse_matrix, \
    parse_pair_family, parse_support, read_support_tuple
from sfid.supports import ColumnSparse, Enumerated, GlobalSparse, Intersection, Product, Regular, \
    RowSparse

from conftest import supp


@pytest.mark.parametrize("text,value", [("1+2i", 1 + 2j), ("1-2i", 1 - 2j), ("3", 3), ("2i", 2j),
                                        ("-i", -1j), ("1e-3+2.5E2i", 0.001 + 250j),
                                        (" -0.5 ", -0.5), ("1/4-i", 0.25 - 1j)])
def test_parse_entry(text, value):
    assert parse_entry(text) == value
    assert complex(parse_entry(text, exact=True)) == value


@pytest.mark.parametrize("text", ["1+2j", "", "i2", "1+", "1 2", "2ii", "1+-2i", "nan", "1/0"])
def test_parse_entry_rejects(text):
    with pytest.raises(ValueError):
        parse_entry(text)


def test_entry_round_trip():
    for v in (0, 1.5, -2j, 1e-300 + 3j, 0.1 + 0.2j, complex(np.pi, -np.e)):
        assert parse_entry(format_entry(v)) == v
    for v in (G("1/3", "-2/7"), G(0, "5/2"), G(-1)):
        assert parse_entry(format_entry(v), exact=True) == v


def test_parse_matrix_reports_location():
    with pytest.raises(ParseError) as info:
        parse_matrix("1,2\n3, 4+1j\n", path="m.csv")
    assert (info.value.path, info.value.line, info.value.column) == ("m.csv", 2, 4)
    with pytest.raises(ParseError) as info:
        parse_matrix("1,2\n3\n", path="m.csv")
    assert info.value.line == 2
    with pytest.raises(ParseError):
        parse_matrix("\n\n")


def test_matrix_round_trip(rng):
    M = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    assert np.array_equal(parse_matrix(format_matrix(M)), M)


def test_support_files(tmp_path):
    assert parse_support("1,0\n0,1\n") == supp(np.eye(2))
    with pytest.raises(ParseError) as info:
        parse_support("1,2\n", path="s.csv")
    assert info.value.column == 3
    path = tmp_path / "tuple.csv"
    path.write_text("1,0\n0,0\n\n0,1\n0,1\n")
    assert read_support_tuple(str(path)) == (supp([[1, 0], [0, 0]]), supp([[0, 1], [0, 1]]))


def test_family_specs(tmp_path):
    assert parse_family("global:s=2", 2, 3) == GlobalSparse(2, 3, 2)
    assert parse_family("col:k=1", 2, 3) == ColumnSparse(2, 3, 1)
    assert parse_family("row:l=1", 2, 3) == RowSparse(2, 3, 1)
    assert parse_family("regular:k=1", 3, 3) == Regular(3, 3, 1)
    both = parse_family("and:row:l=1+col:k=1", 2, 3)
    assert isinstance(both, Intersection)
    (tmp_path / "a.csv").write_text("1,0\n")
    (tmp_path / "b.csv").write_text("0,1\n")
    (tmp_path / "list.json").write_text(json.dumps(["a.csv", "b.csv"]))
    listed = parse_family(f"list:{tmp_path / 'list.json'}", 1, 2)
    assert isinstance(listed, Enumerated) and len(listed) == 2
    for bad in ("global", "global:k=2", "col:k=x", "weird:s=1", "and:col:k=1"):
        with pytest.raises(ParseError):
            parse_family(bad, 2, 2)


def test_pair_family_spec():
    fam = parse_pair_family("col:k=1::row:l=2", (3, 2), (4, 2))
    assert isinstance(fam, Product)
    assert fam.left == ColumnSparse(3, 2, 1) and fam.right == RowSparse(4, 2, 2)
    with pytest.raises(ParseError):
        parse_pair_family("col:k=1", (3, 2), (4, 2))
