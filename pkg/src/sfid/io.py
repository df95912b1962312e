"""Text formats: complex CSV matrices, 0/1 support files and family specs.

Matrix entries are written ``a+bi``, ``a-bi``, ``a`` or ``bi`` with ``a`` and
``b`` decimal or scientific literals.  Exact mode additionally accepts
rationals ``p/q`` for either part so that every Gaussian rational survives a
round trip.
"""
import json
import os
import re
from fractions import Fraction

import numpy as np

from .errors import ParseError, PreconditionNotMet
from .gaussian import GaussianRational
from .supports import ColumnSparse, Enumerated, GlobalSparse, Product, Regular, RowSparse, \
    SupportMatrix, intersect

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?"
_ENTRY = re.compile(
    rf"^(?P<re>[+-]?{_NUM})?(?:(?P<im>[+-]?(?:{_NUM})?)i)?$")


def _number(text, exact):
    if exact:
        if "/" in text:
            num, den = text.split("/")
            return Fraction(num) / Fraction(den)
        return Fraction(text)
    if "/" in text:
        num, den = text.split("/")
        return float(num) / float(den)
    return float(text)


def parse_entry(text, exact=False):
    """Parse one matrix entry; raises ValueError on malformed input."""
    s = text.strip()
    m = _ENTRY.match(s)
    if not s or m is None or (m.group("re") is None and m.group("im") is None):
        raise ValueError(f"malformed complex literal {text!r}")
    re_part, im_part = m.group("re"), m.group("im")
    if re_part is not None and im_part == "":
        # a lone imaginary literal such as "2i" or "-3.5i"
        re_part, im_part = None, re_part
    if im_part in ("", "+", "-"):
        im_part += "1"
    try:
        a = _number(re_part, exact) if re_part is not None else 0
        b = _number(im_part, exact) if im_part is not None else 0
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"malformed complex literal {text!r}") from None
    if exact:
        return GaussianRational(a, b)
    return complex(a, b)


def _format_real(x):
    if isinstance(x, Fraction):
        return str(x)
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def format_entry(v):
    """Inverse of :func:`parse_entry`."""
    if isinstance(v, GaussianRational):
        a, b = v.re, v.im
    else:
        c = complex(v)
        a, b = c.real + 0.0, c.imag + 0.0
    if b == 0:
        return _format_real(a)
    im = _format_real(b)
    im = {"1": "", "-1": "-"}.get(im, im)
    if a == 0:
        return f"{im}i"
    sign = "" if im.startswith("-") else "+"
    return f"{_format_real(a)}{sign}{im}i"


def format_matrix(M):
    return "\n".join(",".join(format_entry(v) for v in row) for row in M) + "\n"


def _rows(text, path):
    """Nonblank lines as (line number, [(column, cell text)])."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            out.append((lineno, None))
            continue
        cells = []
        col = 1
        for cell in line.split(","):
            cells.append((col + len(cell) - len(cell.lstrip()), cell))
            col += len(cell) + 1
        out.append((lineno, cells))
    return out


def parse_matrix(text, exact=False, path="<string>"):
    rows = []
    width = None
    for lineno, cells in _rows(text, path):
        if cells is None:
            continue
        row = []
        for col, cell in cells:
            try:
                row.append(parse_entry(cell, exact))
            except ValueError as exc:
                raise ParseError(str(exc), path, lineno, col) from None
        if width is not None and len(row) != width:
            raise ParseError(f"expected {width} entries, found {len(row)}", path, lineno, 1)
        width = len(row)
        rows.append(row)
    if not rows:
        raise ParseError("empty matrix", path, 1, 1)
    out = np.empty((len(rows), width), dtype=object if exact else complex)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            out[i, j] = v
    return out


def read_matrix(path, exact=False):
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read(), exact, path)


def write_matrix(path, M):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix(M))


def _support_blocks(text, path):
    """0/1 grids separated by blank lines."""
    blocks, current, width = [], [], None
    for lineno, cells in _rows(text, path) + [(None, None)]:
        if cells is None:
            if current:
                blocks.append(current)
            current, width = [], None
            continue
        row = []
        for col, cell in cells:
            v = cell.strip()
            if v not in ("0", "1"):
                raise ParseError(f"support entries must be 0 or 1, found {v!r}", path, lineno, col)
            row.append(v == "1")
        if width is not None and len(row) != width:
            raise ParseError(f"expected {width} entries, found {len(row)}", path, lineno, 1)
        width = len(row)
        current.append(row)
    return [SupportMatrix.from_array(np.array(b, dtype=bool)) for b in blocks]


def parse_support(text, path="<string>"):
    blocks = _support_blocks(text, path)
    if len(blocks) != 1:
        raise ParseError(f"expected one support, found {len(blocks)}", path, 1, 1)
    return blocks[0]


def read_support(path):
    with open(path, encoding="utf-8") as fh:
        return parse_support(fh.read(), path)


def read_support_tuple(path):
    """Several supports of one shape in a file, separated by blank lines."""
    with open(path, encoding="utf-8") as fh:
        blocks = _support_blocks(fh.read(), path)
    if len({S.shape for S in blocks}) > 1:
        raise ParseError("supports in a tuple must share one shape", path, 1, 1)
    return tuple(blocks)


def format_support(S):
    return "\n".join(",".join("1" if b else "0" for b in row) for row in S.to_array()) + "\n"


# ----------------------------------------------------------------- families

_CLASSICAL = {"global": ("s", GlobalSparse), "col": ("k", ColumnSparse),
              "row": ("l", RowSparse), "regular": ("k", Regular)}


def parse_family(spec, rows, cols, base_dir="."):
    """Support family on rows x cols from a spec such as ``col:k=2``."""
    spec = spec.strip()
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise ParseError(f"family spec {spec!r} lacks a ':'", "<family>", 1, 1)
    if kind == "and":
        parts = rest.split("+")
        if len(parts) < 2:
            raise ParseError("'and:' needs two or more specs joined by '+'", "<family>", 1, 5)
        return intersect(*[parse_family(p, rows, cols, base_dir) for p in parts])
    if kind == "list":
        path = os.path.join(base_dir, rest)
        try:
            with open(path, encoding="utf-8") as fh:
                paths = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, path, exc.lineno, exc.colno) from None
        if not isinstance(paths, list) or not all(isinstance(p, str) for p in paths):
            raise ParseError("expected a JSON array of CSV paths", path, 1, 1)
        here = os.path.dirname(path)
        members = [read_support(os.path.join(here, p)) for p in paths]
        try:
            return Enumerated(rows, cols, members, label=spec)
        except PreconditionNotMet as exc:
            raise ParseError(str(exc), path, 1, 1) from None
    if kind not in _CLASSICAL:
        raise ParseError(f"unknown family kind {kind!r}", "<family>", 1, 1)
    name, cls = _CLASSICAL[kind]
    key, eq, value = rest.partition("=")
    if key != name or not eq or not value.isdigit():
        raise ParseError(f"expected '{kind}:{name}=<int>', got {spec!r}", "<family>", 1,
                         len(kind) + 2)
    try:
        return cls(rows, cols, int(value))
    except PreconditionNotMet as exc:
        raise ParseError(str(exc), "<family>", 1, 1) from None


def parse_pair_family(spec, left_shape, right_shape, base_dir="."):
    """Product family from ``<left spec>::<right spec>``."""
    left, sep, right = spec.partition("::")
    if not sep:
        raise ParseError(f"pair family spec {spec!r} lacks '::'", "<family>", 1, 1)
    return Product(parse_family(left, *left_shape, base_dir),
                   parse_family(right, *right_shape, base_dir))
