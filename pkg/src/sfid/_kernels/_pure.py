"""Pure-Python kernels over Gaussian integers (unbounded ints)."""
from itertools import combinations


def _exact_div(xr, xi, pr, pi):
    # x / p in Z[i], the division is known to be exact
    norm = pr * pr + pi * pi
    nr = xr * pr + xi * pi
    ni = xi * pr - xr * pi
    return nr // norm, ni // norm


def _rank_rows(a, ncols):
    rows = len(a)
    rank = 0
    prr, pri = 1, 0
    for col in range(ncols):
        piv = -1
        for i in range(rank, rows):
            if a[i][col][0] or a[i][col][1]:
                piv = i
                break
        if piv < 0:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        kr, ki = a[rank][col]
        prow = a[rank]
        for i in range(rank + 1, rows):
            row = a[i]
            qr, qi = row[col]
            if not (qr or qi):
                # Bareiss update with a zero multiplier is a plain rescale
                for j in range(col + 1, ncols):
                    xr, xi = row[j]
                    row[j] = _exact_div(kr * xr - ki * xi, kr * xi + ki * xr, prr, pri)
            else:
                for j in range(col + 1, ncols):
                    xr, xi = row[j]
                    yr, yi = prow[j]
                    nr = (kr * xr - ki * xi) - (qr * yr - qi * yi)
                    ni = (kr * xi + ki * xr) - (qr * yi + qi * yr)
                    row[j] = _exact_div(nr, ni, prr, pri)
            row[col] = (0, 0)
        prr, pri = kr, ki
        rank += 1
        if rank == rows:
            break
    return rank


def gauss_int_rank(re, im):
    """Rank of re + i*im, both given as nested integer sequences."""
    rows = len(re)
    if rows == 0:
        return 0
    ncols = len(re[0])
    a = [[(int(re[i][j]), int(im[i][j])) for j in range(ncols)] for i in range(rows)]
    return _rank_rows(a, ncols)


def gauss_int_kruskal(re, im):
    """Kruskal rank of re + i*im by exhaustive subset enumeration."""
    rows = len(re)
    ncols = len(re[0]) if rows else 0
    if ncols == 0:
        return 0
    entries = [[(int(re[i][j]), int(im[i][j])) for j in range(ncols)] for i in range(rows)]
    top = min(rows, ncols)
    for size in range(1, top + 1):
        for subset in combinations(range(ncols), size):
            a = [[row[j] for j in subset] for row in entries]
            if _rank_rows(a, size) < size:
                return size - 1
    return top
