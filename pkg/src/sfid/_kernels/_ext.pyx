# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels over Gaussian integers.

Entries are kept below 2**31 in magnitude so every intermediate fits in a
128-bit integer; anything larger raises OverflowError and the caller falls
back to the pure-Python kernels.
"""
import numpy as np
cimport numpy as cnp

cdef extern from *:
    ctypedef long long i128 "__int128"

cdef long long LIMIT = 2147483647


cdef inline int _div(i128 xr, i128 xi, long long pr, long long pi,
                     long long* outr, long long* outi) nogil:
    cdef i128 norm = <i128>pr * pr + <i128>pi * pi
    cdef i128 nr = xr * pr + xi * pi
    cdef i128 ni = xi * pr - xr * pi
    cdef i128 qr = nr / norm
    cdef i128 qi = ni / norm
    if qr > LIMIT or qr < -LIMIT or qi > LIMIT or qi < -LIMIT:
        return 1
    outr[0] = <long long>qr
    outi[0] = <long long>qi
    return 0


cdef int _rank(long long[:, ::1] ar, long long[:, ::1] ai, int rows, int ncols) nogil:
    cdef int rank = 0, col, i, j, piv
    cdef long long prr = 1, pri = 0, kr, ki, qr, qi, t
    cdef i128 nr, ni
    for col in range(ncols):
        piv = -1
        for i in range(rank, rows):
            if ar[i, col] != 0 or ai[i, col] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != rank:
            for j in range(ncols):
                t = ar[rank, j]; ar[rank, j] = ar[piv, j]; ar[piv, j] = t
                t = ai[rank, j]; ai[rank, j] = ai[piv, j]; ai[piv, j] = t
        kr = ar[rank, col]
        ki = ai[rank, col]
        for i in range(rank + 1, rows):
            qr = ar[i, col]
            qi = ai[i, col]
            for j in range(col + 1, ncols):
                nr = (<i128>kr * ar[i, j] - <i128>ki * ai[i, j]) - (<i128>qr * ar[rank, j] - <i128>qi * ai[rank, j])
                ni = (<i128>kr * ai[i, j] + <i128>ki * ar[i, j]) - (<i128>qr * ai[rank, j] + <i128>qi * ar[rank, j])
                if _div(nr, ni, prr, pri, &ar[i, j], &ai[i, j]):
                    return -1
            ar[i, col] = 0
            ai[i, col] = 0
        prr = kr
        pri = ki
        rank += 1
        if rank == rows:
            break
    return rank


def _prepare(re, im):
    ar = np.ascontiguousarray(re, dtype=np.int64)
    ai = np.ascontiguousarray(im, dtype=np.int64)
    if ar.ndim != 2 or ar.shape != ai.shape:
        raise ValueError("expected two matrices of equal shape")
    if ar.size and (np.abs(ar).max() > LIMIT or np.abs(ai).max() > LIMIT):
        raise OverflowError("entries exceed the compiled kernel range")
    return ar, ai


def gauss_int_rank(re, im):
    """Rank of re + i*im, both integer matrices."""
    ar, ai = _prepare(re, im)
    if ar.shape[0] == 0 or ar.shape[1] == 0:
        return 0
    cdef int r = _rank(ar, ai, ar.shape[0], ar.shape[1])
    if r < 0:
        raise OverflowError("intermediate value exceeds the compiled kernel range")
    return r


def gauss_int_kruskal(re, im):
    """Kruskal rank of re + i*im by exhaustive subset enumeration."""
    ar, ai = _prepare(re, im)
    cdef int rows = ar.shape[0], ncols = ar.shape[1]
    if ncols == 0 or rows == 0:
        return 0
    cdef int top = min(rows, ncols)
    cdef long long[:, ::1] src_r = ar, src_i = ai
    cdef long long[:, ::1] wr = np.empty((rows, top), dtype=np.int64)
    cdef long long[:, ::1] wi = np.empty((rows, top), dtype=np.int64)
    cdef int[::1] idx = np.empty(top, dtype=np.intc)
    cdef int size, k, i, r
    for size in range(1, top + 1):
        for k in range(size):
            idx[k] = k
        while True:
            for i in range(rows):
                for k in range(size):
                    wr[i, k] = src_r[i, idx[k]]
                    wi[i, k] = src_i[i, idx[k]]
            r = _rank(wr, wi, rows, size)
            if r < 0:
                raise OverflowError("intermediate value exceeds the compiled kernel range")
            if r < size:
                return size - 1
            # next combination in lexicographic order
            k = size - 1
            while k >= 0 and idx[k] == ncols - size + k:
                k -= 1
            if k < 0:
                break
            idx[k] += 1
            for i in range(k + 1, size):
                idx[i] = idx[i - 1] + 1
    return top
