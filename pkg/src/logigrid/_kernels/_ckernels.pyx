# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tree/string edit-distance kernels; see ``_pykernels`` for the reference versions."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def tree_distance(lmld1, keyroots1, lmld2, keyroots2, rename):
    cdef cnp.int64_t[::1] l1 = np.ascontiguousarray(lmld1, dtype=np.int64)
    cdef cnp.int64_t[::1] l2 = np.ascontiguousarray(lmld2, dtype=np.int64)
    cdef cnp.int64_t[::1] kr1 = np.ascontiguousarray(keyroots1, dtype=np.int64)
    cdef cnp.int64_t[::1] kr2 = np.ascontiguousarray(keyroots2, dtype=np.int64)
    cdef Py_ssize_t n1 = l1.shape[0], n2 = l2.shape[0]
    if n1 == 0 or n2 == 0:
        return float(n1 + n2)
    cdef double[:, ::1] ren = np.ascontiguousarray(rename, dtype=np.float64)
    if ren.shape[0] != n1 or ren.shape[1] != n2:
        raise ValueError("rename matrix shape does not match trees")
    cdef double[:, ::1] td = np.zeros((n1, n2), dtype=np.float64)
    cdef double[:, ::1] fd = np.zeros((n1 + 1, n2 + 1), dtype=np.float64)
    cdef Py_ssize_t a, b, i, j, li, lj, m, n, x, y, ix, jy, lix, ljy
    cdef double da, db, dc, best
    for a in range(kr1.shape[0]):
        i = kr1[a]
        li = l1[i]
        m = i - li + 2
        for b in range(kr2.shape[0]):
            j = kr2[b]
            lj = l2[j]
            n = j - lj + 2
            fd[0, 0] = 0.0
            for x in range(1, m):
                fd[x, 0] = fd[x - 1, 0] + 1.0
            for y in range(1, n):
                fd[0, y] = fd[0, y - 1] + 1.0
            for x in range(1, m):
                ix = li + x - 1
                lix = l1[ix]
                for y in range(1, n):
                    jy = lj + y - 1
                    ljy = l2[jy]
                    da = fd[x - 1, y] + 1.0
                    db = fd[x, y - 1] + 1.0
                    best = da if da < db else db
                    if lix == li and ljy == lj:
                        dc = fd[x - 1, y - 1] + ren[ix, jy]
                        if dc < best:
                            best = dc
                        fd[x, y] = best
                        td[ix, jy] = best
                    else:
                        dc = fd[lix - li, ljy - lj] + td[ix, jy]
                        fd[x, y] = dc if dc < best else best
    return td[n1 - 1, n2 - 1]


def levenshtein(str a, str b):
    if len(a) < len(b):
        a, b = b, a
    cdef Py_ssize_t la = len(a), lb = len(b), i, j
    if lb == 0:
        return la
    cdef cnp.int64_t[::1] prev = np.arange(lb + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] cur = np.zeros(lb + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] tmp
    cdef cnp.int64_t v, w
    cdef Py_UCS4 ca
    for i in range(1, la + 1):
        ca = a[i - 1]
        cur[0] = i
        for j in range(1, lb + 1):
            v = prev[j] + 1
            w = cur[j - 1] + 1
            if w < v:
                v = w
            w = prev[j - 1] + (0 if ca == b[j - 1] else 1)
            if w < v:
                v = w
            cur[j] = v
        tmp = prev
        prev = cur
        cur = tmp
    return int(prev[lb])


from libc.math cimport sqrt


def adam_update(double[::1] param, double[::1] grad, double[::1] m, double[::1] v,
                double step, double beta1, double beta2, double eps):
    """Fused in-place Adam update; ``step`` already includes bias correction."""
    cdef Py_ssize_t i, n = param.shape[0]
    cdef double gi, mi, vi
    if grad.shape[0] != n or m.shape[0] != n or v.shape[0] != n:
        raise ValueError("buffers differ in length")
    for i in range(n):
        gi = grad[i]
        mi = beta1 * m[i] + (1.0 - beta1) * gi
        vi = beta2 * v[i] + (1.0 - beta2) * gi * gi
        m[i] = mi
        v[i] = vi
        param[i] -= step * mi / (sqrt(vi) + eps)
