# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled transfer kernels over (base state x group ball)."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def pull_step(double[:, ::1] inp, long[::1] src, long[::1] dst, double[::1] w,
              long[::1] mv, long[:, ::1] movemap):
    cdef Py_ssize_t n = inp.shape[0], nb = inp.shape[1], T = src.shape[0]
    out_arr = np.zeros((n, nb))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t t, j, s, d
    cdef long c
    cdef double wt
    with nogil:
        for t in range(T):
            s = src[t]
            d = dst[t]
            wt = w[t]
            for j in range(nb):
                c = movemap[mv[t], j]
                if c >= 0:
                    out[s, j] += wt * inp[d, c]
    return out_arr


def push_step(double[:, ::1] inp, long[::1] src, long[::1] dst, double[::1] w,
              long[::1] mv, long[:, ::1] movemap):
    cdef Py_ssize_t n = inp.shape[0], nb = inp.shape[1], T = src.shape[0]
    out_arr = np.zeros((n, nb))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t t, j, s, d
    cdef long c
    cdef double wt
    with nogil:
        for t in range(T):
            s = src[t]
            d = dst[t]
            wt = w[t]
            for j in range(nb):
                c = movemap[mv[t], j]
                if c >= 0:
                    out[d, c] += wt * inp[s, j]
    return out_arr


def bfs_levels(Py_ssize_t n, Py_ssize_t nb, long[::1] src, long[::1] dst, long[::1] mv,
               long[:, ::1] movemap, Py_ssize_t start_state, Py_ssize_t start_index, int max_depth):
    dist_arr = np.full((n, nb), -1, dtype=np.int32)
    cdef int[:, ::1] dist = dist_arr
    cdef Py_ssize_t T = src.shape[0], t, j, s
    cdef long c
    cdef int d
    cdef bint grew
    dist[start_state, start_index] = 0
    with nogil:
        for d in range(1, max_depth + 1):
            grew = False
            for t in range(T):
                s = src[t]
                for j in range(nb):
                    if dist[s, j] == d - 1:
                        c = movemap[mv[t], j]
                        if c >= 0 and dist[dst[t], c] < 0:
                            dist[dst[t], c] = d
                            grew = True
            if not grew:
                break
    return dist_arr
