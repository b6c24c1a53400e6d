# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Clifford-algebra product kernel (see ``_clifford_py`` for the fallback)."""

import numpy as np

cdef extern from *:
    int __builtin_popcount(unsigned int) nogil


cdef inline int _sign(unsigned int a, unsigned int b) noexcept nogil:
    cdef int s = 0
    a >>= 1
    while a:
        s += __builtin_popcount(a & b)
        a >>= 1
    return -1 if (s & 1) else 1


def blade_sign(unsigned int a, unsigned int b):
    return _sign(a, b)


_tables = {}


def sign_table(Py_ssize_t size):
    """int8 table of blade-product signs, built once per algebra size."""
    tab = _tables.get(size)
    if tab is None:
        tab = np.empty((size, size), dtype=np.int8)
        _fill(tab)
        _tables[size] = tab
    return tab


cdef void _fill(signed char[:, ::1] t) noexcept:
    cdef Py_ssize_t i, j, size = t.shape[0]
    with nogil:
        for i in range(size):
            for j in range(size):
                t[i, j] = <signed char> _sign(<unsigned int> i, <unsigned int> j)


def geometric_product(const double[::1] a, const double[::1] b):
    cdef Py_ssize_t size = a.shape[0]
    cdef Py_ssize_t i, jj, nb = 0
    cdef unsigned int j
    cdef double ai
    cdef const signed char[:, ::1] sg = sign_table(size)
    out = np.zeros(size)
    cdef double[::1] o = out
    idx = np.empty(size, dtype=np.uint32)
    cdef unsigned int[::1] ib = idx
    with nogil:
        for i in range(size):
            if b[i] != 0.0:
                ib[nb] = <unsigned int> i
                nb += 1
        for i in range(size):
            ai = a[i]
            if ai == 0.0:
                continue
            for jj in range(nb):
                j = ib[jj]
                o[i ^ j] += sg[i, j] * ai * b[j]
    return out
