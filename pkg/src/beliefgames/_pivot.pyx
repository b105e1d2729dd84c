# cython: language_level=3
"""Compiled integer pivot kernel.

Same contract as `_pivot_py.pivot_step`: fraction-free Gauss-Jordan step on a
list-of-lists integer tableau with a shared positive divisor.  Entries are
arbitrary-precision Python ints; the win over the pure twin comes from doing
the row/column loops and list indexing at C level.
"""

BACKEND = "cython"


def pivot_step(list rows, Py_ssize_t r, Py_ssize_t c, divisor):
    cdef Py_ssize_t i, j, nrows, ncols
    cdef list prow, row
    nrows = len(rows)
    prow = <list> rows[r]
    ncols = len(prow)
    piv = prow[c]
    if piv == 0:
        raise ZeroDivisionError("pivot on a zero entry")
    cdef bint rescale_only
    for i in range(nrows):
        if i == r:
            continue
        row = <list> rows[i]
        f = row[c]
        if f == 0:
            if piv == divisor:
                continue
            for j in range(ncols):
                t = row[j]
                if t != 0:
                    row[j] = (t * piv) // divisor
        else:
            for j in range(ncols):
                row[j] = (row[j] * piv - f * prow[j]) // divisor
    return piv
