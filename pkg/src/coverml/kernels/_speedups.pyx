# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled split-scan kernels for tree induction.

Mirrors coverml.kernels._fallback operation for operation so both backends
choose bit-identical splits; keep the two files in sync when touching the
impurity arithmetic.
"""

from libc.math cimport INFINITY, NAN

BACKEND = "compiled"


def best_split_gini(const double[::1] x, const double[::1] y):
    """Best threshold by Gini impurity decrease on a pre-sorted feature."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i
    cdef double total = <double> n
    cdef double c1 = 0.0
    for i in range(n):
        c1 += y[i]
    cdef double p1 = c1 / total
    cdef double p0 = (total - c1) / total
    cdef double g_parent = 1.0 - p1 * p1 - p0 * p0

    cdef double best_dec = -INFINITY
    cdef double best_thr = NAN
    cdef double nl = 0.0, cl = 0.0
    cdef double nr, cr, pl1, pl0, pr1, pr0, gl, gr, dec, thr
    for i in range(n - 1):
        nl += 1.0
        cl += y[i]
        if x[i] == x[i + 1]:
            continue
        nr = total - nl
        cr = c1 - cl
        pl1 = cl / nl
        pl0 = (nl - cl) / nl
        gl = 1.0 - pl1 * pl1 - pl0 * pl0
        pr1 = cr / nr
        pr0 = (nr - cr) / nr
        gr = 1.0 - pr1 * pr1 - pr0 * pr0
        dec = g_parent - (nl / total) * gl - (nr / total) * gr
        if dec > best_dec:
            thr = 0.5 * (x[i] + x[i + 1])
            if thr == x[i + 1]:
                thr = x[i]
            best_dec = dec
            best_thr = thr
    return best_thr, best_dec


def best_split_sse(const double[::1] x, const double[::1] y):
    """Best threshold by weighted variance decrease (squared-error impurity)."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i
    cdef double total = <double> n
    cdef double s_tot = 0.0, ss_tot = 0.0
    for i in range(n):
        s_tot += y[i]
        ss_tot += y[i] * y[i]
    cdef double m = s_tot / total
    cdef double imp = ss_tot / total - m * m

    cdef double best_dec = -INFINITY
    cdef double best_thr = NAN
    cdef double nl = 0.0, sl = 0.0, ssl = 0.0
    cdef double nr, ml, il, mr, ir, dec, thr
    for i in range(n - 1):
        nl += 1.0
        sl += y[i]
        ssl += y[i] * y[i]
        if x[i] == x[i + 1]:
            continue
        nr = total - nl
        ml = sl / nl
        il = ssl / nl - ml * ml
        mr = (s_tot - sl) / nr
        ir = (ss_tot - ssl) / nr - mr * mr
        dec = imp - (nl / total) * il - (nr / total) * ir
        if dec > best_dec:
            thr = 0.5 * (x[i] + x[i + 1])
            if thr == x[i + 1]:
                thr = x[i]
            best_dec = dec
            best_thr = thr
    return best_thr, best_dec
