# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compensated summed-area-table box sums.

The table is kept in double-double form (a rounded value plus its error term),
so box sums stay accurate to about one ulp of the result regardless of how large
the running totals grow.  Do not build with -ffast-math: it folds away the
error-free transformations below.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void two_sum(double a, double b, double *s, double *e) noexcept nogil:
    cdef double t, bb
    t = a + b
    bb = t - a
    e[0] = (a - (t - bb)) + (b - bb)
    s[0] = t


cdef inline void dd_add(double ah, double al, double bh, double bl,
                        double *rh, double *rl) noexcept nogil:
    cdef double s, e, t
    two_sum(ah, bh, &s, &e)
    e += al + bl
    t = s + e
    rl[0] = e - (t - s)
    rh[0] = t


def box_sum(x, int win_h, int win_w):
    """Sum of every ``win_h`` x ``win_w`` window, replicate-edge border.

    Returns an array shaped like ``x``; ``win_h`` and ``win_w`` must be odd.
    """
    if win_h < 1 or win_w < 1 or win_h % 2 == 0 or win_w % 2 == 0:
        raise ValueError("window sides must be odd and positive")
    src = np.asarray(x, dtype=np.float64)
    if src.ndim != 2:
        raise ValueError("expected a 2-D array")
    cdef int ry = win_h // 2
    cdef int rx = win_w // 2
    padded = np.ascontiguousarray(np.pad(src, ((ry, ry), (rx, rx)), mode="edge"))
    cdef double[:, ::1] p = padded
    cdef Py_ssize_t ph = padded.shape[0], pw = padded.shape[1]
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1]

    hi_arr = np.zeros((ph + 1, pw + 1), dtype=np.float64)
    lo_arr = np.zeros((ph + 1, pw + 1), dtype=np.float64)
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] th = hi_arr
    cdef double[:, ::1] tl = lo_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, i0, j0, i1, j1
    cdef double rh, rl, sh, sl

    with nogil:
        for i in range(ph):
            rh = 0.0
            rl = 0.0
            for j in range(pw):
                # running row sum, then add the table entry above
                dd_add(rh, rl, p[i, j], 0.0, &rh, &rl)
                dd_add(th[i, j + 1], tl[i, j + 1], rh, rl, &th[i + 1, j + 1], &tl[i + 1, j + 1])

        for i in range(h):
            i0 = i
            i1 = i + win_h
            for j in range(w):
                j0 = j
                j1 = j + win_w
                dd_add(th[i1, j1], tl[i1, j1], -th[i0, j1], -tl[i0, j1], &sh, &sl)
                dd_add(sh, sl, -th[i1, j0], -tl[i1, j0], &sh, &sl)
                dd_add(sh, sl, th[i0, j0], tl[i0, j0], &sh, &sl)
                out[i, j] = sh + sl
    return out_arr
