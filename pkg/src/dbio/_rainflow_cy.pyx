# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled rainflow kernel (four-point rule).

Mirrors ``_rainflow_py.extract_cycles`` exactly; selected at import when the
extension built successfully.
"""

import numpy as np

from libc.math cimport fabs


def extract_cycles(values):
    """Four-point rainflow decomposition; returns (ranges, weights) arrays."""
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]

    # Turning-point extraction.
    rev_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] rev = rev_arr
    cdef Py_ssize_t k = 0
    cdef Py_ssize_t i
    cdef double dv, prev_slope = 0.0
    for i in range(n):
        if k == 0:
            rev[k] = v[i]
            k += 1
            continue
        dv = v[i] - rev[k - 1]
        if dv == 0.0:
            continue
        if prev_slope == 0.0 or (dv > 0.0) != (prev_slope > 0.0):
            rev[k] = v[i]
            k += 1
        else:
            rev[k - 1] = v[i]
        prev_slope = dv

    # Four-point stack processing; worst case every reversal yields a count.
    ranges_arr = np.empty(k, dtype=np.float64)
    weights_arr = np.empty(k, dtype=np.float64)
    stack_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] ranges = ranges_arr
    cdef double[::1] weights = weights_arr
    cdef double[::1] stack = stack_arr
    cdef Py_ssize_t top = 0, m = 0
    cdef double x1, x2, x3
    for i in range(k):
        stack[top] = rev[i]
        top += 1
        while top >= 4:
            x1 = fabs(stack[top - 3] - stack[top - 4])
            x2 = fabs(stack[top - 2] - stack[top - 3])
            x3 = fabs(stack[top - 1] - stack[top - 2])
            if x2 <= x1 and x2 <= x3:
                ranges[m] = x2
                weights[m] = 1.0
                m += 1
                stack[top - 3] = stack[top - 1]
                top -= 2
            else:
                break
    for i in range(top - 1):
        ranges[m] = fabs(stack[i + 1] - stack[i])
        weights[m] = 0.5
        m += 1
    return ranges_arr[:m], weights_arr[:m]
