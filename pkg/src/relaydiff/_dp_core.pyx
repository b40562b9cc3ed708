# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled device-selection DP table fill.

Semantics are identical to the numpy fallback in ``_dp_numpy``; the scheduler
picks whichever imports. Kept as one tight triple loop over typed memoryviews
so the per-cell relaxation compiles to a handful of instructions.
"""

import numpy as np

from libc.stdint cimport int64_t


def fill_dp_table(unit_t, unit_e, sizes, Py_ssize_t cap_t, Py_ssize_t cap_e):
    unit_t_arr = np.ascontiguousarray(unit_t, dtype=np.int64)
    unit_e_arr = np.ascontiguousarray(unit_e, dtype=np.int64)
    sizes_arr = np.ascontiguousarray(sizes, dtype=np.int64)

    cdef int64_t[::1] ut = unit_t_arr
    cdef int64_t[::1] ue = unit_e_arr
    cdef int64_t[::1] sz = sizes_arr
    cdef Py_ssize_t n = sz.shape[0]

    dp_arr = np.zeros((n + 1, cap_t + 1, cap_e + 1), dtype=np.int64)
    cdef int64_t[:, :, ::1] dp = dp_arr

    cdef Py_ssize_t j, t, e, ct, ce
    cdef int64_t size, keep, take
    for j in range(1, n + 1):
        ct = <Py_ssize_t> ut[j - 1]
        ce = <Py_ssize_t> ue[j - 1]
        size = sz[j - 1]
        for t in range(cap_t + 1):
            for e in range(cap_e + 1):
                keep = dp[j - 1, t, e]
                if t >= ct and e >= ce:
                    take = dp[j - 1, t - ct, e - ce] + size
                    if take > keep:
                        keep = take
                dp[j, t, e] = keep
    return dp_arr
