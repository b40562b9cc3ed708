"""Pure-numpy fallback for the device-selection DP table fill.

Mirrors the compiled kernel in ``_dp_core.pyx``: both produce the identical
(n+1, cap_t+1, cap_e+1) int64 table where entry [j, t, e] is the maximum total
model bytes achievable using a subset of the first j devices whose discretized
time cost sums to at most t units and energy cost to at most e units.
"""

import numpy as np


def fill_dp_table(unit_t, unit_e, sizes, cap_t, cap_e):
    unit_t = np.asarray(unit_t, dtype=np.int64)
    unit_e = np.asarray(unit_e, dtype=np.int64)
    sizes = np.asarray(sizes, dtype=np.int64)
    n = sizes.shape[0]
    dp = np.zeros((n + 1, cap_t + 1, cap_e + 1), dtype=np.int64)
    for j in range(1, n + 1):
        ct = int(unit_t[j - 1])
        ce = int(unit_e[j - 1])
        size = int(sizes[j - 1])
        prev = dp[j - 1]
        cur = dp[j]
        cur[...] = prev
        if ct <= cap_t and ce <= cap_e:
            take = prev[: cap_t + 1 - ct, : cap_e + 1 - ce] + size
            np.maximum(prev[ct:, ce:], take, out=cur[ct:, ce:])
    return dp
