# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scheduling kernel.

Same contract as _kernels_py; the greedy loop applies the per-agent
2x2-block covariance update sequentially, which is algebraically
identical to restacking the full selector matrix against the prior
(block-diagonal measurement covariance), but avoids the growing solve.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


cdef inline int _kind_base(int kind) nogil:
    return 0 if kind == 0 else 2


cdef int _block_update(double[4][4] cov, int base, double r0, double r1) nogil:
    """In-place update of cov with one agent measuring features
    (base, base+1) under noise diag(r0, r1).  Returns 0, or -1 if the
    2x2 innovation block is singular (cannot happen for PD noise)."""
    cdef double s00 = cov[base][base] + r0
    cdef double s01 = cov[base][base + 1]
    cdef double s11 = cov[base + 1][base + 1] + r1
    cdef double det = s00 * s11 - s01 * s01
    if det <= 0:
        return -1
    cdef double k0, k1
    cdef double row_a[4]
    cdef double row_b[4]
    cdef double newcov[4][4]
    cdef int i, j
    for j in range(4):
        row_a[j] = cov[base][j]
        row_b[j] = cov[base + 1][j]
    for i in range(4):
        k0 = (cov[i][base] * s11 - cov[i][base + 1] * s01) / det
        k1 = (cov[i][base + 1] * s00 - cov[i][base] * s01) / det
        for j in range(4):
            newcov[i][j] = cov[i][j] - k0 * row_a[j] - k1 * row_b[j]
    for i in range(4):
        for j in range(i, 4):
            cov[i][j] = 0.5 * (newcov[i][j] + newcov[j][i])
            cov[j][i] = cov[i][j]
    return 0


def greedy_voi_select(
    prior_cov,
    xi_sq,
    kind_codes,
    noise_diag,
    dist_ap,
    available,
    int budget,
):
    cdef cnp.ndarray[double, ndim=2] prior = np.ascontiguousarray(prior_cov, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] xi = np.ascontiguousarray(xi_sq, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] kinds = np.ascontiguousarray(kind_codes, dtype=np.uint8)
    cdef cnp.ndarray[double, ndim=2] noise = np.ascontiguousarray(noise_diag, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] dist = np.ascontiguousarray(dist_ap, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] avail = np.array(available, dtype=np.uint8)

    cdef int n_agents = kinds.shape[0]
    cdef double cov[4][4]
    cdef int i, j, k, m, kind, row, base, n_sel, best_k, best_m
    cdef double ratio, best_ratio, var, best_var, best_dist
    cdef bint any_violated, pos_avail, vel_avail, feat_ok
    cdef cnp.ndarray[cnp.int64_t, ndim=1] selected = np.empty(budget if budget > 0 else 0, dtype=np.int64)

    for i in range(4):
        for j in range(4):
            cov[i][j] = prior[i, j]

    n_sel = 0
    while n_sel < budget:
        any_violated = False
        for k in range(4):
            if cov[k][k] > xi[k]:
                any_violated = True
                break
        if not any_violated:
            break
        pos_avail = False
        vel_avail = False
        for m in range(n_agents):
            if avail[m]:
                if kinds[m] == 0:
                    pos_avail = True
                else:
                    vel_avail = True
            if pos_avail and vel_avail:
                break
        best_k = -1
        best_ratio = -1e300
        for k in range(4):
            feat_ok = pos_avail if k < 2 else vel_avail
            if not feat_ok:
                continue
            ratio = cov[k][k] / xi[k]
            if ratio > best_ratio:
                best_k = k
                best_ratio = ratio
        if best_k < 0 or cov[best_k][best_k] <= xi[best_k]:
            break
        kind = 0 if best_k < 2 else 1
        row = best_k - _kind_base(kind)
        best_m = -1
        best_var = 1e300
        best_dist = 1e300
        for m in range(n_agents):
            if not avail[m] or kinds[m] != kind:
                continue
            var = noise[m, row]
            if var < best_var or (var == best_var and dist[m] < best_dist):
                best_m = m
                best_var = var
                best_dist = dist[m]
        if best_m < 0:
            break
        base = _kind_base(kind)
        if _block_update(cov, base, noise[best_m, 0], noise[best_m, 1]) != 0:
            raise FloatingPointError("singular innovation block in greedy update")
        selected[n_sel] = best_m
        avail[best_m] = 0
        n_sel += 1

    out_cov = np.empty((4, 4), dtype=np.float64)
    for i in range(4):
        for j in range(4):
            out_cov[i, j] = cov[i][j]
    return selected[:n_sel].copy(), out_cov, n_sel
