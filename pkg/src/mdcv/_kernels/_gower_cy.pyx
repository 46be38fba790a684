# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Gower kNN imputation kernel.

Bit-identical twin of ``_gower_py``: distances accumulate left-to-right and
donor ordering breaks ties by ascending donor index (here via a stable
merge sort on (distance, index) keys).
"""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc

cnp.import_array()


cdef void _row_distances(double[:, ::1] d_vals, unsigned char[:, ::1] d_obs,
                         double[:, ::1] r_vals, unsigned char[:, ::1] r_obs,
                         Py_ssize_t r, unsigned char[::1] nom,
                         double[::1] inv_range,
                         double* dist, unsigned char* comp) nogil:
    cdef Py_ssize_t nd = d_vals.shape[0]
    cdef Py_ssize_t p = d_vals.shape[1]
    cdef Py_ssize_t i, j
    cdef double total, d
    cdef long usable
    for i in range(nd):
        total = 0.0
        usable = 0
        for j in range(p):
            if d_obs[i, j] and r_obs[r, j]:
                usable += 1
                if nom[j]:
                    if d_vals[i, j] != r_vals[r, j]:
                        total += 1.0
                else:
                    d = d_vals[i, j] - r_vals[r, j]
                    if d < 0.0:
                        d = -d
                    d = d * inv_range[j]
                    if d > 1.0:
                        d = 1.0
                    total += d
        if usable > 0:
            dist[i] = total / usable
            comp[i] = 1
        else:
            dist[i] = 0.0
            comp[i] = 0


cdef void _merge_sort(long* order, long* tmp, double* dist,
                      Py_ssize_t lo, Py_ssize_t hi) nogil:
    # stable sort of order[lo:hi] by dist; stability = tie-break by index
    cdef Py_ssize_t mid, i, j, t
    if hi - lo < 2:
        return
    mid = (lo + hi) // 2
    _merge_sort(order, tmp, dist, lo, mid)
    _merge_sort(order, tmp, dist, mid, hi)
    i = lo
    j = mid
    t = lo
    while i < mid and j < hi:
        if dist[order[j]] < dist[order[i]]:
            tmp[t] = order[j]
            j += 1
        else:
            tmp[t] = order[i]
            i += 1
        t += 1
    while i < mid:
        tmp[t] = order[i]
        i += 1
        t += 1
    while j < hi:
        tmp[t] = order[j]
        j += 1
        t += 1
    for i in range(lo, hi):
        order[i] = tmp[i]


def gower_row_distances(double[:, ::1] d_vals, unsigned char[:, ::1] d_obs,
                        r_vals_row, r_obs_row,
                        unsigned char[::1] nom, double[::1] inv_range):
    """Single-row variant used by tests; mirrors the fallback signature."""
    r_vals = np.ascontiguousarray(r_vals_row, dtype=np.float64)[None, :]
    r_obs = np.ascontiguousarray(r_obs_row, dtype=np.uint8)[None, :]
    cdef Py_ssize_t nd = d_vals.shape[0]
    dist_arr = np.zeros(nd, dtype=np.float64)
    comp_arr = np.zeros(nd, dtype=np.uint8)
    cdef double[::1] dist = dist_arr
    cdef unsigned char[::1] comp = comp_arr
    cdef double[:, ::1] rv = r_vals
    cdef unsigned char[:, ::1] ro = r_obs
    _row_distances(d_vals, d_obs, rv, ro, 0, nom, inv_range,
                   &dist[0], &comp[0])
    return dist_arr, comp_arr.view(bool)


def knn_impute_grid(double[:, ::1] d_vals, unsigned char[:, ::1] d_obs,
                    double[:, ::1] r_vals, unsigned char[:, ::1] r_obs,
                    unsigned char[::1] nom, long[::1] nlev,
                    double[::1] inv_range,
                    long[::1] miss_rows, long[::1] miss_cols, long[::1] ks):
    cdef Py_ssize_t nk = ks.shape[0]
    cdef Py_ssize_t nmiss = miss_rows.shape[0]
    cdef Py_ssize_t nd = d_vals.shape[0]
    imputed_arr = np.zeros((nk, nmiss), dtype=np.float64)
    fallback_arr = np.zeros(nmiss, dtype=np.uint8)
    cdef double[:, ::1] imputed = imputed_arr
    cdef unsigned char[::1] fallback = fallback_arr

    cdef Py_ssize_t max_lev = 1
    cdef Py_ssize_t j
    for j in range(nlev.shape[0]):
        if nlev[j] > max_lev:
            max_lev = nlev[j]
    counts_arr = np.zeros(max_lev, dtype=np.int64)
    cdef long[::1] counts = counts_arr

    cdef double* dist = <double*> malloc(nd * sizeof(double))
    cdef unsigned char* comp = <unsigned char*> malloc(nd)
    cdef long* order = <long*> malloc(nd * sizeof(long))
    cdef long* tmp = <long*> malloc(nd * sizeof(long))
    if dist == NULL or comp == NULL or order == NULL or tmp == NULL:
        free(dist); free(comp); free(order); free(tmp)
        raise MemoryError()

    cdef Py_ssize_t m, r, c, ki, t, stop, best, lev, i, n_ord
    cdef Py_ssize_t last_row = -1
    cdef double run_sum
    cdef long take, bestcount
    try:
        with nogil:
            n_ord = 0
            for m in range(nmiss):
                r = miss_rows[m]
                c = miss_cols[m]
                if r != last_row:
                    _row_distances(d_vals, d_obs, r_vals, r_obs, r,
                                   nom, inv_range, dist, comp)
                    n_ord = 0
                    for i in range(nd):
                        if comp[i]:
                            order[n_ord] = i
                            n_ord += 1
                    _merge_sort(order, tmp, dist, 0, n_ord)
                    last_row = r
                if nom[c]:
                    for j in range(nlev[c]):
                        counts[j] = 0
                    take = 0
                    t = 0
                    for ki in range(nk):
                        stop = ks[ki]
                        while take < stop and t < n_ord:
                            if d_obs[order[t], c]:
                                counts[<Py_ssize_t> d_vals[order[t], c]] += 1
                                take += 1
                            t += 1
                        if take == 0:
                            fallback[m] = 1
                            break
                        best = 0
                        bestcount = counts[0]
                        for lev in range(1, nlev[c]):
                            if counts[lev] > bestcount:
                                best = lev
                                bestcount = counts[lev]
                        imputed[ki, m] = <double> best
                else:
                    run_sum = 0.0
                    take = 0
                    t = 0
                    for ki in range(nk):
                        stop = ks[ki]
                        while take < stop and t < n_ord:
                            if d_obs[order[t], c]:
                                run_sum += d_vals[order[t], c]
                                take += 1
                            t += 1
                        if take == 0:
                            fallback[m] = 1
                            break
                        imputed[ki, m] = run_sum / take
    finally:
        free(dist); free(comp); free(order); free(tmp)
    return imputed_arr, fallback_arr.view(bool)
