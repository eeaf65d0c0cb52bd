# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled CART builder.

Mirrors probsim._tree_py.build_tree bit for bit: integer class counts,
float64 score = sum(cntL^2)/nL + sum(cntR^2)/nR, midpoint thresholds with
the adjacent-float guard, ties to lowest feature then lowest threshold,
preorder node numbering.  Uses one presorted index table per feature,
stably partitioned at every split, so each node costs O(d * n) instead of
O(d * n log n).
"""

from libc.stdlib cimport malloc, free

import numpy as np


def build_tree_arrays(double[:, ::1] x, int[::1] y, int n_classes,
                      int max_depth, int min_samples_split, int[:, ::1] sidx):
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t K = n_classes
    cdef Py_ssize_t max_nodes = 2 * m + 1

    feature_arr = np.full(max_nodes, -1, dtype=np.int32)
    threshold_arr = np.full(max_nodes, np.nan, dtype=np.float64)
    left_arr = np.full(max_nodes, -1, dtype=np.int32)
    right_arr = np.full(max_nodes, -1, dtype=np.int32)
    leaf_arr = np.full(max_nodes, -1, dtype=np.int32)
    cdef int[::1] feature = feature_arr
    cdef double[::1] threshold = threshold_arr
    cdef int[::1] left = left_arr
    cdef int[::1] right = right_arr
    cdef int[::1] leaf = leaf_arr

    cdef long long *cnt_tot = <long long *> malloc(K * sizeof(long long))
    cdef long long *cnt_l = <long long *> malloc(K * sizeof(long long))
    cdef long long *cnt_r = <long long *> malloc(K * sizeof(long long))
    cdef int *tmp_l = <int *> malloc(m * sizeof(int))
    cdef int *tmp_r = <int *> malloc(m * sizeof(int))
    cdef long long *st_lo = <long long *> malloc(max_nodes * sizeof(long long))
    cdef long long *st_hi = <long long *> malloc(max_nodes * sizeof(long long))
    cdef int *st_depth = <int *> malloc(max_nodes * sizeof(int))
    cdef int *st_parent = <int *> malloc(max_nodes * sizeof(int))
    cdef char *st_isleft = <char *> malloc(max_nodes * sizeof(char))
    if (cnt_tot == NULL or cnt_l == NULL or cnt_r == NULL or tmp_l == NULL
            or tmp_r == NULL or st_lo == NULL or st_hi == NULL
            or st_depth == NULL or st_parent == NULL or st_isleft == NULL):
        free(cnt_tot); free(cnt_l); free(cnt_r); free(tmp_l); free(tmp_r)
        free(st_lo); free(st_hi); free(st_depth); free(st_parent); free(st_isleft)
        raise MemoryError()

    cdef Py_ssize_t top = 0, n_nodes = 0
    cdef Py_ssize_t lo, hi, n, j, a, b, f, i, idx, nl, nr
    cdef int depth, parent, yc, best_f, maj
    cdef char isleft
    cdef long long a_tot, a_l, a_r, maj_cnt
    cdef double v, prev_v, t, score, best_score, best_t, neg_inf

    neg_inf = -np.inf
    st_lo[0] = 0; st_hi[0] = m; st_depth[0] = 0; st_parent[0] = -1; st_isleft[0] = 0
    top = 1
    try:
        while top > 0:
            top -= 1
            lo = st_lo[top]; hi = st_hi[top]
            depth = st_depth[top]; parent = st_parent[top]; isleft = st_isleft[top]
            idx = n_nodes
            n_nodes += 1
            if parent >= 0:
                if isleft:
                    left[parent] = <int> idx
                else:
                    right[parent] = <int> idx

            n = hi - lo
            for j in range(K):
                cnt_tot[j] = 0
            for j in range(lo, hi):
                cnt_tot[y[sidx[0, j]]] += 1
            a_tot = 0
            for j in range(K):
                a_tot += cnt_tot[j] * cnt_tot[j]

            if depth >= max_depth or n < min_samples_split or a_tot == <long long> n * <long long> n:
                best_f = -1
            else:
                best_f = -1
                best_score = neg_inf
                best_t = 0.0
                for f in range(d):
                    for j in range(K):
                        cnt_l[j] = 0
                        cnt_r[j] = cnt_tot[j]
                    a_l = 0
                    a_r = a_tot
                    i = sidx[f, lo]
                    yc = y[i]
                    a_l += 2 * cnt_l[yc] + 1; cnt_l[yc] += 1
                    a_r -= 2 * cnt_r[yc] - 1; cnt_r[yc] -= 1
                    prev_v = x[i, f]
                    for j in range(lo + 1, hi):
                        i = sidx[f, j]
                        v = x[i, f]
                        if v > prev_v:
                            t = 0.5 * (prev_v + v)
                            if t < v:
                                nl = j - lo
                                nr = n - nl
                                score = (<double> a_l) / (<double> nl) + (<double> a_r) / (<double> nr)
                                if score > best_score:
                                    best_score = score
                                    best_f = <int> f
                                    best_t = t
                        yc = y[i]
                        a_l += 2 * cnt_l[yc] + 1; cnt_l[yc] += 1
                        a_r -= 2 * cnt_r[yc] - 1; cnt_r[yc] -= 1
                        prev_v = v

            if best_f < 0:
                maj = 0
                maj_cnt = cnt_tot[0]
                for j in range(1, K):
                    if cnt_tot[j] > maj_cnt:
                        maj_cnt = cnt_tot[j]
                        maj = <int> j
                leaf[idx] = maj
                continue

            feature[idx] = best_f
            threshold[idx] = best_t
            a = 0
            for f in range(d):
                a = 0; b = 0
                for j in range(lo, hi):
                    i = sidx[f, j]
                    if x[i, best_f] <= best_t:
                        tmp_l[a] = <int> i; a += 1
                    else:
                        tmp_r[b] = <int> i; b += 1
                for j in range(a):
                    sidx[f, lo + j] = tmp_l[j]
                for j in range(b):
                    sidx[f, lo + a + j] = tmp_r[j]
            st_lo[top] = lo + a; st_hi[top] = hi
            st_depth[top] = depth + 1; st_parent[top] = <int> idx; st_isleft[top] = 0
            top += 1
            st_lo[top] = lo; st_hi[top] = lo + a
            st_depth[top] = depth + 1; st_parent[top] = <int> idx; st_isleft[top] = 1
            top += 1
    finally:
        free(cnt_tot); free(cnt_l); free(cnt_r); free(tmp_l); free(tmp_r)
        free(st_lo); free(st_hi); free(st_depth); free(st_parent); free(st_isleft)

    return (feature_arr[:n_nodes].copy(), threshold_arr[:n_nodes].copy(),
            left_arr[:n_nodes].copy(), right_arr[:n_nodes].copy(),
            leaf_arr[:n_nodes].copy())
