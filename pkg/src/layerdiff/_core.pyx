# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner-loop kernels; see ``_core_py`` for the reference versions."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def pole_sums(s, double[::1] q, P):
    cdef double complex[::1] sv = np.ascontiguousarray(s, dtype=complex)
    cdef double[:, ::1] Pv = np.ascontiguousarray(P, dtype=float)
    cdef Py_ssize_t R = Pv.shape[0], K = sv.shape[0], N = q.shape[0]
    out = np.zeros((R, K), dtype=complex)
    cdef double complex[:, ::1] ov = out
    cdef Py_ssize_t r, k, n
    cdef double complex acc, sk
    for r in range(R):
        for k in range(K):
            sk = sv[k]
            acc = 0
            for n in range(N):
                acc = acc + Pv[r, n] / (sk + q[n])
            ov[r, k] = acc
    return out


def thomas(sub, diag, sup, rhs):
    cdef double complex[:, ::1] a = np.ascontiguousarray(sub, dtype=complex)
    cdef double complex[:, ::1] b = np.ascontiguousarray(diag, dtype=complex)
    cdef double complex[:, ::1] c = np.ascontiguousarray(sup, dtype=complex)
    cdef double complex[:, ::1] d = np.ascontiguousarray(rhs, dtype=complex)
    cdef Py_ssize_t K = b.shape[0], M = b.shape[1]
    x = np.empty((K, M), dtype=complex)
    zero_row = np.full(K, -1, dtype=np.intp)
    cdef double complex[:, ::1] xv = x
    cdef Py_ssize_t[::1] zr = zero_row
    cdef double complex[::1] cp = np.empty(M, dtype=complex)
    cdef double complex[::1] dp = np.empty(M, dtype=complex)
    cdef Py_ssize_t k, i
    cdef double complex piv
    for k in range(K):
        for i in range(M):
            if i == 0:
                piv = b[k, 0]
            else:
                piv = b[k, i] - a[k, i] * cp[i - 1]
            if piv == 0:
                if zr[k] < 0:
                    zr[k] = i
                piv = 1.0
            cp[i] = c[k, i] / piv if i < M - 1 else 0
            if i == 0:
                dp[i] = d[k, 0] / piv
            else:
                dp[i] = (d[k, i] - a[k, i] * dp[i - 1]) / piv
        xv[k, M - 1] = dp[M - 1]
        for i in range(M - 2, -1, -1):
            xv[k, i] = dp[i] - cp[i] * xv[k, i + 1]
    return x, zero_row


def filtered_sums(w, z, double[::1] q, double t):
    cdef double complex[:, ::1] wv = np.ascontiguousarray(w, dtype=complex)
    cdef double complex[::1] zv = np.ascontiguousarray(z, dtype=complex)
    cdef Py_ssize_t J = wv.shape[0], K = wv.shape[1], N = q.shape[0]
    out = np.empty((J, N), dtype=float)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t j, k, n
    cdef double complex acc
    for j in range(J):
        for n in range(N):
            acc = 0
            for k in range(K):
                acc = acc + wv[j, k] / (zv[k] + q[n] * t)
            ov[j, n] = -2.0 * acc.real
    return out


cdef double _tree(double* buf, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, half
    while n > 1:
        half = n // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if n % 2:
            buf[half] = buf[n - 1] + 0.0
            n = half + 1
        else:
            n = half
    return buf[0]


def pairwise_sum(v):
    arr = np.array(v, dtype=float, order="C", copy=True)
    cdef Py_ssize_t nd = arr.ndim
    shape = arr.shape[:nd - 1]
    cdef Py_ssize_t n = arr.shape[nd - 1]
    cdef double[:, ::1] flat = arr.reshape(-1, n)
    out = np.empty(flat.shape[0], dtype=float)
    cdef double[::1] ov = out
    cdef Py_ssize_t r
    for r in range(flat.shape[0]):
        ov[r] = _tree(&flat[r, 0], n)
    return out.reshape(shape)


def series_eval(coef, Phi):
    cdef double[:, ::1] cv = np.ascontiguousarray(np.atleast_2d(coef), dtype=float)
    cdef double[:, ::1] pv = np.ascontiguousarray(Phi, dtype=float)
    cdef Py_ssize_t T = cv.shape[0], P = pv.shape[0], N = cv.shape[1]
    out = np.empty((T, P), dtype=float)
    cdef double[:, ::1] ov = out
    cdef double[::1] buf = np.empty(max(N, 1), dtype=float)
    cdef Py_ssize_t t, p, n
    for t in range(T):
        for p in range(P):
            for n in range(N):
                buf[n] = cv[t, n] * pv[p, n]
            ov[t, p] = _tree(&buf[0], N)
    return out
