"""Pure numpy versions of the inner-loop kernels.

Same signatures and reduction order as the compiled ``_core`` module, so
either backend gives the same answers (``series_eval`` bit for bit).
"""
import numpy as np


def pole_sums(s, q, P):
    """``out[r, k] = sum_n P[r, n] / (s[k] + q[n])``."""
    s = np.asarray(s, dtype=complex)
    return (np.asarray(P, dtype=float)[:, None, :] / (s[:, None] + q[None, :])).sum(axis=-1)


def thomas(sub, diag, sup, rhs):
    """Batched tridiagonal solve without pivoting.

    Every argument has shape ``(K, M)``; row ``k`` is one system. ``sub[:, 0]``
    and ``sup[:, M-1]`` are ignored. Returns ``(x, zero_row)`` where
    ``zero_row[k]`` is the first row with an exactly zero pivot, else -1.
    """
    sub = np.asarray(sub, dtype=complex)
    K, M = diag.shape
    cp = np.empty((K, M), dtype=complex)
    dp = np.empty((K, M), dtype=complex)
    zero_row = np.full(K, -1, dtype=np.intp)
    piv = diag[:, 0].copy()
    for i in range(M):
        if i > 0:
            piv = diag[:, i] - sub[:, i] * cp[:, i - 1]
        bad = (piv == 0) & (zero_row < 0)
        zero_row[bad] = i
        piv = np.where(piv == 0, 1.0, piv)
        cp[:, i] = sup[:, i] / piv if i < M - 1 else 0.0
        prev = dp[:, i - 1] if i > 0 else 0.0
        sub_i = sub[:, i] if i > 0 else 0.0
        dp[:, i] = (rhs[:, i] - sub_i * prev) / piv
    x = np.empty((K, M), dtype=complex)
    x[:, M - 1] = dp[:, M - 1]
    for i in range(M - 2, -1, -1):
        x[:, i] = dp[:, i] - cp[:, i] * x[:, i + 1]
    return x, zero_row


def filtered_sums(w, z, q, t):
    """``out[j, n] = -2 Re sum_k w[j, k] / (z[k] + q[n] t)``."""
    denom = z[None, :] + (q * t)[:, None]
    return -2.0 * np.real((np.asarray(w)[:, None, :] / denom[None, :, :]).sum(axis=-1))


def pairwise_sum(v):
    """Row sums over the last axis with a fixed adjacent-pair tree."""
    v = np.asarray(v, dtype=float)
    while v.shape[-1] > 1:
        if v.shape[-1] % 2:
            v = np.concatenate([v, np.zeros(v.shape[:-1] + (1,))], axis=-1)
        v = v[..., 0::2] + v[..., 1::2]
    return v[..., 0]


def series_eval(coef, Phi):
    """``out[t, p] = sum_n coef[t, n] Phi[p, n]`` with the pairwise tree."""
    coef = np.atleast_2d(coef)
    return pairwise_sum(coef[:, None, :] * Phi[None, :, :])
