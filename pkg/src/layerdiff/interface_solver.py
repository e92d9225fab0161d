"""Laplace-domain interface system.

At each interface ``l_r`` the transformed constraint

    gbar_r / H_r = theta_r * Ubar_{r+1}(l_r) - Ubar_r(l_r)

is linear in the neighbouring interface transforms, where every endpoint
value is

    Ubar_i(e) = gbar_{i-1} (psi_{i,1}(e) + S2) + gbar_i (psi_{i,2}(e) + S3) + S1

with ``S_k = sum_n c^(k)_{i,n}(s) phi_hat_{i,n}(e)``. Moving the known
external transforms ``gbar_0``, ``gbar_m`` to the right side leaves a complex
tridiagonal system of order ``m - 1``. The sums are pole sums
``sum_n P_n / (s + q_n)`` over precomputed numerators, so eigenfunctions are
only ever evaluated at layer endpoints, once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import kernels
from .eigenbasis import EigenBasis
from .liftings import BetaTable

_BACKWARD_TOL = 1e-12


class InterfaceSolveError(ArithmeticError):
    pass


@dataclass(frozen=True)
class LayerTerms:
    """Everything row assembly needs from one layer.

    ``num[e]`` stacks the pole-sum numerators ``(beta5, D(beta3 + lam^2 beta1),
    D(beta4 + lam^2 beta2)) * phi_hat(e)`` for end ``e`` (0 left, 1 right);
    ``const[e]`` holds ``(sum beta1 phi_hat(e), sum beta2 phi_hat(e))``;
    ``psi[e]`` holds ``(psi_1(e), psi_2(e))``.
    """

    q: np.ndarray
    num: np.ndarray        # (2, 3, N)
    const: np.ndarray      # (2, 2)
    psi: np.ndarray        # (2, 2)


@dataclass(frozen=True)
class SystemData:
    layers: tuple
    theta: np.ndarray
    inv_H: np.ndarray

    @property
    def m(self):
        return len(self.layers)


def prepare(problem, basis: EigenBasis, liftings, betas: BetaTable) -> SystemData:
    layers = []
    for i, lb in enumerate(basis.layers):
        D = problem.D[i]
        q = D * lb.lam ** 2
        a1 = betas.beta5[i]
        a2 = D * (betas.beta3[i] + lb.lam ** 2 * betas.beta1[i])
        a3 = D * (betas.beta4[i] + lb.lam ** 2 * betas.beta2[i])
        num = np.empty((2, 3, basis.N))
        const = np.empty((2, 2))
        psi = np.empty((2, 2))
        for e, (phi, x) in enumerate(((lb.at_left, lb.left), (lb.at_right, lb.right))):
            num[e] = np.stack([a1, a2, a3]) * phi
            const[e] = (np.sum(betas.beta1[i] * phi), np.sum(betas.beta2[i] * phi))
            psi[e] = (liftings[i].psi1(x), liftings[i].psi2(x))
        layers.append(LayerTerms(q, num, const, psi))
    return SystemData(tuple(layers), np.asarray(problem.theta, dtype=float),
                      np.asarray(problem.inv_H, dtype=float))


def split_coefficients(s, q, beta, D, lam):
    """``(c1, c2, c3)`` with ``cbar_n = c1 + c2 gbar_{i-1} + c3 gbar_i``.

    ``beta`` is the sequence ``(beta1, ..., beta5)`` of one layer.
    """
    b1, b2, b3, b4, b5 = (np.asarray(b, dtype=float) for b in beta)
    den = s + q
    c1 = b5 / den
    c2 = D * (b3 + lam ** 2 * b1) / den - b1
    c3 = D * (b4 + lam ** 2 * b2) / den - b2
    return c1, c2, c3


def endpoint_terms(data: SystemData, s):
    """``T[i, e, k, j]`` for ``j = 0, 1, 2`` is ``(S1, psi_1 + S2, psi_2 + S3)``.

    Layer ``i`` end ``e`` at node ``s[k]``; shape ``(m, 2, K, 3)``.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    out = np.empty((data.m, 2, s.size, 3), dtype=complex)
    for i, lt in enumerate(data.layers):
        sums = kernels.pole_sums(s, lt.q, lt.num.reshape(6, -1)).reshape(2, 3, -1)
        for e in range(2):
            out[i, e, :, 0] = sums[e, 0]
            out[i, e, :, 1] = lt.psi[e, 0] + sums[e, 1] - lt.const[e, 0]
            out[i, e, :, 2] = lt.psi[e, 1] + sums[e, 2] - lt.const[e, 1]
    return out


@dataclass(frozen=True)
class InterfaceSystem:
    """A batch of ``K`` tridiagonal systems of order ``m - 1``.

    Row ``r`` of system ``k`` is ``sub[k, r] x[r-1] + diag[k, r] x[r]
    + sup[k, r] x[r+1] = rhs[k, r]``; ``sub[:, 0]`` and ``sup[:, -1]`` are 0.
    """

    s: np.ndarray
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    @property
    def order(self):
        return self.diag.shape[1]

    def dense(self, k=0):
        M = self.order
        A = np.diag(self.diag[k])
        if M > 1:
            A += np.diag(self.sub[k, 1:], -1) + np.diag(self.sup[k, :-1], 1)
        return A

    def abs_residual(self, x):
        """``||A x - b||_inf`` per system."""
        x = np.atleast_2d(x)
        Ax = self.diag * x
        Ax[:, 1:] += self.sub[:, 1:] * x[:, :-1]
        Ax[:, :-1] += self.sup[:, :-1] * x[:, 1:]
        return np.max(np.abs(Ax - self.rhs), axis=1)

    def residual(self, x):
        """``||A x - b||_inf / ||b||_inf`` per system (absolute when ``b = 0``)."""
        r = self.abs_residual(x)
        nb = np.max(np.abs(self.rhs), axis=1)
        return np.where(nb > 0, r / np.where(nb > 0, nb, 1.0), r)


def assemble(s, data: SystemData, gbar0, gbarm, terms=None) -> InterfaceSystem:
    """Assemble the systems at every node in ``s`` (scalar or 1-D).

    ``gbar0``/``gbarm`` are the external transforms at the same nodes.
    """
    if data.m < 2:
        raise ValueError("a single layer has no interface system")
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    T = endpoint_terms(data, s) if terms is None else terms
    M = data.m - 1
    K = s.size
    sub = np.zeros((K, M), dtype=complex)
    sup = np.zeros((K, M), dtype=complex)
    diag = np.empty((K, M), dtype=complex)
    rhs = np.empty((K, M), dtype=complex)
    for r in range(M):
        left, right = T[r, 1], T[r + 1, 0]       # layer r at l_r, layer r+1 at l_r
        th = data.theta[r]
        lower = left[:, 1]
        upper = -th * right[:, 2]
        diag[:, r] = left[:, 2] - th * right[:, 1] + data.inv_H[r]
        rhs[:, r] = th * right[:, 0] - left[:, 0]
        if r > 0:
            sub[:, r] = lower
        else:
            rhs[:, r] -= lower * np.broadcast_to(gbar0, (K,))
        if r < M - 1:
            sup[:, r] = upper
        else:
            rhs[:, r] -= upper * np.broadcast_to(gbarm, (K,))
    return InterfaceSystem(s, sub, diag, sup, rhs)


def _banded(system, k):
    M = system.order
    ab = np.zeros((3, M), dtype=complex)
    ab[0, 1:] = system.sup[k, :-1]
    ab[1] = system.diag[k]
    ab[2, :-1] = system.sub[k, 1:]
    return solve_banded((1, 1), ab, system.rhs[k])


def solve(system: InterfaceSystem) -> np.ndarray:
    """Thomas elimination for every system in the batch; shape ``(K, m-1)``.

    Rows whose normwise backward error is not small are re-solved with
    partial pivoting.
    """
    x, zero_row = kernels.thomas(system.sub, system.diag, system.sup, system.rhs)
    bad = np.flatnonzero(zero_row >= 0)
    if bad.size:
        k = bad[0]
        raise InterfaceSolveError(
            f"zero pivot at interface {zero_row[k] + 1} for s={system.s[k]!r}")
    normA = (np.abs(system.diag) + np.abs(system.sub) + np.abs(system.sup)).max(axis=1)
    scale = normA * np.max(np.abs(x), axis=1) + np.max(np.abs(system.rhs), axis=1)
    r = system.abs_residual(x)
    backward = np.where(scale > 0, r / np.where(scale > 0, scale, 1.0), r)
    for k in np.flatnonzero(~(backward < _BACKWARD_TOL)):
        try:
            x[k] = _banded(system, k)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise InterfaceSolveError(f"interface system singular at s={system.s[k]!r}") from exc
    if not np.all(np.isfinite(x)):
        k = np.flatnonzero(~np.all(np.isfinite(x), axis=1))[0]
        raise InterfaceSolveError(f"non-finite interface transform at s={system.s[k]!r}")
    return x
