"""Boundary liftings psi_{i,1}, psi_{i,2} and projection constants beta_{i,k,n}.

The lifting ``w_i = g_{i-1}(t) psi_{i,1}(x) + g_i(t) psi_{i,2}(x)`` absorbs
the flux (or external) data of layer ``i`` so the remainder has homogeneous
end conditions. ``psi_{i,1}`` carries unit load at the left end and none at
the right; ``psi_{i,2}`` the reverse.

    beta_1 = <psi_1, phi_hat>      beta_2 = <psi_2, phi_hat>
    beta_3 = <psi_1'', phi_hat>    beta_4 = <psi_2'', phi_hat>
    beta_5 = <f, phi_hat>
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate

from .eigenbasis import EigenBasis, LayerBasis
from .model import ValidatedProblem

# below this lam*width the integration-by-parts closed form loses digits
_SMALL_ARG = 1.0
_GL_X, _GL_W = np.polynomial.legendre.leggauss(40)


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class LiftingPair:
    psi1: Polynomial
    psi2: Polynomial

    @property
    def d2psi1(self):
        return float(self.psi1.deriv(2)(0.0)) if self.psi1.degree() >= 2 else 0.0

    @property
    def d2psi2(self):
        return float(self.psi2.deriv(2)(0.0)) if self.psi2.degree() >= 2 else 0.0


def _single_layer(l0, l1, aL, bL, aR, bR):
    w = l1 - l0
    if aL == 0.0 and aR == 0.0:
        # both ends Neumann: no affine function can carry independent fluxes
        psi1 = Polynomial([l1 * l1, -2.0 * l1, 1.0]) / (2.0 * bL * w)      # (x - l1)^2
        psi2 = Polynomial([l0 * l0, -2.0 * l0, 1.0]) / (2.0 * bR * w)      # (x - l0)^2
        return LiftingPair(psi1, psi2)
    det = aL * (aR * w + bR) + bL * aR
    # affine A + B (x - l0): left load (1, 0) then (0, 1)
    A1, B1 = (aR * w + bR) / det, -aR / det
    A2, B2 = bL / det, aL / det
    psi1 = Polynomial([A1 - B1 * l0, B1])
    psi2 = Polynomial([A2 - B2 * l0, B2])
    return LiftingPair(psi1, psi2)


def build_liftings(problem: ValidatedProblem) -> tuple:
    m = problem.m
    l = problem.l
    g = problem.gamma
    aL, bL = problem.left.a, problem.left.b
    aR, bR = problem.right.a, problem.right.b
    if m == 1:
        return (_single_layer(l[0], l[1], aL, bL, aR, bR),)

    out = []
    for i in range(m):
        lo, hi, gam = l[i], l[i + 1], g[i]
        w = hi - lo
        if i == 0:
            if aL == 0.0:
                psi1 = Polynomial([0.0, -2.0 * hi, 1.0]) / (2.0 * bL * w)
                psi2 = Polynomial([0.0, -2.0 * lo, 1.0]) / (2.0 * gam * w)
            else:
                psi1 = Polynomial([1.0 / aL])
                psi2 = Polynomial([(bL - aL * lo) / (gam * aL), 1.0 / gam])
        elif i == m - 1:
            if aR == 0.0:
                psi1 = Polynomial([0.0, 2.0 * hi, -1.0]) / (2.0 * gam * w)
                psi2 = Polynomial([0.0, -2.0 * lo, 1.0]) / (2.0 * bR * w)
            else:
                psi1 = Polynomial([(-aR * hi - bR) / (gam * aR), 1.0 / gam])
                psi2 = Polynomial([1.0 / aR])
        else:
            psi1 = Polynomial([0.0, 2.0 * hi, -1.0]) / (2.0 * gam * w)
            psi2 = Polynomial([0.0, -2.0 * lo, 1.0]) / (2.0 * gam * w)
        out.append(LiftingPair(psi1, psi2))
    return tuple(out)


# --------------------------------------------------------------------------
# projections
# --------------------------------------------------------------------------

def _shifted(poly: Polynomial, origin):
    """Coefficients of ``poly(origin + y)`` in ascending powers of ``y``."""
    return poly(Polynomial([origin, 1.0])).coef


def project_polynomial(poly: Polynomial, lb: LayerBasis) -> np.ndarray:
    """Exact ``int poly * phi_hat_n dx`` over the layer for every ``n``."""
    c = _shifted(poly, lb.left)
    w = lb.width
    lam, delta, norm = lb.lam, lb.delta, lb.norm
    out = np.empty_like(lam)

    small = lam * w < _SMALL_ARG
    if np.any(small):
        y = 0.5 * w * (_GL_X + 1.0)
        py = np.polynomial.polynomial.polyval(y, c)
        arg = np.multiply.outer(lam[small], y) - delta[small, None]
        out[small] = 0.5 * w * (np.cos(arg) * py) @ _GL_W

    big = ~small
    if np.any(big):
        lz = lam[big]
        # int_0^w p(y) e^{i lam y} dy = [e^{i lam y} sum_k (-1)^k p^(k)(y)/(i lam)^(k+1)]_0^w
        ilam = 1j * lz
        acc_w = np.zeros_like(ilam)
        acc_0 = np.zeros_like(ilam)
        deriv = c.copy()
        sign = 1.0
        power = ilam
        while deriv.size and np.any(deriv != 0.0):
            acc_w += sign * np.polynomial.polynomial.polyval(w, deriv) / power
            acc_0 += sign * deriv[0] / power
            deriv = np.polynomial.polynomial.polyder(deriv)
            sign = -sign
            power = power * ilam
        integral = np.exp(1j * lz * w) * acc_w - acc_0
        out[big] = np.real(np.exp(-1j * delta[big]) * integral)
    return out / norm


def project_function(func, lb: LayerBasis, *, layer=None, tol=1e-13) -> np.ndarray:
    """``int f * phi_hat_n dx`` by adaptive (oscillation-weighted) quadrature."""
    a, w = lb.left, lb.width
    out = np.empty_like(lb.lam)

    def shifted(y):
        return float(func(np.asarray(a + y)))

    for n, (lam, delta) in enumerate(zip(lb.lam, lb.delta)):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                if lam == 0.0:
                    val, _ = integrate.quad(shifted, 0.0, w, epsabs=tol, epsrel=1e-13, limit=400)
                    val *= math.cos(delta)
                else:
                    cpart = spart = 0.0
                    if math.cos(delta) != 0.0:
                        cpart, _ = integrate.quad(shifted, 0.0, w, weight="cos", wvar=lam,
                                                  epsabs=tol, epsrel=1e-13, limit=400)
                    if abs(math.sin(delta)) > 1e-300:
                        spart, _ = integrate.quad(shifted, 0.0, w, weight="sin", wvar=lam,
                                                  epsabs=tol, epsrel=1e-13, limit=400)
                    val = math.cos(delta) * cpart + math.sin(delta) * spart
            except integrate.IntegrationWarning as exc:
                raise QuadratureError(f"layer {layer}, n={n}: {exc}") from exc
        out[n] = val
    return out / lb.norm


@dataclass(frozen=True)
class BetaTable:
    """``beta[k-1][i]`` is the length-N array of beta_{i+1,k,n}."""

    beta1: np.ndarray
    beta2: np.ndarray
    beta3: np.ndarray
    beta4: np.ndarray
    beta5: np.ndarray

    def __getitem__(self, k):
        return (self.beta1, self.beta2, self.beta3, self.beta4, self.beta5)[k - 1]


def compute_betas(basis: EigenBasis, liftings, initial) -> BetaTable:
    m = len(basis)
    N = basis.N
    b = np.zeros((5, m, N))
    for i, (lb, lift, f) in enumerate(zip(basis.layers, liftings, initial)):
        b[0, i] = project_polynomial(lift.psi1, lb)
        b[1, i] = project_polynomial(lift.psi2, lb)
        ones = project_polynomial(Polynomial([1.0]), lb)
        b[2, i] = lift.d2psi1 * ones
        b[3, i] = lift.d2psi2 * ones
        poly = f.polynomial()
        b[4, i] = project_polynomial(poly, lb) if poly is not None else \
            project_function(f, lb, layer=i + 1)
    return BetaTable(*b)
