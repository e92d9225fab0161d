"""Per-layer eigenvalues and orthonormal eigenfunctions.

Each layer carries its own homogeneous problem ``-phi'' = lam^2 phi`` with
the external condition at an outer end and ``phi' = 0`` at every interface
end. Every case is written in one phase form

    phi(x) = cos(lam (x - l_left) - delta(lam)),   tan(delta) = a_left / (b_left lam)

which meets the left condition identically. The right condition turns into

    lam * width = delta(lam) + eps(lam) + n pi,     tan(eps) = a_right / (b_right lam)

Neumann ends have phase 0 and Dirichlet ends phase pi/2, so those
eigenvalues are explicit. A Robin end makes the phase depend on ``lam``. The
left side of the equation minus the right is then strictly increasing, and
each root sits alone in ``[n pi, (n + 1) pi] / width``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import ValidatedProblem

HALF_PI = 0.5 * math.pi


class EigenvalueError(RuntimeError):
    pass


def _end_kind(a, b):
    if a == 0.0:
        return "neumann"
    if b == 0.0:
        return "dirichlet"
    return "robin"


def _phase(a, b, lam):
    # atan2 keeps a/b -> inf and lam -> 0 well defined
    return np.arctan2(a, b * lam)


@dataclass(frozen=True)
class LayerBasis:
    left: float
    right: float
    kind: str                 # e.g. "dirichlet-neumann"
    end_left: tuple           # (a, b) of the homogeneous left condition
    end_right: tuple
    lam: np.ndarray           # eigenvalues, n = 0..N-1
    delta: np.ndarray         # left phase per eigenvalue
    norm: np.ndarray          # ||phi_n||_2
    at_left: np.ndarray       # phi_hat_n(left)
    at_right: np.ndarray      # phi_hat_n(right)

    @property
    def width(self):
        return self.right - self.left

    def __call__(self, x, n=None):
        """Normalised eigenfunctions at ``x``; shape ``x.shape + (N,)`` or ``x.shape``."""
        x = np.asarray(x, dtype=float)
        if n is None:
            arg = np.multiply.outer(x - self.left, self.lam) - self.delta
            return np.cos(arg) / self.norm
        return np.cos(self.lam[n] * (x - self.left) - self.delta[n]) / self.norm[n]

    def derivative(self, x, n=None):
        x = np.asarray(x, dtype=float)
        if n is None:
            arg = np.multiply.outer(x - self.left, self.lam) - self.delta
            return -self.lam * np.sin(arg) / self.norm
        return -self.lam[n] * np.sin(self.lam[n] * (x - self.left) - self.delta[n]) / self.norm[n]


@dataclass(frozen=True)
class EigenBasis:
    layers: tuple
    N: int

    def __getitem__(self, i):
        return self.layers[i]

    def __len__(self):
        return len(self.layers)

    def dump_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["layer", "n", "lambda", "norm"])
            for i, lb in enumerate(self.layers, start=1):
                for n in range(self.N):
                    w.writerow([i, n, repr(float(lb.lam[n])), repr(float(lb.norm[n]))])


def _robin_root(n, width, aL, bL, aR, bR, layer):
    def h(lam):
        return lam * width - _phase(aL, bL, lam) - _phase(aR, bR, lam) - n * math.pi

    lo, hi = n * math.pi / width, (n + 1) * math.pi / width
    flo, fhi = h(lo), h(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo > 0 or fhi < 0:
        raise EigenvalueError(
            f"layer {layer}, n={n}: no sign change on bracket [{lo!r}, {hi!r}]")
    try:
        root = brentq(h, lo, hi, xtol=1e-15 * max(hi, 1.0), rtol=4 * np.finfo(float).eps,
                      maxiter=200)
    except (RuntimeError, ValueError) as exc:
        raise EigenvalueError(
            f"layer {layer}, n={n}: root finding failed on [{lo!r}, {hi!r}]: {exc}") from exc
    return root


def _norm(lam, delta, width):
    out = np.empty_like(lam)
    zero = lam == 0.0
    out[zero] = math.sqrt(width)
    lz = lam[~zero]
    dz = delta[~zero]
    sq = 0.5 * width + (np.sin(2.0 * (lz * width - dz)) + np.sin(2.0 * dz)) / (4.0 * lz)
    out[~zero] = np.sqrt(sq)
    return out


def layer_basis(left, right, end_left, end_right, N, layer=1) -> LayerBasis:
    aL, bL = end_left
    aR, bR = end_right
    kl, kr = _end_kind(aL, bL), _end_kind(aR, bR)
    width = right - left
    n = np.arange(N)
    if kl != "robin" and kr != "robin":
        offset = (HALF_PI if kl == "dirichlet" else 0.0) + (HALF_PI if kr == "dirichlet" else 0.0)
        lam = (offset + n * math.pi) / width
    else:
        lam = np.array([_robin_root(k, width, aL, bL, aR, bR, layer) for k in range(N)])
    delta = _phase(aL, bL, lam) if kl != "neumann" else np.zeros(N)
    norm = _norm(lam, delta, width)
    at_left = np.cos(-delta) / norm
    at_right = np.cos(lam * width - delta) / norm
    return LayerBasis(float(left), float(right), f"{kl}-{kr}", (float(aL), float(bL)),
                      (float(aR), float(bR)), lam, delta, norm, at_left, at_right)


def build_basis(problem: ValidatedProblem, N: int) -> EigenBasis:
    if N < 1:
        raise ValueError("N must be at least 1")
    m = problem.m
    l = problem.l
    neumann = (0.0, 1.0)
    layers = []
    for i in range(m):
        end_left = (problem.left.a, problem.left.b) if i == 0 else neumann
        end_right = (problem.right.a, problem.right.b) if i == m - 1 else neumann
        layers.append(layer_basis(l[i], l[i + 1], end_left, end_right, N, layer=i + 1))
    return EigenBasis(tuple(layers), N)


def eval_eigenfunction(basis: EigenBasis, i, n, x):
    """``phi_hat_{i,n}(x)`` with ``i`` counted from 1 as in the layer numbering."""
    lb = basis.layers[i - 1]
    x = np.asarray(x, dtype=float)
    tol = 1e-12 * max(1.0, abs(lb.left), abs(lb.right))
    if np.any(x < lb.left - tol) or np.any(x > lb.right + tol):
        raise ValueError(f"x outside layer {i} = [{lb.left}, {lb.right}]")
    return lb(x, n)
