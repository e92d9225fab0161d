"""Separation-of-variables solution for time-independent external data.

    u_i(x, t) = w_i(x) + sum_n c_n exp(-lam_n^2 t) phi_{i,n}(x)

``w`` is the piecewise-affine steady state. The global eigenfunctions are
written per layer as

    phi_i(y) = zeta_i sin(k_i y) / k_i + xi_i cos(k_i y),   k_i = lam / sqrt(D_i),  y = x - l_{i-1}

(the ``1/k`` keeps the matrix below non-degenerate as ``lam -> 0``). The
homogeneous external and interface conditions give ``A(lam) (zeta, xi) = 0``
with ``A`` of order ``2m``; the eigenvalues are the positive roots of
``det A``. Eigenfunctions are orthogonal under the weight
``p_i = gamma_i / D_i * prod_{k<i} theta_k``.

Reference-oracle code: all integrals use composite Gauss-Legendre rules so
nothing is shared with the semi-analytical path.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .assembly import SolutionField
from .model import ProblemSpec, ValidatedProblem, validate

MAX_LAYERS = 6
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


class ClassicalError(RuntimeError):
    pass


class MissedRootWarning(UserWarning):
    pass


def _checked(problem):
    if isinstance(problem, ProblemSpec):
        problem = validate(problem)
    if problem.m > MAX_LAYERS:
        raise ClassicalError(
            f"classical solution limited to m <= {MAX_LAYERS} layers (got {problem.m}); "
            "the determinant root search degrades for many layers")
    if problem.left.is_neumann and problem.right.is_neumann:
        raise ClassicalError("both external ends are Neumann: the steady state is only "
                             "determined up to a constant")
    return problem


def weights(problem):
    """Orthogonality weight ``p_i`` per layer."""
    theta = np.concatenate([[1.0], np.cumprod(problem.theta)])
    return problem.gamma / problem.D * theta


# --------------------------------------------------------------------------
# steady state
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SteadyState:
    """``w_i(x) = A[i] + B[i] (x - l_{i-1})``."""

    l: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __call__(self, i, x):
        return self.A[i] + self.B[i] * (np.asarray(x, dtype=float) - self.l[i])


def steady_state(problem) -> SteadyState:
    problem = _checked(problem)
    if not problem.constant_boundaries:
        raise ClassicalError("steady state needs time-independent boundary data")
    m = problem.m
    l, gam = problem.l, problem.gamma
    w = np.diff(l)
    M = np.zeros((2 * m, 2 * m))
    r = np.zeros(2 * m)
    M[0, 0], M[0, 1] = problem.left.a, -problem.left.b
    r[0] = problem.left.g(0.0)
    for i in range(m - 1):
        A, B, A1, B1 = 2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3
        M[2 * i + 1, A] = 1.0
        M[2 * i + 1, B] = w[i] + gam[i] * problem.inv_H[i]
        M[2 * i + 1, A1] = -problem.theta[i]
        M[2 * i + 2, B] = gam[i]
        M[2 * i + 2, B1] = -gam[i + 1]
    M[-1, -2] = problem.right.a
    M[-1, -1] = problem.right.a * w[-1] + problem.right.b
    r[-1] = problem.right.g(0.0)
    sol = np.linalg.solve(M, r)
    return SteadyState(l, sol[0::2], sol[1::2])


# --------------------------------------------------------------------------
# global eigenproblem
# --------------------------------------------------------------------------

def _sin_over_k(k, y):
    return y * np.sinc(k * y / math.pi)


def coefficient_matrix(problem, lam):
    """``A(lam)`` with every row scaled to unit max-norm."""
    m = problem.m
    l, D, gam = problem.l, problem.D, problem.gamma
    A = np.zeros((2 * m, 2 * m))
    k = lam / np.sqrt(D)
    w = np.diff(l)
    S = _sin_over_k(k, w)           # sin(k w)/k
    C = np.cos(k * w)
    kS = k * np.sin(k * w)
    aL, bL = problem.left.a, problem.left.b
    aR, bR = problem.right.a, problem.right.b
    A[0, 0], A[0, 1] = -bL, aL                       # phi'(l0) = zeta, phi(l0) = xi
    for i in range(m - 1):
        z, x, z1, x1 = 2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3
        c = gam[i] * problem.inv_H[i]
        # (gamma/H) phi_i' + phi_i - theta phi_{i+1} = 0 at l_i
        A[2 * i + 1, z] = c * C[i] + S[i]
        A[2 * i + 1, x] = -c * kS[i] + C[i]
        A[2 * i + 1, x1] = -problem.theta[i]
        # gamma_i phi_i' - gamma_{i+1} phi_{i+1}' = 0 at l_i
        A[2 * i + 2, z] = gam[i] * C[i]
        A[2 * i + 2, x] = -gam[i] * kS[i]
        A[2 * i + 2, z1] = -gam[i + 1]
    A[-1, -2] = aR * S[-1] + bR * C[-1]
    A[-1, -1] = aR * C[-1] - bR * kS[-1]
    return A / np.max(np.abs(A), axis=1, keepdims=True)


def characteristic(problem, lam):
    """Row-scaled ``det A(lam)``; its positive roots are the eigenvalues."""
    return float(np.linalg.det(coefficient_matrix(problem, lam)))


@dataclass(frozen=True)
class GlobalEigenpair:
    lam: float
    zeta: np.ndarray
    xi: np.ndarray
    det_residual: float

    def __call__(self, problem, i, x):
        k = self.lam / math.sqrt(problem.D[i])
        y = np.asarray(x, dtype=float) - problem.l[i]
        return self.zeta[i] * _sin_over_k(k, y) + self.xi[i] * np.cos(k * y)


def _nodes(problem, i, kmax):
    """Composite Gauss-Legendre nodes/weights on layer ``i``, about one panel per half-wave."""
    a, b = problem.l[i], problem.l[i + 1]
    panels = max(4, int(math.ceil(kmax * (b - a) / math.pi)) + 2)
    edges = np.linspace(a, b, panels + 1)
    h = np.diff(edges)[:, None]
    x = (edges[:-1, None] + 0.5 * h * (_GL_X + 1.0)).ravel()
    wts = (0.5 * h * _GL_W).ravel()
    return x, wts


def weighted_inner(problem, f, g, kmax):
    """``sum_i int p_i f_i g_i dx`` where ``f(i, x)``, ``g(i, x)`` are callables."""
    p = weights(problem)
    total = 0.0
    for i in range(problem.m):
        x, w = _nodes(problem, i, kmax)
        total += p[i] * np.dot(w, f(i, x) * g(i, x))
    return total


def global_eigenvalues(problem, count) -> list:
    """First ``count`` eigenpairs, normalised in the ``p``-weighted norm."""
    problem = _checked(problem)
    D, w = problem.D, np.diff(problem.l)
    spacing = np.pi * np.sqrt(D) / w
    step = spacing.min() / 20.0
    gap_limit = 2.0 * spacing.max()

    def f(lam):
        return characteristic(problem, lam)

    roots = []
    lo, flo = 0.0, f(0.0)
    if flo == 0.0:
        raise ClassicalError("lam = 0 is an eigenvalue; not supported by this oracle")
    while len(roots) < count:
        hi = lo + step
        fhi = f(hi)
        if fhi == 0.0:
            hi = np.nextafter(hi, np.inf)
            fhi = f(hi)
        if np.sign(fhi) != np.sign(flo):
            try:
                root = brentq(f, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)
            except (RuntimeError, ValueError) as exc:
                raise ClassicalError(f"bisection failed on [{lo!r}, {hi!r}]: {exc}") from exc
            prev = roots[-1] if roots else 0.0
            if root - prev > gap_limit:
                warnings.warn(f"possible missed eigenvalue in ({prev!r}, {root!r})",
                              MissedRootWarning, stacklevel=2)
            roots.append(root)
        lo, flo = hi, fhi

    pairs = []
    for lam in roots:
        A = coefficient_matrix(problem, lam)
        _, _, Vh = np.linalg.svd(A)
        v = Vh[-1]
        pair = GlobalEigenpair(lam, v[0::2].copy(), v[1::2].copy(), abs(np.linalg.det(A)))
        kmax = lam / math.sqrt(D.min())
        norm = math.sqrt(weighted_inner(problem, lambda i, x: pair(problem, i, x),
                                        lambda i, x: pair(problem, i, x), kmax))
        pairs.append(GlobalEigenpair(lam, pair.zeta / norm, pair.xi / norm, pair.det_residual))
    return pairs


# --------------------------------------------------------------------------
# series solution
# --------------------------------------------------------------------------

class ClassicalSolution:
    """Precomputed eigenpairs and series coefficients for repeated evaluation."""

    def __init__(self, problem, count=40):
        problem = _checked(problem)
        self.problem = problem
        self.steady = steady_state(problem)
        self.pairs = global_eigenvalues(problem, count)
        kmax = self.pairs[-1].lam / math.sqrt(problem.D.min()) if self.pairs else 1.0
        # extra panels resolve sharp initial data as well as the top mode
        kmax = max(kmax, 200.0 / np.diff(problem.l).min())

        def ftilde(i, x):
            return problem.initial[i](x) - self.steady(i, x)

        self.coef = np.array([weighted_inner(problem, ftilde,
                                             lambda i, x, e=e: e(problem, i, x), kmax)
                              for e in self.pairs])

    def evaluate(self, x, times, terms=None) -> SolutionField:
        """Series value; ``terms`` truncates to the first that many eigenpairs."""
        p = self.problem
        x = tuple(np.asarray(xi, dtype=float) for xi in x)
        times = np.asarray(times, dtype=float).ravel()
        pairs = self.pairs if terms is None else self.pairs[:terms]
        lam = np.array([e.lam for e in pairs])
        u = []
        for i in range(p.m):
            Phi = np.stack([e(p, i, x[i]) for e in pairs], axis=-1).reshape(x[i].size, len(pairs))
            decay = np.exp(-np.multiply.outer(times, lam ** 2)) * self.coef[:len(pairs)]
            u.append(self.steady(i, x[i])[None, :] + decay @ Phi.T)
        g = np.full((times.size, p.m + 1), np.nan)
        g[:, 0], g[:, -1] = p.left.g(0.0), p.right.g(0.0)
        return SolutionField(x, times, tuple(u), g, {"method": "classical", "N": len(pairs)})


def evaluate_classical(problem, x, times, count=40) -> SolutionField:
    problem = problem if isinstance(problem, ValidatedProblem) else validate(problem)
    if not problem.constant_boundaries:
        raise ClassicalError("the classical solution needs time-independent boundary data")
    return ClassicalSolution(problem, count).evaluate(x, times)
