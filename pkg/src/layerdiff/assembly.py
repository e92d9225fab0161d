"""Time-domain semi-analytical solution.

For every requested time ``t`` the interface transforms are solved at the
inversion nodes ``s_k = z_k / t``; those same values feed both the
recovery of ``g_i(t)`` and every filtered inversion inside

    c_{i,n}(t) = beta5 e^{-q t} - g_{i-1}(t) beta1 - g_i(t) beta2
                 + D (beta3 + lam^2 beta1) L^{-1}{gbar_{i-1} / (s + q)}
                 + D (beta4 + lam^2 beta2) L^{-1}{gbar_i / (s + q)},     q = D lam^2

and the field is ``g_{i-1} psi_{i,1} + g_i psi_{i,2} + sum_n c_{i,n} phi_hat_{i,n}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import interface_solver, kernels
from .eigenbasis import build_basis
from .laplace import DEFAULT_ORDER, InversionTable, build_table
from .liftings import build_liftings, compute_betas
from .model import ProblemSpec, ValidatedProblem, validate

DEFAULT_N = 50


class EvaluationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class InterfaceValues:
    """Interface data at one time.

    ``gbar[j, k]`` is the transform of ``g_j`` at node ``s[k]`` (``j = 0..m``);
    ``g[j]`` is ``g_j(t)``.
    """

    t: float
    s: np.ndarray
    gbar: np.ndarray
    g: np.ndarray


@dataclass
class SolutionField:
    """``u[i]`` has shape ``(len(t), len(x[i]))``; ``g`` has shape ``(len(t), m + 1)``."""

    x: tuple
    t: np.ndarray
    u: tuple
    g: np.ndarray
    settings: dict = field(default_factory=dict)

    @property
    def m(self):
        return len(self.x)

    def rows(self):
        """``(layer, x, t, u)`` tuples, time outermost, then layer, then x."""
        for k, tk in enumerate(self.t):
            for i in range(self.m):
                for j, xj in enumerate(self.x[i]):
                    yield i + 1, float(xj), float(tk), float(self.u[i][k, j])

    def max_abs(self):
        """``max_{i,j} |u|`` per time."""
        return np.max(np.stack([np.max(np.abs(ui), axis=1) for ui in self.u]), axis=0)


def relative_error(reference: SolutionField, approx: SolutionField) -> np.ndarray:
    """``max |u_ref - u| / max |u_ref|`` over all layers and points, per time."""
    if reference.m != approx.m or not np.array_equal(reference.t, approx.t) or any(
            not np.array_equal(a, b) for a, b in zip(reference.x, approx.x)):
        raise ValueError("grid mismatch between reference and approximation")
    diff = np.max(np.stack([np.max(np.abs(a - b), axis=1)
                            for a, b in zip(reference.u, approx.u)]), axis=0)
    return diff / reference.max_abs()


def layer_grid(problem, points_per_layer=101):
    """Equally spaced points on each layer, endpoints included."""
    l = problem.l if isinstance(problem, ValidatedProblem) else np.asarray(problem)
    return tuple(np.linspace(l[i], l[i + 1], points_per_layer) for i in range(len(l) - 1))


class Solver:
    """Semi-analytical solver bound to one problem and one ``(N, N_p)`` choice."""

    def __init__(self, problem, N=DEFAULT_N, Np=DEFAULT_ORDER, table: InversionTable | None = None):
        if isinstance(problem, ProblemSpec):
            problem = validate(problem)
        self.problem = problem
        self.N = int(N)
        self.table = build_table(Np) if table is None else table
        self.basis = build_basis(problem, self.N)
        self.liftings = build_liftings(problem)
        self.betas = compute_betas(self.basis, self.liftings, problem.initial)
        self.data = interface_solver.prepare(problem, self.basis, self.liftings, self.betas)
        D = problem.D
        lam2 = [lb.lam ** 2 for lb in self.basis.layers]
        self._q = [D[i] * lam2[i] for i in range(problem.m)]
        self._A2 = [D[i] * (self.betas.beta3[i] + lam2[i] * self.betas.beta1[i]) for i in range(problem.m)]
        self._A3 = [D[i] * (self.betas.beta4[i] + lam2[i] * self.betas.beta2[i]) for i in range(problem.m)]

    @property
    def settings(self):
        return {"N": self.N, "Np": self.table.order, "table_source": self.table.source,
                "backend": kernels.BACKEND}

    # -- interface functions ------------------------------------------------

    def interface_values_at(self, t) -> InterfaceValues:
        if not t > 0:
            raise ValueError("interface values need t > 0")
        t = float(t)
        p = self.problem
        s = self.table.poles / t
        m = p.m
        gbar = np.empty((m + 1, s.size), dtype=complex)
        gbar[0] = p.left.g.laplace(s)
        gbar[m] = p.right.g.laplace(s)
        if m > 1:
            system = interface_solver.assemble(s, self.data, gbar[0], gbar[m])
            gbar[1:m] = interface_solver.solve(system).T
        g = np.empty(m + 1)
        g[0] = p.left.g(t)
        g[m] = p.right.g(t)
        if m > 1:
            g[1:m] = -2.0 * np.real(gbar[1:m] @ self.table.residues) / t
        return InterfaceValues(t, s, gbar, g)

    # -- coefficients ---------------------------------------------------------

    def coefficients(self, t, iv: InterfaceValues | None = None):
        """``c_{i,n}(t)`` for every layer; a list of length-``N`` arrays."""
        iv = self.interface_values_at(t) if iv is None else iv
        t = iv.t
        weights = iv.gbar * self.table.residues       # c_k gbar_j(z_k / t)
        out = []
        b = self.betas
        for i in range(self.problem.m):
            q = self._q[i]
            F = kernels.filtered_sums(weights[i:i + 2], self.table.poles, q, t)
            c = (b.beta5[i] * np.exp(-q * t) - iv.g[i] * b.beta1[i] - iv.g[i + 1] * b.beta2[i]
                 + self._A2[i] * F[0] + self._A3[i] * F[1])
            out.append(c)
        return out

    def coefficient(self, i, n, t):
        """Single ``c_{i,n}(t)`` with ``i`` counted from 1."""
        return float(self.coefficients(t)[i - 1][n])

    # -- field ----------------------------------------------------------------

    def evaluate(self, x, times, derivative=False) -> SolutionField:
        """Field on per-layer points ``x`` (sequence of arrays) at ``times``.

        ``t = 0`` returns the initial data verbatim; interior interface values
        are then undefined and reported as NaN. With ``derivative=True`` the
        field holds ``du/dx`` instead (``t = 0`` is then rejected).
        """
        p = self.problem
        m = p.m
        x = tuple(np.asarray(xi, dtype=float) for xi in x)
        if len(x) != m:
            raise ValueError(f"need point sets for {m} layers, got {len(x)}")
        times = np.asarray(times, dtype=float).ravel()
        if np.any(times < 0) or (derivative and np.any(times == 0)):
            raise ValueError("times must be non-negative (positive for derivatives)")
        if derivative:
            phis = [self.basis.layers[i].derivative(x[i]).reshape(x[i].size, self.N) for i in range(m)]
            psi = [(self.liftings[i].psi1.deriv()(x[i]), self.liftings[i].psi2.deriv()(x[i]))
                   for i in range(m)]
        else:
            phis = [self.basis.layers[i](x[i]).reshape(x[i].size, self.N) for i in range(m)]
            psi = [(self.liftings[i].psi1(x[i]), self.liftings[i].psi2(x[i])) for i in range(m)]
        u = [np.empty((times.size, xi.size)) for xi in x]
        g = np.empty((times.size, m + 1))
        for k, t in enumerate(times):
            if t == 0.0:
                for i in range(m):
                    u[i][k] = p.initial[i](x[i])
                g[k] = np.nan
                g[k, 0], g[k, m] = p.left.g(0.0), p.right.g(0.0)
                continue
            iv = self.interface_values_at(t)
            coef = self.coefficients(t, iv)
            g[k] = iv.g
            for i in range(m):
                series = kernels.series_eval(coef[i], phis[i])[0]
                u[i][k] = iv.g[i] * psi[i][0] + iv.g[i + 1] * psi[i][1] + series
                if not np.all(np.isfinite(u[i][k])):
                    j = int(np.flatnonzero(~np.isfinite(u[i][k]))[0])
                    raise EvaluationError(
                        f"non-finite value in layer {i + 1} at x={x[i][j]!r}, t={t!r}")
        settings = dict(self.settings, derivative=True) if derivative else self.settings
        return SolutionField(x, times, tuple(u), g, settings)


def solve(problem, x, times, N=DEFAULT_N, Np=DEFAULT_ORDER) -> SolutionField:
    """One-shot convenience wrapper around :class:`Solver`."""
    return Solver(problem, N=N, Np=Np).evaluate(x, times)
