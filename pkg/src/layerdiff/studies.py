"""Convergence studies, cross-method comparison and conservation checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import trapezoid

from . import fdm
from .assembly import SolutionField, Solver, layer_grid, relative_error
from .classical import ClassicalError, ClassicalSolution
from .laplace import DEFAULT_ORDER, build_table
from .model import ProblemSpec, validate

DEFAULT_TOLERANCE = 1e-4


def _validated(problem):
    return validate(problem) if isinstance(problem, ProblemSpec) else problem


def fitted_order(Ns, eps):
    """``p`` in ``log eps ~ log eps_1 - p log N`` (least squares)."""
    Ns, eps = np.asarray(Ns, dtype=float), np.asarray(eps, dtype=float)
    if Ns.size < 2:
        return math.nan
    return -float(np.polyfit(np.log(Ns), np.log(eps), 1)[0])


# --------------------------------------------------------------------------
# references
# --------------------------------------------------------------------------

def common_time_step(times, target):
    """Largest step no bigger than ``target`` that divides every time exactly."""
    fr = [Fraction(float(t)).limit_denominator(10 ** 9) for t in times if t > 0]
    if not fr:
        return target
    g = fr[0]
    for f in fr[1:]:
        g = Fraction(math.gcd(g.numerator * f.denominator, f.numerator * g.denominator),
                     g.denominator * f.denominator)
    k = max(1, math.ceil(float(g) / target))
    return float(g) / k


def fdm_reference(problem, divisions, times, *, levels=4, base_intervals=None, steps=4000):
    """High-accuracy finite-difference field on ``divisions`` per layer.

    Time-independent boundary data use exact time integration and
    ``levels``-deep Richardson extrapolation; otherwise Crank-Nicolson on two
    grids plus one extrapolation step. Returns ``(field, estimate)`` with the
    estimate as an absolute error per time.
    """
    p = _validated(problem)
    times = np.asarray(times, dtype=float)
    if base_intervals is None:
        base_intervals = divisions * max(1, math.ceil(28 / divisions))
    if p.constant_boundaries:
        return fdm.extrapolated_reference(p, divisions, times, base_intervals, levels=levels)
    n = base_intervals * 4
    dt = common_time_step(times, times.max() / steps)
    coarse = fdm.restrict(fdm.solve_fdm(p, n, dt, times), divisions)
    fine = fdm.restrict(fdm.solve_fdm(p, 2 * n, dt / 2, times), divisions)
    u = tuple(f + (f - c) / 3.0 for c, f in zip(coarse.u, fine.u))
    est = fdm.richardson_error_estimate(coarse, fine, divisions)
    return SolutionField(fine.x, fine.t, u, fine.g, {"method": "fdm-cn-richardson"}), est


# --------------------------------------------------------------------------
# convergence in N
# --------------------------------------------------------------------------

@dataclass
class ConvergenceTable:
    times: np.ndarray
    Ns: tuple
    epsilon: np.ndarray           # (len(Ns), len(times))
    slope: np.ndarray             # same shape; fit over the trailing window ending at each N
    reference: str

    def rows(self):
        for k, t in enumerate(self.times):
            for j, N in enumerate(self.Ns):
                yield float(t), int(N), float(self.epsilon[j, k]), float(self.slope[j, k])

    @property
    def final_slope(self):
        return self.slope[-1]


def convergence_study(problem, Ns, times, *, reference="classical", divisions=5,
                      Np=DEFAULT_ORDER, classical_terms=150, window=None) -> ConvergenceTable:
    """``epsilon_N(t)`` of the semi-analytical solution against a reference."""
    p = _validated(problem)
    times = np.asarray(times, dtype=float)
    x = layer_grid(p, divisions + 1)
    if reference == "classical":
        if not p.constant_boundaries:
            raise ClassicalError("the classical reference needs time-independent boundary data: "
                                 "its steady state and eigen-expansion assume fixed g0, gm")
        ref = ClassicalSolution(p, classical_terms).evaluate(x, times)
    elif reference == "fdm":
        ref, _ = fdm_reference(p, divisions, times)
        x = ref.x
    else:
        raise ValueError(f"unknown reference {reference!r}")
    table = build_table(Np)
    eps = np.array([relative_error(ref, Solver(p, N, table=table).evaluate(x, times)) for N in Ns])
    slope = np.full(eps.shape, np.nan)
    w = len(Ns) if window is None else int(window)
    for j in range(1, len(Ns)):
        lo = max(0, j + 1 - w)
        if j - lo >= 1:
            for k in range(times.size):
                slope[j, k] = fitted_order(Ns[lo:j + 1], eps[lo:j + 1, k])
    return ConvergenceTable(times, tuple(int(N) for N in Ns), eps, slope, reference)


def classical_self_error(problem, Ns, times, *, divisions=5, reference_terms=80):
    """``epsilon_N`` of the classical series truncated at ``N`` terms vs ``reference_terms``."""
    p = _validated(problem)
    x = layer_grid(p, divisions + 1)
    cs = ClassicalSolution(p, max(reference_terms, max(Ns)))
    ref = cs.evaluate(x, times, terms=reference_terms)
    return np.array([relative_error(ref, cs.evaluate(x, times, terms=N)) for N in Ns])


# --------------------------------------------------------------------------
# cross-method comparison
# --------------------------------------------------------------------------

@dataclass
class CompareReport:
    times: np.ndarray
    difference: np.ndarray        # max |semi - fdm| / max |fdm|
    estimate: np.ndarray          # Richardson estimate, same scaling
    tolerance: np.ndarray
    settings: dict = field(default_factory=dict)
    mass: np.ndarray | None = None

    @property
    def passed(self):
        return self.difference < self.tolerance

    def rows(self):
        for k, t in enumerate(self.times):
            yield (float(t), float(self.difference[k]), float(self.estimate[k]),
                   float(self.tolerance[k]), bool(self.passed[k]))


def compare_with_fdm(problem, times, *, N=300, Np=DEFAULT_ORDER, intervals=200, dt=None,
                     divisions=10, floor=DEFAULT_TOLERANCE) -> CompareReport:
    """Semi-analytical field vs Crank-Nicolson on ``intervals`` and ``2 * intervals``.

    The tolerance per time is ``max(floor, 3 * estimate)``.
    """
    p = _validated(problem)
    times = np.asarray(times, dtype=float)
    if dt is None:
        dt = common_time_step(times, times.max() / 2000)
    coarse = fdm.solve_fdm(p, intervals, dt, times)
    fine = fdm.solve_fdm(p, 2 * intervals, dt / 2, times)
    est = fdm.richardson_error_estimate(coarse, fine, divisions)
    ref = fdm.restrict(fine, divisions)
    semi = Solver(p, N, Np).evaluate(ref.x, times)
    scale = ref.max_abs()
    diff = relative_error(ref, semi)
    rel_est = est / scale
    tol = np.maximum(floor, 3.0 * rel_est)
    mass = weighted_mass(p, semi_dense(p, N, Np, times)) if no_flux(p) else None
    return CompareReport(times, diff, rel_est, tol,
                         {"N": N, "Np": Np, "intervals": intervals, "dt": dt,
                          "divisions": divisions}, mass)


def no_flux(problem):
    """Both external ends are homogeneous Neumann, so the weighted mass is conserved."""
    p = _validated(problem)
    return all(bc.is_neumann and bc.g.constant_in_time and bc.g(0.0) == 0.0
               for bc in (p.left, p.right))


def semi_dense(problem, N, Np, times, points_per_layer=801):
    p = _validated(problem)
    return Solver(p, N, Np).evaluate(layer_grid(p, points_per_layer), times)


# --------------------------------------------------------------------------
# conservation
# --------------------------------------------------------------------------

def weighted_mass(problem, field: SolutionField):
    """``sum_i (gamma_i / D_i) int u_i dx`` per time, composite trapezoid on the field's points."""
    p = _validated(problem)
    w = p.gamma / p.D
    return sum(w[i] * trapezoid(field.u[i], field.x[i], axis=1) for i in range(p.m))


def mass_drift(masses):
    """``max_k |M_k - M_0| / |M_0|``."""
    masses = np.asarray(masses, dtype=float)
    return float(np.max(np.abs(masses - masses[0])) / abs(masses[0]))
