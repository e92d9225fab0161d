"""Finite-difference reference solver.

Second-order central differences on a uniform grid per layer, half-cell flux
balances at the external ends and at interfaces, two unknowns per interface
when ``H`` is finite (left and right limits) and one shared unknown
``u(l-) = theta u(l+)`` when ``H`` is infinite. Rows of layer ``i`` are
scaled by ``prod_{k<i} theta_k``, which makes the stiffness matrix symmetric
and the mass matrix diagonal:

    M du/dt = K u + b0 g0(t) + bm gm(t)

Time stepping is Crank-Nicolson with a short backward-Euler start
(Rannacher) to damp incompatible initial data. For time-independent
boundary data an exact-in-time variant expands the transient in the slow
eigenmodes of ``M^{-1/2} K M^{-1/2}`` and leaves only the spatial error,
which is what the high-accuracy Richardson reference relies on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh, splu

from .assembly import SolutionField
from .model import ProblemSpec, ValidatedProblem, validate


class FDMError(RuntimeError):
    pass


@dataclass
class Discretization:
    """Assembled semi-discrete system.

    ``index[i][j]`` is the unknown behind node ``j`` of layer ``i`` (-1 for an
    eliminated Dirichlet node) and ``factor[i][j]`` the multiplier, so the node
    value is ``factor * U[index]``.
    """

    problem: ValidatedProblem
    intervals: tuple
    x: tuple
    index: tuple
    factor: tuple
    M: np.ndarray
    K: sparse.csr_matrix
    b0: np.ndarray
    bm: np.ndarray
    row_scale: np.ndarray

    @property
    def size(self):
        return self.M.size

    def forcing(self, t):
        p = self.problem
        return self.b0 * p.left.g(t) + self.bm * p.right.g(t)

    def nodes(self, U, t):
        """Node values per layer from the unknown vector ``U``."""
        p = self.problem
        out = []
        for i in range(p.m):
            idx, fac = self.index[i], self.factor[i]
            vals = fac * U[np.maximum(idx, 0)]
            if i == 0 and idx[0] < 0:
                vals[0] = p.left.g(t) / p.left.a
            if i == p.m - 1 and idx[-1] < 0:
                vals[-1] = p.right.g(t) / p.right.a
            out.append(vals)
        return out

    def initial_vector(self):
        p = self.problem
        w = p.gamma / p.D
        h = np.array([np.diff(xi)[0] for xi in self.x])
        U = np.zeros(self.size)
        for i in range(p.m):
            f = p.initial[i](self.x[i])
            sel = self.index[i] >= 0
            U[self.index[i][sel]] = f[sel] / self.factor[i][sel]
        # shared interface unknowns: blend the one-sided limits so the physical
        # half-cell masses match (an O(h) error at each interface otherwise)
        for i in range(p.m - 1):
            if math.isinf(p.H[i]):
                fl = p.initial[i](np.array([p.l[i + 1]]))[0]
                fr = p.initial[i + 1](np.array([p.l[i + 1]]))[0]
                a, c = w[i] * h[i], w[i + 1] * h[i + 1]
                U[self.index[i + 1][0]] = (a * fl + c * fr) / (p.theta[i] * a + c)
        return U

    def mass(self, U):
        """Discrete ``sum_i (gamma_i / D_i) int u_i``, conserved without boundary flux."""
        return float(np.dot(self.M / self.row_scale, U))


def discretize(problem, intervals) -> Discretization:
    """``intervals`` is an int (same for every layer) or one int per layer."""
    if isinstance(problem, ProblemSpec):
        problem = validate(problem)
    p = problem
    m = p.m
    intervals = (int(intervals),) * m if np.ndim(intervals) == 0 else tuple(int(n) for n in intervals)
    if len(intervals) != m or min(intervals) < 2:
        raise ValueError("need at least 2 intervals in every layer")
    x = tuple(np.linspace(p.l[i], p.l[i + 1], intervals[i] + 1) for i in range(m))
    h = np.diff(p.l) / np.array(intervals)
    w = p.gamma / p.D
    P = np.concatenate([[1.0], np.cumprod(p.theta)])

    index = [np.full(n + 1, -1, dtype=np.intp) for n in intervals]
    factor = [np.ones(n + 1) for n in intervals]
    count = 0
    for i in range(m):
        for j in range(intervals[i] + 1):
            if i == 0 and j == 0 and p.left.is_dirichlet:
                continue
            if i == m - 1 and j == intervals[i] and p.right.is_dirichlet:
                continue
            if j == intervals[i] and i < m - 1 and math.isinf(p.H[i]):
                continue                                 # linked below
            index[i][j] = count
            count += 1
    for i in range(m - 1):
        if math.isinf(p.H[i]):
            index[i][-1] = index[i + 1][0]
            factor[i][-1] = p.theta[i]

    M = np.zeros(count)
    scale_of = np.empty(count)
    for i in range(m):
        scale_of[index[i][index[i] >= 0]] = P[i]
    rows, cols, vals = [], [], []
    b0 = np.zeros(count)
    bm = np.zeros(count)

    def add(row, i, j, coef):
        k = index[i][j]
        if k < 0:
            if i == 0 and j == 0:
                b0[row] += coef / p.left.a
            else:
                bm[row] += coef / p.right.a
            return
        rows.append(row)
        cols.append(k)
        vals.append(coef * factor[i][j])

    def interior_flux(row, i, j_from, j_to, scale):
        # scale * gamma (u_to - u_from) / h
        c = scale * p.gamma[i] / h[i]
        add(row, i, j_to, c)
        add(row, i, j_from, -c)

    for i in range(m):
        n = intervals[i]
        for j in range(1, n):
            r = index[i][j]
            M[r] = P[i] * w[i] * h[i]
            interior_flux(r, i, j, j - 1, P[i])
            interior_flux(r, i, j, j + 1, P[i])

    # external ends
    if not p.left.is_dirichlet:
        r = index[0][0]
        M[r] += P[0] * w[0] * h[0] / 2
        interior_flux(r, 0, 0, 1, P[0])
        c = P[0] * p.gamma[0] / p.left.b
        add(r, 0, 0, -c * p.left.a)
        b0[r] += c
    if not p.right.is_dirichlet:
        i = m - 1
        r = index[i][-1]
        M[r] += P[i] * w[i] * h[i] / 2
        interior_flux(r, i, intervals[i], intervals[i] - 1, P[i])
        c = P[i] * p.gamma[i] / p.right.b
        add(r, i, intervals[i], -c * p.right.a)
        bm[r] += c

    # interfaces
    for i in range(m - 1):
        nl = intervals[i]
        rr = index[i + 1][0]
        if math.isinf(p.H[i]):
            scale = P[i + 1]
            M[rr] += scale * (w[i] * h[i] * p.theta[i] + w[i + 1] * h[i + 1]) / 2
            interior_flux(rr, i, nl, nl - 1, scale)
            interior_flux(rr, i + 1, 0, 1, scale)
        else:
            rl = index[i][nl]
            M[rl] += P[i] * w[i] * h[i] / 2
            M[rr] += P[i + 1] * w[i + 1] * h[i + 1] / 2
            interior_flux(rl, i, nl, nl - 1, P[i])
            interior_flux(rr, i + 1, 0, 1, P[i + 1])
            # contact flux F = H (theta uR - uL): +F into the left cell, -F out of the right
            H, th = p.H[i], p.theta[i]
            add(rl, i + 1, 0, P[i] * H * th)
            add(rl, i, nl, -P[i] * H)
            add(rr, i + 1, 0, -P[i + 1] * H * th)
            add(rr, i, nl, P[i + 1] * H)

    K = sparse.csr_matrix((vals, (rows, cols)), shape=(count, count))
    K.sum_duplicates()
    return Discretization(p, intervals, x, tuple(index), tuple(factor), M, K, b0, bm, scale_of)


@dataclass
class FDMField(SolutionField):
    mass: np.ndarray | None = None


def _step_counts(times, dt):
    n = np.rint(times / dt).astype(np.int64)
    if np.any(np.abs(n * dt - times) > 1e-9 * np.maximum(times, dt)):
        raise ValueError("output times must be multiples of the time step")
    return n


def solve_fdm(problem, intervals, dt, times, *, rannacher=4, method="cn") -> FDMField:
    """Finite-difference field on the grid nodes at ``times``.

    ``method="cn"`` steps with Crank-Nicolson (``dt`` required);
    ``method="exact"`` integrates the semi-discrete system exactly in time and
    needs time-independent boundary data (``dt`` ignored).
    """
    disc = discretize(problem, intervals)
    times = np.asarray(times, dtype=float).ravel()
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-negative and sorted")
    if method == "exact":
        return _solve_exact(disc, times)
    if method != "cn":
        raise ValueError(f"unknown method {method!r}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    steps = _step_counts(times, dt)
    Mdiag = sparse.diags(disc.M)
    K = disc.K
    try:
        lu_cn = splu(sparse.csc_matrix(Mdiag / dt - 0.5 * K))
        lu_be = splu(sparse.csc_matrix(Mdiag * (2.0 / dt) - K)) if rannacher else None
    except RuntimeError as exc:
        raise FDMError(f"singular step matrix: {exc}") from exc
    rhs_cn = sparse.csr_matrix(Mdiag / dt + 0.5 * K)

    U = disc.initial_vector()
    u_out = [np.empty((times.size, xi.size)) for xi in disc.x]
    mass = np.empty(times.size)
    t = 0.0
    done = 0            # completed full steps
    half_left = rannacher
    out_k = 0

    def record(U, t):
        nonlocal out_k
        while out_k < times.size and steps[out_k] == done and (half_left % 2 == 0):
            vals = disc.nodes(U, times[out_k])
            for i in range(len(vals)):
                u_out[i][out_k] = vals[i]
            mass[out_k] = disc.mass(U)
            out_k += 1

    record(U, t)
    total = int(steps.max()) if steps.size else 0
    while done < total:
        if half_left > 0:
            th = t + 0.5 * dt
            U = lu_be.solve(disc.M * (2.0 / dt) * U + disc.forcing(th))
            t = th
            half_left -= 1
            if half_left % 2 == 0:
                done += 1
                t = done * dt
        else:
            tn = (done + 1) * dt
            U = lu_cn.solve(rhs_cn @ U + 0.5 * (disc.forcing(t) + disc.forcing(tn)))
            done += 1
            t = tn
        if not np.all(np.isfinite(U)):
            raise FDMError(f"non-finite state at t={t!r}")
        record(U, t)
    return FDMField(disc.x, times, tuple(u_out), np.full((times.size, disc.problem.m + 1), np.nan),
                    {"method": "fdm-cn", "intervals": disc.intervals, "dt": dt}, mass)


def _linear_steady(disc: Discretization):
    """Discrete steady state, solved on two intervals per layer and interpolated.

    Every row of the scheme is exact for piecewise-linear data, so the coarse
    steady state is the fine one; solving on the fine grid instead would lose
    about ``eps * cond(K)`` (grows like ``h^-2``).
    """
    coarse = discretize(disc.problem, 2)
    vals = coarse.nodes(splu(sparse.csc_matrix(coarse.K)).solve(-coarse.forcing(0.0)), 0.0)
    U = np.empty(disc.size)
    for i in range(disc.problem.m):
        fine = np.interp(disc.x[i], coarse.x[i], vals[i])
        sel = disc.index[i] >= 0
        U[disc.index[i][sel]] = fine[sel] / disc.factor[i][sel]
    return U


def _slow_modes(S, cutoff):
    """Eigenpairs of the symmetric negative semidefinite ``S`` with ``-lam <= cutoff``.

    Shift-invert Lanczos about a point just above 0 resolves the slow modes to
    relative accuracy; a full eigensolver only gets them to about
    ``eps * ||S|| / gap``, which is poor on fine grids.
    """
    n = S.shape[0]
    k = min(64, n - 1)
    while True:
        if k >= n - 1:
            lam, Q = np.linalg.eigh(S.toarray())
            break
        lam, Q = eigsh(S, k=k, sigma=1.0, which="LM")
        if -lam.min() > cutoff:
            break
        k = min(2 * k, n - 1)
    keep = -lam <= cutoff
    return lam[keep], Q[:, keep]


def _solve_exact(disc: Discretization, times) -> FDMField:
    p = disc.problem
    if not p.constant_boundaries:
        raise FDMError("exact time integration needs time-independent boundary data")
    K = sparse.csc_matrix(disc.K)
    b = disc.forcing(0.0)
    U0 = disc.initial_vector()
    if p.left.is_neumann and p.right.is_neumann:
        if np.any(b != 0.0):
            raise FDMError("exact time integration needs a steady state; use method='cn'")
        steady = np.zeros(disc.size)
    else:
        steady = _linear_steady(disc)
    sq = 1.0 / np.sqrt(disc.M)
    S = sparse.csc_matrix(sparse.diags(sq) @ K @ sparse.diags(sq))
    positive = times[times > 0]
    # modes with lam * t_min beyond ~45 are below 1e-19 at every requested time
    cutoff = 45.0 / positive.min() if positive.size else 0.0
    lam, Q = _slow_modes(S, cutoff) if positive.size else (np.zeros(0), np.zeros((disc.size, 0)))
    z0 = Q.T @ ((U0 - steady) / sq)
    u_out = [np.empty((times.size, xi.size)) for xi in disc.x]
    mass = np.empty(times.size)
    for k, t in enumerate(times):
        U = U0 if t == 0 else steady + sq * (Q @ (np.exp(lam * t) * z0))
        vals = disc.nodes(U, t)
        for i in range(p.m):
            u_out[i][k] = vals[i]
        mass[k] = disc.mass(U)
    return FDMField(disc.x, times, tuple(u_out), np.full((times.size, p.m + 1), np.nan),
                    {"method": "fdm-exact", "intervals": disc.intervals, "modes": lam.size}, mass)


def restrict(field: SolutionField, divisions) -> SolutionField:
    """Keep every node that lies on an equally spaced grid of ``divisions`` per layer."""
    xs, us = [], []
    for xi, ui in zip(field.x, field.u):
        n = xi.size - 1
        if n % divisions:
            raise ValueError(f"{n} intervals do not refine {divisions} divisions")
        s = n // divisions
        xs.append(np.linspace(xi[0], xi[-1], divisions + 1))   # same points, no rounding drift
        us.append(ui[:, ::s])
    out = type(field)(tuple(xs), field.t, tuple(us), field.g, dict(field.settings))
    if hasattr(field, "mass"):
        out.mass = field.mass
    return out


def richardson_error_estimate(coarse: SolutionField, fine: SolutionField, divisions=None):
    """Two-grid estimate ``max |u_fine - u_coarse| / 3`` per time.

    ``fine`` must halve both steps of ``coarse``; comparison happens on the
    coarse nodes (or on ``divisions`` per layer if given).
    """
    if divisions is None:
        divisions = coarse.x[0].size - 1
        if any(xi.size - 1 != divisions for xi in coarse.x):
            divisions = math.gcd(*[xi.size - 1 for xi in coarse.x])
    c, f = restrict(coarse, divisions), restrict(fine, divisions)
    diff = np.max(np.stack([np.max(np.abs(a - b), axis=1) for a, b in zip(c.u, f.u)]), axis=0)
    return diff / 3.0


def extrapolated_reference(problem, divisions, times, base_intervals, levels=3):
    """Repeated Richardson extrapolation of the exact-in-time scheme.

    Solves on ``base_intervals * 2^k`` intervals per layer (``k < levels``),
    eliminates the ``h^2``, ``h^4``, ... terms on the common ``divisions``
    grid, and returns ``(field, estimate)`` where ``estimate`` is the per-time
    change produced by the last elimination.
    """
    sols = [restrict(solve_fdm(problem, np.asarray(base_intervals) * 2 ** k, None, times,
                               method="exact"), divisions) for k in range(levels)]
    table = [[np.concatenate(s.u, axis=1) for s in sols]]
    for order in range(1, levels):
        prev = table[-1]
        f = 4.0 ** order
        table.append([(f * prev[k + 1] - prev[k]) / (f - 1.0) for k in range(len(prev) - 1)])
    best = table[-1][-1]
    estimate = np.max(np.abs(table[-1][-1] - table[-2][-1]), axis=1) if levels > 1 else \
        np.full(len(times), np.nan)
    ref = sols[-1]
    cuts = np.cumsum([xi.size for xi in ref.x])[:-1]
    u = tuple(np.split(best, cuts, axis=1))
    return SolutionField(ref.x, ref.t, u, ref.g, {"method": "fdm-richardson", "levels": levels,
                                                  "base_intervals": base_intervals}), estimate
