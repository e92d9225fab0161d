import math
import time

import numpy as np
import pytest

from layerdiff import interface_solver as isv
from layerdiff.assembly import Solver
from layerdiff.eigenbasis import build_basis
from layerdiff.model import (BoundaryCondition, Constant, PolynomialInitial, ProblemSpec,
                             validate)
from layerdiff.presets import preset

from conftest import case, random_problem, two_layer
from laplace_oracle import interface_transforms


def _solve_at(p, s, N):
    S = Solver(p, N)
    system = isv.assemble(s, S.data, p.left.g.laplace(s), p.right.g.laplace(s))
    return system, isv.solve(system)


# --------------------------------------------------------------------------
# split coefficients
# --------------------------------------------------------------------------

def _layer_betas(rng, N=6):
    return [rng.normal(size=N) for _ in range(5)], rng.uniform(0, 30, N)


def test_split_zero_source(rng):
    beta, lam = _layer_betas(rng)
    beta[4] = np.zeros_like(lam)
    c1, _, _ = isv.split_coefficients(1.5 + 2j, 0.3 * lam ** 2, beta, 0.3, lam)
    np.testing.assert_array_equal(c1, 0)


def test_split_reassembles_transformed_coefficient(rng):
    beta, lam = _layer_betas(rng)
    D = 0.7
    q = D * lam ** 2
    b1, b2, b3, b4, b5 = beta
    for _ in range(10):
        s = complex(rng.normal(), rng.normal()) * 10
        g0, g1 = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        c1, c2, c3 = isv.split_coefficients(s, q, beta, D, lam)
        direct = (b5 + D * (b3 + lam ** 2 * b1) * g0 + D * (b4 + lam ** 2 * b2) * g1) / (s + q) \
            - b1 * g0 - b2 * g1
        np.testing.assert_allclose(c1 + c2 * g0 + c3 * g1, direct, rtol=1e-13)


def test_split_large_s_limit(rng):
    beta, lam = _layer_betas(rng)
    _, c2, c3 = isv.split_coefficients(1e12, 0.5 * lam ** 2, beta, 0.5, lam)
    np.testing.assert_allclose(c2, -beta[0], rtol=1e-9, atol=1e-10)
    np.testing.assert_allclose(c3, -beta[1], rtol=1e-9, atol=1e-10)


# --------------------------------------------------------------------------
# assembly against the exact Laplace-domain solution
# --------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["case-a", "case-b", "case-c", "case-d"])
def test_two_layer_matches_exact_transform(name):
    p = case(name)
    system, x = _solve_at(p, 1.0, 800)
    assert system.order == 1
    ref = interface_transforms(p, 1.0)
    assert abs(x[0, 0] - ref[0]) < 1e-10 * abs(ref[0])


def test_convergence_at_inversion_node():
    p = case("case-b")
    s = Solver(p, 1).table.poles[0] / 0.2
    ref = interface_transforms(p, s)[0]
    errs = [abs(_solve_at(p, s, N)[1][0, 0] - ref) for N in (100, 200, 400)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 2.5)


def test_multilayer_general_interfaces_match_exact(rng):
    p = random_problem(rng, 4, robin=True)
    spec = p.spec
    p = validate(ProblemSpec(spec.breakpoints, spec.diffusivities, spec.gammas, spec.H, spec.theta,
                             spec.left, spec.right,
                             tuple(PolynomialInitial((v,)) for v in (0.3, -1.0, 2.0, 0.5))))
    _, x = _solve_at(p, 2.0 + 1.0j, 1500)
    ref = interface_transforms(p, 2.0 + 1.0j)
    np.testing.assert_allclose(x[0], ref, rtol=1e-7)


def test_infinite_H_adds_nothing_to_diagonal():
    p = case("case-a")
    S = Solver(p, 30)
    perfect = isv.assemble(1.0, S.data, 1.0, 0.0)
    data = isv.SystemData(S.data.layers, S.data.theta, np.array([2.0]))
    finite = isv.assemble(1.0, data, 1.0, 0.0)
    assert finite.diag[0, 0] - perfect.diag[0, 0] == pytest.approx(2.0, abs=1e-13)
    assert perfect.diag[0, 0] == isv.assemble(1.0, S.data, 1.0, 0.0).diag[0, 0]


def test_symmetric_data_gives_zero_interface_flux():
    # identical layers, Neumann ends, initial data even about the interface
    bc = BoundaryCondition(0.0, 1.0, Constant(0.0))
    p = validate(ProblemSpec.build((0.0, 1.0, 2.0), (0.4, 0.4), bc, bc,
                                   initial=(PolynomialInitial((1.0, 2.0)),
                                            PolynomialInitial((5.0, -2.0)))))
    _, x = _solve_at(p, 0.8 + 0.5j, 100)
    assert abs(x[0, 0]) < 1e-13


def test_single_layer_has_no_system():
    bc = BoundaryCondition(1.0, 0.0, Constant(1.0))
    p = validate(ProblemSpec.build((0.0, 1.0), (1.0,), bc, bc))
    S = Solver(p, 5)
    with pytest.raises(ValueError):
        isv.assemble(1.0, S.data, 1.0, 1.0)


def test_laplace_domain_constraint_residual():
    """Substituting the solved transforms back into the interface constraint."""
    p = validate(preset("eight-layer").spec)
    S = Solver(p, 50)
    for t in (0.01, 0.2, 3.0):
        s = S.table.poles / t
        g0, gm = p.left.g.laplace(s), p.right.g.laplace(s)
        gbar = np.vstack([g0, isv.solve(isv.assemble(s, S.data, g0, gm)).T, gm])
        T = isv.endpoint_terms(S.data, s)
        for r in range(p.m - 1):
            U_left = T[r, 1, :, 0] + T[r, 1, :, 1] * gbar[r] + T[r, 1, :, 2] * gbar[r + 1]
            U_right = (T[r + 1, 0, :, 0] + T[r + 1, 0, :, 1] * gbar[r + 1]
                       + T[r + 1, 0, :, 2] * gbar[r + 2])
            res = gbar[r + 1] * p.inv_H[r] - p.theta[r] * U_right + U_left
            assert np.max(np.abs(res)) < 1e-9 * max(1.0, np.max(np.abs(U_left)))


def test_eight_layer_residuals_at_every_node():
    p = validate(preset("eight-layer").spec)
    S = Solver(p, 50)
    for t in np.geomspace(1e-3, 10, 12):
        s = S.table.poles / t
        system = isv.assemble(s, S.data, p.left.g.laplace(s), p.right.g.laplace(s))
        assert np.all(system.residual(isv.solve(system)) < 1e-10)


# --------------------------------------------------------------------------
# solve
# --------------------------------------------------------------------------

def _system(sub, diag, sup, rhs):
    return isv.InterfaceSystem(np.ones(diag.shape[0], dtype=complex), sub, diag, sup, rhs)


def test_identity_system():
    b = np.array([[1 + 2j, -3j, 4.0]])
    z = np.zeros_like(b)
    x = isv.solve(_system(z, np.ones_like(b), z, b))
    np.testing.assert_array_equal(x, b)


def test_scalar_system():
    x = isv.solve(_system(np.zeros((1, 1)), np.array([[2 + 2j]]), np.zeros((1, 1)),
                          np.array([[4.0 + 0j]])))
    assert x[0, 0] == pytest.approx(1 - 1j)


def test_random_diagonally_dominant(rng):
    K, M = 4, 50
    sub = rng.normal(size=(K, M)) + 1j * rng.normal(size=(K, M))
    sup = rng.normal(size=(K, M)) + 1j * rng.normal(size=(K, M))
    sub[:, 0] = sup[:, -1] = 0
    diag = (np.abs(sub) + np.abs(sup) + 1) * np.exp(1j * rng.uniform(0, 6.28, (K, M)))
    rhs = rng.normal(size=(K, M)) + 1j * rng.normal(size=(K, M))
    system = _system(sub, diag, sup, rhs)
    x = isv.solve(system)
    assert np.all(system.residual(x) < 1e-12)
    np.testing.assert_allclose(system.dense(2) @ x[2], rhs[2], atol=1e-12)


def test_zero_pivot_reports_interface():
    diag = np.array([[1.0, 1.0]], dtype=complex)
    sub = np.array([[0.0, 1.0]], dtype=complex)
    sup = np.array([[1.0, 0.0]], dtype=complex)
    with pytest.raises(isv.InterfaceSolveError, match="interface 2"):
        isv.solve(_system(sub, diag, sup, np.ones((1, 2), dtype=complex)))


def test_pivoted_fallback_rescues_tiny_pivot():
    eps = 1e-17
    diag = np.array([[eps, 1.0]], dtype=complex)
    sub = np.array([[0.0, 1.0]], dtype=complex)
    sup = np.array([[1.0, 0.0]], dtype=complex)
    rhs = np.array([[1.0, 2.0]], dtype=complex)
    system = _system(sub, diag, sup, rhs)
    x = isv.solve(system)
    np.testing.assert_allclose(x[0], np.linalg.solve(system.dense(0), rhs[0]), rtol=1e-12)


def test_cost_is_linear_in_layers():
    def run(m):
        bc0 = BoundaryCondition(1.0, 0.0, Constant(1.0))
        bc1 = BoundaryCondition(0.0, 1.0, Constant(0.0))
        p = validate(ProblemSpec.build(np.linspace(0, 1, m + 1), np.tile([1.0, 0.1], m // 2),
                                       bc0, bc1))
        S = Solver(p, 50)
        s = S.table.poles
        best = math.inf
        for _ in range(5):
            t0 = time.perf_counter()
            isv.solve(isv.assemble(s, S.data, 1 / s, 0 * s))
            best = min(best, time.perf_counter() - t0)
        return best

    ratio = run(400) / run(200)
    assert 1.2 < ratio < 3.5
