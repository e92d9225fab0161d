import math

import numpy as np
import pytest

from layerdiff import fdm
from layerdiff.assembly import (SolutionField, Solver, layer_grid, relative_error, solve)
from layerdiff.classical import ClassicalSolution, steady_state
from layerdiff.model import (BoundaryCondition, Constant, CustomInitial, ExponentialRise,
                             PolynomialInitial, ProblemSpec, validate)

from conftest import case, two_layer


def _field(u, x=(np.array([0.0, 1.0]),), t=(1.0,)):
    return SolutionField(tuple(x), np.asarray(t), tuple(u), np.zeros((len(t), len(x) + 1)))


# --------------------------------------------------------------------------
# relative error
# --------------------------------------------------------------------------

def test_relative_error_identical_is_zero():
    f = _field([np.array([[0.5, -1.0]])])
    assert relative_error(f, f)[0] == 0.0


def test_relative_error_uniform_shift():
    ref = _field([np.array([[0.5, 1.0]])])
    app = _field([np.array([[0.501, 1.001]])])
    assert relative_error(ref, app)[0] == pytest.approx(1e-3)


def test_relative_error_grid_mismatch():
    a = _field([np.array([[0.5, 1.0]])])
    b = _field([np.array([[0.5, 1.0]])], x=(np.array([0.0, 0.9]),))
    with pytest.raises(ValueError, match="grid mismatch"):
        relative_error(a, b)


def test_layer_grid_endpoints():
    x = layer_grid(case("case-a"), 6)
    assert len(x) == 2
    np.testing.assert_array_equal(x[0], np.linspace(0, 0.5, 6))
    assert x[1][0] == 0.5 and x[1][-1] == 1.0


def test_field_rows_order():
    f = _field([np.array([[1.0, 2.0], [3.0, 4.0]])], t=(0.1, 0.2))
    assert list(f.rows()) == [(1, 0.0, 0.1, 1.0), (1, 1.0, 0.1, 2.0),
                              (1, 0.0, 0.2, 3.0), (1, 1.0, 0.2, 4.0)]
    np.testing.assert_array_equal(f.max_abs(), [2.0, 4.0])


# --------------------------------------------------------------------------
# interface functions
# --------------------------------------------------------------------------

def test_interface_flux_matches_finite_differences():
    p = case("case-a")
    g = Solver(p, 300).interface_values_at(0.2).g
    ref = fdm.solve_fdm(p, 4000, None, [0.2], method="exact")
    u, h = ref.u[0][0], ref.x[0][1] - ref.x[0][0]
    flux = p.gamma[0] * (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * h)
    assert g[1] == pytest.approx(flux, rel=1e-6)
    assert g[0] == 1.0 and g[2] == 0.0


def test_steady_initial_data_keeps_interface_flux():
    bc0 = BoundaryCondition(1.0, 0.0, Constant(1.0))
    bc1 = BoundaryCondition(1.0, 0.0, Constant(0.0))
    base = ProblemSpec.build((0.0, 0.5, 1.0), (1.0, 0.1), bc0, bc1, gammas=(1.0, 0.3), H=(2.0,),
                             theta=(1.3,))
    w = steady_state(validate(base))
    init = tuple(PolynomialInitial((w.A[i] - w.B[i] * base.breakpoints[i], w.B[i])) for i in range(2))
    p = validate(ProblemSpec(base.breakpoints, base.diffusivities, base.gammas, base.H, base.theta,
                             bc0, bc1, init))
    S = Solver(p, 80)
    flux = p.gamma[0] * w.B[0]
    for t in (0.01, 0.3, 2.0, 10.0):
        assert S.interface_values_at(t).g[1] == pytest.approx(flux, abs=1e-8)


def _single_layer(g0):
    return validate(ProblemSpec.build((0.0, 1.0), (1.0,), BoundaryCondition(1.0, 0.0, g0),
                                      BoundaryCondition(0.0, 1.0, Constant(0.0))))


def test_single_layer_interface_values_are_endpoints():
    iv = Solver(_single_layer(Constant(2.0)), 10).interface_values_at(0.5)
    np.testing.assert_array_equal(iv.g, [2.0, 0.0])
    assert iv.gbar.shape == (2, 7)


def test_interface_values_need_positive_time():
    with pytest.raises(ValueError):
        Solver(case("case-a"), 5).interface_values_at(0.0)


# --------------------------------------------------------------------------
# coefficients
# --------------------------------------------------------------------------

def test_pure_decay_mode():
    bc = BoundaryCondition(1.0, 0.0, Constant(0.0))
    probe = validate(ProblemSpec.build((0.0, 1.5), (0.4,), bc, bc))
    lb = Solver(probe, 8).basis[0]
    p = validate(ProblemSpec.build((0.0, 1.5), (0.4,), bc, bc,
                                   initial=CustomInitial(lambda x: 3.0 * lb(x, 2))))
    S = Solver(p, 8)
    for t in (0.05, 0.5):
        c = S.coefficients(t)[0]
        assert c[2] == pytest.approx(3.0 * math.exp(-t * 0.4 * lb.lam[2] ** 2), rel=1e-9)
        np.testing.assert_allclose(np.delete(c, 2), 0.0, atol=1e-11)
        assert S.coefficient(1, 2, t) == c[2]


def test_zero_problem_has_zero_coefficients():
    bc = BoundaryCondition(1.0, 0.0, Constant(0.0))
    S = Solver(validate(ProblemSpec.build((0.0, 1.0, 2.0), (1.0, 0.3), bc, bc)), 20)
    for c in S.coefficients(0.3):
        np.testing.assert_array_equal(c, 0.0)


def test_coefficients_decay_at_least_cubically():
    S = Solver(case("case-a"), 400)
    c = S.coefficients(0.01)
    n = np.arange(50, 400)
    for i in range(2):
        lam = S.basis[i].lam[n]
        slope = np.polyfit(np.log(lam), np.log(np.abs(c[i][n])), 1)[0]
        assert slope < -2.5


# --------------------------------------------------------------------------
# field evaluation
# --------------------------------------------------------------------------

@pytest.mark.parametrize("t", [0.01, 0.2, 5.0])
def test_case_a_external_conditions(t):
    p = case("case-a")
    S = Solver(p, 200)
    x = (np.array([0.0]), np.array([1.0]))
    assert abs(S.evaluate(x, [t]).u[0][0, 0] - 1.0) < 1e-6
    assert abs(S.evaluate(x, [t], derivative=True).u[1][0, 0]) < 1e-6


def test_time_zero_returns_initial_data():
    p = two_layer(initial=PolynomialInitial((0.2, 1.0)))
    x = layer_grid(p, 5)
    f = Solver(p, 10).evaluate(x, [0.0, 0.1])
    for i in range(2):
        np.testing.assert_array_equal(f.u[i][0], 0.2 + x[i])
    assert math.isnan(f.g[0, 1]) and f.g[0, 0] == 1.0


def test_derivative_rejects_time_zero():
    with pytest.raises(ValueError):
        Solver(case("case-a"), 10).evaluate(layer_grid(case("case-a"), 3), [0.0], derivative=True)


def test_wrong_layer_count():
    with pytest.raises(ValueError, match="2 layers"):
        Solver(case("case-a"), 10).evaluate((np.array([0.1]),), [0.1])


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        Solver(case("case-a"), 10).evaluate(layer_grid(case("case-a"), 3), [-1.0])


def test_evaluation_is_bit_reproducible():
    p = case("case-c")
    x = layer_grid(p, 21)
    a = Solver(p, 64).evaluate(x, [0.01, 0.2])
    b = solve(p, x, [0.01, 0.2], N=64)
    for ua, ub in zip(a.u, b.u):
        assert ua.tobytes() == ub.tobytes()


@pytest.mark.parametrize("name", ["case-a", "case-b", "case-c", "case-d"])
def test_flux_continuity(name):
    p = case(name)
    S = Solver(p, 200)
    x = (np.array([0.5]), np.array([0.5]))
    d = S.evaluate(x, [0.01, 0.2, 3.0], derivative=True)
    jump = p.gamma[0] * d.u[0][:, 0] - p.gamma[1] * d.u[1][:, 0]
    assert np.max(np.abs(jump)) < 1e-5


def test_case_c_converges_to_classical():
    p = case("case-c")
    x = layer_grid(p, 6)
    ref = ClassicalSolution(p, 150).evaluate(x, [0.01, 0.2, 3.0])
    errs = [relative_error(ref, Solver(p, N).evaluate(x, [0.01, 0.2, 3.0])) for N in (16, 32, 64)]
    assert np.all(np.isfinite(errs))
    assert np.all(np.diff(np.array(errs), axis=0) < 0)


def test_single_layer_time_dependent_dirichlet_series():
    """Against the directly coded sine series for g0 = 1 - exp(-t), u_x(1) = 0."""
    p = _single_layer(ExponentialRise(1.0, 1.0))
    N = 200
    x = np.linspace(0, 1, 21)
    times = [0.1, 1.0, 3.0]
    f = Solver(p, N).evaluate((x,), times)
    lam = (2 * np.arange(N) + 1) * np.pi / 2
    for k, t in enumerate(times):
        decay = (math.exp(-t) - np.exp(-lam ** 2 * t)) / (lam ** 2 - 1)
        direct = 1 - math.exp(-t) - (2 * np.sin(np.outer(x, lam)) / lam) @ decay
        np.testing.assert_allclose(f.u[0][k], direct, atol=1e-9)


def test_settings_recorded():
    f = Solver(case("case-a"), 12, 16).evaluate(layer_grid(case("case-a"), 3), [0.1])
    assert f.settings["N"] == 12 and f.settings["Np"] == 16
