import math

import numpy as np
import pytest

from layerdiff.assembly import Solver, layer_grid, relative_error
from layerdiff.classical import (ClassicalError, ClassicalSolution, characteristic,
                                 evaluate_classical, global_eigenvalues, steady_state,
                                 weighted_inner, weights)
from layerdiff.model import (BoundaryCondition, Constant, ExponentialRise, ProblemSpec,
                             UniformInitial, validate)
from layerdiff.presets import heat_interface_oracle, preset

from conftest import case, random_problem

DIR1 = BoundaryCondition(1.0, 0.0, Constant(1.0))
NEU0 = BoundaryCondition(0.0, 1.0, Constant(0.0))


def test_steady_case_a():
    w = steady_state(case("case-a"))
    np.testing.assert_allclose(w.A, [1.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(w.B, 0.0, atol=1e-15)


def test_steady_case_c():
    w = steady_state(case("case-c"))
    np.testing.assert_allclose(w.A, [1.0, 1 / 1.2], rtol=1e-15)


def test_steady_heat_series_resistance():
    p = validate(preset("heat-composite").spec)
    w = steady_state(p)
    T1, T2 = heat_interface_oracle()
    assert w(0, 2.0) == pytest.approx(T1, rel=1e-13)
    assert w(1, 4.0) == pytest.approx(T2, rel=1e-13)
    assert T1 == pytest.approx(164.3, abs=0.05) and T2 == pytest.approx(124.0, abs=0.05)


def test_both_neumann_refused():
    p = validate(ProblemSpec.build((0.0, 1.0), (1.0,), NEU0, NEU0))
    with pytest.raises(ClassicalError, match="up to a constant"):
        steady_state(p)


def test_layer_guard():
    p = validate(preset("eight-layer").spec)
    with pytest.raises(ClassicalError, match="m <= 6"):
        global_eigenvalues(p, 5)


def test_time_dependent_data_refused():
    p = validate(ProblemSpec.build((0.0, 1.0), (1.0,), BoundaryCondition(1.0, 0.0, ExponentialRise()),
                                   NEU0))
    with pytest.raises(ClassicalError, match="time-independent"):
        evaluate_classical(p, (np.array([0.5]),), [1.0])


def test_single_layer_eigenvalues():
    p = validate(ProblemSpec.build((0.0, 1.0), (1.0,), DIR1, NEU0))
    lam = [e.lam for e in global_eigenvalues(p, 10)]
    np.testing.assert_allclose(lam, (2 * np.arange(10) + 1) * math.pi / 2, rtol=1e-12)


def test_identical_layers_merge():
    p = validate(ProblemSpec.build((0.0, 0.4, 1.0), (0.5, 0.5), DIR1, NEU0))
    pairs = global_eigenvalues(p, 12)
    expected = (2 * np.arange(12) + 1) * math.pi / 2 * math.sqrt(0.5)
    np.testing.assert_allclose([e.lam for e in pairs], expected, rtol=1e-12)
    for e in pairs:
        assert e.det_residual < 1e-9
        assert abs(characteristic(p, e.lam)) < 1e-9


def test_merged_series_matches_textbook():
    p = validate(ProblemSpec.build((0.0, 0.4, 1.0), (0.5, 0.5), DIR1, NEU0))
    x = layer_grid(p, 9)
    t = [0.05, 0.4]
    f = evaluate_classical(p, x, t, count=60)
    lam = (2 * np.arange(4000) + 1) * math.pi / 2
    for i in range(2):
        for k, tk in enumerate(t):
            series = 1 - (2 / lam * np.sin(np.outer(x[i], lam))) @ np.exp(-0.5 * lam ** 2 * tk)
            np.testing.assert_allclose(f.u[i][k], series, atol=1e-9)


def test_weighted_orthogonality_randomised(rng):
    for _ in range(3):
        p = random_problem(rng, 3, robin=bool(rng.integers(2)))
        assert not np.allclose(p.theta, 1.0) and not np.allclose(p.gamma, p.D)
        pairs = global_eigenvalues(p, 20)
        kmax = pairs[-1].lam / math.sqrt(p.D.min())
        G = np.array([[weighted_inner(p, lambda i, x, a=a: a(p, i, x),
                                      lambda i, x, b=b: b(p, i, x), kmax)
                       for b in pairs] for a in pairs])
        np.testing.assert_allclose(G, np.eye(20), atol=1e-8)


def test_weights_include_theta_products():
    p = random_problem(np.random.default_rng(3), 3)
    w = weights(p)
    assert w[2] == pytest.approx(p.gamma[2] / p.D[2] * p.theta[0] * p.theta[1])


def test_long_time_is_steady():
    p = case("case-c")
    x = layer_grid(p, 11)
    f = evaluate_classical(p, x, [200.0])
    w = steady_state(p)
    for i in range(2):
        np.testing.assert_allclose(f.u[i][0], w(i, x[i]), atol=1e-10)


def test_truncated_evaluation():
    p = case("case-c")
    cs = ClassicalSolution(p, 30)
    x = layer_grid(p, 6)
    full = cs.evaluate(x, [0.2])
    part = cs.evaluate(x, [0.2], terms=5)
    assert part.settings["N"] == 5 and full.settings["N"] == 30
    assert relative_error(full, part)[0] > 0


def test_exponential_self_convergence():
    p = case("case-c")
    cs = ClassicalSolution(p, 80)
    x = layer_grid(p, 6)
    ref = cs.evaluate(x, [0.2, 3.0])
    eps = relative_error(ref, cs.evaluate(x, [0.2, 3.0], terms=40))
    assert np.all(eps < 2.0 ** -52)


@pytest.mark.parametrize("name", ["case-a", "case-b", "case-c", "case-d"])
def test_agrees_with_semi_analytical(name):
    p = case(name)
    x = layer_grid(p, 11)
    ref = evaluate_classical(p, x, [0.2, 3.0], count=40)
    semi = Solver(p, 300).evaluate(x, [0.2, 3.0])
    for a, b in zip(ref.u, semi.u):
        np.testing.assert_allclose(a, b, atol=1e-7)


def test_dirichlet_initial_mismatch_handled():
    # nonzero uniform initial data against a zero Dirichlet end
    p = validate(ProblemSpec.build((0.0, 0.5, 1.0), (1.0, 0.2),
                                   BoundaryCondition(1.0, 0.0, Constant(0.0)), NEU0,
                                   initial=UniformInitial(1.0)))
    x = layer_grid(p, 6)
    ref = evaluate_classical(p, x, [0.5], count=60)
    semi = Solver(p, 300).evaluate(x, [0.5])
    assert relative_error(ref, semi)[0] < 1e-6


def test_missed_root_warning(monkeypatch):
    from layerdiff import classical
    from layerdiff.classical import MissedRootWarning

    p = validate(ProblemSpec.build((0.0, 1.0), (1.0,), DIR1, NEU0))
    # roots at 1 and 20: the second gap is far beyond twice the asymptotic spacing
    monkeypatch.setattr(classical, "characteristic", lambda prob, lam: (lam - 1.0) * (lam - 20.0))
    with pytest.warns(MissedRootWarning, match="possible missed eigenvalue"):
        pairs = global_eigenvalues(p, 2)
    assert [round(e.lam, 9) for e in pairs] == [1.0, 20.0]
