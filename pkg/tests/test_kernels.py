import math

import numpy as np
import pytest

from layerdiff import _core_py, kernels
from layerdiff.assembly import Solver, layer_grid

from conftest import case

compiled = pytest.mark.skipif("compiled" not in kernels.available_backends(),
                              reason="compiled kernels not built")


@pytest.fixture
def restore_backend():
    before = kernels.BACKEND
    yield
    kernels.use_backend(before)


def _both():
    from layerdiff import _core
    return _core, _core_py


def _tridiag(rng, K, M):
    sub = rng.normal(size=(K, M)) + 1j * rng.normal(size=(K, M))
    sup = rng.normal(size=(K, M)) + 1j * rng.normal(size=(K, M))
    diag = 4 + rng.normal(size=(K, M)) + 1j * rng.normal(size=(K, M))
    rhs = rng.normal(size=(K, M)) + 1j * rng.normal(size=(K, M))
    sub[:, 0] = 0
    sup[:, -1] = 0
    return sub, diag, sup, rhs


def _dense(sub, diag, sup, k):
    return np.diag(diag[k]) + np.diag(sub[k, 1:], -1) + np.diag(sup[k, :-1], 1)


@pytest.mark.parametrize("M", [1, 2, 7, 50])
def test_python_thomas_solves(rng, M):
    sub, diag, sup, rhs = _tridiag(rng, 5, M)
    x, zero = _core_py.thomas(sub, diag, sup, rhs)
    assert np.all(zero == -1)
    for k in range(5):
        np.testing.assert_allclose(_dense(sub, diag, sup, k) @ x[k], rhs[k], atol=1e-12)


def test_python_thomas_flags_zero_pivot():
    diag = np.array([[1.0, 0.0, 1.0]], dtype=complex)
    sub = np.zeros_like(diag)
    sup = np.zeros_like(diag)
    _, zero = _core_py.thomas(sub, diag, sup, np.ones_like(diag))
    assert zero.tolist() == [1]


def test_pairwise_sum_tree():
    v = np.array([1e16, 1.0, -1e16, 1.0, 3.0])
    # ((a + b) + (c + d)) + e, with the odd tail padded
    assert _core_py.pairwise_sum(v) == ((1e16 + 1.0) + (-1e16 + 1.0)) + 3.0


@compiled
def test_backends_agree(rng):
    core, py = _both()
    s = rng.normal(size=7) + 1j * rng.uniform(1, 5, 7)
    q = rng.uniform(0, 100, 40)
    P = rng.normal(size=(6, 40))
    np.testing.assert_allclose(core.pole_sums(s, q, P), py.pole_sums(s, q, P), rtol=1e-13)

    sub, diag, sup, rhs = _tridiag(rng, 7, 12)
    xc, zc = core.thomas(sub, diag, sup, rhs)
    xp, zp = py.thomas(sub, diag, sup, rhs)
    np.testing.assert_allclose(xc, xp, rtol=1e-13)
    np.testing.assert_array_equal(zc, zp)

    w = rng.normal(size=(2, 7)) + 1j * rng.normal(size=(2, 7))
    np.testing.assert_allclose(core.filtered_sums(w, s, q, 0.3), py.filtered_sums(w, s, q, 0.3),
                               rtol=1e-12, atol=1e-14)

    v = rng.normal(size=(3, 37))
    np.testing.assert_array_equal(core.pairwise_sum(v), py.pairwise_sum(v))
    coef = rng.normal(size=(2, 37))
    Phi = rng.normal(size=(11, 37))
    np.testing.assert_array_equal(core.series_eval(coef, Phi), py.series_eval(coef, Phi))


@compiled
def test_solver_identical_across_backends(restore_backend):
    p = case("case-b")
    x = layer_grid(p, 11)
    kernels.use_backend("python")
    a = Solver(p, 60).evaluate(x, [0.01, 0.2])
    kernels.use_backend("compiled")
    b = Solver(p, 60).evaluate(x, [0.01, 0.2])
    for ua, ub in zip(a.u, b.u):
        np.testing.assert_allclose(ua, ub, rtol=0, atol=1e-13)
    assert b.settings["backend"] == "compiled"


def test_use_backend_validation(restore_backend):
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")
    kernels.use_backend("python")
    assert kernels.BACKEND == "python"
    assert kernels.thomas is _core_py.thomas


def test_missing_extension_is_reported(restore_backend, monkeypatch):
    monkeypatch.setattr(kernels, "_compiled", None)
    assert kernels.available_backends() == ("python",)
    with pytest.raises(RuntimeError, match="not built"):
        kernels.use_backend("compiled")


def test_benchmark_script_runs(capsys, restore_backend):
    import importlib.util
    import pathlib
    path = pathlib.Path(__file__).parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    bench.main(["--repeat", "1", "--number", "1"])
    out = capsys.readouterr().out
    assert "thomas" in out and "eight-layer solve" in out
