"""Shared problem builders and the acceptance summary hook."""
from __future__ import annotations

import numpy as np
import pytest

from layerdiff import presets
from layerdiff.model import BoundaryCondition, Constant, ProblemSpec, validate

SEED = 20240917

# criterion number -> list of (label, passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


def record(criterion, label, passed, detail=""):
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))


def case(name):
    """Validated two-layer case problem from its preset."""
    return validate(presets.preset(name).spec)


def two_layer(D=(1.0, 0.1), gammas=None, H=None, theta=None, left=(1.0, 0.0, 1.0),
              right=(0.0, 1.0, 0.0), l=(0.0, 0.5, 1.0), initial=None):
    aL, bL, gL = left
    aR, bR, gR = right
    return validate(ProblemSpec.build(
        l, D, BoundaryCondition(aL, bL, Constant(gL)), BoundaryCondition(aR, bR, Constant(gR)),
        gammas=gammas, H=None if H is None else (H,), theta=None if theta is None else (theta,),
        initial=initial))


def random_problem(rng, m, robin=False):
    """Random layered problem with general interfaces (theta != 1, gamma != D)."""
    widths = rng.uniform(0.3, 1.5, m)
    l = np.concatenate([[0.0], np.cumsum(widths)])
    D = rng.uniform(0.05, 2.0, m)
    gam = D * rng.uniform(0.5, 2.0, m)
    H = rng.uniform(0.5, 5.0, m - 1)
    theta = rng.uniform(0.6, 1.6, m - 1)
    if robin:
        left = BoundaryCondition(rng.uniform(0.5, 2.0), rng.uniform(0.2, 1.0), Constant(1.0))
        right = BoundaryCondition(rng.uniform(0.5, 2.0), rng.uniform(0.2, 1.0), Constant(0.0))
    else:
        left = BoundaryCondition(1.0, 0.0, Constant(1.0))
        right = BoundaryCondition(0.0, 1.0, Constant(0.0))
    return validate(ProblemSpec.build(l, D, left, right, gammas=gam, H=H, theta=theta))


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[c]
        ok = all(p for _, p, _ in parts)
        tr.write_line(f"criterion {c:2d}: {'PASS' if ok else 'FAIL'}")
        for label, passed, detail in parts:
            tr.write_line(f"    [{'pass' if passed else 'FAIL'}] {label}"
                          + (f" ({detail})" if detail else ""))
