"""Problem definition for one-dimensional multilayer diffusion.

A problem on ``[l_0, l_m]`` split into ``m`` layers. Layer ``i`` obeys
``du/dt = D_i d2u/dx2``; the external ends carry Robin-type conditions

    a_L u(l_0) - b_L u_x(l_0) = g_0(t),     a_R u(l_m) + b_R u_x(l_m) = g_m(t)

and every interface ``l_i`` carries the general pair

    gamma_i u_x(l_i-) = H_i (theta_i u(l_i+) - u(l_i-)),
    gamma_i u_x(l_i-) = gamma_{i+1} u_x(l_i+).

``H_i = INFINITE`` drops the contact resistance exactly (no ``1/H``
arithmetic on a huge float). Units are the caller's business; all inputs
must simply be mutually consistent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

INFINITE = math.inf

SQRT_PI = math.sqrt(math.pi)


class ValidationError(ValueError):
    """Raised when a problem description violates one or more invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class UnsupportedFeatureError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    constraint: str
    index: int | None = None
    message: str = ""

    def __str__(self):
        where = "" if self.index is None else f"[{self.index}] "
        return f"{where}{self.constraint}" + (f": {self.message}" if self.message else "")


# --------------------------------------------------------------------------
# Boundary functions g_0(t), g_m(t)
# --------------------------------------------------------------------------

class BoundaryFunction:
    """Time-domain boundary data together with its Laplace transform.

    Subclasses implement ``__call__`` (vectorised over ``t``) and
    ``laplace`` (vectorised over complex ``s``). The transform has to be
    valid off the real axis since the inversion nodes are complex.
    """

    name = "custom"
    constant_in_time = False

    def __call__(self, t):
        raise NotImplementedError

    def laplace(self, s):
        raise NotImplementedError

    def params(self) -> dict:
        raise UnsupportedFeatureError(f"boundary function {self.name!r} has no config form")


@dataclass(frozen=True)
class Constant(BoundaryFunction):
    value: float = 0.0

    name = "constant"
    constant_in_time = True

    def __call__(self, t):
        return np.full(np.shape(t), float(self.value)) if np.ndim(t) else float(self.value)

    def laplace(self, s):
        return self.value / np.asarray(s)

    def params(self):
        return {"value": self.value}


@dataclass(frozen=True)
class ExponentialRise(BoundaryFunction):
    """``g(t) = value * (1 - exp(-rate t))``."""

    value: float = 1.0
    rate: float = 1.0

    name = "exp_rise"

    def __call__(self, t):
        return self.value * -np.expm1(-self.rate * np.asarray(t, dtype=float))

    def laplace(self, s):
        s = np.asarray(s)
        return self.value * self.rate / (s * (s + self.rate))

    def params(self):
        return {"value": self.value, "rate": self.rate}


@dataclass(frozen=True)
class GaussianPulse(BoundaryFunction):
    """``g(t) = c_max exp(-(t - mu)^2 / sigma^2)`` for ``t >= 0``."""

    c_max: float = 1.0
    mu: float = 0.0
    sigma: float = 1.0

    name = "gaussian"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.c_max * np.exp(-((t - self.mu) / self.sigma) ** 2)

    def laplace(self, s):
        from .laplace import gaussian_transform

        return gaussian_transform(s, self.c_max, self.mu, self.sigma)

    def params(self):
        return {"c_max": self.c_max, "mu": self.mu, "sigma": self.sigma}


class CustomBoundary(BoundaryFunction):
    """Library-level boundary data from a pair of callables."""

    name = "custom"

    def __init__(self, func: Callable, laplace: Callable, constant_in_time: bool = False):
        self._func = func
        self._laplace = laplace
        self.constant_in_time = constant_in_time

    def __call__(self, t):
        return self._func(t)

    def laplace(self, s):
        return self._laplace(s)


BOUNDARY_FUNCTIONS = {cls.name: cls for cls in (Constant, ExponentialRise, GaussianPulse)}


# --------------------------------------------------------------------------
# Initial conditions f_i(x)
# --------------------------------------------------------------------------

class InitialCondition:
    name = "custom"

    def __call__(self, x):
        raise NotImplementedError

    def polynomial(self) -> Polynomial | None:
        """Exact polynomial form in absolute ``x`` if one exists."""
        return None

    def params(self) -> dict:
        raise UnsupportedFeatureError(f"initial condition {self.name!r} has no config form")


@dataclass(frozen=True)
class UniformInitial(InitialCondition):
    value: float = 0.0

    name = "constant"

    def __call__(self, x):
        return np.full(np.shape(x), float(self.value))

    def polynomial(self):
        return Polynomial([float(self.value)])

    def params(self):
        return {"value": self.value}


@dataclass(frozen=True)
class PolynomialInitial(InitialCondition):
    """Coefficients in ascending powers of absolute ``x``."""

    coefficients: tuple = (0.0,)

    name = "polynomial"

    def __call__(self, x):
        return self.polynomial()(np.asarray(x, dtype=float))

    def polynomial(self):
        return Polynomial([float(c) for c in self.coefficients])

    def params(self):
        return {"coefficients": list(self.coefficients)}


@dataclass(frozen=True)
class PulseInitial(InitialCondition):
    """Smoothed point source ``amplitude/(width sqrt(pi)) exp(-(x-center)^2/width^2)``."""

    center: float = 0.0
    width: float = 0.1
    amplitude: float = 1.0

    name = "pulse"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amplitude / (self.width * SQRT_PI) * np.exp(-((x - self.center) / self.width) ** 2)

    def params(self):
        return {"center": self.center, "width": self.width, "amplitude": self.amplitude}


class CustomInitial(InitialCondition):
    name = "custom"

    def __init__(self, func: Callable):
        self._func = func

    def __call__(self, x):
        return np.asarray(self._func(np.asarray(x, dtype=float)), dtype=float) * np.ones(np.shape(x))


INITIAL_CONDITIONS = {cls.name: cls for cls in (UniformInitial, PolynomialInitial, PulseInitial)}


# --------------------------------------------------------------------------
# Interfaces
# --------------------------------------------------------------------------

INTERFACE_KINDS = ("implicit", "perfect", "jump", "partition", "general")


@dataclass(frozen=True)
class GeneralInterface:
    gamma_left: float
    gamma_right: float
    H: float
    theta: float


def normalize_interface(kind, *, D_left=None, D_right=None, gamma_left=None,
                        gamma_right=None, H=None, theta=None, index=None) -> GeneralInterface:
    """Map one of the interface families onto general-form parameters."""
    if kind not in INTERFACE_KINDS:
        raise ValidationError([Violation("interface kind", index, f"unknown kind {kind!r}")])
    if kind == "implicit":
        gamma_left, gamma_right = D_left, D_right
        H, theta = INFINITE, 1.0
    elif kind == "perfect":
        H, theta = INFINITE, 1.0
    elif kind == "jump":
        theta = 1.0
        if H is None:
            raise ValidationError([Violation("H required", index, "jump interface needs H")])
    elif kind == "partition":
        H = INFINITE
        if theta is None:
            raise ValidationError([Violation("theta required", index, "partition interface needs theta")])
    else:
        H = INFINITE if H is None else H
        theta = 1.0 if theta is None else theta

    problems = []
    for label, value in (("gamma_left", gamma_left), ("gamma_right", gamma_right),
                         ("H", H), ("theta", theta)):
        if value is None or not (value > 0):
            problems.append(Violation(f"{label} > 0", index, f"got {value!r}"))
    if problems:
        raise ValidationError(problems)
    return GeneralInterface(float(gamma_left), float(gamma_right), float(H), float(theta))


# --------------------------------------------------------------------------
# The problem
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryCondition:
    a: float
    b: float
    g: BoundaryFunction = field(default_factory=Constant)

    @property
    def is_neumann(self):
        return self.a == 0.0

    @property
    def is_dirichlet(self):
        return self.b == 0.0


@dataclass(frozen=True)
class ProblemSpec:
    breakpoints: tuple
    diffusivities: tuple
    gammas: tuple
    H: tuple
    theta: tuple
    left: BoundaryCondition
    right: BoundaryCondition
    initial: tuple

    @property
    def m(self):
        return len(self.diffusivities)

    @classmethod
    def build(cls, breakpoints, diffusivities, left, right, *, gammas=None, H=None,
              theta=None, initial=None):
        """Convenience constructor with perfect-contact defaults."""
        m = len(diffusivities)
        gammas = tuple(diffusivities) if gammas is None else tuple(gammas)
        H = (INFINITE,) * (m - 1) if H is None else tuple(H)
        theta = (1.0,) * (m - 1) if theta is None else tuple(theta)
        if initial is None:
            initial = (UniformInitial(0.0),) * m
        elif isinstance(initial, InitialCondition):
            initial = (initial,) * m
        return cls(tuple(float(v) for v in breakpoints), tuple(float(v) for v in diffusivities),
                   tuple(float(v) for v in gammas), tuple(float(v) for v in H),
                   tuple(float(v) for v in theta), left, right, tuple(initial))


def check(spec: ProblemSpec) -> list[Violation]:
    """Return every violated invariant (empty list when the problem is valid)."""
    out = []
    m = len(spec.diffusivities)
    if m == 0:
        return [Violation("m >= 1", None, "no layers")]
    if len(spec.breakpoints) != m + 1:
        out.append(Violation("len(breakpoints) == m + 1", None,
                             f"{len(spec.breakpoints)} breakpoints for {m} layers"))
    else:
        for i in range(1, m + 1):
            if not spec.breakpoints[i - 1] < spec.breakpoints[i]:
                out.append(Violation(f"l_{i - 1} < l_{i} fails", i))
    for label, seq, n in (("D", spec.diffusivities, m), ("gamma", spec.gammas, m),
                          ("H", spec.H, m - 1), ("theta", spec.theta, m - 1)):
        if len(seq) != n:
            out.append(Violation(f"len({label}) == {n}", None, f"got {len(seq)}"))
            continue
        for i, v in enumerate(seq):
            if not (v > 0) or (label != "H" and not math.isfinite(v)):
                out.append(Violation(f"{label}_{i + 1} > 0", i + 1, f"got {v!r}"))
    if len(spec.initial) != m:
        out.append(Violation(f"len(initial) == {m}", None, f"got {len(spec.initial)}"))
    for side, bc in (("L", spec.left), ("R", spec.right)):
        if bc.a < 0 or bc.b < 0:
            out.append(Violation(f"a_{side}, b_{side} >= 0", None, f"got a={bc.a}, b={bc.b}"))
        if not bc.a + bc.b > 0:
            out.append(Violation(f"a_{side} + b_{side} > 0", None, f"got a={bc.a}, b={bc.b}"))
    return out


@dataclass(frozen=True)
class ValidatedProblem:
    """Immutable, checked problem with array views of the parameters."""

    spec: ProblemSpec

    def __post_init__(self):
        violations = check(self.spec)
        if violations:
            raise ValidationError(violations)

    @property
    def m(self):
        return self.spec.m

    @property
    def l(self):
        return np.asarray(self.spec.breakpoints, dtype=float)

    @property
    def D(self):
        return np.asarray(self.spec.diffusivities, dtype=float)

    @property
    def gamma(self):
        return np.asarray(self.spec.gammas, dtype=float)

    @property
    def H(self):
        return self.spec.H

    @property
    def theta(self):
        return np.asarray(self.spec.theta, dtype=float)

    @property
    def inv_H(self):
        return np.array([0.0 if math.isinf(h) else 1.0 / h for h in self.spec.H])

    @property
    def left(self):
        return self.spec.left

    @property
    def right(self):
        return self.spec.right

    @property
    def initial(self):
        return self.spec.initial

    @property
    def constant_boundaries(self):
        return self.left.g.constant_in_time and self.right.g.constant_in_time

    def layer_of(self, x):
        """Index of the layer containing ``x`` (interfaces go to the left layer)."""
        l = self.l
        return int(np.clip(np.searchsorted(l, x, side="left") - 1, 0, self.m - 1))


def validate(spec: ProblemSpec) -> ValidatedProblem:
    return ValidatedProblem(spec)


# --------------------------------------------------------------------------
# Reaction-diffusion wrap
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ReactionWrap:
    """Diffusion problem plus the rescale ``c = exp(rate t) u``."""

    problem: ProblemSpec
    rate: float

    def rescale(self, u, t):
        t = np.asarray(t, dtype=float)
        factor = np.exp(self.rate * t)
        return np.asarray(u) * factor.reshape(factor.shape + (1,) * (np.ndim(u) - factor.ndim))


def reaction_substitution_wrap(problem: ProblemSpec, rate=1.0) -> ReactionWrap:
    """Strip a linear ``+rate * c`` source from ``dc/dt = D c_xx + rate c``.

    Only a uniform unit rate (or zero, the identity) is supported: the
    substitution needs the same growth factor in every layer, and the
    external conditions must be homogeneous for ``u`` to stay in the class
    of problems handled here.
    """
    if callable(rate) or np.ndim(rate) != 0:
        raise UnsupportedFeatureError("spatially varying reaction rates are not supported")
    rate = float(rate)
    if rate not in (0.0, 1.0):
        raise UnsupportedFeatureError(f"reaction rate must be 0 or 1, got {rate}")
    if rate != 0.0:
        for side, bc in (("left", problem.left), ("right", problem.right)):
            g = bc.g
            if not (isinstance(g, Constant) and g.value == 0.0):
                raise UnsupportedFeatureError(
                    f"{side} boundary data must be zero for the exp(t) substitution")
    return ReactionWrap(problem, rate)
