"""Numerical inverse Laplace transform and the special functions it needs.

Inversion uses the residues ``c_k`` and poles ``z_k`` of the best
``(Np, Np)`` rational approximation ``r(z)`` to ``exp(z)`` on the negative
real axis. Replacing ``exp(z)`` in the Bromwich integral by ``r(z)`` and
closing the contour to the right collects the poles:

    f(t) ~ -(1/t) sum_k c_k F(z_k / t) = -(2/t) Re sum_{Im z_k > 0} c_k F(z_k / t)

Two sources for the constants: a double-precision Caratheodory-Fejer (CF)
computation, and the same construction carried out in 40-digit arithmetic
and frozen below (``tools/tabulate_cf.py`` regenerates it).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import hankel, svd

SQRT_PI = math.sqrt(math.pi)

# (Re z, Im z, Re c, Im c) for the poles with Im z > 0, from tools/tabulate_cf.py
_TABULATED = {
    12: (
        ("-6.998687908595892971317524", "13.99591662497926247477722", "0.0008184336096935784115179424", "-0.0005813535828404167991246933"),
        ("-2.235968246124955850581048", "11.10929623270746654623895", "-0.06857149433643345213471104", "0.0384190837301297038045827"),
        ("0.8517070967201086504814212", "8.503832825637502913264501", "1.319411531158642941525223", "-0.1835235837131599545598907"),
        ("2.917868545083253643035702", "6.017345924094155250700775", "-8.238255931236346079503404", "-2.796191268485847070317026"),
        ("4.206124204321871123390473", "3.590920758885601892054059", "18.78597743072165502370251", "20.23728513250015131676601"),
        ("4.827493452164460342373423", "1.193987991223399170927317", "-11.7993799653216048082134", "-46.41163532332425319686144"),
    ),
    14: (
        ("-8.897773186468662487589525", "16.63098261990231662641275", "-0.00007154288063952486416486057", "0.0001436104327180262634196324"),
        ("-3.703275049423281189914065", "13.65637187148339731861546", "0.009439025317898407484308775", "-0.01718479195806559576026278"),
        ("-0.2087586382499971279589008", "10.99126056190134424880715", "-0.3763600387887855651813572", "0.3351834703244176395998037"),
        ("2.269783829231224773715392", "8.461737973040277031248863", "4.807112098756670686846818", "-1.320979383772928695974645"),
        ("3.993369710578667416885944", "6.004831642235073283854405", "-23.49823209100593598468169", "-5.808359129853082330979944"),
        ("5.089345060580715530905972", "3.588824029027026820597598", "46.93327448902489510715968", "45.64364976897468685148244"),
        ("5.62314257274606446691961", "1.194069046343973547923615", "-27.8751619403408300171462", "-102.1473399903627067058807"),
    ),
    16: (
        ("-10.84391707869565303991783", "19.27744616718121122453243", "-0.0000005090152194060511866056968", "-0.00002422001765418369808031652"),
        ("-5.26497134344220713601792", "16.22022147316785156054519", "0.000211517421838826328028148", "0.00438929696473456641505646"),
        ("-1.413928462488651998539722", "13.49772569889268880572942", "0.04102313683541338338906839", "-0.1574346617345274040763964"),
        ("1.419375897185813212151327", "10.92536348449668024845289", "-1.47930071135606846076059", "1.768658832378571059295247"),
        ("3.509103608415018003945447", "8.436198985884344393603324", "15.05958527002476266744474", "-5.751405277643545814770635"),
        ("4.993174737718068562878707", "5.996881713603921349408221", "-62.51839246321204773395218", "-11.19039109428199334657453"),
        ("5.948152268951233725205804", "3.587457362018310212208653", "113.3977517848463228244213", "101.9472170421621941472864"),
        ("6.416177699099483123687166", "1.194122393370134699679248", "-64.50087802554357874358994", "-224.5944076265312147561848"),
    ),
}

SUPPORTED_ORDERS = tuple(sorted(_TABULATED))
DEFAULT_ORDER = 14


class InversionError(ArithmeticError):
    pass


def cf_poles_residues(n, K=75, nf=1024, scale=9.0):
    """Poles and residues of the CF approximation of type (n, n) to exp on (-inf, 0].

    Transplants ``exp`` to ``[-1, 1]``, takes its Chebyshev expansion, and
    reads the rational approximant off the singular vectors of the Hankel
    matrix of Chebyshev coefficients. Returns all ``n`` poles and residues.
    """
    w = np.exp(2j * np.pi * np.arange(nf) / nf)
    t = w.real
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        F = np.exp(scale * (t - 1) / (t + 1 + 1e-16))
    c = np.real(np.fft.fft(F)) / nf
    f = np.polyval(c[K::-1], w)
    U, S, Vh = svd(hankel(c[1:K + 1]))
    sigma = S[n]
    u = U[K - 1::-1, n]
    v = Vh[n, :]
    pad = np.zeros(nf - K)
    blaschke = np.fft.fft(np.concatenate([u, pad])) / np.fft.fft(np.concatenate([v, pad]))
    rt = f - sigma * w ** K * blaschke
    roots = np.roots(v)
    qk = roots[np.abs(roots) > 1]
    if qk.size != n:
        raise InversionError(f"CF construction found {qk.size} exterior roots for order {n}")
    pt = rt * np.polyval(np.poly(qk), w)
    ptc = np.real(np.fft.fft(pt) / nf)[n::-1]
    ck = np.empty_like(qk)
    for k, q in enumerate(qk):
        ck[k] = np.polyval(ptc, q) / np.polyval(np.poly(np.delete(qk, k)), q)
    zk = scale * (qk - 1) ** 2 / (qk + 1) ** 2
    ck = 4 * ck * zk / (qk ** 2 - 1)
    return zk, ck


@dataclass(frozen=True)
class InversionTable:
    """Half of the conjugate-paired poles/residues (those with ``Im z > 0``)."""

    order: int
    poles: np.ndarray
    residues: np.ndarray
    source: str = "tabulated"

    def __post_init__(self):
        for t in (0.1, 1.0, 10.0):
            err = abs(invert(self, lambda s: 1.0 / s, t) - 1.0)
            if not err < 1e-11:
                raise InversionError(
                    f"order {self.order} ({self.source}) fails the unit-step self-test at t={t}: {err:.2e}")

    def nodes(self, t):
        """Laplace-domain sample points ``z_k / t``; shape ``t.shape + (order/2,)``."""
        return np.multiply.outer(1.0 / np.asarray(t, dtype=float), self.poles)


def build_table(order=DEFAULT_ORDER, source="tabulated") -> InversionTable:
    if not isinstance(order, (int, np.integer)) or order % 2 or order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported inversion order {order!r}; supported orders: "
                         f"{', '.join(map(str, SUPPORTED_ORDERS))}")
    if source == "tabulated":
        rows = _TABULATED[order]
        poles = np.array([complex(float(a), float(b)) for a, b, _, _ in rows])
        residues = np.array([complex(float(c), float(d)) for _, _, c, d in rows])
    elif source == "cf":
        zk, ck = cf_poles_residues(order)
        keep = zk.imag > 0
        idx = np.argsort(zk[keep].real)
        poles, residues = zk[keep][idx], ck[keep][idx]
    else:
        raise ValueError(f"unknown table source {source!r}")
    return InversionTable(int(order), poles, residues, source)


def _checked(values, table, t):
    values = np.asarray(values, dtype=complex)
    bad = ~np.isfinite(values)
    if np.any(bad):
        k = np.argwhere(bad)[0]
        raise InversionError(f"transform not finite at node z={table.poles[k[-1]]} / t={t}")
    return values


def invert(table: InversionTable, F, t):
    """Approximate ``f(t)`` from its transform ``F`` (scalar ``t > 0``)."""
    if not t > 0:
        raise ValueError("inversion needs t > 0")
    vals = _checked(F(table.poles / t), table, t)
    return -2.0 * np.real(np.sum(table.residues * vals)) / t


def invert_filtered(table: InversionTable, gbar, rate, t):
    """Approximate ``L^{-1}{ gbar(s) / (s + rate) }`` at ``t``, i.e. the
    convolution of ``g`` with ``exp(-rate t)``.

    ``gbar`` is either a callable or the precomputed values ``gbar(z_k/t)``.
    ``rate`` (``D lam^2``) may be an array; the result then has its shape.
    """
    if not t > 0:
        raise ValueError("inversion needs t > 0")
    vals = _checked(gbar(table.poles / t) if callable(gbar) else gbar, table, t)
    rate = np.asarray(rate, dtype=float)
    weights = table.residues * vals
    terms = weights / (table.poles + np.multiply.outer(rate * t, np.ones_like(table.poles)))
    return -2.0 * np.real(terms.sum(axis=-1))


# --------------------------------------------------------------------------
# complex error function
# --------------------------------------------------------------------------

_SERIES_RADIUS = 2.0
_CFRAC_RADIUS = 6.0
_CFRAC_TERMS = 60
_WEIDEMAN_N = 40
_EXP_LIMIT = 700.0


def _weideman_coefficients(N):
    M = 2 * N
    k = np.arange(-M + 1, M)
    L = math.sqrt(N / math.sqrt(2.0))
    t = L * np.tan(0.5 * k * math.pi / M)
    f = np.concatenate([[0.0], np.exp(-t * t) * (L * L + t * t)])
    a = np.real(np.fft.fft(np.fft.fftshift(f))) / (2 * M)
    return L, a[1:N + 1][::-1]


_WL, _WA = _weideman_coefficients(_WEIDEMAN_N)


def _faddeeva_upper(z):
    """``w(z) = exp(-z^2) erfc(-iz)`` for ``Im z >= 0``."""
    out = np.empty_like(z)
    far = np.abs(z) >= _CFRAC_RADIUS
    if np.any(far):
        zf = z[far]
        r = np.zeros_like(zf)
        for k in range(_CFRAC_TERMS, 0, -1):
            r = (0.5 * k) / (zf - r)
        out[far] = 1j / SQRT_PI / (zf - r)
    near = ~far
    if np.any(near):
        zn = z[near]
        denom = _WL - 1j * zn
        p = np.polyval(_WA, (_WL + 1j * zn) / denom)
        out[near] = 2.0 * p / denom ** 2 + (1.0 / SQRT_PI) / denom
    return out


def faddeeva(z):
    """Faddeeva function ``w(z)`` anywhere in the plane."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    up = z.imag >= 0
    if np.any(up):
        out[up] = _faddeeva_upper(z[up])
    lo = ~up
    if np.any(lo):
        zl = z[lo]
        if np.any(np.real(-zl * zl) > _EXP_LIMIT):
            raise OverflowError("faddeeva: exp(-z^2) overflows")
        out[lo] = 2.0 * np.exp(-zl * zl) - _faddeeva_upper(-zl)
    return out[0] if scalar else out


def _erf_series(z):
    z2 = z * z
    term = z.copy()
    total = z.copy()
    n = 0
    while True:
        n += 1
        term = term * (-z2) / n
        add = term / (2 * n + 1)
        total = total + add
        if np.all(np.abs(add) <= 1e-17 * np.abs(total)) or n > 200:
            break
    return 2.0 / SQRT_PI * total


def complex_erf(z):
    """Error function for complex arguments.

    Maclaurin series inside ``|z| < 2``; elsewhere ``1 - exp(-z^2) w(iz)``
    with ``w`` from Weideman's rational expansion, or a continued fraction
    once ``|z| >= 6``. Odd symmetry maps ``Re z < 0`` onto ``Re z >= 0``.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(z.imag ** 2 - z.real ** 2 > _EXP_LIMIT):
        raise OverflowError("complex_erf: |Im z| too large, result overflows")
    flip = z.real < 0
    zz = np.where(flip, -z, z)
    out = np.empty_like(zz)
    small = np.abs(zz) < _SERIES_RADIUS
    if np.any(small):
        out[small] = _erf_series(zz[small])
    big = ~small
    if np.any(big):
        zb = zz[big]
        out[big] = 1.0 - np.exp(-zb * zb) * _faddeeva_upper(1j * zb)
    out = np.where(flip, -out, out)
    return out[0] if scalar else out


def gaussian_transform(s, c_max, mu, sigma):
    """Laplace transform of ``c_max exp(-(t - mu)^2 / sigma^2)`` over ``t >= 0``.

    Equal to ``(sigma sqrt(pi) c_max / 2) [1 + erf(q)] exp(s (s sigma^2 - 4 mu) / 4)``
    with ``q = (2 mu - s sigma^2) / (2 sigma)``. Evaluated as
    ``K exp(-mu^2/sigma^2) erfcx(-q)`` so the large and small exponentials
    never meet.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    s = np.asarray(s, dtype=complex)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    pref = 0.5 * sigma * SQRT_PI * c_max
    zeta = (s * sigma ** 2 - 2.0 * mu) / (2.0 * sigma)        # erfcx argument
    out = np.empty_like(s)
    right = zeta.real >= 0
    if np.any(right):
        out[right] = pref * math.exp(-(mu / sigma) ** 2) * _faddeeva_upper(1j * zeta[right])
    left = ~right
    if np.any(left):
        sl = s[left]
        expo = sl * (sl * sigma ** 2 - 4.0 * mu) / 4.0
        if np.any(expo.real > _EXP_LIMIT):
            raise OverflowError("gaussian_transform: exp overflow; rescale the time unit "
                                "so that mu and sigma are O(1)")
        out[left] = pref * (2.0 * np.exp(expo)
                            - math.exp(-(mu / sigma) ** 2) * _faddeeva_upper(-1j * zeta[left]))
    return out[0] if scalar else out
