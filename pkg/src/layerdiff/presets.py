"""Built-in problem manifests.

Each preset is a plain configuration mapping (see :mod:`layerdiff.config`),
so ``preset-dump`` output can be edited and fed back with ``--config``.
Unit conversions for the application presets happen here, once.
"""
from __future__ import annotations

import copy

from .config import RunConfig, parse_config

SECONDS_PER_YEAR = 365.25 * 86400.0


def _const(v):
    return {"name": "constant", "value": float(v)}


def _two_layer_case(description, interface, gammas=None, D1=1.0):
    gammas = (D1, 0.1) if gammas is None else gammas
    return {
        "description": description,
        "layers": [
            {"left": 0.0, "right": 0.5, "diffusivity": D1, "gamma": gammas[0], "initial": _const(0.0)},
            {"left": 0.5, "right": 1.0, "diffusivity": 0.1, "gamma": gammas[1], "initial": _const(0.0)},
        ],
        "interfaces": [interface],
        "boundary_left": {"aL": 1.0, "bL": 0.0, "g": _const(1.0)},
        "boundary_right": {"aR": 0.0, "bR": 1.0, "g": _const(0.0)},
        "solver": {"N": 50, "Np": 14},
        "times": [0.01, 0.2, 5.0],
    }


def _eight_layer(g0):
    m = 8
    return {
        "layers": [{"left": i / m, "right": (i + 1) / m, "diffusivity": 1.0 if i % 2 == 0 else 0.1,
                    "initial": _const(0.0)} for i in range(m)],
        "interfaces": [{"kind": "perfect"}] * (m - 1),
        "boundary_left": {"aL": 1.0, "bL": 0.0, "g": g0},
        "boundary_right": {"aR": 0.0, "bR": 1.0, "g": _const(0.0)},
        "solver": {"N": 50, "Np": 14},
        "times": [0.01, 0.2, 3.0],
        "points_per_layer": 16,
    }


def _liu():
    R = (42.42, 1.67)
    D = (1.6e-10, 2.13e-10)          # m^2/s
    eps = 0.54
    rho_b = 1.4
    layers = []
    for i, (left, right) in enumerate(((0.0, 0.05), (0.05, 0.5))):
        D_eff = D[i] * SECONDS_PER_YEAR / R[i]           # m^2/yr
        layers.append({"left": left, "right": right, "diffusivity": D_eff,
                       "gamma": eps * D[i] * SECONDS_PER_YEAR, "initial": _const(0.0)})
    return {
        "description": "Contaminant diffusion in a two-layer aquitard with a Gaussian inlet "
                       "concentration (x in m, t in yr, C in ug/L).",
        "layers": layers,
        "interfaces": [{"kind": "perfect"}],
        "boundary_left": {"aL": 1.0, "bL": 0.0,
                          "g": {"name": "gaussian", "c_max": 1.0, "mu": 2.15, "sigma": 1.0}},
        "boundary_right": {"aR": 0.0, "bR": 1.0, "g": _const(0.0)},
        "solver": {"N": 50, "Np": 16},
        "times": [1.0, 2.0, 3.0, 5.0, 10.0],
        "derived": {"name": "total_concentration",
                    "layer_factors": [eps * R[0] / rho_b, eps * R[1] / rho_b]},
        "units": {"x": "m", "t": "yr", "u": "ug/L", "total_concentration": "ug/kg"},
    }


HEAT_K = (297.64, 1741.18, 565.51)           # cal/(cm C h)
HEAT_RHO = (11.08, 2.71, 7.4)                # g/cm^3
HEAT_CP = (0.031, 0.181, 0.054)              # cal/(g C)


def _heat():
    layers = [{"left": 2.0 * i, "right": 2.0 * (i + 1),
               "diffusivity": HEAT_K[i] / (HEAT_RHO[i] * HEAT_CP[i]),
               "gamma": HEAT_K[i], "initial": _const(0.0)} for i in range(3)]
    return {
        "description": "Three-layer composite slab in perfect thermal contact, 400 C applied at "
                       "x = 0 (x in cm, t in h, u in C).",
        "layers": layers,
        "interfaces": [{"kind": "perfect"}, {"kind": "perfect"}],
        "boundary_left": {"aL": 1.0, "bL": 0.0, "g": _const(400.0)},
        "boundary_right": {"aR": 1.0, "bR": 0.0, "g": _const(0.0)},
        "solver": {"N": 50, "Np": 14},
        "times": [0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.5],
        "units": {"x": "cm", "t": "h", "u": "C"},
    }


def _trefry():
    return {
        "description": "Analyte release from a saturated medium into a clean one with partitioning "
                       "alpha = 2 at the interface.",
        "layers": [
            {"left": 0.0, "right": 1.0, "diffusivity": 5.0, "gamma": 5.0, "initial": _const(1.0)},
            {"left": 1.0, "right": 2.0, "diffusivity": 0.05, "gamma": 0.05, "initial": _const(0.0)},
        ],
        "interfaces": [{"kind": "partition", "theta": 2.0}],
        "boundary_left": {"aL": 0.0, "bL": 1.0, "g": _const(0.0)},
        "boundary_right": {"aR": 1.0, "bR": 0.0, "g": _const(0.0)},
        "solver": {"N": 50, "Np": 14},
        "times": [0.1, 0.25, 0.5, 1.0, 1.5, 2.0],
    }


def _brain():
    return {
        "description": "Tumour cell density with unit proliferation in grey/white/grey matter; "
                       "the field is computed for u and rescaled by exp(t).",
        "layers": [
            {"left": -5.0, "right": -1.0, "diffusivity": 0.2,
             "initial": {"name": "pulse", "center": -4.0, "width": 0.1, "amplitude": 1.0}},
            {"left": -1.0, "right": 1.0, "diffusivity": 1.0, "initial": _const(0.0)},
            {"left": 1.0, "right": 5.0, "diffusivity": 0.2,
             "initial": {"name": "pulse", "center": 2.0, "width": 0.1, "amplitude": 1.0}},
        ],
        "interfaces": [{"kind": "implicit"}, {"kind": "implicit"}],
        "boundary_left": {"aL": 0.0, "bL": 1.0, "g": _const(0.0)},
        "boundary_right": {"aR": 0.0, "bR": 1.0, "g": _const(0.0)},
        "solver": {"N": 50, "Np": 14},
        "times": [round(0.2 * k, 10) for k in range(1, 21)],
        "reaction": {"rate": 1.0},
    }


_FACTORIES = {
    "case-a": lambda: _two_layer_case("Perfect contact, gamma_i = D_i.", {"kind": "perfect"}),
    "case-b": lambda: _two_layer_case("Jump interface with H = 0.5.", {"kind": "jump", "H": 0.5}),
    "case-c": lambda: _two_layer_case("Partition interface with theta = 1.2.",
                                      {"kind": "partition", "theta": 1.2}),
    "case-c-d100": lambda: _two_layer_case("Partition interface with theta = 1.2 and D_1 = 100.",
                                           {"kind": "partition", "theta": 1.2}, D1=100.0),
    "case-d": lambda: _two_layer_case("Perfect contact, gamma_1 = gamma_2 = 2.",
                                      {"kind": "perfect"}, gammas=(2.0, 2.0)),
    "eight-layer": lambda: {**_eight_layer(_const(1.0)),
                            "description": "Eight alternating layers, D = 1, 0.1, ..."},
    "eight-layer-rise": lambda: {**_eight_layer({"name": "exp_rise", "value": 1.0, "rate": 1.0}),
                                 "description": "Eight alternating layers with inlet "
                                                "g0(t) = 1 - exp(-t)."},
    "liu-contaminant": _liu,
    "heat-composite": _heat,
    "trefry-analyte": _trefry,
    "brain-tumour": _brain,
}

PRESET_NAMES = tuple(_FACTORIES)
APPLICATION_PRESETS = ("liu-contaminant", "heat-composite", "trefry-analyte", "brain-tumour")


def preset_dict(name) -> dict:
    if name not in _FACTORIES:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return copy.deepcopy(_FACTORIES[name]())


def preset(name) -> RunConfig:
    return parse_config(preset_dict(name))


def heat_interface_oracle():
    """Steady interface temperatures of the heat preset from series thermal resistance."""
    resist = [2.0 / k for k in HEAT_K]
    q = 400.0 / sum(resist)
    T1 = 400.0 - q * resist[0]
    return T1, T1 - q * resist[1]
