"""Run configuration files (YAML).

A configuration looks like::

    layers:
      - {left: 0.0, right: 0.5, diffusivity: 1.0, gamma: 1.0,
         initial: {name: constant, value: 0.0}}
      - {left: 0.5, right: 1.0, diffusivity: 0.1}
    interfaces:
      - {kind: partition, theta: 1.2}
    boundary_left:  {aL: 1.0, bL: 0.0, g: {name: constant, value: 1.0}}
    boundary_right: {aR: 0.0, bR: 1.0, g: {name: constant, value: 0.0}}
    solver: {N: 50, Np: 14}
    times: [0.01, 0.2, 5.0]          # optional
    points_per_layer: 101             # optional
    reaction: {rate: 1.0}             # optional, c = exp(rate t) u
    derived: {name: total, layer_factors: [..]}   # optional extra column

``gamma`` defaults to the diffusivity and ``initial`` to zero. Interface kinds
are ``implicit``, ``perfect``, ``jump`` (needs ``H``), ``partition`` (needs
``theta``) and ``general`` (``H`` and ``theta``, defaulting to ``.inf`` and 1).
Floats are written with ``repr`` so a dump/load cycle is bit-exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import yaml

from .assembly import DEFAULT_N
from .laplace import DEFAULT_ORDER
from .model import (BOUNDARY_FUNCTIONS, INITIAL_CONDITIONS, BoundaryCondition, ProblemSpec,
                    ValidationError, normalize_interface)


class ConfigError(ValueError):
    """Malformed configuration; ``path`` locates the offending key."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class RunConfig:
    spec: ProblemSpec
    N: int = DEFAULT_N
    Np: int = DEFAULT_ORDER
    times: tuple | None = None
    points_per_layer: int = 101
    reaction_rate: float | None = None
    derived: dict | None = None
    description: str = ""
    extras: dict = field(default_factory=dict)


def _get(mapping, key, path, required=True, default=None):
    if not isinstance(mapping, dict):
        raise ConfigError(path, f"expected a mapping, got {type(mapping).__name__}")
    if key not in mapping:
        if required:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required key")
        return default
    return mapping[key]


def _number(value, path, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        if isinstance(value, str):
            try:
                value = float(value)          # allows "inf"
            except ValueError:
                raise ConfigError(path, f"expected a number, got {value!r}") from None
        else:
            raise ConfigError(path, f"expected a number, got {value!r}")
    if integer:
        if float(value) != int(value):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _named(entry, registry, path):
    name = _get(entry, "name", path)
    if name not in registry:
        raise ConfigError(f"{path}.name", f"unknown {name!r}; expected one of {sorted(registry)}")
    params = {k: v for k, v in entry.items() if k != "name"}
    cls = registry[name]
    try:
        if name == "polynomial":
            coeffs = _get(params, "coefficients", path)
            return cls(tuple(_number(c, f"{path}.coefficients[{j}]") for j, c in enumerate(coeffs)))
        return cls(**{k: _number(v, f"{path}.{k}") for k, v in params.items()})
    except TypeError as exc:
        raise ConfigError(path, str(exc)) from None


def _boundary(entry, side, path):
    a = _number(_get(entry, f"a{side}", path), f"{path}.a{side}")
    b = _number(_get(entry, f"b{side}", path), f"{path}.b{side}")
    g = _named(_get(entry, "g", path), BOUNDARY_FUNCTIONS, f"{path}.g")
    return BoundaryCondition(a, b, g)


def parse_config(data: dict) -> RunConfig:
    """Build a :class:`RunConfig` from a parsed YAML mapping."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a mapping")
    layers = _get(data, "layers", "")
    if not isinstance(layers, list) or not layers:
        raise ConfigError("layers", "expected a non-empty list")
    m = len(layers)
    breaks, D, gam, init = [], [], [], []
    for i, layer in enumerate(layers):
        p = f"layers[{i}]"
        left = _number(_get(layer, "left", p), f"{p}.left")
        right = _number(_get(layer, "right", p), f"{p}.right")
        if i == 0:
            breaks.append(left)
        elif left != breaks[-1]:
            raise ConfigError(f"{p}.left", f"{left!r} does not match the previous layer's right end "
                                           f"{breaks[-1]!r}")
        breaks.append(right)
        D.append(_number(_get(layer, "diffusivity", p), f"{p}.diffusivity"))
        gam.append(_number(_get(layer, "gamma", p, required=False, default=D[-1]), f"{p}.gamma"))
        ic = _get(layer, "initial", p, required=False, default={"name": "constant", "value": 0.0})
        init.append(_named(ic, INITIAL_CONDITIONS, f"{p}.initial"))

    interfaces = _get(data, "interfaces", "", required=m > 1, default=[])
    if not isinstance(interfaces, list) or len(interfaces) != m - 1:
        raise ConfigError("interfaces", f"expected a list of {m - 1} entries")
    H, theta = [], []
    for r, entry in enumerate(interfaces):
        p = f"interfaces[{r}]"
        kind = _get(entry, "kind", p)
        h = entry.get("H")
        th = entry.get("theta")
        try:
            gi = normalize_interface(kind, D_left=D[r], D_right=D[r + 1], gamma_left=gam[r],
                                     gamma_right=gam[r + 1],
                                     H=None if h is None else _number(h, f"{p}.H"),
                                     theta=None if th is None else _number(th, f"{p}.theta"),
                                     index=r + 1)
        except ValidationError as exc:
            raise ConfigError(p, "; ".join(str(v) for v in exc.violations)) from None
        if kind == "implicit":
            gam[r], gam[r + 1] = gi.gamma_left, gi.gamma_right
        H.append(gi.H)
        theta.append(gi.theta)

    left = _boundary(_get(data, "boundary_left", ""), "L", "boundary_left")
    right = _boundary(_get(data, "boundary_right", ""), "R", "boundary_right")
    spec = ProblemSpec(tuple(breaks), tuple(D), tuple(gam), tuple(H), tuple(theta), left, right,
                       tuple(init))

    solver = _get(data, "solver", "", required=False, default={})
    N = _number(_get(solver, "N", "solver", required=False, default=DEFAULT_N), "solver.N", True)
    Np = _number(_get(solver, "Np", "solver", required=False, default=DEFAULT_ORDER), "solver.Np", True)
    times = data.get("times")
    if times is not None:
        if not isinstance(times, list):
            raise ConfigError("times", "expected a list")
        times = tuple(_number(t, f"times[{k}]") for k, t in enumerate(times))
    ppl = _number(data.get("points_per_layer", 101), "points_per_layer", True)
    rate = None
    if "reaction" in data:
        rate = _number(_get(data["reaction"], "rate", "reaction"), "reaction.rate")
    derived = data.get("derived")
    if derived is not None:
        name = _get(derived, "name", "derived")
        factors = _get(derived, "layer_factors", "derived")
        if not isinstance(factors, list) or len(factors) != m:
            raise ConfigError("derived.layer_factors", f"expected {m} numbers")
        derived = {"name": str(name),
                   "layer_factors": [_number(f, f"derived.layer_factors[{k}]")
                                     for k, f in enumerate(factors)]}
    extras = {k: data[k] for k in ("units",) if k in data}
    return RunConfig(spec, N, Np, times, ppl, rate, derived, str(data.get("description", "")), extras)


def _interface_entry(H, theta):
    if math.isinf(H) and theta == 1.0:
        return {"kind": "perfect"}
    if theta == 1.0:
        return {"kind": "jump", "H": H}
    if math.isinf(H):
        return {"kind": "partition", "theta": theta}
    return {"kind": "general", "H": H, "theta": theta}


def _named_entry(obj):
    return {"name": obj.name, **obj.params()}


def to_dict(cfg: RunConfig) -> dict:
    """Inverse of :func:`parse_config` (interface kinds are inferred from values)."""
    s = cfg.spec
    out = {}
    if cfg.description:
        out["description"] = cfg.description
    out["layers"] = [{"left": s.breakpoints[i], "right": s.breakpoints[i + 1],
                      "diffusivity": s.diffusivities[i], "gamma": s.gammas[i],
                      "initial": _named_entry(s.initial[i])} for i in range(s.m)]
    out["interfaces"] = [_interface_entry(s.H[r], s.theta[r]) for r in range(s.m - 1)]
    out["boundary_left"] = {"aL": s.left.a, "bL": s.left.b, "g": _named_entry(s.left.g)}
    out["boundary_right"] = {"aR": s.right.a, "bR": s.right.b, "g": _named_entry(s.right.g)}
    out["solver"] = {"N": cfg.N, "Np": cfg.Np}
    if cfg.times is not None:
        out["times"] = list(cfg.times)
    out["points_per_layer"] = cfg.points_per_layer
    if cfg.reaction_rate is not None:
        out["reaction"] = {"rate": cfg.reaction_rate}
    if cfg.derived is not None:
        out["derived"] = {"name": cfg.derived["name"],
                          "layer_factors": list(cfg.derived["layer_factors"])}
    out.update(cfg.extras)
    return out


def dumps(cfg: RunConfig) -> str:
    return yaml.safe_dump(to_dict(cfg), sort_keys=False, default_flow_style=None)


def loads(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<root>", f"not valid YAML: {exc}") from None
    return parse_config(data)


def load(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
