"""Scenario catalog and loaders.

Catalog operators (all on the patch [-1, 1]^4):

* ``flat-weyl``       E^a = s^a, L_sub = sum_j sub_j s^j (``sub`` default 0).
* ``scaled-time``     E^4 = exp(eps sin x1 + eps/2 cos x2) s^4, other E^a = s^a,
                      nonconstant L_sub.
* ``rotating-frame``  frame rotated in the (1, 2) plane by theta = omega x4.
* ``conformal``       E^a = omega exp(beta x2) s^a.
* ``random``          seeded smooth non-degenerate operator.
* ``degenerate``      E^4 = s^4, other E^a = 0 (fails non-degeneracy on purpose).

Named scenarios S1..S5 are ``flat-weyl``, ``scaled-time``, ``rotating-frame``,
``gauged-flat`` (flat Weyl with L_sub = s^4 under the ``shear-mixed`` gauge)
and ``conformal`` (omega = 2).  A name may carry overrides as a query string,
for example ``conformal?omega=2&beta=0.5``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import parse_qsl

import numpy as np

from ..errors import InputError, ParseError, UnknownScenario
from ..fields import NDIM, MatrixField, coords, cos, exp, mul, sin
from ..gauge import GaugeMap, apply_gauge, catalog_gauges, random_gauge
from ..symbol_core import PAULI, FirstOrderOperator, operator_from_symbols, pauli_field


def _sub_field(sub) -> MatrixField:
    sub = [float(v) for v in sub]
    if len(sub) != 4:
        raise InputError("sub needs four Pauli coefficients")
    return MatrixField.constant(np.einsum("j,jab->ab", sub, PAULI))


def flat_weyl(sub=(0.0, 0.0, 0.0, 0.0)) -> FirstOrderOperator:
    return operator_from_symbols(PAULI, _sub_field(sub))


def scaled_time(eps=0.3) -> FirstOrderOperator:
    x = coords()
    a = exp(mul(eps, sin(x[0])) + mul(0.5 * eps, cos(x[1])))
    E = [MatrixField.constant(PAULI[0]), MatrixField.constant(PAULI[1]),
         MatrixField.constant(PAULI[2]), MatrixField.constant(PAULI[3]) * a]
    S = pauli_field([mul(0.2, cos(x[2])), 0.0, mul(0.1, x[1]), 0.4])
    return operator_from_symbols(E, S)


def rotating_frame(omega=1.0, sub=(0.2, 0.0, 0.0, 0.5)) -> FirstOrderOperator:
    x = coords()
    th = mul(omega, x[3])
    c, s = cos(th), sin(th)
    E = [pauli_field([c, s, 0.0, 0.0]), pauli_field([-s, c, 0.0, 0.0]),
         MatrixField.constant(PAULI[2]), MatrixField.constant(PAULI[3])]
    return operator_from_symbols(E, _sub_field(sub))


def conformal(omega=2.0, beta=0.0) -> FirstOrderOperator:
    x = coords()
    w = mul(omega, exp(mul(beta, x[1])))
    return operator_from_symbols([MatrixField.constant(PAULI[a]) * w for a in range(NDIM)],
                                 MatrixField.zeros((2, 2)))


def random_operator(seed=0) -> FirstOrderOperator:
    """Seeded smooth operator with frame ``I + P(x)``, ``|P(x)|_2 <= 0.7``."""
    rng = np.random.default_rng(int(seed))
    x = coords()
    B = rng.normal(size=(NDIM, NDIM))
    B *= 0.35 / np.linalg.norm(B, 2)
    e = MatrixField.constant(np.eye(NDIM) + B)
    for _ in range(2):
        C = rng.normal(size=(NDIM, NDIM))
        C *= 0.175 / np.linalg.norm(C, 2)
        k = rng.uniform(-1.5, 1.5, size=NDIM)
        arg = sum(mul(float(k[a]), x[a]) for a in range(NDIM)) + float(rng.uniform(0, 2 * np.pi))
        e = e + MatrixField.constant(C) * sin(arg)
    E = [pauli_field([e.entries[j, a] for j in range(4)]) for a in range(NDIM)]
    coeffs = []
    for j in range(4):
        k = rng.uniform(-1.0, 1.0, size=NDIM)
        arg = sum(mul(float(k[a]), x[a]) for a in range(NDIM))
        coeffs.append(float(rng.normal(scale=0.3)) + mul(float(rng.normal(scale=0.2)), cos(arg)))
    return operator_from_symbols(E, pauli_field(coeffs))


def degenerate() -> FirstOrderOperator:
    E = [np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)), PAULI[3]]
    return operator_from_symbols(E, MatrixField.zeros((2, 2)))


RECIPES = {
    "flat-weyl": flat_weyl,
    "scaled-time": scaled_time,
    "rotating-frame": rotating_frame,
    "conformal": conformal,
    "random": random_operator,
    "degenerate": degenerate,
}

_LIST_PARAMS = {"sub"}


def build_gauge(gauge_id: str, params: dict | None = None) -> GaugeMap:
    params = dict(params or {})
    if gauge_id == "random":
        rng = np.random.default_rng(int(params.get("seed", 0)))
        return random_gauge(rng, float(params.get("amplitude", 0.5)), name=f"random-{int(params.get('seed', 0))}")
    gauges = catalog_gauges()
    if gauge_id not in gauges:
        raise UnknownScenario(f"unknown gauge {gauge_id!r}; known: {sorted(gauges) + ['random']}")
    return gauges[gauge_id]


@dataclass
class Scenario:
    name: str
    recipe_id: str
    params: dict = field(default_factory=dict)
    gauge_id: str | None = None
    gauge_params: dict = field(default_factory=dict)
    mass: float = 1.0
    grid: int = 3
    expect_degenerate: bool = False

    def base_operator(self) -> FirstOrderOperator:
        try:
            recipe = RECIPES[self.recipe_id]
        except KeyError:
            raise UnknownScenario(f"unknown recipe {self.recipe_id!r}; known: {sorted(RECIPES)}") from None
        try:
            return recipe(**self.params)
        except TypeError as exc:
            raise InputError(f"bad parameters for recipe {self.recipe_id!r}: {exc}") from None

    def gauge(self) -> GaugeMap | None:
        return None if self.gauge_id is None else build_gauge(self.gauge_id, self.gauge_params)

    def operator(self) -> FirstOrderOperator:
        op = self.base_operator()
        R = self.gauge()
        return op if R is None else apply_gauge(op, R)

    def to_dict(self) -> dict:
        out = {"name": self.name, "recipe": {"id": self.recipe_id, "params": self.params},
               "mass": self.mass, "grid": self.grid}
        if self.gauge_id is not None:
            out["gauge"] = {"id": self.gauge_id, "params": self.gauge_params}
        return out


CATALOG = {
    "flat-weyl": Scenario("flat-weyl", "flat-weyl"),
    "scaled-time": Scenario("scaled-time", "scaled-time"),
    "rotating-frame": Scenario("rotating-frame", "rotating-frame"),
    "gauged-flat": Scenario("gauged-flat", "flat-weyl", {"sub": [0.0, 0.0, 0.0, 1.0]}, gauge_id="shear-mixed"),
    "conformal": Scenario("conformal", "conformal", {"omega": 2.0}),
    "degenerate": Scenario("degenerate", "degenerate", expect_degenerate=True),
    "random": Scenario("random", "random", {"seed": 0}),
}
ALIASES = {"S1": "flat-weyl", "S2": "scaled-time", "S3": "rotating-frame", "S4": "gauged-flat", "S5": "conformal"}
CORE_SCENARIOS = ("flat-weyl", "scaled-time", "rotating-frame", "gauged-flat", "conformal")


def _parse_value(key, raw):
    if key in _LIST_PARAMS:
        return [float(v) for v in raw.split(",")]
    try:
        as_float = float(raw)
    except ValueError:
        raise InputError(f"parameter {key}={raw!r} is not numeric") from None
    return int(as_float) if key == "seed" else as_float


def _from_name(name: str) -> Scenario:
    base, _, query = name.partition("?")
    base = ALIASES.get(base, base)
    if base not in CATALOG:
        raise UnknownScenario(f"unknown scenario {name!r}; known: {sorted(CATALOG)}")
    proto = CATALOG[base]
    params = dict(proto.params)
    for key, raw in parse_qsl(query, keep_blank_values=True):
        params[key] = _parse_value(key, raw)
    return Scenario(name if query else base, proto.recipe_id, params, proto.gauge_id, dict(proto.gauge_params),
                    proto.mass, proto.grid, proto.expect_degenerate)


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ParseError("scenario file must hold a JSON object")
    try:
        recipe = data["recipe"]
        sc = Scenario(
            name=str(data.get("name", recipe["id"])),
            recipe_id=str(recipe["id"]),
            params=dict(recipe.get("params", {})),
            mass=float(data.get("mass", 1.0)),
            grid=int(data.get("grid", 3)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid scenario description: {exc}") from None
    gauge = data.get("gauge")
    if gauge is not None:
        if not isinstance(gauge, dict) or "id" not in gauge:
            raise ParseError("gauge must be an object with an 'id'")
        sc.gauge_id = str(gauge["id"])
        sc.gauge_params = dict(gauge.get("params", {}))
    sc.expect_degenerate = sc.recipe_id == "degenerate"
    return sc


def load_scenario(source) -> Scenario:
    """Resolve a catalog name (with optional ``?key=value`` overrides) or a JSON file path."""
    if isinstance(source, Scenario):
        return source
    source = str(source)
    path = Path(source)
    if source.endswith(".json") or path.is_file():
        if not path.is_file():
            raise UnknownScenario(f"scenario file {source!r} not found")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno) from None
        sc = scenario_from_dict(data)
        sc.base_operator()  # surface recipe errors at load time
        return sc
    return _from_name(source)
