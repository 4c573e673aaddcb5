"""Run configuration: JSON files, shipped presets and resolved sweep points.

A configuration is a JSON object. Every key is optional::

    {
      "description": "free text",
      "scenario": {
        "cell_radius": 1.0, "rings": 1, "tx_power": 1.0,
        "pathloss_exponent": 4.0, "edge_snr_db": 30.0,
        "noise_variance": null          # overrides edge_snr_db when set
      },
      "trajectory": "two-cell-edge",    # or "three-cell-corner"
      "d_over_R": [0.5],                # distances from the serving BS, units of R
      "p": [1.0],                       # loading rates, applied to every interferer
      "cases": [                        # explicit power lists instead of geometry
        {"name": "M2", "powers": [1.0, 1.0], "p": 1.0,
         "desired_power": 1.0, "noise_variance": 0.001}
      ],
      "samples": 1000000,               # Monte Carlo samples for densities
      "mc_draws": 100000,               # Monte Carlo draws per capacity point
      "seed": 0,
      "bins": 401, "span": 8.0,         # histogram: bins over +-span standard deviations
      "component": "I",                 # "I" (interference) or "Z" (plus noise) for pdf
      "ga_method": "quadrature",        # or "mc"
      "refine_check": true              # report the i_p grid-refinement delta
    }

Physical quantities are linear except keys ending in ``_db``.
"""

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigError, InvalidArgumentError
from .geometry import TRAJECTORIES, first_tier_scenario, link_budget, position_along

PRESETS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7")
MIN_SAMPLES = 10_000

DEFAULTS = {
    "description": "",
    "scenario": {"cell_radius": 1.0, "rings": 1, "tx_power": 1.0, "pathloss_exponent": 4.0,
                 "edge_snr_db": 30.0, "noise_variance": None},
    "trajectory": TRAJECTORIES[0],
    "d_over_R": [0.5],
    "p": [1.0],
    "cases": None,
    "samples": 1_000_000,
    "mc_draws": 100_000,
    "seed": 0,
    "bins": 401,
    "span": 8.0,
    "component": "I",
    "ga_method": "quadrature",
    "refine_check": True,
}
CASE_KEYS = ("name", "powers", "p", "desired_power", "noise_variance")


def _fail(key, message):
    raise ConfigError(f"{key}: {message}")


def _number(value, key, positive=False, nonnegative=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        _fail(key, f"expected a finite number, got {value!r}")
    if positive and not value > 0:
        _fail(key, "must be positive")
    if nonnegative and not value >= 0:
        _fail(key, "must be non-negative")
    return float(value)


def _integer(value, key, minimum):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        _fail(key, f"expected an integer >= {minimum}, got {value!r}")
    return int(value)


def _number_list(value, key, lo=None, hi=None):
    if not isinstance(value, list) or not value:
        _fail(key, "expected a non-empty list of numbers")
    out = []
    for i, item in enumerate(value):
        x = _number(item, f"{key}[{i}]")
        if (lo is not None and x < lo) or (hi is not None and x > hi):
            _fail(f"{key}[{i}]", f"must lie in [{lo}, {hi}]")
        out.append(x)
    return out


def _check_keys(data, allowed, prefix=""):
    for key in data:
        if key not in allowed:
            _fail(prefix + key, f"unknown key (allowed: {', '.join(sorted(allowed))})")


def validate(raw):
    """Merge ``raw`` over the defaults and check every field; returns a new dict."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    _check_keys(raw, DEFAULTS)
    data = copy.deepcopy(DEFAULTS)
    for key, value in raw.items():
        if key == "scenario":
            if not isinstance(value, dict):
                _fail("scenario", "expected an object")
            _check_keys(value, DEFAULTS["scenario"], "scenario.")
            data["scenario"].update(value)
        else:
            data[key] = copy.deepcopy(value)

    sc = data["scenario"]
    sc["cell_radius"] = _number(sc["cell_radius"], "scenario.cell_radius", positive=True)
    sc["rings"] = _integer(sc["rings"], "scenario.rings", 1)
    sc["tx_power"] = _number(sc["tx_power"], "scenario.tx_power", positive=True)
    sc["pathloss_exponent"] = _number(sc["pathloss_exponent"], "scenario.pathloss_exponent", positive=True)
    sc["edge_snr_db"] = _number(sc["edge_snr_db"], "scenario.edge_snr_db")
    if sc["noise_variance"] is not None:
        sc["noise_variance"] = _number(sc["noise_variance"], "scenario.noise_variance", nonnegative=True)

    if not isinstance(data["description"], str):
        _fail("description", "expected a string")
    if data["trajectory"] not in TRAJECTORIES:
        _fail("trajectory", f"expected one of {TRAJECTORIES}")
    data["d_over_R"] = _number_list(data["d_over_R"], "d_over_R", lo=0.0)
    data["p"] = _number_list(data["p"], "p", lo=0.0, hi=1.0)
    data["samples"] = _integer(data["samples"], "samples", MIN_SAMPLES)
    data["mc_draws"] = _integer(data["mc_draws"], "mc_draws", MIN_SAMPLES)
    data["seed"] = _integer(data["seed"], "seed", 0)
    data["bins"] = _integer(data["bins"], "bins", 10)
    if data["bins"] % 2 == 0:
        _fail("bins", "must be odd so that zero is a bin center")
    data["span"] = _number(data["span"], "span", positive=True)
    if data["component"] not in ("I", "Z"):
        _fail("component", "expected 'I' or 'Z'")
    if data["ga_method"] not in ("quadrature", "mc"):
        _fail("ga_method", "expected 'quadrature' or 'mc'")
    if not isinstance(data["refine_check"], bool):
        _fail("refine_check", "expected true or false")

    if data["cases"] is not None:
        cases = data["cases"]
        if not isinstance(cases, list) or not cases:
            _fail("cases", "expected a non-empty list")
        for i, case in enumerate(cases):
            key = f"cases[{i}]"
            if not isinstance(case, dict):
                _fail(key, "expected an object")
            _check_keys(case, CASE_KEYS, key + ".")
            if "powers" not in case:
                _fail(key + ".powers", "required")
            case["powers"] = _number_list(case["powers"], key + ".powers", lo=0.0)
            case["p"] = _number(case.get("p", 1.0), key + ".p", nonnegative=True)
            if case["p"] > 1:
                _fail(key + ".p", "must lie in [0, 1]")
            case["name"] = str(case.get("name", f"case{i}"))
            case["desired_power"] = _number(case.get("desired_power", 1.0), key + ".desired_power",
                                            nonnegative=True)
            if case.get("noise_variance") is not None:
                case["noise_variance"] = _number(case["noise_variance"], key + ".noise_variance",
                                                 nonnegative=True)
            else:
                case["noise_variance"] = None
    return data


def parse_json(text, source="<config>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_preset(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    text = resources.files("ccistat.presets").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return parse_json(text, f"preset {name}")


def load_file(path):
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_json(text, str(path))


@dataclass(frozen=True)
class Point:
    """One resolved evaluation point: mean powers, loading and noise."""

    name: str
    d_over_R: float
    p: float
    desired_power: float
    interferer_powers: np.ndarray
    noise_variance: float

    @property
    def num_interferers(self):
        return int(self.interferer_powers.size)


class RunConfig:
    """A validated configuration with helpers for its sweep points."""

    def __init__(self, raw):
        self.data = validate(raw)

    @classmethod
    def build(cls, config_path=None, preset=None, overrides=None):
        raw = {}
        if preset is not None:
            raw.update(load_preset(preset))
        if config_path is not None:
            loaded = load_file(config_path)
            if not isinstance(loaded, dict):
                raise ConfigError(f"{config_path}: configuration must be a JSON object")
            raw.update(loaded)
        for key, value in (overrides or {}).items():
            if value is not None:
                raw[key] = value
        return cls(raw)

    def __getitem__(self, key):
        return self.data[key]

    def canonical(self):
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    @property
    def digest(self):
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()

    def scenario(self, loading):
        sc = self.data["scenario"]
        try:
            scenario = first_tier_scenario(loading, sc["rings"], sc["cell_radius"], sc["tx_power"],
                                           sc["pathloss_exponent"], sc["edge_snr_db"])
        except InvalidArgumentError as exc:
            raise ConfigError(f"scenario: {exc}") from None
        if sc["noise_variance"] is not None:
            scenario = scenario.with_noise(sc["noise_variance"])
        return scenario

    def points(self):
        """Sweep points in output order: cases in file order, else ``p`` outer and ``d/R`` inner."""
        if self.data["cases"] is not None:
            default_noise = self.scenario(1.0).noise_variance
            out = []
            for case in self.data["cases"]:
                noise = case["noise_variance"]
                out.append(Point(case["name"], math.nan, case["p"], case["desired_power"],
                                 np.array(case["powers"]), default_noise if noise is None else noise))
            return out
        out = []
        radius = self.data["scenario"]["cell_radius"]
        for p in self.data["p"]:
            scenario = self.scenario(p)
            for d in self.data["d_over_R"]:
                try:
                    budget = link_budget(scenario, position_along(self.data["trajectory"], d, radius))
                except ValueError as exc:
                    raise ConfigError(f"d_over_R={d!r}: {exc}") from None
                out.append(Point(f"d{d:g}_p{p:g}", d, p, budget.desired_power,
                                 np.array(budget.interferer_powers), scenario.noise_variance))
        return out
