"""Run specifications read from YAML files.

Example::

    network:
      cells: 5
      users_per_cell: 40
      antennas: 200
      coherence_symbols: 1000
      pilot_symbols: 100
      snr_db: 0            # or noise_power
    scenario:
      profile: weak        # or type: synthetic | geometric | two_cell_bounded
      shadowing_std_db: 8
    schemes: [IAN, SD, TD, OS, LinearMF, LinearMMSE]
    backend: both          # finite | asymptotic | both
    trials: 2000
    a_samples: 200000
    seed: 1
    sweep:                 # optional
      variable: antennas   # snr_db | pilot_symbols | antennas | p
      from: 40
      to: 400
      steps: 10

Validation errors carry the line number of the offending key.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import numpy as np
import yaml

from .asymptotic import DEFAULT_SAMPLES, MIN_SAMPLES
from .errors import ConfigError
from .finite import DEFAULT_TRIALS, SCHEMES
from .network import (
    PROFILES,
    Geometric,
    NetworkConfig,
    ScenarioSpec,
    Synthetic,
    TwoCellBounded,
    noise_power_from_snr_db,
)

BACKENDS = ("finite", "asymptotic", "both")
SWEEP_VARIABLES = ("snr_db", "pilot_symbols", "antennas", "p")
INTEGER_SWEEPS = ("pilot_symbols", "antennas")
FINITE_SCHEMES = ("IAN", "SD", "TD", "LinearMF", "LinearMMSE")
ASYMPTOTIC_SCHEMES = ("IAN", "SD", "TD", "OS")

_NETWORK_KEYS = {"cells", "users_per_cell", "antennas", "coherence_symbols", "pilot_symbols", "snr_db", "noise_power"}
_SCENARIO_KEYS = {
    "profile", "type", "shadowing_std_db", "alpha", "p", "circle_radius_m", "area_side_m",
    "min_distance_m", "distance_unit_m", "x_min", "x_max", "y_min", "y_max",
}
_TOP_KEYS = {"network", "scenario", "schemes", "backend", "trials", "a_samples", "seed", "sweep",
             "td_zetas", "finite_correction"}
_SWEEP_KEYS = {"variable", "from", "to", "steps"}


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    steps: int

    def values(self) -> list:
        vals = np.linspace(self.start, self.stop, self.steps)
        if self.variable in INTEGER_SWEEPS:
            out = [int(round(v)) for v in vals]
            if len(set(out)) != len(out):
                raise ConfigError(f"sweep over {self.variable} repeats integer values {out}")
            return out
        return [round(float(v), 12) for v in vals]  # drop linspace rounding noise


@dataclass(frozen=True)
class RunSpec:
    network: NetworkConfig
    scenario: ScenarioSpec
    schemes: tuple = ("IAN", "SD", "TD")
    backend: str = "both"
    trials: int = DEFAULT_TRIALS
    a_samples: int = DEFAULT_SAMPLES
    seed: int = 0
    sweep: Sweep | None = None
    td_zetas: str = "equal"
    finite_correction: bool = True
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def points(self):
        """(sweep value or None, config, scenario) for every sweep point."""
        if self.sweep is None:
            return [(None, self.network, self.scenario)]
        out = []
        for v in self.sweep.values():
            net, scen = self.network, self.scenario
            if self.sweep.variable == "snr_db":
                net = net.replace(noise_power=noise_power_from_snr_db(v))
            elif self.sweep.variable == "pilot_symbols":
                net = net.replace(pilot_symbols=v)
            elif self.sweep.variable == "antennas":
                net = net.replace(antennas=v)
            else:
                scen = replace(scen, variant=replace(scen.variant, p=v))
            out.append((v, net, scen))
        return out


# YAML with line numbers -----------------------------------------------------

class _Node:
    """Plain value plus the 1-based line where it appeared."""

    def __init__(self, value, line):
        self.value = value
        self.line = line


def _convert(node) -> _Node:
    line = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = _convert(k).value
            if key in out:
                raise ConfigError(f"duplicate key {key!r}", k.start_mark.line + 1)
            out[key] = (_convert(v), k.start_mark.line + 1)
        return _Node(out, line)
    if isinstance(node, yaml.SequenceNode):
        return _Node([_convert(v) for v in node.value], line)
    # composed nodes already carry resolved tags (int, float, bool, ...)
    return _Node(yaml.SafeLoader("").construct_object(node, deep=True), line)


def _plain(node: _Node):
    if isinstance(node.value, dict):
        return {k: _plain(v) for k, (v, _) in node.value.items()}
    if isinstance(node.value, list):
        return [_plain(v) for v in node.value]
    return node.value


class _Section:
    def __init__(self, node: _Node, name: str, allowed: set):
        if not isinstance(node.value, dict):
            raise ConfigError(f"{name} must be a mapping", node.line)
        self.items = node.value
        self.name = name
        self.line = node.line
        for key, (_, line) in self.items.items():
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in {name}", line)

    def has(self, key):
        return key in self.items

    def line_of(self, key):
        return self.items[key][1] if key in self.items else self.line

    def get(self, key, kind, default=None, required=False):
        if key not in self.items:
            if required:
                raise ConfigError(f"missing required key {key!r} in {self.name}", self.line)
            return default
        node, line = self.items[key]
        v = node.value
        if kind is int:
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{key} must be an integer, got {v!r}", line)
        elif kind is float:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{key} must be a number, got {v!r}", line)
            v = float(v)
        elif kind is bool:
            if not isinstance(v, bool):
                raise ConfigError(f"{key} must be true or false, got {v!r}", line)
        elif kind is str:
            if not isinstance(v, str):
                raise ConfigError(f"{key} must be a string, got {v!r}", line)
        elif kind is list:
            if not isinstance(v, list):
                raise ConfigError(f"{key} must be a list", line)
            v = [_plain(x) for x in v]
        return v

    def node(self, key):
        return self.items[key][0] if key in self.items else None


def _at(line, fn, *args, **kw):
    """Call a constructor, attaching ``line`` to any configuration error."""
    try:
        return fn(*args, **kw)
    except ConfigError as exc:
        if exc.line is not None:
            raise
        raise ConfigError(str(exc), line) from None


def _scenario(sec: _Section) -> ScenarioSpec:
    shadow = sec.get("shadowing_std_db", float, 8.0)
    if sec.has("profile"):
        name = sec.get("profile", str)
        if name not in PROFILES:
            raise ConfigError(f"profile must be one of {sorted(PROFILES)}", sec.line_of("profile"))
        if sec.has("type"):
            raise ConfigError("give either profile or type, not both", sec.line_of("type"))
        return _at(sec.line_of("shadowing_std_db"), ScenarioSpec, PROFILES[name].variant, shadow)
    kind = sec.get("type", str, required=True)
    line = sec.line_of("type")
    if kind == "synthetic":
        variant = _at(sec.line_of("alpha"), Synthetic, sec.get("alpha", float, required=True))
    elif kind == "geometric":
        kw = {k: sec.get(k, float) for k in ("circle_radius_m", "area_side_m", "min_distance_m", "distance_unit_m")
              if sec.has(k)}
        variant = _at(line, Geometric, sec.get("p", float, required=True), **kw)
    elif kind == "two_cell_bounded":
        variant = _at(line, TwoCellBounded, *(sec.get(k, float, required=True) for k in ("x_min", "x_max", "y_min", "y_max")))
    else:
        raise ConfigError(f"scenario type must be synthetic, geometric or two_cell_bounded, got {kind!r}", line)
    return _at(sec.line_of("shadowing_std_db"), ScenarioSpec, variant, shadow)


def _network(sec: _Section) -> NetworkConfig:
    kw = {k: sec.get(k, int, required=True)
          for k in ("cells", "users_per_cell", "antennas", "coherence_symbols", "pilot_symbols")}
    if sec.has("snr_db") == sec.has("noise_power"):
        raise ConfigError("network needs exactly one of snr_db or noise_power", sec.line)
    if sec.has("snr_db"):
        kw["noise_power"] = noise_power_from_snr_db(sec.get("snr_db", float))
    else:
        kw["noise_power"] = sec.get("noise_power", float)
    try:
        return NetworkConfig(**kw)
    except ConfigError as exc:
        # point at the first key the message names
        msg = str(exc)
        named = [k for k in kw if msg.startswith(k)] or [k for k in kw if f" {k}" in msg]
        line = sec.line_of(named[0]) if named else sec.line
        if named == ["noise_power"] and sec.has("snr_db"):
            line = sec.line_of("snr_db")
        raise ConfigError(msg, line) from None


def parse_spec(text: str) -> RunSpec:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise ConfigError(f"YAML syntax error: {exc.problem}", mark.line + 1 if mark else None) from None
    if root is None:
        raise ConfigError("spec file is empty", 1)
    top = _Section(_convert(root), "spec", _TOP_KEYS)
    if not top.has("network"):
        raise ConfigError("missing required section 'network'", 1)
    network = _network(_Section(top.node("network"), "network", _NETWORK_KEYS))
    if not top.has("scenario"):
        raise ConfigError("missing required section 'scenario'", 1)
    scenario = _scenario(_Section(top.node("scenario"), "scenario", _SCENARIO_KEYS))
    _at(top.line_of("scenario"), scenario.check_cells, network.cells)

    schemes = tuple(top.get("schemes", list, ["IAN", "SD", "TD"]))
    for s in schemes:
        if s not in SCHEMES:
            raise ConfigError(f"unknown scheme {s!r}; choose from {SCHEMES}", top.line_of("schemes"))
    if not schemes:
        raise ConfigError("schemes list is empty", top.line_of("schemes"))
    backend = top.get("backend", str, "both")
    if backend not in BACKENDS:
        raise ConfigError(f"backend must be one of {BACKENDS}", top.line_of("backend"))
    supported = set()
    if backend in ("finite", "both"):
        supported |= set(FINITE_SCHEMES)
    if backend in ("asymptotic", "both"):
        supported |= set(ASYMPTOTIC_SCHEMES)
    for s in schemes:
        if s not in supported:
            raise ConfigError(f"scheme {s} is not available with backend {backend}", top.line_of("schemes"))

    trials = top.get("trials", int, DEFAULT_TRIALS)
    if trials < 1:
        raise ConfigError("trials must be at least 1", top.line_of("trials"))
    a_samples = top.get("a_samples", int, DEFAULT_SAMPLES)
    if a_samples < MIN_SAMPLES:
        raise ConfigError(f"a_samples must be at least {MIN_SAMPLES}", top.line_of("a_samples"))
    seed = top.get("seed", int, 0)
    if seed < 0 or seed >= 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer", top.line_of("seed"))
    td_zetas = top.get("td_zetas", str, "equal")
    if td_zetas not in ("equal", "optimal"):
        raise ConfigError("td_zetas must be equal or optimal", top.line_of("td_zetas"))
    correction = top.get("finite_correction", bool, True)

    sweep = None
    if top.has("sweep"):
        sw = _Section(top.node("sweep"), "sweep", _SWEEP_KEYS)
        var = sw.get("variable", str, required=True)
        if var not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep variable must be one of {SWEEP_VARIABLES}", sw.line_of("variable"))
        if var == "p" and not isinstance(scenario.variant, Geometric):
            raise ConfigError("sweeping p needs a geometric scenario", sw.line_of("variable"))
        steps = sw.get("steps", int, required=True)
        if steps < 1:
            raise ConfigError("steps must be at least 1", sw.line_of("steps"))
        start, stop = sw.get("from", float, required=True), sw.get("to", float, required=True)
        if steps > 1 and start == stop:
            raise ConfigError("sweep range is empty", sw.line_of("to"))
        sweep = Sweep(var, start, stop, steps)
        try:
            spec = RunSpec(network, scenario, sweep=sweep)
            for _ in spec.points():
                pass
        except ConfigError as exc:
            raise ConfigError(f"sweep produces an invalid point: {exc}", sw.line) from None

    return RunSpec(network, scenario, schemes, backend, trials, a_samples, seed, sweep, td_zetas, correction,
                   _plain(_convert(root)))


def load_spec(path) -> RunSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read spec file: {exc}") from None
    return parse_spec(text)
