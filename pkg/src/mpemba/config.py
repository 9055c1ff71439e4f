"""Experiment configuration: JSON schema, validation, model assembly.

Configs are plain JSON files with four sections (``model``, ``bath``,
``initial_state``, ``time_grid``) plus optional ``transform`` and
``outputs``.  Validation is strict: unknown keys are rejected, and every
error names the dotted path of the offending entry.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ValidationError
from .metropolis import MetropolisConfig
from .models import MODEL_BUILDERS, ModelInstance, quantum_dot, single_qubit, tfim, two_level_atom

_MODEL_KEYS = {
    "single_qubit": {"omega"},
    "tfim": {"length", "coupling", "h_field"},
    "two_level_atom": {"epsilon", "gamma"},
    "quantum_dot": {"epsilon", "e_charging", "gamma", "energy_resolved"},
}
_BATH_KEYS = {"temperature", "beta", "statistics", "gamma", "temperature_kelvin"}
_STATE_KINDS = {"bloch", "thermal", "random-mixed", "pure-plus", "file"}
_TRANSFORM_KINDS = {"none", "exact", "unitary-metropolis", "swap-metropolis"}
_METRO_KEYS = {
    "cooling_tau", "threshold_eps", "nano_n", "micro_m", "macro_m",
    "target_modes", "seed", "max_total_iterations", "fermionic",
}


@dataclass(frozen=True)
class InitialStateSpec:
    kind: str
    bloch: tuple | None = None
    temperature: float | None = None
    n_samples: int | None = None
    seed: int | None = None
    path: str | None = None


@dataclass(frozen=True)
class TransformSpec:
    kind: str
    metropolis: MetropolisConfig | None = None
    fermionic: bool = False


@dataclass(frozen=True)
class TimeGridSpec:
    t_max: float
    n_points: int = 200
    spacing: str = "linear"
    t_min: float = 0.0

    def times(self) -> np.ndarray:
        if self.n_points == 1:
            return np.array([self.t_max])
        if self.spacing == "log":
            start = self.t_min if self.t_min > 0 else self.t_max / self.n_points * 1e-3
            return np.geomspace(start, self.t_max, self.n_points)
        return np.linspace(self.t_min, self.t_max, self.n_points)


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    dump_states: bool = False
    gnuplot: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    model_name: str
    model_params: dict
    bath_params: dict
    initial_state: InitialStateSpec
    transform: TransformSpec
    time_grid: TimeGridSpec
    outputs: OutputSpec
    raw: dict = field(compare=False, default_factory=dict)

    def build_model(self) -> ModelInstance:
        return _assemble_model(self.model_name, self.model_params, self.bath_params)


def _expect_mapping(node, path):
    if not isinstance(node, dict):
        raise ConfigError(path, f"expected an object, got {type(node).__name__}")


def _check_keys(node, path, allowed, required=()):
    _expect_mapping(node, path)
    for key in node:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown key")
    for key in required:
        if key not in node:
            raise ConfigError(path, f"missing required key {key!r}")


def _number(node, path, *, positive=False, integer=False):
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(path, "expected a number")
    if integer and int(node) != node:
        raise ConfigError(path, "expected an integer")
    if positive and node <= 0:
        raise ConfigError(path, "must be positive")
    return int(node) if integer else float(node)


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON experiment configuration."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("", f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"config is not valid JSON: {exc}")
    return parse_config(raw)


def parse_config(raw: dict) -> ExperimentConfig:
    _check_keys(
        raw, "", {"model", "bath", "initial_state", "transform", "time_grid", "outputs"},
        required=("model", "initial_state", "time_grid"),
    )

    model_node = raw["model"]
    _expect_mapping(model_node, "model")
    if "name" not in model_node:
        raise ConfigError("model", "missing required key 'name'")
    name = model_node["name"]
    if name not in MODEL_BUILDERS:
        raise ConfigError("model.name", f"unknown model {name!r}; choose from {sorted(MODEL_BUILDERS)}")
    params = {k: v for k, v in model_node.items() if k != "name"}
    for key in params:
        if key not in _MODEL_KEYS[name]:
            raise ConfigError(f"model.{key}", f"unknown parameter for model {name!r}")

    bath_node = raw.get("bath", {})
    _check_keys(bath_node, "bath", _BATH_KEYS)
    if "temperature" in bath_node and "beta" in bath_node:
        raise ConfigError("bath", "give temperature or beta, not both")

    state = _parse_initial_state(raw["initial_state"])
    transform = _parse_transform(raw.get("transform", {"kind": "none"}))
    grid = _parse_time_grid(raw["time_grid"])
    outputs = _parse_outputs(raw.get("outputs", {}))

    cfg = ExperimentConfig(
        model_name=name, model_params=params, bath_params=dict(bath_node),
        initial_state=state, transform=transform, time_grid=grid,
        outputs=outputs, raw=raw,
    )
    cfg.build_model()  # surface parameter errors at load time
    return cfg


def _parse_initial_state(node) -> InitialStateSpec:
    _expect_mapping(node, "initial_state")
    kind = node.get("kind")
    if kind not in _STATE_KINDS:
        raise ConfigError("initial_state.kind", f"expected one of {sorted(_STATE_KINDS)}")
    if kind == "bloch":
        _check_keys(node, "initial_state", {"kind", "r"}, required=("r",))
        r = node["r"]
        if not (isinstance(r, list) and len(r) == 3):
            raise ConfigError("initial_state.r", "expected a 3-component list")
        vec = tuple(_number(x, "initial_state.r") for x in r)
        if math.sqrt(sum(x * x for x in vec)) > 1 + 1e-12:
            raise ConfigError("initial_state.r", "Bloch vector norm exceeds 1")
        return InitialStateSpec(kind=kind, bloch=vec)
    if kind == "thermal":
        _check_keys(node, "initial_state", {"kind", "temperature"}, required=("temperature",))
        return InitialStateSpec(
            kind=kind, temperature=_number(node["temperature"], "initial_state.temperature", positive=True)
        )
    if kind == "random-mixed":
        _check_keys(node, "initial_state", {"kind", "n_samples", "seed"}, required=("n_samples",))
        return InitialStateSpec(
            kind=kind,
            n_samples=_number(node["n_samples"], "initial_state.n_samples", positive=True, integer=True),
            seed=_number(node.get("seed", 0), "initial_state.seed", integer=True),
        )
    if kind == "file":
        _check_keys(node, "initial_state", {"kind", "path"}, required=("path",))
        return InitialStateSpec(kind=kind, path=str(node["path"]))
    _check_keys(node, "initial_state", {"kind"})
    return InitialStateSpec(kind=kind)


def _parse_transform(node) -> TransformSpec:
    _expect_mapping(node, "transform")
    kind = node.get("kind", "none")
    if kind not in _TRANSFORM_KINDS:
        raise ConfigError("transform.kind", f"expected one of {sorted(_TRANSFORM_KINDS)}")
    if kind in ("none", "exact"):
        _check_keys(node, "transform", {"kind"})
        return TransformSpec(kind=kind)
    _check_keys(node, "transform", _METRO_KEYS | {"kind"},
                required=("cooling_tau", "threshold_eps", "target_modes"))
    modes = node["target_modes"]
    if not (isinstance(modes, list) and modes and all(isinstance(k, int) for k in modes)):
        raise ConfigError("transform.target_modes", "expected a nonempty list of mode indices")
    try:
        metro = MetropolisConfig(
            cooling_tau=_number(node["cooling_tau"], "transform.cooling_tau", positive=True),
            threshold_eps=_number(node["threshold_eps"], "transform.threshold_eps", positive=True),
            nano_n=_number(node.get("nano_n", 200), "transform.nano_n", positive=True, integer=True),
            micro_m=_number(node.get("micro_m", 20), "transform.micro_m", positive=True, integer=True),
            macro_big_m=_number(node.get("macro_m", 20), "transform.macro_m", positive=True, integer=True),
            target_modes=tuple(modes),
            seed=_number(node.get("seed", 0), "transform.seed", integer=True),
            max_total_iterations=_number(
                node.get("max_total_iterations", 1_000_000),
                "transform.max_total_iterations", positive=True, integer=True,
            ),
        )
    except ValidationError as exc:
        raise ConfigError("transform", str(exc))
    return TransformSpec(kind=kind, metropolis=metro, fermionic=bool(node.get("fermionic", False)))


def _parse_time_grid(node) -> TimeGridSpec:
    _check_keys(node, "time_grid", {"t_max", "n_points", "spacing", "t_min"}, required=("t_max",))
    spacing = node.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        raise ConfigError("time_grid.spacing", "expected 'linear' or 'log'")
    return TimeGridSpec(
        t_max=_number(node["t_max"], "time_grid.t_max", positive=True),
        n_points=_number(node.get("n_points", 200), "time_grid.n_points", positive=True, integer=True),
        spacing=spacing,
        t_min=_number(node.get("t_min", 0.0), "time_grid.t_min"),
    )


def _parse_outputs(node) -> OutputSpec:
    _check_keys(node, "outputs", {"directory", "dump_states", "gnuplot"})
    return OutputSpec(
        directory=str(node.get("directory", "out")),
        dump_states=bool(node.get("dump_states", False)),
        gnuplot=bool(node.get("gnuplot", False)),
    )


def _assemble_model(name: str, params: dict, bath: dict) -> ModelInstance:
    """Merge bath overrides into the model constructor call."""
    try:
        if name in ("single_qubit", "tfim"):
            kwargs = dict(params)
            if "temperature" in bath:
                kwargs["t_bath"] = bath["temperature"]
            elif "beta" in bath:
                kwargs["t_bath"] = 1.0 / bath["beta"]
            if "gamma" in bath:
                kwargs["gamma"] = bath["gamma"]
            if "statistics" in bath:
                if name == "single_qubit":
                    raise ConfigError("bath.statistics", "the single-qubit bath is bosonic")
                kwargs["statistics"] = bath["statistics"]
            if "temperature_kelvin" in bath:
                raise ConfigError("bath.temperature_kelvin", f"not applicable to model {name!r}")
            return MODEL_BUILDERS[name](**kwargs)
        kwargs = dict(params)
        if "temperature_kelvin" in bath:
            kwargs["t_bath_kelvin"] = bath["temperature_kelvin"]
        for key in ("temperature", "beta", "statistics"):
            if key in bath:
                raise ConfigError(
                    f"bath.{key}",
                    f"model {name!r} takes its bath via temperature_kelvin",
                )
        if "gamma" in bath:
            kwargs["gamma"] = bath["gamma"]
        return MODEL_BUILDERS[name](**kwargs)
    except ValidationError as exc:
        raise ConfigError("model", str(exc))
