"""Experiment configuration: one self-describing JSON document per run."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .curve import curve_from_json
from .errors import InvalidInputError
from .flow import AREA_PRESERVING, CSF, FlowConfig, FlowState
from .initial import attach_endpoints, orthogonal_arc, perturbed_arc
from .support import SupportCurve, support_from_config


@dataclass
class ExperimentConfig:
    """Everything a run needs: support, initial curve, numerics, outputs."""

    name: str = "experiment"
    support: dict = field(default_factory=lambda: {"kind": "circle", "radius": 1.0})
    initial: dict = field(default_factory=dict)
    flow: FlowConfig = field(default_factory=FlowConfig)
    mode: str = AREA_PRESERVING
    probes: list = field(default_factory=list)  # [{"x0_param_on_sigma": s, "T_probe": T}]
    snapshot_every: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (AREA_PRESERVING, CSF):
            raise InvalidInputError(f"mode must be area_preserving or csf, got {self.mode!r}")
        if not self.initial:
            raise InvalidInputError("config needs an 'initial' curve spec")

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["flow"] = asdict(self.flow)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _field(obj: dict, key: str, where: str):
    try:
        return obj[key]
    except KeyError:
        raise InvalidInputError(f"missing field {key!r} in {where}") from None


def config_from_dict(obj: dict) -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise InvalidInputError("config document must be a JSON object")
    flow_raw = dict(obj.get("flow", {}))
    try:
        flow = FlowConfig(**flow_raw)
    except TypeError as exc:
        raise InvalidInputError(f"bad 'flow' section: {exc}") from exc
    return ExperimentConfig(
        name=str(obj.get("name", "experiment")),
        support=dict(obj.get("support", {"kind": "circle", "radius": 1.0})),
        initial=dict(_field(obj, "initial", "config")),
        flow=flow,
        mode=str(obj.get("mode", AREA_PRESERVING)),
        probes=list(obj.get("probes", [])),
        snapshot_every=int(obj.get("snapshot_every", 500)),
        seed=int(obj.get("seed", 0)),
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"config {path}: line {exc.lineno}: {exc.msg}") from exc
    return config_from_dict(obj)


def build_support(config: ExperimentConfig) -> SupportCurve:
    return support_from_config(config.support)


def build_initial_state(config: ExperimentConfig, sigma: SupportCurve) -> FlowState:
    """Construct the initial flow state from the config's initial-curve spec."""
    spec = config.initial
    kind = _field(spec, "kind", "'initial' section")
    n = int(spec.get("n", config.flow.n_nodes))
    if kind == "orthogonal-arc":
        curve, lift = orthogonal_arc(sigma, rho=float(_field(spec, "rho", kind)),
                                     n=n, center_angle=float(spec.get("center_angle", 0.0)))
    elif kind == "perturbed-arc":
        curve, lift = perturbed_arc(
            sigma, rho=float(_field(spec, "rho", kind)),
            amplitude=float(spec.get("amplitude", 0.05)),
            oscillations=int(spec.get("oscillations", 3)),
            seed=int(spec.get("seed", config.seed)), n=n,
            center_angle=float(spec.get("center_angle", 0.0)))
    elif kind == "nodes":
        curve = curve_from_json(spec)
        lift = None if curve.closed else attach_endpoints(sigma, curve)
    elif kind == "closed-circle":
        radius = float(spec.get("radius", 1.0))
        center = np.asarray(spec.get("center", (0.0, 0.0)), dtype=float)
        th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        nodes = center + radius * np.stack([np.cos(th), np.sin(th)], axis=1)
        from .curve import DiscreteCurve
        curve, lift = DiscreteCurve(nodes=nodes, closed=True), None
    elif kind == "grim-reaper":
        from .rescaling import grim_reaper
        window = spec.get("y_window", (-1.3, 1.3))
        curve = grim_reaper(float(spec.get("tau", 0.0)),
                            (float(window[0]), float(window[1])), n=n)
        lift = None
    else:
        raise InvalidInputError(f"unknown initial-curve kind {kind!r}")
    return FlowState(curve=curve, lift=lift)


PRESETS: dict[str, dict] = {
    # fixed point of the flow: orthogonal unit arc on the unit circle
    "stationary": {
        "name": "stationary",
        "support": {"kind": "circle", "radius": 1.0},
        "initial": {"kind": "orthogonal-arc", "rho": 1.0},
        "flow": {"dt_safety": 0.4, "resample_every": 2600, "n_nodes": 200,
                 "t_end": 10.0, "stop_tolerance": 1e-22, "max_kappa_abort": 100.0},
        "mode": "area_preserving",
        "snapshot_every": 1000,
    },
    # admissible perturbed arc relaxing back to an arc of a circle
    "main-theorem": {
        "name": "main-theorem",
        "support": {"kind": "circle", "radius": 1.0},
        "initial": {"kind": "perturbed-arc", "rho": 0.03, "amplitude": 0.05,
                    "oscillations": 3, "seed": 12345},
        "flow": {"dt_safety": 0.4, "resample_every": 500, "n_nodes": 200,
                 "t_end": 1.0, "stop_tolerance": 1e-8, "max_kappa_abort": 1e4},
        "mode": "area_preserving",
        "probes": [{"x0_param_on_sigma": "endpoint-a", "T_probe": "2x-converged"},
                   {"x0_param_on_sigma": "endpoint-b", "T_probe": "2x-converged"}],
        "snapshot_every": 500,
        "seed": 12345,
    },
    # shrinking circle under plain curve shortening, run into the blowup
    "csf-circle": {
        "name": "csf-circle",
        "support": {"kind": "circle", "radius": 1.0},
        "initial": {"kind": "closed-circle", "radius": 1.0, "center": [4.0, 0.0],
                    "n": 256},
        "flow": {"dt_safety": 0.4, "resample_every": 1_000_000, "n_nodes": 256,
                 "t_end": 0.6, "stop_tolerance": 1e-30, "max_kappa_abort": 20.0},
        "mode": "csf",
        "snapshot_every": 200,
    },
    # translating-soliton window under plain curve shortening
    "grim-reaper": {
        "name": "grim-reaper",
        "support": {"kind": "circle", "radius": 1.0},
        "initial": {"kind": "grim-reaper", "tau": 0.0, "y_window": [-1.3, 1.3],
                    "n": 256},
        "flow": {"dt_safety": 0.4, "resample_every": 1_000_000, "n_nodes": 256,
                 "t_end": 0.5, "stop_tolerance": 1e-30, "max_kappa_abort": 1e4},
        "mode": "csf",
        "snapshot_every": 2000,
    },
}


def preset_config(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise InvalidInputError(f"unknown preset {name!r}; have {sorted(PRESETS)}")
    return config_from_dict(PRESETS[name])
