"""JSON run configuration: schema, presets and conversion to SimConfig.

A config file may name a ``preset``; its own keys are then deep-merged over
the preset file from ``circumnav/presets``. Unknown keys are rejected.
"""

from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .controller import ControllerParams
from .errors import ParseError, SchemaError, ValidationError
from .geometry import Vec2
from .sim import (
    EstimatorConfig,
    PEConfig,
    SatelliteConfig,
    SimConfig,
    validate,
)
from .target import KINDS, SatelliteEstimate, TargetScript, TargetState, satellite_observe
from . import rng as rngmod

PRESETS = ("paper-fig3", "stationary", "pe-negative", "equilibrium")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_vec = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


SCHEMA = _obj({
    "preset": {"type": "string", "enum": list(PRESETS)},
    "name": {"type": "string"},
    "n_agents": {"type": "integer", "minimum": 2},
    "dt": _pos,
    "horizon": _pos,
    "seed": {"type": "integer", "minimum": 0},
    "agents": _obj({
        "positions": {"type": "array", "items": _vec, "minItems": 2},
        "sensing_index": {"type": "integer", "minimum": 0},
    }, required=["positions"]),
    "target": _obj({
        "centre": _vec,
        "radius": _num,
        "script": _obj({
            "kind": {"type": "string", "enum": list(KINDS)},
            "drift": _vec,
            "noise": _nonneg,
            "noise_r": _nonneg,
            "eps_c": _pos,
            "eps_r": _pos,
            "r_min": _pos,
            "path_centre": _vec,
            "omega": _num,
            "segments": {"type": "array", "items": {
                "type": "array", "items": _num, "minItems": 4, "maxItems": 4}},
        }, required=["kind"]),
    }, required=["centre", "radius"]),
    "satellite": _obj({
        "c_hat0": _vec,
        "r_hat0": _num,
        "noise_c": _nonneg,
        "noise_r": _nonneg,
        "offset_c": _vec,
        "offset_r": _num,
    }),
    "estimator": _obj({
        "alpha": _pos,
        "gamma": _pos,
        "r_floor": _pos,
        "filter_init": {"type": "string", "enum": ["steady", "zero"]},
        "mode": {"type": "string", "enum": ["adaptive", "perfect"]},
    }),
    "controller": _obj({
        "mode": {"type": "string", "enum": ["saturate", "scale"]},
        "u_max": _pos,
        "delta": _pos,
    }),
    "measurement_noise": _obj({"enabled": {"type": "boolean"}, "sigma": _nonneg}),
    "broadcast_staleness": {"type": "integer", "minimum": 0},
    "probe": {"oneOf": [{"type": "null"}, _obj({"velocity": _vec}, required=["velocity"])]},
    "pe": _obj({"window": _pos, "epsilon": _nonneg, "stride": {"type": "integer", "minimum": 1}}),
    "transient_cutoff": _nonneg,
    "strict": {"type": "boolean"},
}, required=["n_agents", "agents", "target"])


def preset_path(name: str):
    return resources.files("circumnav").joinpath("presets").joinpath(f"{name}.json")


def _read_json(text: str, source: str) -> Any:
    if not text.strip():
        raise SchemaError(f"empty configuration in {source}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: invalid JSON: {exc}") from exc


def load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise SchemaError(f"unknown preset {name!r}", ("preset",))
    return _read_json(preset_path(name).read_text(), f"preset {name}")


def deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def expand(doc: Any) -> dict:
    """Schema-check ``doc`` and resolve its preset, if any."""
    if not isinstance(doc, dict):
        raise SchemaError("configuration must be a JSON object")
    _check_schema(doc, partial="preset" in doc)
    if "preset" in doc:
        doc = deep_merge(load_preset(doc["preset"]), {k: v for k, v in doc.items() if k != "preset"})
    _check_schema(doc)
    return doc


def _check_schema(doc: dict, partial: bool = False) -> None:
    schema = dict(SCHEMA, required=[]) if partial else SCHEMA
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if partial:
        # preset overrides may omit required keys of nested objects
        errors = [e for e in errors if e.validator != "required"]
    if errors:
        err = errors[0]
        raise SchemaError(err.message, err.absolute_path)


def from_dict(doc: dict) -> SimConfig:
    """Build a SimConfig from an expanded, schema-valid document."""
    tgt = doc["target"]
    script = dict(tgt.get("script", {"kind": "stationary"}))
    for key in ("drift", "path_centre"):
        if key in script:
            script[key] = tuple(script[key])
    if "segments" in script:
        script["segments"] = tuple(tuple(s) for s in script["segments"])
    sat = dict(doc.get("satellite", {}))
    if "offset_c" in sat:
        sat["offset_c"] = tuple(sat["offset_c"])
    fixed = None
    if "c_hat0" in sat or "r_hat0" in sat:
        fixed = (tuple(sat.pop("c_hat0", tgt["centre"])), sat.pop("r_hat0", tgt["radius"]))
    noise = doc.get("measurement_noise", {})
    probe = doc.get("probe")
    agents = doc["agents"]
    try:
        cfg = SimConfig(
            name=doc.get("name", doc.get("preset", "custom")),
            n_agents=doc["n_agents"],
            positions=tuple(Vec2(float(x), float(y)) for x, y in agents["positions"]),
            sensing_index=agents.get("sensing_index", 0),
            target_c0=Vec2(*map(float, tgt["centre"])),
            target_r0=float(tgt["radius"]),
            target=TargetScript(**script),
            satellite=SatelliteConfig(**sat),
            estimator=EstimatorConfig(**doc.get("estimator", {})),
            controller=ControllerParams(**doc.get("controller", {})),
            dt=float(doc.get("dt", 0.01)),
            horizon=float(doc.get("horizon", 100.0)),
            seed=int(doc.get("seed", 0)),
            measurement_noise=float(noise.get("sigma", 0.0)) if noise.get("enabled", False) else 0.0,
            staleness=int(doc.get("broadcast_staleness", 0)),
            probe_velocity=Vec2(*probe["velocity"]) if probe else None,
            pe=PEConfig(**doc.get("pe", {})),
            transient_cutoff=doc.get("transient_cutoff"),
            strict=bool(doc.get("strict", True)),
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    if fixed is not None:
        cfg = _with_fixed_satellite(cfg, fixed)
    check(cfg)
    return cfg


def _with_fixed_satellite(cfg: SimConfig, fixed) -> SimConfig:
    from dataclasses import replace

    (cx, cy), r_hat0 = fixed
    off = SatelliteConfig(offset_c=(cx - cfg.target_c0.x, cy - cfg.target_c0.y),
                          offset_r=r_hat0 - cfg.target_r0)
    return replace(cfg, satellite=off)


def initial_estimate(cfg: SimConfig) -> SatelliteEstimate:
    sc = cfg.satellite
    truth = TargetState(cfg.target_c0, cfg.target_r0)
    raw_r = truth.r + sc.offset_r
    if sc.noise_r == 0 and raw_r <= 0:
        raise ValidationError(f"initial radius estimate {raw_r:g} must be positive")
    return satellite_observe(truth, sc.noise_c, sc.noise_r, rngmod.stream(cfg.seed, "satellite"),
                             sc.offset_c, sc.offset_r, cfg.estimator.r_floor)


def check(cfg: SimConfig) -> None:
    if cfg.transient_cutoff is not None and cfg.transient_cutoff >= cfg.horizon:
        raise ValidationError("transient_cutoff must be shorter than the horizon")
    if cfg.estimator.mode == "perfect":
        sat = SatelliteEstimate(cfg.target_c0, cfg.target_r0)
    else:
        sat = initial_estimate(cfg)
    validate(cfg, sat)


def load_config(path) -> SimConfig:
    """Read, expand and validate a config file.

    ``path`` may also be a bare preset name (``paper-fig3``) or the file
    name of a preset (``paper-fig3.json``) that does not exist on disk.
    """
    p = Path(path)
    if p.is_file():
        try:
            text = p.read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {p}: {exc}") from exc
        doc = _read_json(text, str(p))
    elif p.parent == Path(".") and p.stem in PRESETS and p.suffix in ("", ".json"):
        doc = {"preset": p.stem}
    else:
        raise ParseError(f"config file not found: {path}")
    return from_dict(expand(doc))


def load_dict(doc: dict) -> SimConfig:
    return from_dict(expand(doc))


def to_dict(cfg: SimConfig) -> dict:
    """Canonical JSON form of a resolved config; ``load_dict`` inverts it."""
    t = cfg.target
    script = {"kind": t.kind, "drift": list(t.drift), "noise": t.noise, "noise_r": t.noise_r,
              "eps_c": t.eps_c, "eps_r": t.eps_r, "r_min": t.r_min,
              "path_centre": list(t.path_centre), "omega": t.omega,
              "segments": [list(s) for s in t.segments]}
    s = cfg.satellite
    e = cfg.estimator
    c = cfg.controller
    return {
        "name": cfg.name,
        "n_agents": cfg.n_agents,
        "dt": cfg.dt,
        "horizon": cfg.horizon,
        "seed": cfg.seed,
        "agents": {"positions": [[p.x, p.y] for p in cfg.positions],
                   "sensing_index": cfg.sensing_index},
        "target": {"centre": [cfg.target_c0.x, cfg.target_c0.y], "radius": cfg.target_r0,
                   "script": script},
        "satellite": {"noise_c": s.noise_c, "noise_r": s.noise_r,
                      "offset_c": list(s.offset_c), "offset_r": s.offset_r},
        "estimator": {"alpha": e.alpha, "gamma": e.gamma, "r_floor": e.r_floor,
                      "filter_init": e.filter_init, "mode": e.mode},
        "controller": {"mode": c.mode, "u_max": c.u_max, "delta": c.delta},
        "measurement_noise": {"enabled": cfg.measurement_noise > 0, "sigma": cfg.measurement_noise},
        "broadcast_staleness": cfg.staleness,
        "probe": None if cfg.probe_velocity is None else {"velocity": list(cfg.probe_velocity)},
        "pe": {"window": cfg.pe.window, "epsilon": cfg.pe.epsilon, "stride": cfg.pe.stride},
        "transient_cutoff": cfg.cutoff,
        "strict": cfg.strict,
    }


def set_path(doc: dict, dotted: str, value) -> dict:
    """Copy of ``doc`` with ``a.b.c`` set to ``value``."""
    out = copy.deepcopy(doc)
    node = out
    keys = dotted.split(".")
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value
    return out
