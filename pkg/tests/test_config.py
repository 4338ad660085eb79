import json
import math

import pytest

from circumnav.config import (
    PRESETS,
    SCHEMA,
    deep_merge,
    initial_estimate,
    load_config,
    load_dict,
    load_preset,
    set_path,
    to_dict,
)
from circumnav.errors import ParseError, SchemaError, ValidationError
from circumnav.geometry import Vec2


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return p


def test_reference_preset_values():
    cfg = load_config("paper-fig3")
    sat = initial_estimate(cfg)
    assert cfg.n_agents == 4
    assert cfg.target_c0 == (25.0, 25.0) and cfg.target_r0 == 10.0
    assert sat.c_hat0 == (25.0, 25.0) and sat.r_hat0 == 20.0
    assert cfg.controller.mode == "saturate" and cfg.controller.u_max == 1.5
    assert cfg.dt == 0.01 and cfg.horizon == 100.0
    assert cfg.target.kind == "random_walk"
    assert cfg.target.drift == (0.5, 0.5)


@pytest.mark.parametrize("name", PRESETS)
def test_every_preset_loads_and_round_trips(name):
    cfg = load_config(name)
    assert load_config(f"{name}.json") == cfg
    assert load_dict(to_dict(cfg)) == cfg
    assert load_dict(json.loads(json.dumps(to_dict(cfg)))) == cfg


def test_preset_with_overrides(tmp_path):
    p = write(tmp_path, {"preset": "stationary", "seed": 7, "estimator": {"gamma": 0.1}})
    cfg = load_config(p)
    assert cfg.seed == 7 and cfg.estimator.gamma == 0.1
    assert cfg.estimator.alpha == 1.0  # untouched keys keep the preset's value


def test_empty_file_is_schema_error(tmp_path):
    with pytest.raises(SchemaError):
        load_config(write(tmp_path, ""))
    with pytest.raises(SchemaError):
        load_config(write(tmp_path, "  \n"))


def test_negative_radius_estimate_is_validation_error(tmp_path):
    p = write(tmp_path, {"preset": "stationary", "satellite": {"r_hat0": -1}})
    with pytest.raises(ValidationError):
        load_config(p)


def test_agent_inside_estimated_circle(tmp_path):
    p = write(tmp_path, {"preset": "stationary", "satellite": {"r_hat0": 40.0}})
    with pytest.raises(ValidationError, match="inside"):
        load_config(p)


def test_missing_and_malformed(tmp_path):
    with pytest.raises(ParseError, match="not found"):
        load_config(tmp_path / "missing.json")
    with pytest.raises(ParseError, match="not found"):
        load_config("missing.json")
    with pytest.raises(ParseError, match="invalid JSON"):
        load_config(write(tmp_path, "{not json"))


def test_schema_error_carries_key_path(tmp_path):
    with pytest.raises(SchemaError) as exc:
        load_config(write(tmp_path, {"preset": "stationary", "estimator": {"gama": 1}}))
    assert exc.value.path == ("estimator",)
    assert str(exc.value).startswith("estimator:")
    with pytest.raises(SchemaError) as exc:
        load_config(write(tmp_path, {"preset": "stationary", "controller": {"u_max": -2}}))
    assert exc.value.path == ("controller", "u_max")
    with pytest.raises(SchemaError):
        load_config(write(tmp_path, [1, 2]))
    with pytest.raises(SchemaError):
        load_config(write(tmp_path, {"preset": "nope"}))


def test_full_document_without_preset(tmp_path):
    doc = {
        "n_agents": 2,
        "agents": {"positions": [[20, 0], [-20, 0]]},
        "target": {"centre": [0, 0], "radius": 5},
    }
    cfg = load_config(write(tmp_path, doc))
    assert cfg.positions == (Vec2(20.0, 0.0), Vec2(-20.0, 0.0))
    assert cfg.target.kind == "stationary"
    del doc["target"]
    with pytest.raises(SchemaError):
        load_config(write(tmp_path, doc))


def test_dataclass_level_errors_become_validation_errors(tmp_path):
    doc = {"preset": "stationary", "target": {"script": {"kind": "piecewise", "segments": []}}}
    with pytest.raises(ValidationError):
        load_config(write(tmp_path, doc))
    with pytest.raises(ValidationError, match="transient_cutoff"):
        load_config(write(tmp_path, {"preset": "stationary", "transient_cutoff": 500}))


def test_measurement_noise_and_probe_blocks(tmp_path):
    cfg = load_config(write(tmp_path, {"preset": "stationary",
                                       "measurement_noise": {"enabled": True, "sigma": 0.2},
                                       "probe": {"velocity": [0, 1]}}))
    assert cfg.measurement_noise == 0.2
    assert cfg.probe_velocity == (0.0, 1.0)
    off = load_config(write(tmp_path, {"preset": "stationary",
                                       "measurement_noise": {"enabled": False, "sigma": 0.2}}))
    assert off.measurement_noise == 0.0


def test_helpers():
    assert deep_merge({"a": {"b": 1, "c": 2}}, {"a": {"b": 3}}) == {"a": {"b": 3, "c": 2}}
    doc = {"a": {"b": 1}}
    out = set_path(doc, "a.c.d", 5)
    assert out == {"a": {"b": 1, "c": {"d": 5}}} and doc == {"a": {"b": 1}}
    assert load_preset("paper-fig3")["name"] == "paper-fig3"
    assert SCHEMA["additionalProperties"] is False


def test_reference_preset_agents_start_outside_estimate():
    cfg = load_config("paper-fig3")
    for p in cfg.positions:
        assert math.hypot(p.x - 25, p.y - 25) > 20
