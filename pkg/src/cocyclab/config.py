"""JSON experiment configurations.

A config is a JSON object with a ``schema`` field (``cocyclab.config/1``)
and optional ``system``, ``cocycle``, ``reference``, ``direction``,
``observable``, ``profile`` and ``params`` entries. Errors carry the dotted
path of the offending field.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cocycle as cc
from . import dynamics as dyn
from . import ldt
from .errors import InvalidInputError

CONFIG_SCHEMA = "cocyclab.config/1"
RESULT_SCHEMA = "cocyclab.result/1"


class ConfigError(InvalidInputError):
    pass


def _need(d, key, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    if key not in d:
        raise ConfigError(f"{where}.{key}: missing field")
    return d[key]


def _wrap(where, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (InvalidInputError, TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from e


def load_system(d, where="system"):
    kind = _need(d, "type", where)
    if kind == "bernoulli":
        return _wrap(where, dyn.BernoulliShift, tuple(_need(d, "p", where)))
    if kind == "markov":
        return _wrap(where, dyn.MarkovShift, tuple(map(tuple, _need(d, "P", where))))
    if kind == "torus":
        return _wrap(where, dyn.TorusTranslation, tuple(np.atleast_1d(_need(d, "alpha", where))))
    raise ConfigError(f"{where}.type: unknown system type {kind!r}")


def load_cocycle(d, where="cocycle"):
    kind = _need(d, "type", where)
    if kind == "constant":
        return _wrap(where, cc.Constant, np.asarray(_need(d, "matrix", where), dtype=float))
    if kind == "locally_constant":
        return _wrap(where, cc.LocallyConstant, np.asarray(_need(d, "matrices", where), dtype=float))
    if kind == "torus_function":
        return _wrap(where, cc.TorusFunction, _need(d, "entries", where), int(_need(d, "torus_dim", where)))
    if kind == "perturbed":
        base = load_cocycle(_need(d, "base", where), where + ".base")
        direction = load_cocycle(_need(d, "direction", where), where + ".direction")
        return _wrap(where, cc.Perturbed, base, direction, float(_need(d, "h", where)))
    if kind == "exterior_power":
        base = load_cocycle(_need(d, "base", where), where + ".base")
        return _wrap(where, cc.ExteriorPower, base, int(_need(d, "k", where)))
    raise ConfigError(f"{where}.type: unknown cocycle type {kind!r}")


def load_observable(d, where="observable"):
    kind = _need(d, "type", where)
    if kind == "cylinder":
        return dyn.CylinderIndicator(tuple(int(s) for s in _need(d, "word", where)))
    if kind == "box":
        return dyn.BoxIndicator(tuple(_need(d, "lower", where)), tuple(_need(d, "upper", where)))
    if kind == "constant":
        return dyn.constant_observable(float(d.get("value", 1.0)))
    raise ConfigError(f"{where}.type: unknown observable type {kind!r}")


def load_devf(d, where):
    kind = _need(d, "type", where)
    if kind == "constant":
        return ldt.ConstantDeviation(float(_need(d, "eps0", where)))
    if kind == "power":
        return ldt.PowerDeviation(float(_need(d, "a", where)))
    raise ConfigError(f"{where}.type: unknown deviation function {kind!r}")


def load_mesf(d, where):
    kind = _need(d, "type", where)
    if kind == "exponential":
        return ldt.Exponential(float(_need(d, "c", where)))
    if kind == "subexp_power":
        return _wrap(where, ldt.SubExpPower, float(_need(d, "c", where)), float(_need(d, "b", where)))
    if kind == "subexp_log":
        return _wrap(where, ldt.SubExpLog, float(_need(d, "c", where)), float(_need(d, "b", where)))
    raise ConfigError(f"{where}.type: unknown measure function {kind!r}")


def load_profile(d, where="profile"):
    devf = load_devf(_need(d, "devf", where), where + ".devf")
    mesf = load_mesf(_need(d, "mesf", where), where + ".mesf")
    return _wrap(where, ldt.DeviationProfile, devf, mesf, float(d.get("t_min", ldt.T_MIN)))


def default_profile(epsilon=0.1, c=1.0):
    return ldt.DeviationProfile(ldt.ConstantDeviation(epsilon), ldt.Exponential(c))


@dataclass
class ExperimentConfig:
    system: object = None
    cocycle: object = None
    reference: object = None
    direction: object = None
    observable: object = None
    profile: object = None
    params: dict = field(default_factory=dict)
    seed: int = None
    samples: int = None
    raw: dict = field(default_factory=dict)


def parse_json(text, source="<config>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: line {e.lineno}, column {e.colno}: {e.msg}") from e


def read_json_arg(value, source):
    """Inline JSON text or a path to a JSON file."""
    text = value.strip()
    if text.startswith("{") or text.startswith("["):
        return parse_json(text, source)
    p = Path(value)
    if not p.is_file():
        raise ConfigError(f"{source}: {value!r} is neither JSON nor a readable file")
    return parse_json(p.read_text(), str(p))


def from_dict(d):
    if not isinstance(d, dict):
        raise ConfigError("config: expected a JSON object")
    schema = d.get("schema", CONFIG_SCHEMA)
    if schema != CONFIG_SCHEMA:
        raise ConfigError(f"schema: unsupported version {schema!r} (expected {CONFIG_SCHEMA!r})")
    cfg = ExperimentConfig(raw=d)
    if "system" in d:
        cfg.system = load_system(d["system"])
    for key in ("cocycle", "reference", "direction"):
        if key in d:
            setattr(cfg, key, load_cocycle(d[key], key))
    if "observable" in d:
        cfg.observable = load_observable(d["observable"])
    if "profile" in d:
        cfg.profile = load_profile(d["profile"])
    params = d.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params: expected an object")
    cfg.params = dict(params)
    if "seed" in d:
        if not isinstance(d["seed"], int) or d["seed"] < 0:
            raise ConfigError("seed: expected a non-negative integer")
        cfg.seed = d["seed"]
    if "samples" in d:
        if not isinstance(d["samples"], int) or d["samples"] < 1:
            raise ConfigError("samples: expected a positive integer")
        cfg.samples = d["samples"]
    return cfg


def load_config(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {str(p)!r} not found")
    return from_dict(parse_json(p.read_text(), str(p)))
