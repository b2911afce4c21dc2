"""YAML run configuration.

Schema (every key optional except ``n`` and ``conjecture``)::

    n: 20
    conjecture: 3
    reward: conjecture          # or edge_count
    total_batch: 1000
    instances: 5
    max_generations: 400
    master_seed: 7
    halt_on_counterexample: true
    eigen_tol: 1.0e-10
    generation:                 # defaults for every instance
      elite_learn_frac: 0.1
      elite_survive_frac: 0.05
      seed_fraction: 0.0
      epsilon_random_frac: 0.0005
      learning_rate: 0.002
      hidden_sizes: [72, 12]
    overrides:                  # per-instance generation settings
      2: {learning_rate: 0.001}

``batch_size`` and ``rng_seed`` are derived per instance from
``total_batch`` and ``master_seed`` and are not accepted in the file.
"""

from dataclasses import asdict, fields

import yaml

from .engine import GenerationConfig
from .errors import ConfigError
from .parallel import SearchConfig

_TOP_TYPES = {
    "n": int,
    "conjecture": int,
    "reward": str,
    "total_batch": int,
    "instances": int,
    "max_generations": int,
    "master_seed": int,
    "halt_on_counterexample": bool,
    "eigen_tol": float,
}
_GEN_TYPES = {
    "elite_learn_frac": float,
    "elite_survive_frac": float,
    "seed_fraction": float,
    "epsilon_random_frac": float,
    "learning_rate": float,
    "hidden_sizes": tuple,
}
_DERIVED = ("batch_size", "rng_seed")


def _coerce(name, value, typ):
    if typ is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"field '{name}': expected true/false, got {value!r}")
    if typ is tuple:
        if isinstance(value, (list, tuple)) and all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            return tuple(value)
        raise ConfigError(f"field '{name}': expected a list of integers, got {value!r}")
    if typ is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"field '{name}': expected an integer, got {value!r}")
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"field '{name}': expected a number, got {value!r}")
        return float(value)
    if typ is str and not isinstance(value, str):
        raise ConfigError(f"field '{name}': expected a string, got {value!r}")
    return value


def _generation_fields(raw, where):
    if not isinstance(raw, dict):
        raise ConfigError(f"field '{where}': expected a mapping")
    out = {}
    for key, value in raw.items():
        if key in _DERIVED:
            raise ConfigError(f"field '{where}.{key}': derived per instance, remove it")
        if key not in _GEN_TYPES:
            raise ConfigError(f"field '{where}.{key}': unknown setting")
        out[key] = _coerce(f"{where}.{key}", value, _GEN_TYPES[key])
    return out


def config_from_dict(raw: dict) -> SearchConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    kwargs = {}
    for key, value in raw.items():
        if key == "generation":
            kwargs["generation"] = GenerationConfig(**_generation_fields(value, "generation"))
        elif key == "overrides":
            if not isinstance(value, dict):
                raise ConfigError("field 'overrides': expected a mapping of instance index to settings")
            ov = {}
            for idx, sub in value.items():
                try:
                    i = int(idx)
                except (TypeError, ValueError):
                    raise ConfigError(f"field 'overrides.{idx}': instance index must be an integer") from None
                ov[i] = _generation_fields(sub, f"overrides.{idx}")
            kwargs["overrides"] = ov
        elif key in _TOP_TYPES:
            kwargs[key] = _coerce(key, value, _TOP_TYPES[key])
        else:
            raise ConfigError(f"field '{key}': unknown setting")
    for req in ("n", "conjecture"):
        if req not in kwargs:
            raise ConfigError(f"field '{req}': required")
    cfg = SearchConfig(**kwargs)
    cfg.validate()
    return cfg


def config_to_dict(cfg: SearchConfig) -> dict:
    out = {f.name: getattr(cfg, f.name) for f in fields(cfg) if f.name in _TOP_TYPES}
    gen = asdict(cfg.generation)
    for key in _DERIVED:
        gen.pop(key)
    gen["hidden_sizes"] = list(gen["hidden_sizes"])
    out["generation"] = gen
    out["overrides"] = {
        int(i): {k: (list(v) if isinstance(v, tuple) else v) for k, v in sub.items()}
        for i, sub in cfg.overrides.items()
    }
    return out


def dump_config(cfg: SearchConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)


def parse_config(text: str) -> SearchConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from None
    return config_from_dict(raw or {})


def load_config(path) -> SearchConfig:
    with open(path) as fh:
        return parse_config(fh.read())
