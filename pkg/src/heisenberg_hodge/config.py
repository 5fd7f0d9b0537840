"""INI run configuration with sections [model], [fan], [norms] and [run].

Keys may also appear before any section header; they are routed to the
section that owns them.  Every invalid value is collected before raising.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .oscillator import DEFAULT_LAMBDAS, ConfigError, ModelConfig, model_errors

SUITES = ("exterior", "operators", "fan-eigen", "decomposition", "multiplier", "mh-norms")

KEYS = {
    "model": {"n": int, "M": int, "lambdas": "floats", "weights": "floats", "tol": float},
    "fan": {"lambda_min": float, "lambda_max": float, "lambda_count": int, "m_max": int},
    "norms": {"J": int, "tau": float, "rho": float, "sigma": float, "resolution": int},
    "run": {"suites": "names", "output": str, "format": str, "seed": int, "trials": int},
}
OWNER = {k: sec for sec, keys in KEYS.items() for k in keys}


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    fan: dict = field(default_factory=lambda: {"lambda_min": 2.0 ** -4, "lambda_max": 2.0 ** 4,
                                               "lambda_count": 100, "m_max": 99})
    norms: dict = field(default_factory=lambda: {"J": 8, "tau": 2.0, "rho": 1.0, "sigma": 1.0,
                                                 "resolution": 512})
    suites: list = field(default_factory=lambda: ["all"])
    output: str | None = None
    format: str = "json"
    seed: int = 0
    trials: int = 10

    def fan_lambdas(self) -> np.ndarray:
        half = np.geomspace(self.fan["lambda_min"], self.fan["lambda_max"], self.fan["lambda_count"] // 2)
        return np.concatenate([-half[::-1], half])


def _convert(kind, raw):
    raw = raw.strip()
    if kind == "floats":
        return tuple(float(x) for x in raw.replace(";", ",").split(",") if x.strip())
    if kind == "names":
        return [x.strip() for x in raw.split(",") if x.strip()]
    return kind(raw)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep M upper-case
    try:
        parser.read_string("[__flat__]\n" + text, source=source)
    except configparser.Error as exc:
        # line numbers are off by one because of the injected header
        raise ConfigError(f"{source}: parse error: {exc}") from exc
    values = {sec: {} for sec in KEYS}
    errors = []
    for section in parser.sections():
        if section != "__flat__" and section not in KEYS:
            errors.append(f"unknown section [{section}]")
            continue
        for key, raw in parser.items(section):
            owner = OWNER.get(key)
            if owner is None or (section != "__flat__" and owner != section):
                errors.append(f"unknown key {key!r} in [{section}]")
                continue
            try:
                values[owner][key] = _convert(KEYS[owner][key], raw)
            except ValueError as exc:
                errors.append(f"{key} = {raw!r}: {exc}")
    cfg = RunConfig()
    model_kw = {"n": 1, "M": 8, "lambdas": DEFAULT_LAMBDAS, "tol": 1e-10}
    model_kw.update(values["model"])
    errors += model_errors(**model_kw)
    cfg.fan.update(values["fan"])
    cfg.norms.update(values["norms"])
    run = values["run"]
    cfg.suites = run.get("suites", cfg.suites)
    cfg.output = run.get("output", cfg.output)
    cfg.format = run.get("format", cfg.format)
    cfg.seed = run.get("seed", cfg.seed)
    cfg.trials = run.get("trials", cfg.trials)
    errors += validate_run(cfg)
    if errors:
        raise ConfigError(f"{source}: " + "; ".join(errors))
    cfg.model = ModelConfig(**model_kw)
    return cfg


def validate_run(cfg: RunConfig) -> list[str]:
    errs = []
    bad = [s for s in cfg.suites if s not in SUITES + ("all",)]
    if bad:
        errs.append(f"unknown suites {bad}")
    if cfg.format not in ("json", "csv"):
        errs.append(f"format must be json or csv, got {cfg.format!r}")
    f = cfg.fan
    if not 0 < f["lambda_min"] < f["lambda_max"]:
        errs.append("need 0 < lambda_min < lambda_max")
    if f["lambda_count"] < 2 or f["m_max"] < 0:
        errs.append("need lambda_count >= 2 and m_max >= 0")
    if cfg.norms["J"] < 4:
        errs.append(f"J must be >= 4, got {cfg.norms['J']}")
    if cfg.trials < 1:
        errs.append("trials must be positive")
    return errs


def config_load(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))
