"""Experiment config files: INI sections [process], [kernel], [experiment].

Nested process specs use dotted subsections ([process.component_0],
[process.x], ...).  Command-line overrides are ``section.key=value`` strings
and always beat file values.  Box bounds use ``lo:hi`` per dimension joined
by ';' with ``inf``/``-inf`` sentinels allowed; table values may be inline
JSON.  See README for the full key reference.
"""

from __future__ import annotations

import configparser
import json
import math
from typing import Optional

from .core import ConfigurationError
from .diagnostics import ExperimentConfig
from .kernels import Box, KernelSpec
from .processes import (
    IID,
    Exponential,
    GaussianAR1,
    GaussianLinear,
    Mixture,
    Normal,
    PairedIndependent,
    ProcessSpec,
    Uniform,
)

__all__ = ["load_config", "ParsedConfig"]


class ParsedConfig:
    """Raw section/key tables with typed accessors that name bad fields."""

    def __init__(self, sections: dict[str, dict[str, str]]):
        self.sections = sections

    def has(self, section: str) -> bool:
        return section in self.sections

    def get(self, section: str, key: str, default=None) -> Optional[str]:
        return self.sections.get(section, {}).get(key, default)

    def require(self, section: str, key: str) -> str:
        value = self.get(section, key)
        if value is None:
            raise ConfigurationError(f"missing required config field {section}.{key}")
        return value

    def get_float(self, section: str, key: str, default=None) -> Optional[float]:
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigurationError(f"{section}.{key} must be a number, got {raw!r}") from None

    def get_int(self, section: str, key: str, default=None) -> Optional[int]:
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigurationError(f"{section}.{key} must be an integer, got {raw!r}") from None

    def get_bool(self, section: str, key: str, default=None) -> Optional[bool]:
        raw = self.get(section, key)
        if raw is None:
            return default
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"{section}.{key} must be a boolean, got {raw!r}")

    def get_floats(self, section: str, key: str) -> list[float]:
        raw = self.require(section, key)
        try:
            return [float(tok) for tok in raw.replace(",", " ").split()]
        except ValueError:
            raise ConfigurationError(f"{section}.{key} must be a list of numbers, got {raw!r}") from None

    def get_ints(self, section: str, key: str) -> list[int]:
        raw = self.require(section, key)
        try:
            return [int(tok) for tok in raw.replace(",", " ").split()]
        except ValueError:
            raise ConfigurationError(f"{section}.{key} must be a list of integers, got {raw!r}") from None


def load_config(path: str, overrides: list[str] = ()) -> ParsedConfig:
    """Read an INI config file and apply section.key=value overrides."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        # configparser messages carry the file name and line number
        raise ConfigurationError(str(exc)) from None
    if not read:
        raise ConfigurationError(f"config file not found: {path}")
    sections = {name: dict(parser.items(name)) for name in parser.sections()}
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override must look like section.key=value, got {item!r}")
        dotted, value = item.split("=", 1)
        if "." not in dotted:
            raise ConfigurationError(f"override key must be section.key, got {dotted!r}")
        section, key = dotted.rsplit(".", 1)
        sections.setdefault(section, {})[key] = value
    return ParsedConfig(sections)


def _parse_marginal(cfg: ParsedConfig, section: str):
    name = cfg.get(section, "marginal", "normal").strip().lower()
    if name == "normal":
        return Normal(cfg.get_float(section, "mean", 0.0), cfg.get_float(section, "sigma", 1.0))
    if name == "uniform":
        return Uniform(cfg.get_float(section, "low", 0.0), cfg.get_float(section, "high", 1.0))
    if name == "exponential":
        return Exponential(cfg.get_float(section, "rate", 1.0), cfg.get_float(section, "shift", 0.0))
    raise ConfigurationError(f"{section}.marginal must be normal, uniform, or exponential, got {name!r}")


def parse_process(cfg: ParsedConfig, section: str = "process") -> ProcessSpec:
    if not cfg.has(section):
        raise ConfigurationError(f"missing required config section [{section}]")
    variant = cfg.get(section, "variant")
    if variant is None:
        raise ConfigurationError(f"missing required config field {section}.variant")
    variant = variant.strip().lower()
    if variant == "iid":
        return IID(_parse_marginal(cfg, section))
    if variant == "ar1":
        return GaussianAR1(
            mean=cfg.get_float(section, "mean", 0.0),
            rho=cfg.get_float(section, "rho", 0.5),
            sigma=cfg.get_float(section, "sigma", 1.0),
        )
    if variant == "gaussian-linear":
        return GaussianLinear(
            coefficients=tuple(cfg.get_floats(section, "coefficients")),
            mean=cfg.get_float(section, "mean", 0.0),
        )
    if variant == "mixture":
        weights = cfg.get_floats(section, "weights")
        components = []
        for i in range(len(weights)):
            sub = f"{section}.component_{i}"
            if not cfg.has(sub):
                raise ConfigurationError(f"missing required config section [{sub}]")
            components.append(parse_process(cfg, sub))
        return Mixture(tuple(weights), tuple(components))
    if variant == "paired":
        for sub in (f"{section}.x", f"{section}.y"):
            if not cfg.has(sub):
                raise ConfigurationError(f"missing required config section [{sub}]")
        return PairedIndependent(parse_process(cfg, f"{section}.x"), parse_process(cfg, f"{section}.y"))
    raise ConfigurationError(
        f"{section}.variant must be iid, ar1, gaussian-linear, mixture, or paired, got {variant!r}"
    )


def _parse_box(raw: str, field: str) -> Box:
    bounds = []
    for dim_part in raw.split(";"):
        pieces = dim_part.split(":")
        if len(pieces) != 2:
            raise ConfigurationError(f"{field} must look like 'lo:hi' per dimension joined by ';', got {raw!r}")
        try:
            lo, hi = (float(p) for p in pieces)
        except ValueError:
            raise ConfigurationError(f"{field} bounds must be numbers (inf allowed), got {raw!r}") from None
        bounds.append((lo, hi))
    return Box(tuple(bounds))


def parse_kernel_spec(cfg: ParsedConfig, section: str = "kernel") -> KernelSpec:
    if not cfg.has(section):
        raise ConfigurationError(f"missing required config section [{section}]")
    name = cfg.require(section, "name").strip()
    params: dict = {}
    if name == "indicator":
        boxes = []
        i = 0
        while cfg.get(section, f"box_{i}") is not None:
            boxes.append(_parse_box(cfg.get(section, f"box_{i}"), f"{section}.box_{i}"))
            i += 1
        if not boxes:
            raise ConfigurationError(f"{section}.box_0 is required for the indicator kernel")
        params["boxes"] = tuple(boxes)
    elif name == "polynomial-product":
        params["order"] = cfg.get_int(section, "order")
        if params["order"] is None:
            raise ConfigurationError(f"missing required config field {section}.order")
        params["coefficients"] = tuple(cfg.get_floats(section, "coefficients"))
    elif name in ("dcov6", "dcov6-standard"):
        params["split"] = cfg.get_int(section, "split", 1)
        params["dim"] = cfg.get_int(section, "dim", 2 * params["split"])
    elif name == "user-table":
        params["order"] = cfg.get_int(section, "order")
        if params["order"] is None:
            raise ConfigurationError(f"missing required config field {section}.order")
        params["cuts"] = tuple(cfg.get_floats(section, "cuts"))
        raw_values = cfg.require(section, "values")
        try:
            params["values"] = json.loads(raw_values)
        except json.JSONDecodeError:
            raise ConfigurationError(f"{section}.values must be a JSON array, got {raw_values!r}") from None
    return KernelSpec(name, params)


def parse_experiment(cfg: ParsedConfig) -> ExperimentConfig:
    process = parse_process(cfg)
    kernel = parse_kernel_spec(cfg)
    section = "experiment"
    if not cfg.has(section):
        raise ConfigurationError("missing required config section [experiment]")
    checkpoints = tuple(cfg.get_ints(section, "checkpoints"))
    mode = cfg.get(section, "mode", "exact").strip().lower()
    truncation = cfg.get_float(section, "truncation", None)
    if truncation is not None and not (math.isfinite(truncation) and truncation > 0):
        raise ConfigurationError(f"experiment.truncation must be positive and finite, got {truncation}")
    return ExperimentConfig(
        process=process,
        kernel=kernel,
        checkpoints=checkpoints,
        replicates=cfg.get_int(section, "replicates", 1),
        p=cfg.get_float(section, "p", 1.0),
        mode=mode,
        samples=cfg.get_int(section, "samples", None),
        truncation=truncation,
        master_seed=cfg.get_int(section, "master_seed", 0),
        limit_samples=cfg.get_int(section, "limit_samples", 100_000),
    )
