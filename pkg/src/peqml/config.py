"""Experiment configuration: a YAML tree resolved into typed settings.

Top-level keys: ``seed``, ``output_dir``, ``workers``, ``device``, ``noise``
and one section per experiment (``transpile``, ``qnn``, ``kernel``,
``dd_ablation``, ``nibp``, ``ingest``). A section may carry its own
``device`` block, merged over the top-level one.
"""

from __future__ import annotations

import dataclasses
import typing
from pathlib import Path
from typing import Any, Mapping

import yaml

from .device import DeviceModel
from .experiments import (
    DD_ABLATION_DEFAULTS,
    QNN_SPSA_DEFAULTS,
    KernelExperimentConfig,
    QnnExperimentConfig,
)
from .nibp import NibpSweepConfig
from .noise import NoiseConfig
from .qml.spsa import SpsaConfig

SECTIONS = ("transpile", "qnn", "kernel", "dd_ablation", "nibp", "ingest")
TOP_LEVEL = {"seed", "output_dir", "workers", "device", "noise", *SECTIONS}
NOISE_KEYS = {"amplitude_damping", "dephasing", "quasi_static", "readout"}


class ConfigError(ValueError):
    pass


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, Mapping):
        raise ConfigError(f"{path}: the top level must be a mapping")
    unknown = set(data) - TOP_LEVEL
    if unknown:
        raise ConfigError(f"{path}: unknown top-level keys {sorted(unknown)}; allowed: {sorted(TOP_LEVEL)}")
    return dict(data)


def section(raw: Mapping, name: str) -> dict:
    value = raw.get(name) or {}
    if not isinstance(value, Mapping):
        raise ConfigError(f"section {name!r} must be a mapping")
    return dict(value)


def _coerce(tp, value, where: str):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is tuple and isinstance(value, (list, tuple)):
        inner = args[0] if args else Any
        return tuple(_coerce(inner, v, where) for v in value)
    if origin is typing.Union:
        if value is None and type(None) in args:
            return None
        for arg in args:
            if arg is not type(None):
                return _coerce(arg, value, where)
    if tp is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if tp is float and isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{where}: expected a number, got {value!r}") from None
    if tp is int and isinstance(value, bool):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if tp is int and isinstance(value, float) and value.is_integer():
        return int(value)
    if tp is bool and not isinstance(value, bool):
        raise ConfigError(f"{where}: expected true or false, got {value!r}")
    if tp in (int, str) and not isinstance(value, tp):
        raise ConfigError(f"{where}: expected {tp.__name__}, got {value!r}")
    return value


def build(cls, data: Mapping, where: str, **fixed):
    """Instantiate dataclass ``cls`` from ``data``, rejecting unknown keys."""
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls) if f.init}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}; allowed: {sorted(names)}")
    kwargs = {k: _coerce(hints[k], v, f"{where}.{k}") for k, v in data.items()}
    kwargs.update(fixed)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def device_from(raw: Mapping, sect: Mapping | None = None, n_qubits: int = 10,
                defaults: Mapping | None = None) -> DeviceModel:
    data = dict(defaults or {})
    data.update(section(raw, "device"))
    if sect is not None:
        local = sect.get("device") or {}
        if not isinstance(local, Mapping):
            raise ConfigError("device overrides must be a mapping")
        data.update(local)
    data.pop("n_qubits", None)
    try:
        return DeviceModel.from_dict(data, n_qubits)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"device: {exc}") from None


def noise_from(raw: Mapping, seed: int, noise_flag: str | None) -> NoiseConfig:
    data = section(raw, "noise")
    unknown = set(data) - NOISE_KEYS
    if unknown:
        raise ConfigError(f"noise: unknown keys {sorted(unknown)}; allowed: {sorted(NOISE_KEYS)}")
    if noise_flag == "off":
        return NoiseConfig.noiseless(seed)
    flags = {k: _coerce(bool, v, f"noise.{k}") for k, v in data.items()}
    return NoiseConfig(seed=seed, **flags)


def apply_dd_flag(variants, dd: str | None) -> tuple[str, ...]:
    if dd is None:
        return tuple(variants)
    out = []
    for v in variants:
        base = v[:-3] if v.endswith("+dd") else v
        out.append(base + "+dd" if dd == "on" and base != "noiseless" else base)
    return tuple(dict.fromkeys(out))


def qnn_from(raw: Mapping, seed: int, dd: str | None) -> QnnExperimentConfig:
    data = section(raw, "qnn")
    data.pop("device", None)
    spsa_data = data.pop("spsa", None) or {}
    spsa = build(SpsaConfig, {**QNN_SPSA_DEFAULTS, **spsa_data}, "qnn.spsa")
    cfg = build(QnnExperimentConfig, data, "qnn", seed=seed, spsa=spsa)
    return dataclasses.replace(cfg, variants=apply_dd_flag(cfg.variants, dd))


def kernel_from(raw: Mapping, seed: int, dd: str | None, ablation: bool = False) -> KernelExperimentConfig:
    name = "dd_ablation" if ablation else "kernel"
    data = section(raw, name)
    data.pop("device", None)
    if ablation:
        data = {**DD_ABLATION_DEFAULTS, **data}
    cfg = build(KernelExperimentConfig, data, name, seed=seed)
    if ablation:
        # the ablation compares DD on and off, so --dd does not apply
        return cfg
    return dataclasses.replace(cfg, variants=apply_dd_flag(cfg.variants, dd))


def nibp_from(raw: Mapping, seed: int, dd: str | None) -> NibpSweepConfig:
    data = section(raw, "nibp")
    data.pop("device", None)
    cfg = build(NibpSweepConfig, data, "nibp", seed=seed)
    return dataclasses.replace(cfg, modes=apply_dd_flag(cfg.modes, dd))


def config_record(obj) -> Any:
    """Fully resolved settings as plain data for run records."""
    if dataclasses.is_dataclass(obj):
        return {f.name: config_record(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [config_record(v) for v in obj]
    return obj
