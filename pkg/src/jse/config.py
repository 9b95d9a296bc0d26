"""Line-oriented experiment configuration files.

Grammar (one statement per line):

    # comment                      blank lines and '#' comments are ignored
    [section]                      toy | jse | inlp | rlace | sweep | optimizer
    [section.optimizer]            per-method optimizer overrides
    key = value

Values are parsed by the target dataclass field type; lists (sweep methods,
x values) are comma-separated. Every ToyConfig, JseConfig, InlpConfig,
RlaceConfig and OptimizerConfig field is addressable.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace
from typing import Any

from .algorithm import JseConfig
from .baselines import InlpConfig, RlaceConfig
from .evaluate import METHODS, ExperimentConfig
from .sgd import OptimizerConfig
from .toy import ToyConfig


class ConfigError(ValueError):
    """Bad configuration file; the message names the line."""


@dataclass
class SweepSpec:
    methods: list[str] = field(default_factory=lambda: ["jse"])
    x_name: str = "rho"
    x_values: list[float] = field(default_factory=lambda: [0.0])
    seeds: int = 100
    base_seed: int = 0


def parse_config_lines(lines: list[str], path: str = "<config>") -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current = "global"
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value' or '[section]'")
        key, _, value = line.partition("=")
        sections.setdefault(current, {})[key.strip()] = value.strip()
    return sections


def _coerce(value: str, typ: Any, key: str, section: str) -> Any:
    try:
        if typ is bool:
            if value.lower() in ("true", "1", "yes"):
                return True
            if value.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if typ is int:
            return int(value)
        if typ is float:
            return float(value)
        return value
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from exc


_FIELD_TYPES = {
    bool: bool, int: int, float: float, str: str,
}


def _apply(obj, section: str, values: dict[str, str]):
    fields = {f.name: f for f in dataclasses.fields(obj)}
    updates = {}
    for key, raw in values.items():
        if key not in fields:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        current = getattr(obj, key)
        if key == "delta":
            updates[key] = "auto" if raw == "auto" else _coerce(raw, float, key, section)
            continue
        if key == "max_dim" or key == "max_rounds" or key == "test_n":
            updates[key] = None if raw in ("none", "") else int(raw)
            continue
        typ = type(current) if current is not None else str
        if typ not in _FIELD_TYPES:
            raise ConfigError(f"[{section}] {key}: unsupported nested assignment")
        updates[key] = _coerce(raw, typ, key, section)
    return replace(obj, **updates)


def build_experiment(
    sections: dict[str, dict[str, str]], base: ExperimentConfig | None = None
) -> tuple[ExperimentConfig, SweepSpec]:
    """Assemble an ExperimentConfig plus sweep grid from parsed sections.

    Per-method optimizer defaults follow the synthetic-benchmark tuning:
    learning rate 1e-2 for the joint fit, 1e-1 elsewhere, weight decay 0.
    """
    cfg = base or ExperimentConfig(method="jse")
    if "toy" in sections:
        cfg = replace(cfg, toy=_apply(cfg.toy, "toy", sections["toy"]))
    if "experiment" in sections:
        cfg = _apply(cfg, "experiment", sections["experiment"])
    if "jse" in sections:
        cfg = replace(cfg, jse=_apply(cfg.jse, "jse", sections["jse"]))
    if "inlp" in sections:
        cfg = replace(cfg, inlp=_apply(cfg.inlp, "inlp", sections["inlp"]))
    if "rlace" in sections:
        cfg = replace(cfg, rlace=_apply(cfg.rlace, "rlace", sections["rlace"]))
    if "optimizer" in sections:
        opt = _apply(cfg.downstream, "optimizer", sections["optimizer"])
        cfg = replace(
            cfg,
            downstream=opt,
            inlp=replace(cfg.inlp, optimizer=opt),
            rlace=replace(cfg.rlace, optimizer=opt),
        )
    for name in ("jse", "inlp", "rlace", "downstream"):
        section = f"{name}.optimizer"
        if section in sections:
            if name == "downstream":
                cfg = replace(cfg, downstream=_apply(cfg.downstream, section, sections[section]))
            else:
                sub = getattr(cfg, name)
                sub = replace(sub, optimizer=_apply(sub.optimizer, section, sections[section]))
                cfg = replace(cfg, **{name: sub})

    sweep = SweepSpec()
    if "sweep" in sections:
        vals = sections["sweep"]
        if "methods" in vals:
            methods = [m.strip() for m in vals["methods"].split(",") if m.strip()]
            for m in methods:
                if m not in METHODS:
                    raise ConfigError(f"[sweep] unknown method {m!r}")
            sweep.methods = methods
        if "x_name" in vals:
            if vals["x_name"] not in ("rho", "n", "angle_deg"):
                raise ConfigError(f"[sweep] x_name must be rho, n or angle_deg")
            sweep.x_name = vals["x_name"]
        if "x_values" in vals:
            try:
                sweep.x_values = [float(v) for v in vals["x_values"].split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"[sweep] x_values: {exc}") from exc
        if "seeds" in vals:
            sweep.seeds = int(vals["seeds"])
        if "base_seed" in vals:
            sweep.base_seed = int(vals["base_seed"])
    cfg = replace(cfg, seeds=sweep.seeds, base_seed=sweep.base_seed)
    return cfg, sweep


def load_config(path: str, base: ExperimentConfig | None = None):
    with open(path, "r", encoding="utf-8") as fh:
        sections = parse_config_lines(fh.readlines(), path)
    return build_experiment(sections, base)
