"""JSON experiment configuration.

A config is one JSON object with the top-level keys ``probe``,
``photon_grid``, ``pipeline``, ``theta``, ``cutoff`` and ``outputs``.
Unknown keys at any level are rejected.  Angles may be given as numbers or
as simple expressions of ``pi`` such as ``"pi/10"`` or ``"-pi/8"``.
"""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from polarqfi.channels import (
    AnisotropicLindblad,
    ChannelPipeline,
    ConvexRotations,
    DiattenuatorSpec,
    IsotropicLindblad,
    RetarderSpec,
)
from polarqfi.errors import ConfigError
from polarqfi.hilbert import DEFAULT_CUTOFF, RotationAxis

PROBE_KINDS = ("noon", "coherent", "king")
ORDERS = ("forward", "reverse")
DEPOLARIZER_KINDS = ("convex", "isotropic", "anisotropic")

_PI_EXPR = re.compile(r"^\s*([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_angle(value, name: str) -> float:
    """Number, or ``"[k][*]pi[/d]"``."""
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        m = _PI_EXPR.match(value)
        if not m:
            raise ConfigError(f"{name}: cannot parse angle {value!r}")
        k = m.group(1)
        coef = -1.0 if k == "-" else 1.0 if k in ("", "+") else float(k)
        den = float(m.group(2)) if m.group(2) else 1.0
        out = coef * math.pi / den
    else:
        raise ConfigError(f"{name}: expected a number, got {type(value).__name__}")
    if not math.isfinite(out):
        raise ConfigError(f"{name}: not finite")
    return out


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")


def _number(d, key, default, where, kind=float):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number")
    if kind is int and int(v) != v:
        raise ConfigError(f"{where}.{key}: expected an integer")
    return kind(v)


@dataclass(frozen=True)
class ProbeConfig:
    kinds: tuple = PROBE_KINDS
    king_dir: str | None = None


@dataclass(frozen=True)
class PipelineConfig:
    retarder: RetarderSpec = field(default_factory=RetarderSpec)
    diattenuator: DiattenuatorSpec | None = None
    depolarizer: object | None = None
    orders: tuple = ("forward",)
    convex_average: str = "states"

    def build(self, order: str) -> ChannelPipeline:
        return ChannelPipeline.build(order, self.retarder, self.diattenuator, self.depolarizer)

    @property
    def depolarizer_tag(self) -> str:
        return "none" if self.depolarizer is None else self.depolarizer.kind

    @property
    def depolarizer_strength(self) -> float:
        return 0.0 if self.depolarizer is None else float(self.depolarizer.strength)


@dataclass(frozen=True)
class ExperimentConfig:
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    photon_grid: tuple = (1, 2, 3, 4, 5, 6)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    theta: float = math.pi / 10
    cutoff: int = DEFAULT_CUTOFF
    outputs: dict = field(default_factory=dict)
    source: str | None = None


def _parse_probe(d) -> ProbeConfig:
    if isinstance(d, str):
        d = {"kinds": [d]}
    _check_keys(d, ("kind", "kinds", "king_dir"), "probe")
    if "kind" in d and "kinds" in d:
        raise ConfigError("probe: give either 'kind' or 'kinds'")
    kinds = [d["kind"]] if "kind" in d else d.get("kinds", list(PROBE_KINDS))
    if not isinstance(kinds, list) or not kinds:
        raise ConfigError("probe.kinds: expected a nonempty list")
    for k in kinds:
        if k not in PROBE_KINDS:
            raise ConfigError(f"probe: unknown kind {k!r} (expected one of {PROBE_KINDS})")
    king_dir = d.get("king_dir")
    if king_dir is not None and not isinstance(king_dir, str):
        raise ConfigError("probe.king_dir: expected a path string")
    return ProbeConfig(tuple(dict.fromkeys(kinds)), king_dir)


def _parse_depolarizer(d):
    if d is None:
        return None, "states"
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("pipeline.depolarizer: expected an object with 'kind'")
    kind = d["kind"]
    where = "pipeline.depolarizer"
    try:
        if kind == "convex":
            _check_keys(d, ("kind", "eta_min", "eta_max", "n_r", "sigma_r", "average"), where)
            average = d.get("average", "states")
            if average not in ("states", "qfi"):
                raise ConfigError(f"{where}.average: expected 'states' or 'qfi'")
            spec = ConvexRotations(
                eta_min=parse_angle(d.get("eta_min", -math.pi / 8), f"{where}.eta_min"),
                eta_max=parse_angle(d.get("eta_max", math.pi / 8), f"{where}.eta_max"),
                n_r=_number(d, "n_r", 6, where, int),
                sigma_r=parse_angle(d.get("sigma_r", math.pi / 32), f"{where}.sigma_r"),
            )
            return spec, average
        if kind == "isotropic":
            _check_keys(d, ("kind", "nu_t"), where)
            return IsotropicLindblad(_number(d, "nu_t", 0.003, where)), "states"
        if kind == "anisotropic":
            _check_keys(d, ("kind", "nu_t", "nu0_t"), where)
            return AnisotropicLindblad(_number(d, "nu_t", 0.05, where), _number(d, "nu0_t", 0.0, where)), "states"
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unknown kind {kind!r} (expected one of {DEPOLARIZER_KINDS})")


def _parse_pipeline(d) -> PipelineConfig:
    _check_keys(d, ("retarder", "diattenuator", "depolarizer", "order"), "pipeline")
    r = d.get("retarder", {})
    _check_keys(r, ("theta", "axis"), "pipeline.retarder")
    axis = r.get("axis", {"Theta": 0.0, "Phi": 0.0})
    _check_keys(axis, ("Theta", "Phi"), "pipeline.retarder.axis")
    retarder = RetarderSpec(
        theta=parse_angle(r.get("theta", math.pi / 10), "pipeline.retarder.theta"),
        axis=RotationAxis(
            parse_angle(axis.get("Theta", 0.0), "axis.Theta"),
            parse_angle(axis.get("Phi", 0.0), "axis.Phi"),
        ),
    )
    dia = d.get("diattenuator")
    if dia is not None:
        _check_keys(dia, ("q", "r", "beta", "gamma"), "pipeline.diattenuator")
        try:
            dia = DiattenuatorSpec(
                q=_number(dia, "q", 1.0, "pipeline.diattenuator"),
                r=_number(dia, "r", 1.0, "pipeline.diattenuator"),
                beta=parse_angle(dia.get("beta", 0.0), "pipeline.diattenuator.beta"),
                gamma=parse_angle(dia.get("gamma", 0.0), "pipeline.diattenuator.gamma"),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"pipeline.diattenuator: {exc}") from exc
    dep, average = _parse_depolarizer(d.get("depolarizer"))
    order = d.get("order", "forward")
    orders = [order] if isinstance(order, str) else order
    if not isinstance(orders, list) or not orders or any(o not in ORDERS for o in orders):
        raise ConfigError(f"pipeline.order: expected 'forward', 'reverse' or a list of them, got {order!r}")
    return PipelineConfig(retarder, dia, dep, tuple(dict.fromkeys(orders)), average)


TOP_LEVEL = ("probe", "photon_grid", "pipeline", "theta", "cutoff", "outputs")


def parse_config(doc: dict, source: str | None = None) -> ExperimentConfig:
    _check_keys(doc, TOP_LEVEL, "config")
    probe = _parse_probe(doc.get("probe", {}))
    grid = doc.get("photon_grid", [1, 2, 3, 4, 5, 6])
    if not isinstance(grid, list) or not grid:
        raise ConfigError("photon_grid: expected a nonempty list")
    for g in grid:
        if isinstance(g, bool) or not isinstance(g, (int, float)) or g <= 0 or int(g) != g:
            raise ConfigError(f"photon_grid: entries must be positive integers, got {g!r}")
    cutoff = doc.get("cutoff", DEFAULT_CUTOFF)
    if isinstance(cutoff, bool) or not isinstance(cutoff, int) or cutoff < 2:
        raise ConfigError(f"cutoff: expected an integer >= 2, got {cutoff!r}")
    pipeline = _parse_pipeline(doc.get("pipeline", {}))
    theta = parse_angle(doc.get("theta", pipeline.retarder.theta), "theta")
    outputs = doc.get("outputs", {})
    _check_keys(outputs, ("csv", "plot"), "outputs")
    for k, v in outputs.items():
        if not isinstance(v, str):
            raise ConfigError(f"outputs.{k}: expected a path string")
    if source is not None:
        base = Path(source).parent
        outputs = {k: os.path.normpath(base / v) for k, v in outputs.items()}
        if probe.king_dir is not None:
            probe = ProbeConfig(probe.kinds, os.path.normpath(base / probe.king_dir))
    return ExperimentConfig(probe, tuple(int(g) for g in grid), pipeline, theta, cutoff, outputs, source)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(doc, str(path))
