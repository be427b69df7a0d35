"""Run configuration: JSON config files, schema validation, flag overrides.

A config file is a single JSON object with a required ``ring`` section and
optional ``input``, ``window``, ``sfwm``, ``sweep``, ``optimize``, ``fit``
and ``output`` sections.  Unknown keys anywhere are rejected.  Command-line
``--set`` overrides use dotted paths (``ring.t=0.97``) and are applied to the
raw document before validation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import FIT_FREE_PARAMS, SWEEP_AXES, SWEEP_METRICS, Objective
from .errors import ConfigError, InvalidParamError
from .herald import SfwmParams
from .response import BusInput
from .ring import Ordering, Placement, RingParams

_RING_KEYS = ("t", "phi", "alpha", "xi", "zeta", "tau", "n_e", "r", "placement")
_SFWM_KEYS = ("chi3", "a_eff", "n_p", "lambda_p")
_ORDERINGS = {o.value: o for o in Ordering}
_PLACEMENTS = {p.value: p for p in Placement}
_OBJECTIVES = {o.value: o for o in Objective}


@dataclass(frozen=True)
class WindowSpec:
    """Wavelength window: ``center=None`` means the resonance nearest 1.55 um."""

    center: float | None = None
    span_fsr: float = 1.0
    points: int = 2001


@dataclass(frozen=True)
class SweepSpec:
    axis: str = "t"
    grid: tuple[float, ...] = ()
    metrics: tuple[str, ...] = ("transmission",)


@dataclass(frozen=True)
class OptimizeSpec:
    objective: Objective = Objective.HERALD_RATE
    t_range: tuple[float, float] = (0.3, 0.9995)
    coarse_points: int = 201


@dataclass(frozen=True)
class FitSpec:
    data: Path = Path()
    free: tuple[str, ...] = ("t", "alpha", "xi", "zeta")
    max_iterations: int = 2000


@dataclass(frozen=True)
class RunConfig:
    ring: RingParams
    ordering: Ordering = Ordering.MID_RING
    bus: BusInput = BusInput()
    window: WindowSpec = WindowSpec()
    sfwm: SfwmParams | None = None
    sweep: SweepSpec | None = None
    optimize: OptimizeSpec | None = None
    fit: FitSpec | None = None
    out_dir: Path = Path(".")


def _require_mapping(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected an object, got {type(value).__name__}")
    return value


def _reject_unknown(section: dict, allowed, where: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)} "
                          f"(allowed: {', '.join(allowed)})")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


def _complex_amplitude(value, where: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(value[0], value[1])
    raise ConfigError(f"{where}: expected a number or [re, im] pair, got {value!r}")


def _name_list(value, allowed, where: str) -> tuple[str, ...]:
    if isinstance(value, str):
        value = [v.strip() for v in value.split(",") if v.strip()]
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{where}: expected a list of names")
    for v in value:
        if v not in allowed:
            raise ConfigError(f"{where}: {v!r} is not one of {', '.join(allowed)}")
    return tuple(value)


def _parse_ring(section: dict) -> RingParams:
    _reject_unknown(section, _RING_KEYS, "ring")
    if "t" not in section:
        raise ConfigError("ring: key 't' is required")
    kwargs = {}
    for key in _RING_KEYS:
        if key not in section:
            continue
        if key == "placement":
            name = section[key]
            if name not in _PLACEMENTS:
                raise ConfigError(
                    f"ring.placement: {name!r} is not one of {', '.join(_PLACEMENTS)}")
            kwargs[key] = _PLACEMENTS[name]
        else:
            kwargs[key] = _number(section[key], f"ring.{key}")
    try:
        return RingParams(**kwargs)
    except InvalidParamError as exc:
        raise ConfigError(f"ring: {exc}") from exc


def _parse_window(section: dict) -> WindowSpec:
    _reject_unknown(section, ("center", "span_fsr", "points"), "window")
    center = None
    if section.get("center") is not None:
        center = _number(section["center"], "window.center")
        if center <= 0:
            raise ConfigError("window.center: must be positive")
    span = _number(section.get("span_fsr", 1.0), "window.span_fsr")
    if span <= 0:
        raise ConfigError("window.span_fsr: must be positive")
    points = _integer(section.get("points", 2001), "window.points")
    if points < 2:
        raise ConfigError("window.points: need at least 2")
    return WindowSpec(center=center, span_fsr=span, points=points)


def _parse_sfwm(section: dict) -> SfwmParams:
    _reject_unknown(section, _SFWM_KEYS, "sfwm")
    missing = [k for k in _SFWM_KEYS if k not in section]
    if missing:
        raise ConfigError(f"sfwm: missing key(s) {', '.join(missing)}")
    try:
        return SfwmParams(**{k: _number(section[k], f"sfwm.{k}") for k in _SFWM_KEYS})
    except InvalidParamError as exc:
        raise ConfigError(f"sfwm: {exc}") from exc


def _parse_grid(value, where: str) -> tuple[float, ...]:
    if isinstance(value, dict):
        _reject_unknown(value, ("start", "stop", "points"), where)
        for k in ("start", "stop", "points"):
            if k not in value:
                raise ConfigError(f"{where}: missing key {k!r}")
        start = _number(value["start"], f"{where}.start")
        stop = _number(value["stop"], f"{where}.stop")
        points = _integer(value["points"], f"{where}.points")
        if points < 1:
            raise ConfigError(f"{where}.points: need at least 1")
        if points == 1:
            return (start,)
        step = (stop - start) / (points - 1)
        return tuple(start + i * step for i in range(points))
    if isinstance(value, list) and value:
        return tuple(_number(v, where) for v in value)
    raise ConfigError(f"{where}: expected {{start, stop, points}} or a nonempty list")


def _parse_sweep(section: dict) -> SweepSpec:
    _reject_unknown(section, ("axis", "grid", "metrics"), "sweep")
    axis = section.get("axis", "t")
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep.axis: {axis!r} is not one of {', '.join(SWEEP_AXES)}")
    if "grid" not in section:
        raise ConfigError("sweep: key 'grid' is required")
    grid = _parse_grid(section["grid"], "sweep.grid")
    metrics = _name_list(section.get("metrics", ["transmission"]),
                         SWEEP_METRICS, "sweep.metrics")
    return SweepSpec(axis=axis, grid=grid, metrics=metrics)


def _parse_optimize(section: dict) -> OptimizeSpec:
    _reject_unknown(section, ("objective", "t_range", "coarse_points"), "optimize")
    name = section.get("objective", "HeraldRate")
    if name not in _OBJECTIVES:
        raise ConfigError(
            f"optimize.objective: {name!r} is not one of {', '.join(_OBJECTIVES)}")
    rng = section.get("t_range", [0.3, 0.9995])
    if not (isinstance(rng, list) and len(rng) == 2):
        raise ConfigError("optimize.t_range: expected [lo, hi]")
    lo = _number(rng[0], "optimize.t_range[0]")
    hi = _number(rng[1], "optimize.t_range[1]")
    if not (0.0 < lo < hi <= 1.0):
        raise ConfigError("optimize.t_range: must satisfy 0 < lo < hi <= 1")
    points = _integer(section.get("coarse_points", 201), "optimize.coarse_points")
    if points < 2:
        raise ConfigError("optimize.coarse_points: need at least 2")
    return OptimizeSpec(objective=_OBJECTIVES[name], t_range=(lo, hi),
                        coarse_points=points)


def _parse_fit(section: dict, base_dir: Path) -> FitSpec:
    _reject_unknown(section, ("data", "free", "max_iterations"), "fit")
    if "data" not in section or not isinstance(section["data"], str):
        raise ConfigError("fit.data: a CSV path is required")
    data = Path(section["data"])
    if not data.is_absolute():
        data = base_dir / data
    free = _name_list(section.get("free", ["t", "alpha", "xi", "zeta"]),
                      FIT_FREE_PARAMS, "fit.free")
    if not free:
        raise ConfigError("fit.free: need at least one free parameter")
    max_iterations = _integer(section.get("max_iterations", 2000), "fit.max_iterations")
    if max_iterations < 1:
        raise ConfigError("fit.max_iterations: must be positive")
    return FitSpec(data=data, free=free, max_iterations=max_iterations)


def apply_overrides(document: dict, assignments) -> dict:
    """Apply ``section.key=value`` overrides to the raw config document.

    Values parse as JSON when possible and fall back to plain strings, so
    ``ring.t=0.97`` and ``ring.placement=InRing`` both work.
    """
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        dotted, raw = item.split("=", 1)
        keys = [k for k in dotted.strip().split(".") if k]
        if not keys:
            raise ConfigError(f"override {item!r}: empty key path")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = document
        for key in keys[:-1]:
            nxt = node.setdefault(key, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {dotted!r}: {key!r} is not a section")
            node = nxt
        node[keys[-1]] = value
    return document


def parse_config(path: str | Path, overrides=()) -> RunConfig:
    """Load, override, and validate a JSON run configuration."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    document = _require_mapping(document, str(path))
    document = apply_overrides(document, overrides)

    allowed = ("ring", "ordering", "input", "window", "sfwm", "sweep",
               "optimize", "fit", "output")
    _reject_unknown(document, allowed, str(path))
    if "ring" not in document:
        raise ConfigError(f"{path}: section 'ring' is required")

    ring = _parse_ring(_require_mapping(document["ring"], "ring"))

    ordering = Ordering.MID_RING
    if "ordering" in document:
        name = document["ordering"]
        if name not in _ORDERINGS:
            raise ConfigError(f"ordering: {name!r} is not one of {', '.join(_ORDERINGS)}")
        ordering = _ORDERINGS[name]

    bus = BusInput()
    if "input" in document:
        section = _require_mapping(document["input"], "input")
        _reject_unknown(section, ("fwd", "bwd"), "input")
        bus = BusInput(
            b_fwd=_complex_amplitude(section.get("fwd", 1.0), "input.fwd"),
            b_bwd=_complex_amplitude(section.get("bwd", 0.0), "input.bwd"),
        )

    window = WindowSpec()
    if "window" in document:
        window = _parse_window(_require_mapping(document["window"], "window"))

    sfwm = None
    if "sfwm" in document:
        sfwm = _parse_sfwm(_require_mapping(document["sfwm"], "sfwm"))

    sweep = None
    if "sweep" in document:
        sweep = _parse_sweep(_require_mapping(document["sweep"], "sweep"))

    optimize = None
    if "optimize" in document:
        optimize = _parse_optimize(_require_mapping(document["optimize"], "optimize"))

    fit = None
    if "fit" in document:
        fit = _parse_fit(_require_mapping(document["fit"], "fit"), path.parent)

    out_dir = Path(".")
    if "output" in document:
        section = _require_mapping(document["output"], "output")
        _reject_unknown(section, ("dir",), "output")
        if "dir" in section:
            if not isinstance(section["dir"], str):
                raise ConfigError("output.dir: expected a path string")
            out_dir = Path(section["dir"])

    return RunConfig(ring=ring, ordering=ordering, bus=bus, window=window,
                     sfwm=sfwm, sweep=sweep, optimize=optimize, fit=fit,
                     out_dir=out_dir)
