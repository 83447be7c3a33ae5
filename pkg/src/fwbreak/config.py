"""Scenario configuration files (YAML).

A minimal file::

    initial_data: zero
    n: 64
    t_final: 0.1

Full schema with defaults::

    name: <file stem>
    initial_data:            # or a call string such as "two_mode(-0.5, -0.25)"
      kind: two_mode         # zero | constant | sine | two_mode | fourier | file
      a1: -0.5
      a2: -0.25
    n: 2048                  # power of two >= 8
    t_final: 0.2
    linear: false            # drop the u u_x term
    control:
      cfl: 0.3
      dt_max: 0.01
      slope_cap: 1000.0
      tail_fraction_cap: 1.0e-4
    monitor:
      stride: 1
      hs_index: 3.0
    snapshots:
      enabled: false
      stride: 1

Builtin parameters: ``constant(c)``, ``sine(a, k)`` for ``a sin(2 pi k x)``,
``two_mode(a1, a2)`` for ``a1 sin(2 pi x) + a2 sin(4 pi x)``,
``fourier(terms)`` with ``terms`` a list of ``[k, cos_coeff, sin_coeff]``,
and ``file(path)`` for one sample per line on a uniform grid (resampled
spectrally to ``n`` if the lengths differ; relative paths resolve against
the config file).
"""
from __future__ import annotations

import copy
import dataclasses
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .evolution import StepControl
from .spectral import Field, GridSpec, resample


class ConfigError(ValueError):
    pass


BUILTINS: dict[str, tuple[str, ...]] = {
    "zero": (),
    "constant": ("c",),
    "sine": ("a", "k"),
    "two_mode": ("a1", "a2"),
    "fourier": ("terms",),
    "file": ("path",),
}

_DEFAULTS = {"sine": {"k": 1}}


@dataclass
class Scenario:
    name: str
    initial_data: dict[str, Any]
    n: int
    t_final: float
    control: StepControl = field(default_factory=StepControl)
    monitor_stride: int = 1
    hs_index: float = 3.0
    snapshots: bool = False
    snapshot_stride: int = 1
    linear: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "initial_data": copy.deepcopy(self.initial_data),
            "n": self.n,
            "t_final": self.t_final,
            "linear": self.linear,
            "control": dataclasses.asdict(self.control),
            "monitor": {"stride": self.monitor_stride, "hs_index": self.hs_index},
            "snapshots": {"enabled": self.snapshots, "stride": self.snapshot_stride},
        }

    def initial_field(self) -> Field:
        return build_initial(self.initial_data, self.n)


def _number(value, where: str, kind=float):
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    try:
        out = kind(value) if kind is float else value
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None
    if kind is int:
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    if not np.isfinite(out):
        raise ConfigError(f"{where}: must be finite, got {value!r}")
    return out


def _check_keys(section: dict, allowed, where: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(section).__name__}")
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(map(str, unknown))}")


_CALL = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def parse_initial_data(spec) -> dict[str, Any]:
    """Normalize ``initial_data`` to a mapping with a ``kind`` key."""
    if isinstance(spec, str):
        m = _CALL.match(spec)
        if not m:
            raise ConfigError(f"initial_data: cannot parse {spec!r}")
        kind, args = m.group(1), m.group(2)
        if kind not in BUILTINS:
            raise ConfigError(f"initial_data: unknown builtin {kind!r}")
        values = yaml.safe_load(f"[{args}]") if args and args.strip() else []
        names = BUILTINS[kind]
        if len(values) > len(names):
            raise ConfigError(f"initial_data: {kind} takes at most {len(names)} argument(s)")
        spec = {"kind": kind, **dict(zip(names, values))}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("initial_data: expected a builtin name or a mapping with 'kind'")
    kind = spec["kind"]
    if kind not in BUILTINS:
        raise ConfigError(f"initial_data.kind: unknown builtin {kind!r}")
    _check_keys(spec, ("kind",) + BUILTINS[kind], "initial_data")
    out = {"kind": kind, **_DEFAULTS.get(kind, {})}
    for name in BUILTINS[kind]:
        if name not in spec and name not in out:
            raise ConfigError(f"initial_data.{name}: required for {kind}")
        value = spec.get(name, out.get(name))
        where = f"initial_data.{name}"
        if name == "k":
            value = _number(value, where, int)
        elif name == "terms":
            value = _terms(value)
        elif name == "path":
            value = str(value)
        else:
            value = _number(value, where)
        out[name] = value
    return out


def _terms(value) -> list[list[float]]:
    if not isinstance(value, list) or not value:
        raise ConfigError("initial_data.terms: expected a non-empty list of [k, cos, sin]")
    out = []
    for i, term in enumerate(value):
        where = f"initial_data.terms[{i}]"
        if not isinstance(term, (list, tuple)) or len(term) != 3:
            raise ConfigError(f"{where}: expected [k, cos_coeff, sin_coeff]")
        k = _number(term[0], where, int)
        if k < 0:
            raise ConfigError(f"{where}: frequency must be non-negative")
        out.append([k, _number(term[1], where), _number(term[2], where)])
    return out


def build_initial(spec: dict[str, Any], n: int) -> Field:
    grid = GridSpec(n)
    x = grid.x
    kind = spec["kind"]
    if kind == "zero":
        values = np.zeros(n)
    elif kind == "constant":
        values = np.full(n, float(spec["c"]))
    elif kind == "sine":
        values = spec["a"] * np.sin(2 * np.pi * spec["k"] * x)
    elif kind == "two_mode":
        values = spec["a1"] * np.sin(2 * np.pi * x) + spec["a2"] * np.sin(4 * np.pi * x)
    elif kind == "fourier":
        values = np.zeros(n)
        for k, a, b in spec["terms"]:
            values += a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)
    elif kind == "file":
        try:
            samples = np.loadtxt(spec["path"], dtype=float, ndmin=1, delimiter=",")
        except (OSError, ValueError) as exc:
            raise ConfigError(f"initial_data.path: cannot read {spec['path']!r}: {exc}") from exc
        samples = samples.ravel()
        if len(samples) != n:
            try:
                src = Field(GridSpec(len(samples)), samples)
            except ValueError:
                raise ConfigError(
                    f"initial_data.path: {len(samples)} samples, expected {n} or a power of two"
                ) from None
            return resample(src, n)
        values = samples
    else:  # pragma: no cover - guarded by parse_initial_data
        raise ConfigError(f"unknown initial data kind {kind!r}")
    if not np.all(np.isfinite(values)):
        raise ConfigError("initial_data: profile contains non-finite values")
    return Field(grid, np.asarray(values, dtype=float))


TOP_KEYS = ("name", "initial_data", "n", "t_final", "linear", "control", "monitor", "snapshots")


def scenario_from_dict(data: dict[str, Any], name: str = "scenario", base_dir: Path | None = None) -> Scenario:
    """Validate a parsed config mapping. Raises :class:`ConfigError` naming the offending field."""
    _check_keys(data, TOP_KEYS, "config")
    for required in ("initial_data", "n", "t_final"):
        if required not in data:
            raise ConfigError(f"{required}: required field missing")

    n = _number(data["n"], "n", int)
    try:
        GridSpec(n)
    except ValueError:
        raise ConfigError(f"n: must be a power of two >= 8, got {n}") from None
    t_final = _number(data["t_final"], "t_final")
    if t_final <= 0:
        raise ConfigError(f"t_final: must be positive, got {t_final}")

    init = parse_initial_data(data["initial_data"])
    if init["kind"] == "file" and base_dir is not None:
        p = Path(init["path"])
        init["path"] = str(p if p.is_absolute() else (base_dir / p).resolve())

    control = data.get("control") or {}
    fields = [f.name for f in dataclasses.fields(StepControl)]
    _check_keys(control, fields, "control")
    ctl = StepControl(**{k: _number(v, f"control.{k}") for k, v in control.items()})
    try:
        ctl.validate()
    except ValueError as exc:
        raise ConfigError(str(exc).replace("StepControl.", "control.")) from None

    monitor = data.get("monitor") or {}
    _check_keys(monitor, ("stride", "hs_index"), "monitor")
    stride = _number(monitor.get("stride", 1), "monitor.stride", int)
    if stride < 1:
        raise ConfigError("monitor.stride: must be >= 1")
    hs_index = _number(monitor.get("hs_index", 3.0), "monitor.hs_index")

    snaps = data.get("snapshots") or {}
    if isinstance(snaps, bool):
        snaps = {"enabled": snaps}
    _check_keys(snaps, ("enabled", "stride"), "snapshots")
    enabled = snaps.get("enabled", False)
    if not isinstance(enabled, bool):
        raise ConfigError("snapshots.enabled: expected true or false")
    snap_stride = _number(snaps.get("stride", 1), "snapshots.stride", int)
    if snap_stride < 1:
        raise ConfigError("snapshots.stride: must be >= 1")

    linear = data.get("linear", False)
    if not isinstance(linear, bool):
        raise ConfigError("linear: expected true or false")

    return Scenario(
        name=str(data.get("name", name)),
        initial_data=init,
        n=n,
        t_final=t_final,
        control=ctl,
        monitor_stride=stride,
        hs_index=hs_index,
        snapshots=enabled,
        snapshot_stride=snap_stride,
        linear=linear,
    )


def load_config(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"{path}: parse error at {where}: {exc.problem}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from None
    if data is None:
        raise ConfigError(f"{path}: empty config")
    return scenario_from_dict(data, name=path.stem, base_dir=path.parent)
