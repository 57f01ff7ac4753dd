"""Scenario configuration: YAML documents validated against a fixed schema.

Example (``toa-1d``)::

    kind: toa-1d
    packet:
      momentum: [10.0]
      width: [0.5]
    planes: [2.0, 5.0, 10.0]

Missing values are filled in (``hbar = m = 1``, grid size 1024) and the
completed document is echoed into the run manifest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import yaml

from .errors import ConfigError
from .spectral import GaussianPacketSpec, PhysicalConstants, UniformGrid1D

KINDS = (
    "toa-1d", "toa-2d", "kijowski-check", "compare-y",
    "backflow", "wdw-residual", "stationary-ode", "operator-algebra",
)

DEFAULT_N = 1024

TOP_KEYS = {
    "kind", "constants", "packet", "modes", "grids", "slices", "planes", "times",
    "potential", "energy", "branch", "samples", "sample_seed", "search", "derivative",
    "output", "tolerances",
}
SUB_KEYS = {
    "constants": {"hbar", "mass"},
    "packet": {"momentum", "width", "position", "time", "correlation"},
    "grids": {"t", "x", "y"},
    "slices": {"t", "x"},
    "grid": {"n", "lo", "hi"},
    "mode": {"momentum", "coefficient", "phase"},
    "potential": {"kind", "value", "slope"},
    "search": {"enabled", "lo", "hi", "steps", "random"},
    "output": {"dir", "formats"},
    "tolerances": {"mass", "kijowski", "semiclassical", "residual"},
}

REQUIRED = {
    "toa-1d": ("packet", "planes"),
    "toa-2d": ("packet", "planes", "grids.y"),
    "kijowski-check": ("packet", "planes"),
    "compare-y": ("packet", "planes", "times", "grids.x", "grids.y"),
    "backflow": ("modes", "planes"),
    "wdw-residual": ("packet", "grids.x", "grids.t"),
    "stationary-ode": ("energy", "potential", "grids.x"),
    "operator-algebra": (),
}

# axes that go through discrete Fourier transforms for each kind
TRANSFORM_AXES = {
    "toa-2d": ("y",),
    "kijowski-check": ("x",),
    "compare-y": ("x", "y"),
    "backflow": ("x",),
    "wdw-residual": ("x", "t", "y"),
}

DEFAULT_TOLERANCES = {"mass": 1e-6, "kijowski": 1e-6, "semiclassical": 0.01, "residual": 1e-4}


@dataclass(frozen=True)
class GridSpec:
    n: int
    lo: float | None = None
    hi: float | None = None

    def build(self) -> UniformGrid1D:
        if self.lo is None or self.hi is None:
            raise ConfigError("grid bounds are not set")
        return UniformGrid1D(self.n, self.lo, self.hi)

    def with_bounds(self, lo: float, hi: float) -> GridSpec:
        return GridSpec(self.n, lo if self.lo is None else self.lo, hi if self.hi is None else self.hi)

    def to_dict(self) -> dict:
        return {"n": self.n, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class ModeSpec:
    momentum: float
    coefficient: float = 1.0
    phase: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    constants: PhysicalConstants = PhysicalConstants()
    packet: GaussianPacketSpec | None = None
    modes: tuple[ModeSpec, ...] = ()
    grids: dict[str, GridSpec] = field(default_factory=dict)
    slices: dict[str, GridSpec] = field(default_factory=dict)
    planes: tuple[float, ...] = ()
    times: tuple[float, ...] = ()
    potential: dict[str, Any] = field(default_factory=dict)
    energy: float | None = None
    branch: str = "+"
    samples: int = 1000
    sample_seed: int = 20240601
    search: dict[str, Any] = field(default_factory=dict)
    derivative: str = "centered"
    output_dir: str = "out"
    formats: tuple[str, ...] = ("csv",)
    tolerances: dict[str, float] = field(default_factory=dict)

    def grid(self, name: str) -> GridSpec:
        return self.grids.get(name, GridSpec(DEFAULT_N))

    def to_dict(self) -> dict:
        p = self.packet
        return {
            "kind": self.kind,
            "constants": {"hbar": self.constants.hbar, "mass": self.constants.mass},
            "packet": None if p is None else {
                "momentum": list(p.center_momentum), "width": list(p.momentum_width),
                "position": list(p.center_position), "time": p.center_time,
                "correlation": p.correlation},
            "modes": [{"momentum": m.momentum, "coefficient": m.coefficient, "phase": m.phase} for m in self.modes],
            "grids": {k: g.to_dict() for k, g in sorted(self.grids.items())},
            "slices": {k: g.to_dict() for k, g in sorted(self.slices.items())},
            "planes": list(self.planes),
            "times": list(self.times),
            "potential": dict(self.potential),
            "energy": self.energy,
            "branch": self.branch,
            "samples": self.samples,
            "sample_seed": self.sample_seed,
            "search": dict(self.search),
            "derivative": self.derivative,
            "output": {"dir": self.output_dir, "formats": list(self.formats)},
            "tolerances": dict(self.tolerances),
        }


def _check_keys(section: str, doc: dict, allowed: set[str]) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        where = "top level" if section == "" else f"'{section}'"
        raise ConfigError(f"unknown key(s) at {where}: {', '.join(unknown)}")


def _as_mapping(section: str, value) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"'{section}' must be a mapping")
    return value


def _floats(section: str, value) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        value = [value]
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"'{section}' must be a number or list of numbers") from exc


def _grid(section: str, doc) -> GridSpec:
    doc = _as_mapping(section, doc)
    _check_keys(section, doc, SUB_KEYS["grid"])
    n = int(doc.get("n", DEFAULT_N))
    lo = doc.get("lo")
    hi = doc.get("hi")
    if n < 1:
        raise ConfigError(f"'{section}.n' must be positive")
    if lo is not None and hi is not None and not float(hi) > float(lo):
        raise ConfigError(f"'{section}' needs hi > lo")
    return GridSpec(n, None if lo is None else float(lo), None if hi is None else float(hi))


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def _has(doc: dict, dotted: str) -> bool:
    cur: Any = doc
    for part in dotted.split("."):
        if not isinstance(cur, dict) or part not in cur or cur[part] is None:
            return False
        cur = cur[part]
    return True


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a YAML scenario document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a mapping")
    _check_keys("", doc, TOP_KEYS)
    for key in ("constants", "packet", "grids", "slices", "potential", "search", "output", "tolerances"):
        if key in doc and doc[key] is not None:
            _check_keys(key, _as_mapping(key, doc[key]), SUB_KEYS[key])

    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}; got {kind!r}")
    missing = [k for k in REQUIRED[kind] if not _has(doc, k)]
    if missing:
        raise ConfigError(f"kind '{kind}' requires {', '.join(REQUIRED[kind])}; missing: {', '.join(missing)}")

    c = doc.get("constants") or {}
    try:
        constants = PhysicalConstants(float(c.get("hbar", 1.0)), float(c.get("mass", 1.0)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    packet = None
    if doc.get("packet") is not None:
        p = doc["packet"]
        if "momentum" not in p or "width" not in p:
            raise ConfigError("'packet' requires momentum and width")
        mom = _floats("packet.momentum", p["momentum"])
        wid = _floats("packet.width", p["width"])
        pos = _floats("packet.position", p.get("position", [0.0] * len(mom)))
        try:
            packet = GaussianPacketSpec(mom, wid, pos, float(p.get("time", 0.0)),
                                        float(p.get("correlation", 0.0)))
        except ValueError as exc:
            raise ConfigError(f"packet: {exc}") from exc
        want = {"toa-2d": 2, "compare-y": 2}.get(kind)
        if want is not None and packet.ndim != want:
            raise ConfigError(f"kind '{kind}' needs a {want}-axis packet, got {packet.ndim}")

    modes = []
    for i, m in enumerate(doc.get("modes") or []):
        m = _as_mapping(f"modes[{i}]", m)
        _check_keys(f"modes[{i}]", m, SUB_KEYS["mode"])
        if "momentum" not in m:
            raise ConfigError(f"'modes[{i}]' requires momentum")
        modes.append(ModeSpec(float(m["momentum"]), float(m.get("coefficient", 1.0)), float(m.get("phase", 0.0))))

    grids = {k: _grid(f"grids.{k}", v) for k, v in (doc.get("grids") or {}).items()}
    slices = {k: _grid(f"slices.{k}", v) for k, v in (doc.get("slices") or {}).items()}
    for axis in TRANSFORM_AXES.get(kind, ()):
        n = grids.get(axis, GridSpec(DEFAULT_N)).n
        if not _is_pow2(n):
            raise ConfigError(f"grids.{axis}.n = {n} must be a power of two for kind '{kind}'")

    out = doc.get("output") or {}
    formats = tuple(out.get("formats", ["csv"]))
    bad = [f for f in formats if f not in ("csv", "json")]
    if bad:
        raise ConfigError(f"unsupported output format(s): {', '.join(bad)}")
    derivative = doc.get("derivative", "centered")
    if derivative not in ("centered", "spectral"):
        raise ConfigError(f"derivative must be 'centered' or 'spectral', got {derivative!r}")
    branch = str(doc.get("branch", "+"))
    if branch not in ("+", "-"):
        raise ConfigError(f"branch must be '+' or '-', got {branch!r}")

    pot = dict(doc.get("potential") or {})
    if kind == "stationary-ode":
        pot.setdefault("kind", "constant")
        if pot["kind"] not in ("constant", "linear"):
            raise ConfigError(f"potential.kind must be 'constant' or 'linear', got {pot['kind']!r}")
        pot.setdefault("value", 1.0)
        pot.setdefault("slope", 0.0)

    tol = dict(DEFAULT_TOLERANCES)
    tol.update({k: float(v) for k, v in (doc.get("tolerances") or {}).items()})

    return ScenarioConfig(
        kind=kind,
        constants=constants,
        packet=packet,
        modes=tuple(modes),
        grids=grids,
        slices=slices,
        planes=_floats("planes", doc.get("planes", [])),
        times=_floats("times", doc.get("times", [])),
        potential=pot,
        energy=None if doc.get("energy") is None else float(doc["energy"]),
        branch=branch,
        samples=int(doc.get("samples", 1000)),
        sample_seed=int(doc.get("sample_seed", 20240601)),
        search=dict(doc.get("search") or {}),
        derivative=derivative,
        output_dir=str(out.get("dir", "out")),
        formats=formats,
        tolerances=tol,
    )


def load_config(path) -> ScenarioConfig:
    with open(path) as fh:
        return parse_config(fh.read())
