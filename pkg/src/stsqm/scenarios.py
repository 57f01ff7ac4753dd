"""Scenario runner: one function per configured kind, plus the run manifest."""

from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .arrival import (
    arrival_density,
    arrival_time_density,
    best_backflow_ratio,
    current_series,
    detect_backflow,
    kijowski_reference,
    l1_distance,
    mode_superposition,
    moments,
    sc_conditional_y_at_time,
    sc_cumulative_y,
    two_mode_backflow_scan,
)
from .config import ConfigError, GridSpec, ScenarioConfig
from .constraint import build_history_space, build_history_time, constraint_residual, verify_generalized_evolution
from .distributions import ArrivalDistribution
from .errors import DomainError, StageError
from .operators import (
    DIRAC_VARIANTS,
    SIGMA_X,
    SIGMA_Z,
    dispersion_residual,
    integrate_stationary_sc,
    plane_wave_wavenumber,
    random_modes,
    verify_anticommutation,
)
from .qm import TCMomentumAmplitude, tc_conditional_y_at_plane, tc_position_field
from .spectral import GaussianPacketSpec, PhysicalConstants, UniformGrid1D
from .sts import SCMomentumAmplitude, sc_field
from .tables import Table, emit_table, reread_mass, sha256

MANIFEST = "manifest.json"


@dataclass
class RunManifest:
    config: dict
    kind: str
    seed: int | None
    outputs: dict = field(default_factory=dict)
    captured_mass: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "config": self.config,
            "tolerances": self.tolerances,
            "captured_mass": self.captured_mass,
            "results": self.results,
            "outputs": self.outputs,
            "timings_s": self.timings,
        }


class _Run:
    def __init__(self, cfg: ScenarioConfig, out: Path, seed: int | None):
        self.cfg = cfg
        self.out = out
        self.seed = seed
        self.manifest = RunManifest(cfg.to_dict(), cfg.kind, seed, tolerances=dict(cfg.tolerances))

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except Exception as exc:  # tag every failure with the stage that raised it
            raise StageError(name, exc) from exc
        finally:
            self.manifest.timings[name] = round(time.perf_counter() - t0, 6)

    def emit(self, name: str, obj, mass_check: tuple | None = None) -> None:
        """Write ``obj`` in every configured format; optionally re-read and integrate it."""
        for fmt in self.cfg.formats:
            path = emit_table(obj, self.out / f"{name}.{fmt}", fmt)
            entry = {"file": path.name, "sha256": sha256(path)}
            if mass_check is not None:
                axes, cell = mass_check
                got = reread_mass(path, axes, cell)
                tol = self.cfg.tolerances["mass"]
                entry["reread_mass"] = got
                if abs(got - 1.0) > tol:
                    raise DomainError(f"{path.name}: re-read density integrates to {got:.12g}, "
                                      f"outside 1 +- {tol:g}")
            self.manifest.outputs[f"{name}.{fmt}"] = entry

    def emit_density(self, name: str, dist: ArrivalDistribution) -> None:
        self.manifest.captured_mass[name] = dist.captured_mass
        check = None if dist.improper else (dist.axes, dist.cell)
        self.emit(name, dist, check)


def _packet_1d(p: GaussianPacketSpec) -> GaussianPacketSpec:
    return GaussianPacketSpec(p.center_momentum[:1], p.momentum_width[:1], p.center_position[:1], p.center_time)


def auto_time_window(packet: GaussianPacketSpec, x: float, constants: PhysicalConstants,
                     spreads: float = 16.0) -> tuple[float, float]:
    """Semiclassical arrival window ``t0 + m (x - x0)/p0`` padded by ``spreads`` widths."""
    hb, m = constants.hbar, constants.mass
    p0, sig = packet.center_momentum[0], packet.momentum_width[0]
    if p0 == 0:
        raise DomainError("automatic time window needs a nonzero mean momentum")
    d = x - packet.center_position[0]
    tc = packet.center_time + m * d / p0
    width = m / abs(p0) * math.hypot(hb / (2 * sig), d * sig / p0)
    return (tc - spreads * width, tc + spreads * width)


def auto_space_grid(packet: GaussianPacketSpec, n: int, constants: PhysicalConstants) -> tuple[float, float]:
    """Symmetric interval whose conjugate momentum grid covers ``|p0| + 16 sigma``."""
    pmax = abs(packet.center_momentum[0]) + 16 * packet.momentum_width[0]
    half = n * math.pi * constants.hbar / (2 * pmax)
    return (-half, half)


def _build(spec: GridSpec, name: str) -> UniformGrid1D:
    if spec.lo is None or spec.hi is None:
        raise ConfigError(f"grids.{name} needs lo and hi")
    return spec.build()


# -- kinds ---------------------------------------------------------------------


def _toa_1d(run: _Run) -> None:
    cfg = run.cfg
    c = cfg.constants
    packet = _packet_1d(cfg.packet)
    with run.stage("amplitude"):
        amp = SCMomentumAmplitude.gaussian(packet, constants=c)
    p0 = packet.center_momentum[0]
    rows = {"x": [], "mean": [], "semiclassical": [], "rel_dev": [], "variance": []}
    for i, x in enumerate(cfg.planes):
        with run.stage(f"density[{i}]"):
            tg = cfg.grid("t").with_bounds(*auto_time_window(packet, x, c)).build()
            dist = arrival_time_density(amp, x, tg)
            mean = moments(dist, 1)
            sc = packet.center_time + c.mass * (x - packet.center_position[0]) / p0
            rows["x"].append(x)
            rows["mean"].append(mean)
            rows["semiclassical"].append(sc)
            rows["rel_dev"].append(abs(mean - sc) / abs(sc) if sc else float("nan"))
            rows["variance"].append(moments(dist, 2, central=True))
        with run.stage(f"emit[{i}]"):
            run.emit_density(f"toa_x{i}", dist)
    with run.stage("summary"):
        run.emit("toa_moments", Table({k: np.array(v) for k, v in rows.items()},
                                      {"x": "L", "mean": "T", "semiclassical": "T", "variance": "T^2"}))
        res = {"max_rel_dev": float(np.nanmax(rows["rel_dev"])) if rows["x"] else None}
        if len(rows["x"]) >= 2:
            slope = float(np.polyfit(rows["x"], rows["mean"], 1)[0])
            res["slope"] = slope
            res["slope_rel_dev"] = abs(slope - c.mass / p0) / abs(c.mass / p0)
        res["semiclassical_ok"] = bool(res["max_rel_dev"] is not None
                                      and res["max_rel_dev"] <= cfg.tolerances["semiclassical"])
        run.manifest.results.update(res)


def _toa_2d(run: _Run) -> None:
    cfg = run.cfg
    c = cfg.constants
    yg = _build(cfg.grid("y"), "y")
    with run.stage("amplitude"):
        amp = SCMomentumAmplitude.gaussian(cfg.packet, (yg.conjugate(c.hbar),), c)
    for i, x in enumerate(cfg.planes):
        with run.stage(f"field[{i}]"):
            tg = cfg.grid("t").with_bounds(*auto_time_window(cfg.packet, x, c)).build()
            f = sc_field(amp, x, tg, (yg,))
            dist = arrival_density(f)
            ydist = sc_cumulative_y(f)
            run.manifest.results[f"edge_ratio[{i}]"] = f.metadata["edge_ratio"]
            run.manifest.results[f"mean_t[{i}]"] = moments(dist, 1, "t")
            run.manifest.results[f"mean_y[{i}]"] = moments(dist, 1, "y")
        with run.stage(f"emit[{i}]"):
            run.emit_density(f"toa2d_x{i}", dist)
            run.emit_density(f"toa2d_y_x{i}", ydist)


def _kijowski_check(run: _Run) -> None:
    cfg = run.cfg
    c = cfg.constants
    packet = _packet_1d(cfg.packet)
    gx = cfg.grid("x")
    xg = gx.with_bounds(*auto_space_grid(packet, gx.n, c)).build()
    with run.stage("amplitude"):
        amp = SCMomentumAmplitude.gaussian(packet, constants=c)
        tc = TCMomentumAmplitude.gaussian(packet, xg, c)
    worst = 0.0
    floor = 1e-12
    for i, x in enumerate(cfg.planes):
        with run.stage(f"densities[{i}]"):
            tg = cfg.grid("t").with_bounds(*auto_time_window(packet, x, c)).build()
            a = arrival_time_density(amp, x, tg)
            b = kijowski_reference(tc, x, tg)
            da, db = a.density, b.density
            mask = db >= floor * db.max()
            rel = np.where(mask, np.abs(da - db) / np.where(mask, db, 1.0), 0.0)
            worst = max(worst, float(rel.max()))
            run.manifest.captured_mass[f"sts_x{i}"] = a.captured_mass
            run.manifest.captured_mass[f"kijowski_x{i}"] = b.captured_mass
        with run.stage(f"emit[{i}]"):
            run.emit(f"kijowski_x{i}", Table({"t": tg.points, "sts": da, "kijowski": db, "rel_diff": rel},
                                             {"t": "T", "sts": "1/T", "kijowski": "1/T"}))
    run.manifest.results.update({"max_rel_diff": worst, "cell_floor": floor,
                                 "agree": worst <= cfg.tolerances["kijowski"]})


def _compare_y(run: _Run) -> None:
    cfg = run.cfg
    c = cfg.constants
    xg = _build(cfg.grid("x"), "x")
    yg = _build(cfg.grid("y"), "y")
    L, t_star = cfg.planes[0], cfg.times[0]
    with run.stage("sc"):
        amp = SCMomentumAmplitude.gaussian(cfg.packet, (yg.conjugate(c.hbar),), c)
        tg = cfg.grid("t").with_bounds(*auto_time_window(cfg.packet, L, c)).build()
        f = sc_field(amp, L, tg, (yg,))
        sc_cond = sc_conditional_y_at_time(f, t_star)
        sc_cum = sc_cumulative_y(f)
    with run.stage("tc"):
        tc = TCMomentumAmplitude.gaussian(cfg.packet, (xg, yg), c)
        psi = tc_position_field(tc, t_star, (xg, yg))
        tc_cond = tc_conditional_y_at_plane(psi, L)
    with run.stage("emit"):
        run.emit("compare_y", Table({"y": yg.points, "sc_conditional": sc_cond.density,
                                     "tc_conditional": tc_cond.density, "sc_cumulative": sc_cum.density},
                                    {"y": "L", "sc_conditional": "1/L", "tc_conditional": "1/L",
                                     "sc_cumulative": "1/L"}))
        run.manifest.captured_mass["sc_cumulative"] = sc_cum.captured_mass
        run.manifest.results.update({
            "l1_distance": l1_distance(sc_cond, tc_cond),
            "sc_row_time": sc_cond.metadata["time"],
            "tc_column_plane": tc_cond.metadata["plane"],
            "mean_y_sc": moments(sc_cond, 1),
            "mean_y_tc": moments(tc_cond, 1),
        })


def _backflow(run: _Run) -> None:
    cfg = run.cfg
    c = cfg.constants
    modes = list(cfg.modes)
    if len(modes) < 1:
        raise ConfigError("backflow needs at least one mode")
    search = cfg.search
    if search.get("enabled") and len(modes) == 2:
        with run.stage("search"):
            k1, k2 = modes[0].momentum / c.hbar, modes[1].momentum / c.hbar
            ratio, jmin = best_backflow_ratio(k1, k2, float(search.get("lo", 0.0)),
                                              float(search.get("hi", 3.0)), int(search.get("steps", 301)))
            extra = int(search.get("random", 0))
            if extra:
                rng = np.random.default_rng(run.seed if run.seed is not None else 0)
                cand = rng.uniform(float(search.get("lo", 0.0)), float(search.get("hi", 3.0)), extra)
                mins = two_mode_backflow_scan(k1, k2, cand)
                if mins.min() < jmin:
                    ratio, jmin = float(cand[int(np.argmin(mins))]), float(mins.min())
            run.manifest.results["search"] = {"ratio": ratio, "normalized_min_current": jmin}
            m1, m2 = modes
            modes = [m1, type(m2)(m2.momentum, m1.coefficient * ratio, m2.phase)]
    p = np.array([m.momentum for m in modes])
    coef = np.array([m.coefficient * np.exp(1j * m.phase) for m in modes])
    gx = cfg.grid("x")
    pmin = float(np.min(np.abs(p)))
    if gx.lo is None or gx.hi is None:
        half = 8 * math.pi * c.hbar / pmin
        gx = gx.with_bounds(-half / 2, half / 2)
    xg = gx.build()
    try:
        tc, sc = mode_superposition(p, coef, xg, c)
    except DomainError as exc:
        raise ConfigError(f"modes: {exc}") from exc
    L = cfg.planes[0]
    if L < xg.lo or L > xg.hi:
        raise ConfigError(f"plane {L} outside grids.x")
    eps = p**2 / (2 * c.mass)
    spread = float(np.ptp(eps)) if p.size > 1 else float(eps[0])
    period = 2 * math.pi * c.hbar / spread
    tg = cfg.grid("t").with_bounds(0.0, period).build()
    with run.stage("current"):
        flux = current_series(tc, L, tg.points, xg)
        intervals = detect_backflow(flux)
    with run.stage("densities"):
        kij = kijowski_reference(tc, L, tg)
        sts = arrival_time_density(sc, L, tg)
    with run.stage("emit"):
        run.emit("backflow_series", Table({"t": tg.points, "J": flux.current, "sts_density": sts.density,
                                           "kijowski_density": kij.samples},
                                          {"t": "T", "J": "1/T", "sts_density": "1/T", "kijowski_density": "1/T"}))
        run.emit("backflow_intervals", Table({"t_start": np.array([i[0] for i in intervals]),
                                              "t_end": np.array([i[1] for i in intervals]),
                                              "min_J": np.array([i[2] for i in intervals])},
                                             {"t_start": "T", "t_end": "T", "min_J": "1/T"}))
        run.manifest.results.update({
            "intervals": len(intervals),
            "min_current": float(flux.current.min()),
            "min_sts_density": float(sts.density.min()),
            "min_kijowski_density": float(kij.samples.min()),
            "improper": sts.improper,
            "column_plane": flux.metadata["plane"],
        })


def _wdw_residual(run: _Run) -> None:
    cfg = run.cfg
    c = cfg.constants
    hb = c.hbar
    packet = cfg.packet
    p1 = _packet_1d(packet)
    pmax = abs(p1.center_momentum[0]) + 4 * p1.momentum_width[0]
    emax = pmax**2 / (2 * c.mass)
    with run.stage("history-t"):
        xg = _build(cfg.grid("x"), "x")
        tc = TCMomentumAmplitude.gaussian(p1, xg, c)
        st = cfg.slices.get("t", GridSpec(65))
        span = (st.n - 1) * 0.02 * hb / emax
        tgrid = st.with_bounds(p1.center_time, p1.center_time + span).build()
        h0 = build_history_time(tc, tgrid, (xg,))
        r0 = constraint_residual(h0, derivative=cfg.derivative)
        v0 = verify_generalized_evolution(h0, cfg.derivative)
    with run.stage("history-x"):
        tg = _build(cfg.grid("t"), "t")
        if packet.ndim >= 2 and "y" in cfg.grids:
            yg = _build(cfg.grid("y"), "y")
            amp = SCMomentumAmplitude.gaussian(GaussianPacketSpec(packet.center_momentum[:2], packet.momentum_width[:2],
                                                                  packet.center_position[:2], packet.center_time),
                                               (yg.conjugate(hb),), c)
            tr = (yg,)
        else:
            amp = SCMomentumAmplitude.gaussian(p1, constants=c)
            tr = ()
        sx = cfg.slices.get("x", GridSpec(65))
        x0 = cfg.planes[0] if cfg.planes else 0.0
        span = (sx.n - 1) * 0.02 * hb / pmax
        xgrid = sx.with_bounds(x0, x0 + span).build()
        h1 = build_history_space(amp, xgrid, tg, tr)
        r1 = constraint_residual(h1, derivative=cfg.derivative)
        v1 = verify_generalized_evolution(h1, cfg.derivative)
    with run.stage("emit"):
        run.emit("wdw_slices_t", Table({"index": np.arange(tgrid.n), "t": tgrid.points, "norm": r0.slice_norms},
                                       {"t": "T"}))
        run.emit("wdw_slices_x", Table({"index": np.arange(xgrid.n), "x": xgrid.points, "norm": r1.slice_norms},
                                       {"x": "L"}))
        tol = cfg.tolerances["residual"]
        run.manifest.results.update({
            "derivative": cfg.derivative,
            "mu0": {"constraint": r0.residual_l2, "projected": v0,
                    "max_norm_dev": float(np.max(np.abs(r0.slice_norms - 1)))},
            "mu1": {"constraint": r1.residual_l2, "projected": v1,
                    "max_norm_dev": float(np.max(np.abs(r1.slice_norms - 1)))},
            "within_tolerance": bool(max(r0.residual_l2, r1.residual_l2) <= tol),
        })


def _potential(spec: dict) -> Callable:
    v0, s = float(spec.get("value", 1.0)), float(spec.get("slope", 0.0))
    if spec.get("kind", "constant") == "constant":
        return lambda x: v0 + 0.0 * x
    return lambda x: v0 + s * x


def _stationary_ode(run: _Run) -> None:
    cfg = run.cfg
    c = cfg.constants
    xg = _build(cfg.grid("x"), "x")
    V = _potential(cfg.potential)
    e = cfg.energy
    v_lo = float(V(xg.lo))
    k = plane_wave_wavenumber(e, v_lo, c)
    sgn = 1 if cfg.branch == "+" else -1
    with run.stage("integrate"):
        prof = integrate_stationary_sc(1.0 + 0j, sgn * 1j * k, e, V, xg, cfg.branch, constants=c)
    cols = {"x": xg.points, "re_phi": prof.phi.real, "im_phi": prof.phi.imag, "abs_phi": np.abs(prof.phi)}
    if cfg.potential.get("kind", "constant") == "constant":
        exact = np.exp(sgn * 1j * k * (xg.points - xg.lo))
        cols["abs_err"] = np.abs(prof.phi - exact)
        run.manifest.results["max_abs_err"] = float(cols["abs_err"].max())
    with run.stage("emit"):
        run.emit("stationary_profile", Table(cols, {"x": "L"}))
        run.manifest.results["wavenumber"] = [k.real, k.imag]


def _operator_algebra(run: _Run) -> None:
    cfg = run.cfg
    c = cfg.constants
    with run.stage("modes"):
        rng = np.random.default_rng(cfg.sample_seed)
        modes = random_modes(cfg.samples, rng)
        cols = {"energy": np.array([m.energy for m in modes]),
                "p_y": np.array([m.p_perp[0] for m in modes]),
                "p_z": np.array([m.p_perp[1] for m in modes]),
                "potential": np.array([m.potential_value for m in modes])}
        for v in DIRAC_VARIANTS:
            cols[f"res_{v.replace('-', '_')}"] = np.array([dispersion_residual(m, c, v) for m in modes])
        rep = verify_anticommutation(SIGMA_Z, SIGMA_X)
    with run.stage("emit"):
        run.emit("dispersion_residuals", Table(cols, {"energy": "E", "p_y": "hbar/L", "p_z": "hbar/L", "potential": "E"}))
        run.manifest.results.update({
            "max_dispersion_residual": float(max(cols[k].max() for k in cols if k.startswith("res_"))),
            "anticommutation_max_residual": rep.max_residual,
            "anticommutation_ok": bool(rep),
        })


RUNNERS: dict[str, Callable[[_Run], None]] = {
    "toa-1d": _toa_1d,
    "toa-2d": _toa_2d,
    "kijowski-check": _kijowski_check,
    "compare-y": _compare_y,
    "backflow": _backflow,
    "wdw-residual": _wdw_residual,
    "stationary-ode": _stationary_ode,
    "operator-algebra": _operator_algebra,
}


def run_scenario(cfg: ScenarioConfig, out_dir=None, seed: int | None = None) -> RunManifest:
    """Execute ``cfg`` and write its tables plus ``manifest.json`` into ``out_dir``."""
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    with_stage = _Run(cfg, out, seed)
    with with_stage.stage("setup"):
        out.mkdir(parents=True, exist_ok=True)
    RUNNERS[cfg.kind](with_stage)
    man = with_stage.manifest
    (out / MANIFEST).write_text(json.dumps(man.to_dict(), indent=2, sort_keys=False, default=_jsonable) + "\n")
    return man


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not serializable: {type(obj).__name__}")
