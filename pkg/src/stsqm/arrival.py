"""Arrival densities, reference distributions and probability current."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .distributions import ArrivalDistribution, FluxSeries
from .errors import DomainError, NoSupportError, WindowError
from .qm import ScalarField, TCMomentumAmplitude, tc_position_field
from .spectral import PhysicalConstants, UniformGrid1D, mode_axis, momentum_derivative_apply
from .sts import SCMomentumAmplitude, SpinorField, sc_branch_samples, sc_norm

WINDOW_FAIL = 1e-3


def arrival_density(field: SpinorField) -> ArrivalDistribution:
    """``phi^dagger phi / <phi|phi>`` on the field's (t, transverse) grid."""
    norm = sc_norm(field)
    if not norm > 0:
        raise NoSupportError("field has zero norm")
    labels = ("t",) + tuple(f"y{k}" if len(field.transverse) > 1 else "y"
                            for k in range(1, len(field.transverse) + 1))
    meta = {"source": "arrival_density", "x": field.x,
            "improper": bool(field.metadata.get("discrete", False))}
    return ArrivalDistribution(labels, tuple(g.points for g in field.grids), field.density(), norm,
                               tuple(g.spacing for g in field.grids), meta)


def _semiclassical_window(amp: SCMomentumAmplitude, x: float) -> tuple[float, float]:
    """Range of ``r m x / p`` over nodes carrying non-negligible weight, padded."""
    m = amp.constants.mass
    px = amp.px_axis.nodes
    w = amp.px_axis.weights
    times = []
    for r, b in amp.branches.items():
        mass = np.sum(np.abs(b.reshape(px.size, -1)) ** 2, axis=1) * w
        keep = (mass > 1e-14 * max(mass.max(), 1e-300)) & (px > 0)
        if np.any(keep):
            times.append(r * m * x / px[keep])
    packet = amp.metadata.get("packet")
    t0 = packet.center_time if packet is not None else 0.0
    if not times:
        return (t0 - 1.0, t0 + 1.0)
    ts = np.concatenate(times) + t0
    lo, hi = float(ts.min()), float(ts.max())
    pad = 0.5 * (hi - lo) + amp.constants.hbar * m / max(float(px[px > 0].min()), 1e-12)
    return (lo - pad, hi + pad)


def arrival_time_density(amp: SCMomentumAmplitude, x: float, t_grid: UniformGrid1D,
                         check_window: bool = True) -> ArrivalDistribution:
    """Arrival-time density at plane ``x`` with transverse momenta integrated out.

    Each branch is evaluated by the half-line quadrature of
    :func:`~stsqm.sts.sc_branch_samples`; the squared modulus is summed over
    transverse momentum cells (Parseval), so no transverse grid is needed.
    The normalization is the amplitude norm.  Discrete-mode amplitudes are
    improper: the result is flagged and left unnormalized.
    """
    norm = sc_norm(amp)
    if not norm > 0:
        raise NoSupportError("amplitude is zero")
    cell_p = float(np.prod([g.spacing for g in amp.transverse])) if amp.transverse else 1.0
    raw = np.zeros(t_grid.n)
    t = t_grid.points
    for r in (1, -1):
        if not np.any(amp.branches[r]):
            continue
        f = sc_branch_samples(amp, x, t, r)
        raw += np.sum(np.abs(f.reshape(t.size, -1)) ** 2, axis=1) * cell_p
    improper = amp.px_axis.discrete
    meta = {"source": "arrival_time_density", "x": float(x) + amp.plane, "improper": improper,
            "quadrature": amp.px_axis.rule, "order": amp.px_axis.order, "panels": amp.px_axis.panels,
            "truncation_loss": amp.truncation_loss}
    if improper:
        return ArrivalDistribution(("t",), (t,), raw, 1.0, (t_grid.spacing,), meta)
    captured = float(np.sum(raw) * t_grid.spacing / norm)
    meta["captured_mass"] = captured
    if check_window and 1.0 - captured > WINDOW_FAIL:
        suggested = _semiclassical_window(amp, x + amp.plane)
        raise WindowError(
            f"t window [{t_grid.lo:.6g}, {t_grid.hi:.6g}] captures only {captured:.6g} of the mass; "
            f"try [{suggested[0]:.6g}, {suggested[1]:.6g}]", captured, suggested)
    return ArrivalDistribution(("t",), (t,), raw, norm, (t_grid.spacing,), meta)


def kijowski_reference(tc_amp: TCMomentumAmplitude, x: float, t_grid: UniformGrid1D) -> ArrivalDistribution:
    """Kijowski arrival-time density from a time-conditional momentum amplitude.

    Independent route: a plain Riemann sum over the uniform momentum grid,
    split into ``p > 0`` and ``p < 0`` halves, each summed coherently:

        P(t) = sum_r sum_perp |sum_{r p > 0} dp sqrt(|p|/2 pi m hbar) psi(p) e^{i(p x - p^2 t/2m)/hbar}|^2
    """
    hb, m = tc_amp.constants.hbar, tc_amp.constants.mass
    gx = tc_amp.grids[0]
    p = gx.points
    dp = gx.spacing
    perp_cell = float(np.prod([g.spacing for g in tc_amp.grids[1:]])) if tc_amp.ndim > 1 else 1.0
    amp2 = tc_amp.samples.reshape(gx.n, -1)
    norm = float(np.sum(np.abs(amp2) ** 2) * dp * perp_cell)
    if not norm > 0:
        raise NoSupportError("amplitude is zero")
    t = t_grid.points
    raw = np.zeros(t.size)
    for sel in (p > 0, p < 0):
        ps = p[sel]
        coef = np.sqrt(np.abs(ps) / (2 * math.pi * m * hb)) * np.exp(1j * ps * x / hb) * dp
        kern = np.exp(-1j * np.outer(t, ps**2) / (2 * m * hb)) * coef
        vals = kern @ amp2[sel]
        raw += np.sum(vals.real**2 + vals.imag**2, axis=1) * perp_cell
    meta = {"source": "kijowski_reference", "x": float(x), "rule": "riemann",
            "captured_mass": float(np.sum(raw) * t_grid.spacing / norm)}
    return ArrivalDistribution(("t",), (t,), raw, norm, (t_grid.spacing,), meta)


def probability_current(fields: Sequence[ScalarField], L: float) -> FluxSeries:
    """``J(L, t) = (hbar/m) Im(psi* d_x psi)`` at the x column nearest ``L``.

    ``fields`` is a time sweep of one-dimensional fields on a common grid;
    ``d_x`` is spectral.
    """
    if not fields:
        raise DomainError("empty time sweep")
    g = fields[0].grids[0]
    if any(f.samples.ndim != 1 or f.grids[0] != g for f in fields):
        raise DomainError("probability current needs 1D fields on a common grid")
    if not g.lo <= L <= g.hi:
        raise DomainError(f"plane L={L} outside x grid [{g.lo}, {g.hi}]")
    col = g.nearest_index(L)
    hb, m = fields[0].constants.hbar, fields[0].constants.mass
    stack = np.stack([f.samples for f in fields])
    # momentum multiplier p gives -i hbar d_x
    dpsi = 1j / hb * momentum_derivative_apply(stack, g, hb, axis=1)
    psi = stack[:, col]
    j = hb / m * np.imag(np.conj(psi) * dpsi[:, col])
    t = np.array([f.time for f in fields])
    return FluxSeries(t, j, {"column": col, "plane": float(g.points[col])})


def current_series(tc_amp: TCMomentumAmplitude, L: float, times: Sequence[float],
                   spatial_grid: UniformGrid1D) -> FluxSeries:
    fields = [tc_position_field(tc_amp, t, spatial_grid) for t in times]
    return probability_current(fields, L)


def detect_backflow(flux: FluxSeries) -> list[tuple[float, float, float]]:
    """Contiguous runs with ``J < 0`` as ``(t_start, t_end, min J)``."""
    neg = flux.current < 0
    out = []
    i = 0
    n = neg.size
    while i < n:
        if neg[i]:
            k = i
            while k + 1 < n and neg[k + 1]:
                k += 1
            out.append((float(flux.t[i]), float(flux.t[k]), float(flux.current[i:k + 1].min())))
            i = k + 1
        else:
            i += 1
    return out


def mode_superposition(momenta: Sequence[float], coefficients: Sequence[complex], x_grid: UniformGrid1D,
                       constants: PhysicalConstants = PhysicalConstants(),
                       ) -> tuple[TCMomentumAmplitude, SCMomentumAmplitude]:
    """Plane-wave superposition ``sum_j c_j exp(i p_j x / hbar)`` in both pictures.

    The momenta must sit on the grid conjugate to ``x_grid``.  The
    time-conditional amplitude puts ``c_j sqrt(2 pi hbar) / dp`` on the grid
    node; the space-conditional one carries ``c_j sqrt(2 pi hbar)`` on a
    mode axis of unit weights, branch chosen by the sign of ``p_j``.
    """
    hb = constants.hbar
    p = np.asarray(momenta, dtype=float)
    coef = np.asarray(coefficients, dtype=complex)
    if p.shape != coef.shape or p.ndim != 1 or p.size == 0:
        raise DomainError("need matching 1D momenta and coefficients")
    if np.any(p == 0):
        raise DomainError("modes at p = 0 never arrive")
    pg = x_grid.conjugate(hb)
    idx = np.rint((p - pg.lo) / pg.spacing).astype(int)
    if np.any(idx < 0) or np.any(idx >= pg.n) \
            or np.any(np.abs(pg.lo + idx * pg.spacing - p) > 1e-9 * np.maximum(1.0, np.abs(p))):
        raise DomainError("mode momenta do not lie on the conjugate grid of the x grid")
    root = math.sqrt(2 * math.pi * hb)
    samples = np.zeros(pg.n, dtype=complex)
    np.add.at(samples, idx, coef * root / pg.spacing)
    tc = TCMomentumAmplitude(samples, (pg,), constants)
    pos = p > 0
    axis = mode_axis(np.abs(p), np.ones(p.size))
    sc = SCMomentumAmplitude(np.where(pos, coef, 0) * root, np.where(~pos, coef, 0) * root, axis, (), constants)
    return tc, sc


def two_mode_backflow_scan(k1: float, k2: float, ratios: Sequence[float], phases: int = 720,
                           hbar: float = 1.0, mass: float = 1.0) -> np.ndarray:
    """Minimum current of ``e^{i k1 x} + c e^{i k2 x}`` over relative phase, per ratio ``c``.

    Closed form ``J = (hbar/m)(hbar k1 + c^2 hbar k2 + c hbar (k1 + k2) cos theta)``
    (with ``hbar k`` the mode momenta), scanned over ``phases`` values of theta.
    Returned values are divided by the two-mode weight ``1 + c^2``.
    """
    theta = np.linspace(0.0, 2 * math.pi, phases, endpoint=False)
    c = np.asarray(ratios, dtype=float)[:, None]
    j = hbar / mass * (k1 + c**2 * k2 + c * (k1 + k2) * np.cos(theta))
    return j.min(axis=1) / (1.0 + c[:, 0] ** 2)


def best_backflow_ratio(k1: float = 1.0, k2: float = 2.0, lo: float = 0.0, hi: float = 3.0,
                        steps: int = 301) -> tuple[float, float]:
    """Grid-search the ratio with the most negative normalized current."""
    ratios = np.linspace(lo, hi, steps)
    mins = two_mode_backflow_scan(k1, k2, ratios)
    k = int(np.argmin(mins))
    return float(ratios[k]), float(mins[k])


def sc_cumulative_y(field: SpinorField) -> ArrivalDistribution:
    """``P(y|x) = int dt phi^dagger phi`` over the field's time window."""
    if len(field.transverse) != 1:
        raise DomainError("cumulative y density needs exactly one transverse axis")
    norm = sc_norm(field)
    if not norm > 0:
        raise NoSupportError("field has zero norm")
    gy = field.transverse[0]
    raw = np.sum(field.density(), axis=0) * field.t_grid.spacing
    return ArrivalDistribution(("y",), (gy.points,), raw, norm, (gy.spacing,),
                               {"source": "sc_cumulative_y", "x": field.x})


def sc_conditional_y_at_time(field: SpinorField, t_star: float) -> ArrivalDistribution:
    """``|phi(t, y|x)|^2 / int dy |phi(t, y|x)|^2`` at the t row nearest ``t_star``."""
    if len(field.transverse) != 1:
        raise DomainError("conditional y density needs exactly one transverse axis")
    tg, gy = field.t_grid, field.transverse[0]
    if not tg.lo <= t_star <= tg.hi:
        raise DomainError(f"t*={t_star} outside t grid [{tg.lo}, {tg.hi}]")
    row = tg.nearest_index(t_star)
    raw = field.density()[row]
    denom = float(np.sum(raw) * gy.spacing)
    if not denom > 0:
        raise NoSupportError(f"no arrivals at this time (t={tg.points[row]:.6g})")
    return ArrivalDistribution(("y",), (gy.points,), raw, denom, (gy.spacing,),
                               {"source": "sc_conditional_y_at_time", "x": field.x,
                                "row": row, "time": float(tg.points[row])})


def moments(dist: ArrivalDistribution, order: int, axis: str | None = None,
            central: bool = False) -> float:
    """Moment ``sum coord^order * density * cell`` along ``axis``.

    The sum is divided by the captured mass so truncated windows are
    corrected.  ``central=True`` with ``order=2`` gives the variance.
    """
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    if axis is None:
        if len(dist.axes) != 1:
            raise DomainError("axis required for multi-axis distributions")
        axis = dist.axes[0]
    marg = dist.marginal(axis)
    c = marg.coords[0]
    d = marg.density * marg.cell[0]
    mass = float(d.sum())
    if not mass > 0:
        raise NoSupportError("distribution has no mass")
    mean = float(np.sum(c * d) / mass)
    if order == 1:
        return mean
    if central:
        return float(np.sum((c - mean) ** 2 * d) / mass)
    return float(np.sum(c**2 * d) / mass)


def l1_distance(a: ArrivalDistribution, b: ArrivalDistribution) -> float:
    """``int |p_a - p_b|`` for two densities on the same one-axis grid."""
    if a.samples.shape != b.samples.shape or not np.allclose(a.coords[0], b.coords[0]):
        raise DomainError("distributions live on different grids")
    return float(np.sum(np.abs(a.density - b.density)) * a.cell[0])
