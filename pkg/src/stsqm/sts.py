"""Free-particle space-conditional states ``phi(t, y, z | x)``.

A state is specified by its momentum amplitude ``phi_tilde(r p_x, p_perp)``
with ``p_x >= 0`` and branch ``r = +/-``.  The ``p_x`` axis is a
:class:`~stsqm.spectral.QuadratureAxis` (composite Gauss-Legendre by
default); transverse momenta live on uniform grids conjugate to the
transverse coordinate grids.

The field on a plane ``x`` is

    phi^r(t, y|x) = (2 pi hbar)^(-d/2) int dp_y int_0^inf dp_x sqrt(p_x/m)
                    phi_tilde(r p_x, p_y) exp(i(p_y y - p^2 t/2m)/hbar) exp(i r p_x x/hbar)

with the ``p_x`` integral evaluated node by node (every node keeps its
exact phase in ``t``) and the transverse integral done by FFT.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, TruncationError
from .spectral import (
    SPACE_TO_MOMENTUM,
    GaussianPacketSpec,
    PhysicalConstants,
    QuadratureAxis,
    UniformGrid1D,
    energy_derivative_apply,
    gauss_legendre_axis,
    correlation_factor,
    gaussian_factor,
    inverse_transform,
    mode_axis,
)

log = logging.getLogger(__name__)

TRUNCATION_WARN = 1e-6
TRUNCATION_FAIL = 1e-3
EDGE_WARN = 1e-6


def _as_tuple(grids) -> tuple:
    if grids is None:
        return ()
    if isinstance(grids, (list, tuple)):
        return tuple(grids)
    return (grids,)


def _weights(px_axis: QuadratureAxis, transverse: Sequence[UniformGrid1D]) -> np.ndarray:
    w = px_axis.weights
    for g in transverse:
        w = np.multiply.outer(w, g.weights)
    return w


def _perp_sq(transverse: Sequence[UniformGrid1D]) -> np.ndarray | float:
    if not transverse:
        return 0.0
    mesh = np.meshgrid(*(g.points for g in transverse), indexing="ij")
    return sum((q**2 for q in mesh), np.zeros(mesh[0].shape))


@dataclass(frozen=True)
class SCMomentumAmplitude:
    """Two-branch amplitude over ``p_x >= 0`` times transverse momentum grids.

    ``plane`` is a pending shift: the amplitude at that plane is the stored
    samples times ``exp(i r p_x plane / hbar)``.  Keeping the phase apart
    leaves every stored modulus untouched by :func:`shift_to_plane`.
    """

    branch_plus: np.ndarray
    branch_minus: np.ndarray
    px_axis: QuadratureAxis
    transverse: tuple[UniformGrid1D, ...] = ()
    constants: PhysicalConstants = PhysicalConstants()
    truncation_loss: float = 0.0
    metadata: dict = field(default_factory=dict)
    plane: float = 0.0

    def __post_init__(self) -> None:
        tr = _as_tuple(self.transverse)
        shape = (len(self.px_axis),) + tuple(g.n for g in tr)
        bp = np.asarray(self.branch_plus, dtype=complex)
        bm = np.asarray(self.branch_minus, dtype=complex)
        if bp.shape != shape or bm.shape != shape:
            raise DomainError(f"branch shapes {bp.shape}/{bm.shape} do not match axes {shape}")
        if self.px_axis.lo < 0:
            raise DomainError("p_x axis must start at >= 0")
        object.__setattr__(self, "branch_plus", bp)
        object.__setattr__(self, "branch_minus", bm)
        object.__setattr__(self, "transverse", tr)
        object.__setattr__(self, "plane", float(self.plane))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.branch_plus.shape

    def plane_phase(self, r: int) -> np.ndarray:
        px = self.px_axis.nodes.reshape((-1,) + (1,) * len(self.transverse))
        return np.exp(1j * r * px * self.plane / self.constants.hbar)

    def phased(self) -> SCMomentumAmplitude:
        """Same state with the pending plane phase multiplied into the samples."""
        if self.plane == 0.0:
            return self
        return self.replace(self.branch_plus * self.plane_phase(1),
                            self.branch_minus * self.plane_phase(-1), plane=0.0)

    @property
    def branches(self) -> dict[int, np.ndarray]:
        return {1: self.branch_plus, -1: self.branch_minus}

    def momentum_sq(self) -> np.ndarray:
        px = self.px_axis.nodes.reshape((-1,) + (1,) * len(self.transverse))
        return px**2 + _perp_sq(self.transverse)

    def replace(self, plus=None, minus=None, **kw) -> SCMomentumAmplitude:
        return SCMomentumAmplitude(
            self.branch_plus if plus is None else plus,
            self.branch_minus if minus is None else minus,
            kw.get("px_axis", self.px_axis), kw.get("transverse", self.transverse),
            kw.get("constants", self.constants), kw.get("truncation_loss", self.truncation_loss),
            kw.get("metadata", dict(self.metadata)), kw.get("plane", self.plane),
        )

    def scaled(self, c: complex) -> SCMomentumAmplitude:
        return self.replace(self.branch_plus * c, self.branch_minus * c)

    def mirrored(self) -> SCMomentumAmplitude:
        """Swap the branches: ``phi_tilde(p) -> phi_tilde(-p)``."""
        a = self.phased()
        return a.replace(a.branch_minus, a.branch_plus)

    @classmethod
    def from_function(
        cls,
        func: Callable,
        px_axis: QuadratureAxis,
        transverse: Sequence[UniformGrid1D] = (),
        constants: PhysicalConstants = PhysicalConstants(),
        normalize: bool = False,
        truncation_loss: float = 0.0,
    ) -> SCMomentumAmplitude:
        """Sample ``func(p_x_signed, *p_perp)`` on both branches."""
        tr = _as_tuple(transverse)
        mesh = np.meshgrid(px_axis.nodes, *(g.points for g in tr), indexing="ij")
        plus = np.asarray(func(mesh[0], *mesh[1:]), dtype=complex)
        minus = np.asarray(func(-mesh[0], *mesh[1:]), dtype=complex)
        plus = np.broadcast_to(plus, mesh[0].shape).copy()
        minus = np.broadcast_to(minus, mesh[0].shape).copy()
        amp = cls(plus, minus, px_axis, tr, constants, truncation_loss)
        if normalize:
            n = sc_norm(amp)
            if n <= 0:
                raise DomainError("cannot normalize a zero amplitude")
            amp = amp.scaled(1 / math.sqrt(n))
        return amp

    @classmethod
    def gaussian(
        cls,
        spec: GaussianPacketSpec,
        transverse: Sequence[UniformGrid1D] = (),
        constants: PhysicalConstants = PhysicalConstants(),
        px_axis: QuadratureAxis | None = None,
        width_sigmas: float = 12.0,
        panel_width: float | None = None,
        order: int = 8,
    ) -> SCMomentumAmplitude:
        """Gaussian ``phi_tilde`` (same functional form on both branches).

        ``spec.center_momentum[0]`` is the signed ``p_x`` centre; its sign
        decides which branch carries the packet.  ``transverse`` are the
        transverse momentum grids.  Norm is 1 on the discrete axes.
        """
        tr = _as_tuple(transverse)
        if spec.ndim != 1 + len(tr):
            raise DomainError(f"packet has {spec.ndim} axes, expected {1 + len(tr)}")
        p0, sig = spec.center_momentum[0], spec.momentum_width[0]
        if px_axis is None:
            px_axis = gaussian_px_axis(abs(p0), sig, width_sigmas, panel_width, order)
        loss = _gaussian_tail_loss(abs(p0), sig, px_axis.lo, px_axis.hi)
        for g, q0, s in zip(tr, spec.center_momentum[1:], spec.momentum_width[1:]):
            loss += _gaussian_tail_loss(q0, s, g.lo, g.hi)

        def func(px, *pp):
            out = gaussian_factor(px, p0, sig, spec.center_position[0], spec.center_time, constants)
            for q, q0, s, y0 in zip(pp, spec.center_momentum[1:], spec.momentum_width[1:],
                                    spec.center_position[1:]):
                out = out * gaussian_factor(q, q0, s, y0, spec.center_time, constants)
            if spec.correlation:
                out = out * correlation_factor(px, pp[0], spec)
            return out

        amp = cls.from_function(func, px_axis, tr, constants, normalize=True, truncation_loss=loss)
        return amp.replace(metadata={"packet": spec})


def _gaussian_tail_loss(p0: float, sigma: float, lo: float, hi: float) -> float:
    """Mass of ``exp(-(p-p0)^2/2 sigma^2)`` (normalized) outside ``[lo, hi]``."""
    r2 = math.sqrt(2.0) * sigma
    return 0.5 * math.erfc((p0 - lo) / r2) + 0.5 * math.erfc((hi - p0) / r2)


def gaussian_px_axis(p0: float, sigma: float, width_sigmas: float = 12.0,
                     panel_width: float | None = None, order: int = 8) -> QuadratureAxis:
    """Gauss-Legendre axis on ``[max(0, p0 - k sigma), p0 + k sigma]``."""
    lo = max(0.0, p0 - width_sigmas * sigma)
    hi = p0 + width_sigmas * sigma
    if hi <= 0:
        raise DomainError("packet has no support on p_x >= 0")
    pw = panel_width if panel_width is not None else sigma / 4.0
    panels = max(1, int(math.ceil((hi - lo) / pw)))
    return gauss_legendre_axis(lo, hi, panels, order)


@dataclass(frozen=True)
class SCEnergyAmplitude:
    """``phi_bar^r(eps, p_perp)`` sampled at ``eps = (p_x^2 + p_perp^2)/2m``.

    The nodes are parameterized by the ``p_x`` axis so that every sample
    sits in the allowed region ``eps >= p_perp^2/2m``.  The measure in
    ``eps`` has weights ``w_px * p_x / m``.
    """

    branch_plus: np.ndarray
    branch_minus: np.ndarray
    px_axis: QuadratureAxis
    transverse: tuple[UniformGrid1D, ...] = ()
    constants: PhysicalConstants = PhysicalConstants()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        tr = _as_tuple(self.transverse)
        shape = (len(self.px_axis),) + tuple(g.n for g in tr)
        bp = np.asarray(self.branch_plus, dtype=complex)
        bm = np.asarray(self.branch_minus, dtype=complex)
        if bp.shape != shape or bm.shape != shape:
            raise DomainError("energy amplitude shape does not match its axes")
        object.__setattr__(self, "branch_plus", bp)
        object.__setattr__(self, "branch_minus", bm)
        object.__setattr__(self, "transverse", tr)

    @property
    def energy(self) -> np.ndarray:
        px = self.px_axis.nodes.reshape((-1,) + (1,) * len(self.transverse))
        return (px**2 + _perp_sq(self.transverse)) / (2 * self.constants.mass)

    @property
    def energy_weights(self) -> np.ndarray:
        w = _weights(self.px_axis, self.transverse)
        px = self.px_axis.nodes.reshape((-1,) + (1,) * len(self.transverse))
        return w * px / self.constants.mass

    def norm(self) -> float:
        w = self.energy_weights
        return float(np.sum((np.abs(self.branch_plus) ** 2 + np.abs(self.branch_minus) ** 2) * w))

    @classmethod
    def modes(
        cls,
        energies: Sequence[float],
        coefficients: Sequence[complex],
        branches: Sequence[int] | None = None,
        constants: PhysicalConstants = PhysicalConstants(),
    ) -> SCEnergyAmplitude:
        """Isolated one-dimensional energy modes, each a unit-strength delta in ``eps``."""
        e = np.asarray(energies, dtype=float)
        if np.any(e <= 0):
            raise DomainError("mode energies must be positive")
        m = constants.mass
        p = np.sqrt(2 * m * e)
        axis = mode_axis(p, m / p)
        c = np.asarray(coefficients, dtype=complex)
        br = np.ones(e.size, dtype=int) if branches is None else np.asarray(branches)
        plus = np.where(br > 0, c, 0)
        minus = np.where(br < 0, c, 0)
        return cls(plus, minus, axis, (), constants)


def energy_to_momentum(amp: SCEnergyAmplitude) -> SCMomentumAmplitude:
    """``phi_tilde(r p_x, p_perp) = sqrt(p_x/m) phi_bar^r(eps(p), p_perp)``."""
    px = amp.px_axis.nodes.reshape((-1,) + (1,) * len(amp.transverse))
    jac = np.sqrt(px / amp.constants.mass)
    return SCMomentumAmplitude(amp.branch_plus * jac, amp.branch_minus * jac, amp.px_axis,
                               amp.transverse, amp.constants, 0.0, dict(amp.metadata))


def momentum_to_energy(amp: SCMomentumAmplitude) -> SCEnergyAmplitude:
    """Inverse of :func:`energy_to_momentum`.

    Nodes at ``p_x = 0`` have a vanishing Jacobian: they are recorded in
    ``metadata['zero_px_nodes']`` and must carry zero amplitude, otherwise a
    :class:`DomainError` is raised.
    """
    amp = amp.phased()
    px = amp.px_axis.nodes.reshape((-1,) + (1,) * len(amp.transverse))
    zero = np.broadcast_to(px == 0, amp.shape)
    meta = dict(amp.metadata)
    if np.any(zero):
        if np.any(amp.branch_plus[zero] != 0) or np.any(amp.branch_minus[zero] != 0):
            raise DomainError("amplitude supported at p_x = 0, where the Jacobian p_x/m vanishes")
        meta["zero_px_nodes"] = int(np.count_nonzero(px == 0))
    jac = np.sqrt(np.where(px > 0, px, 1.0) / amp.constants.mass)
    plus = np.where(zero, 0, amp.branch_plus / jac)
    minus = np.where(zero, 0, amp.branch_minus / jac)
    return SCEnergyAmplitude(plus, minus, amp.px_axis, amp.transverse, amp.constants, meta)


def shift_to_plane(amp: SCMomentumAmplitude, x: float) -> SCMomentumAmplitude:
    """Branch ``r`` picks up ``exp(i r p_x x / hbar)``.

    The phase is recorded in ``plane`` rather than multiplied in, so the
    stored samples (and their moduli) are shared with ``amp``.
    """
    return amp.replace(plane=amp.plane + float(x))


@dataclass(frozen=True)
class SpinorField:
    """``(phi^+, phi^-)`` on a (t, transverse...) grid at plane ``x``."""

    plus: np.ndarray
    minus: np.ndarray
    x: float
    t_grid: UniformGrid1D
    transverse: tuple[UniformGrid1D, ...] = ()
    constants: PhysicalConstants = PhysicalConstants()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        tr = _as_tuple(self.transverse)
        shape = (self.t_grid.n,) + tuple(g.n for g in tr)
        p = np.asarray(self.plus, dtype=complex)
        m = np.asarray(self.minus, dtype=complex)
        if p.shape != shape or m.shape != shape:
            raise DomainError(f"spinor components {p.shape}/{m.shape} do not match grids {shape}")
        object.__setattr__(self, "plus", p)
        object.__setattr__(self, "minus", m)
        object.__setattr__(self, "transverse", tr)
        object.__setattr__(self, "x", float(self.x))

    @property
    def grids(self) -> tuple[UniformGrid1D, ...]:
        return (self.t_grid,) + self.transverse

    @property
    def cell_volume(self) -> float:
        return float(np.prod([g.spacing for g in self.grids]))

    def density(self) -> np.ndarray:
        return np.abs(self.plus) ** 2 + np.abs(self.minus) ** 2

    def same_grids(self, other: SpinorField) -> bool:
        return self.grids == other.grids


def _check_transverse(spatial: Sequence[UniformGrid1D], momentum: Sequence[UniformGrid1D], hbar: float):
    if len(spatial) != len(momentum):
        raise DomainError(f"{len(spatial)} transverse grids for {len(momentum)} transverse momentum axes")
    for g, p in zip(spatial, momentum):
        c = g.conjugate(hbar)
        tol = 1e-9 * max(abs(c.lo), abs(c.hi))
        if c.n != p.n or abs(c.lo - p.lo) > tol or abs(c.hi - p.hi) > tol:
            raise DomainError("transverse grid is not conjugate to the amplitude's momentum grid")


def _edge_ratio(*arrays: np.ndarray) -> float:
    """Largest boundary modulus over all arrays relative to their joint peak."""
    peak = max(float(np.max(np.abs(a))) for a in arrays)
    if peak == 0:
        return 0.0
    edge = 0.0
    for arr in arrays:
        for ax in range(arr.ndim):
            for idx in (0, -1):
                edge = max(edge, float(np.max(np.abs(np.take(arr, idx, axis=ax)))))
    return edge / peak


def time_kernel(amp: SCMomentumAmplitude, t_values: np.ndarray) -> np.ndarray:
    """``exp(-i p_x^2 t / 2m hbar)`` for every (t, p_x node) pair."""
    hb, m = amp.constants.hbar, amp.constants.mass
    return np.exp(-1j * np.outer(t_values, amp.px_axis.nodes**2) / (2 * m * hb))


def sc_branch_samples(amp: SCMomentumAmplitude, x: float, t_values: np.ndarray, r: int,
                      kernel: np.ndarray | None = None) -> np.ndarray:
    """Branch ``r`` at plane ``x`` on times ``t_values``, still in transverse momentum.

    Shape ``(len(t_values),) + transverse shape``; includes the
    ``(2 pi hbar)^(-1/2)`` of the energy integral.  ``kernel`` may carry a
    precomputed :func:`time_kernel` for the same times.
    """
    hb, m = amp.constants.hbar, amp.constants.mass
    px = amp.px_axis.nodes
    shape = (len(t_values),) + amp.shape[1:]
    coef = amp.branches[r].reshape(px.size, -1)
    if not np.any(coef):
        return np.zeros(shape, dtype=complex)
    w = amp.px_axis.weights
    a = (w * np.sqrt(px / m) * np.exp(1j * r * px * (x + amp.plane) / hb))[:, None] * coef
    E = time_kernel(amp, t_values) if kernel is None else kernel
    out = (E @ a).reshape(shape)
    if amp.transverse:
        pp = _perp_sq(amp.transverse)
        out = out * np.exp(-1j * np.multiply.outer(t_values, pp) / (2 * m * hb))
    return out / math.sqrt(2 * math.pi * hb)


def sc_field(
    amp: SCMomentumAmplitude,
    x: float,
    t_grid: UniformGrid1D,
    transverse: Sequence[UniformGrid1D] = (),
    kernel: np.ndarray | None = None,
) -> SpinorField:
    """Evaluate both branches on the plane ``x``.

    ``transverse`` are the coordinate grids (conjugate to
    ``amp.transverse``); a pending ``amp.plane`` adds to ``x``.  Metadata
    reports the quadrature, truncation loss and edge amplitude; a loss
    above 1e-3 raises :class:`TruncationError`.
    """
    tr = _as_tuple(transverse)
    hb = amp.constants.hbar
    _check_transverse(tr, amp.transverse, hb)
    warnings = []
    if amp.truncation_loss > TRUNCATION_FAIL:
        raise TruncationError(f"momentum truncation discards {amp.truncation_loss:.3g} of the norm (> 1e-3)")
    if amp.truncation_loss > TRUNCATION_WARN:
        warnings.append(f"truncation loss {amp.truncation_loss:.3g} exceeds 1e-6")
    t = t_grid.points
    if kernel is None:
        kernel = time_kernel(amp, t)
    comps = []
    for r in (1, -1):
        f = sc_branch_samples(amp, x, t, r, kernel)
        for ax, g in enumerate(tr, start=1):
            f = inverse_transform(f, g, SPACE_TO_MOMENTUM, hb, axis=ax)
        comps.append(f)
    edge = _edge_ratio(*comps)
    if edge > EDGE_WARN and amp.px_axis.rule == "gauss-legendre":
        warnings.append(f"edge amplitude ratio {edge:.3g} exceeds 1e-6; enlarge the grids")
    for w_ in warnings:
        log.warning("sc_field x=%g: %s", x, w_)
    meta = {
        "quadrature": amp.px_axis.rule,
        "discrete": amp.px_axis.discrete,
        "order": amp.px_axis.order,
        "panels": amp.px_axis.panels,
        "px_range": (amp.px_axis.lo, amp.px_axis.hi),
        "truncation_loss": amp.truncation_loss,
        "edge_ratio": edge,
        "warnings": warnings,
    }
    return SpinorField(comps[0], comps[1], x + amp.plane, t_grid, tr, amp.constants, meta)


def plane_wave(p_x: float, p_perp: Sequence[float], branch: int, x, t, perp_coords: Sequence = (),
               constants: PhysicalConstants = PhysicalConstants()) -> np.ndarray:
    """Closed-form single-mode SC field, ``(2 pi hbar)^(-d/2) exp(i(r|p_x|x + p.y - eps t)/hbar)``."""
    hb, m = constants.hbar, constants.mass
    eps = (p_x**2 + sum(q * q for q in p_perp)) / (2 * m)
    d = 1 + len(p_perp)
    phase = branch * abs(p_x) * x - eps * np.asarray(t)
    for q, y in zip(p_perp, perp_coords):
        phase = phase + q * np.asarray(y)
    return np.exp(1j * phase / hb) / (2 * math.pi * hb) ** (d / 2)


def sc_norm(obj) -> float:
    """Arrival normalization: sum over branches of the integral of ``|phi^r|^2``.

    Accepts a :class:`SpinorField` (time-domain sum) or a
    :class:`SCMomentumAmplitude` / :class:`SCEnergyAmplitude` (momentum or
    energy quadrature).
    """
    if isinstance(obj, SpinorField):
        return float(np.sum(obj.density()) * obj.cell_volume)
    if isinstance(obj, SCEnergyAmplitude):
        return obj.norm()
    if isinstance(obj, SCMomentumAmplitude):
        w = _weights(obj.px_axis, obj.transverse)
        return float(np.sum((np.abs(obj.branch_plus) ** 2 + np.abs(obj.branch_minus) ** 2) * w))
    raise DomainError(f"sc_norm does not accept {type(obj).__name__}")


def _transverse_laplacian(f: np.ndarray, transverse: Sequence[UniformGrid1D], hbar: float) -> np.ndarray:
    """Spectral ``sum_k d^2/dy_k^2`` over axes 1.. of ``f``."""
    from .spectral import apply_multiplier

    out = np.zeros_like(f)
    for ax, g in enumerate(transverse, start=1):
        out = out + apply_multiplier(f, g, lambda q: -(q / hbar) ** 2 + 0j, SPACE_TO_MOMENTUM, hbar, axis=ax)
    return out


def sc_schrodinger_residual(field: SpinorField, below: SpinorField, above: SpinorField) -> float:
    """Relative L2 residual of the free-particle equation recovered for ``phi^+-``.

        [i hbar d_t + hbar^2/2m lap_perp] phi = -(hbar^2/2m) d_x^2 phi

    ``below``/``above`` are the fields at ``x - dx`` and ``x + dx``.  The
    left side is spectral; ``d_x^2`` is the centered second difference.
    """
    if not (field.same_grids(below) and field.same_grids(above)):
        raise DomainError("residual needs three fields on identical grids")
    dx = above.x - field.x
    if dx <= 0 or abs((field.x - below.x) - dx) > 1e-12 * max(1.0, abs(dx)):
        raise DomainError("fields must sit at x - dx, x, x + dx with dx > 0")
    hb, m = field.constants.hbar, field.constants.mass
    num = 0.0
    den = 0.0
    for c, lo, hi in ((field.plus, below.plus, above.plus), (field.minus, below.minus, above.minus)):
        lhs = energy_derivative_apply(c, field.t_grid, hb, axis=0)
        if field.transverse:
            lhs = lhs + hb**2 / (2 * m) * _transverse_laplacian(c, field.transverse, hb)
        rhs = -(hb**2) / (2 * m) * (hi - 2 * c + lo) / dx**2
        num += float(np.sum(np.abs(lhs - rhs) ** 2))
        den += float(np.sum(np.abs(lhs) ** 2))
    if den == 0.0:
        return math.sqrt(num)
    return math.sqrt(num / den)


DEFAULT_DX = 1e-3


def sc_residual_at(amp: SCMomentumAmplitude, x: float, t_grid: UniformGrid1D,
                   transverse: Sequence[UniformGrid1D] = (), dx: float = DEFAULT_DX) -> float:
    """Build the fields at ``x - dx, x, x + dx`` and return their residual."""
    fields = [sc_field(amp, x + k * dx, t_grid, transverse) for k in (-1, 0, 1)]
    return sc_schrodinger_residual(fields[1], fields[0], fields[2])


def brute_force_field(
    func: Callable, x: float, t: float, y: Sequence[float], r: int,
    px_range: tuple[float, float], perp_ranges: Sequence[tuple[float, float]],
    n_px: int = 4001, n_perp: int = 2001, constants: PhysicalConstants = PhysicalConstants(),
) -> complex:
    """Direct trapezoid quadrature of the field integral at one point.

    ``func(p_x_signed, *p_perp)`` is the amplitude; intended as an oracle,
    sharing no code with :func:`sc_field`.
    """
    hb, m = constants.hbar, constants.mass
    px = np.linspace(px_range[0], px_range[1], n_px)
    wx = np.full(n_px, px[1] - px[0])
    wx[0] *= 0.5
    wx[-1] *= 0.5
    grids = [px]
    wts = [wx]
    for lo, hi in perp_ranges:
        q = np.linspace(lo, hi, n_perp)
        wq = np.full(n_perp, q[1] - q[0])
        wq[0] *= 0.5
        wq[-1] *= 0.5
        grids.append(q)
        wts.append(wq)
    mesh = np.meshgrid(*grids, indexing="ij")
    w = wts[0]
    for wq in wts[1:]:
        w = np.multiply.outer(w, wq)
    p2 = sum((g**2 for g in mesh), np.zeros(mesh[0].shape))
    phase = r * mesh[0] * x - p2 * t / (2 * m)
    for q, yy in zip(mesh[1:], y):
        phase = phase + q * yy
    integrand = np.sqrt(mesh[0] / m) * func(r * mesh[0], *mesh[1:]) * np.exp(1j * phase / hb)
    d = 1 + len(perp_ranges)
    return complex(np.sum(integrand * w)) / (2 * math.pi * hb) ** (d / 2)
