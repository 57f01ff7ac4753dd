"""Time-conditional free evolution of ``psi(x, y, z | t)`` by exact mode phases."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distributions import ArrivalDistribution
from .errors import DomainError, NoSupportError
from .spectral import (
    SPACE_TO_MOMENTUM,
    GaussianPacketSpec,
    PhysicalConstants,
    UniformGrid1D,
    discrete_norm,
    forward_transform,
    gaussian_amplitude,
    inverse_transform,
)


@dataclass(frozen=True)
class TCMomentumAmplitude:
    """``psi_tilde(p)`` sampled on full-line uniform momentum grids."""

    samples: np.ndarray
    grids: tuple[UniformGrid1D, ...]
    constants: PhysicalConstants = PhysicalConstants()

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=complex)
        grids = tuple(self.grids) if isinstance(self.grids, (list, tuple)) else (self.grids,)
        if s.shape != tuple(g.n for g in grids):
            raise DomainError(f"amplitude shape {s.shape} does not match grids {[g.n for g in grids]}")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "grids", grids)

    @classmethod
    def gaussian(cls, spec: GaussianPacketSpec, spatial_grids, constants=PhysicalConstants()):
        if isinstance(spatial_grids, UniformGrid1D):
            spatial_grids = (spatial_grids,)
        pgrids = tuple(g.conjugate(constants.hbar) for g in spatial_grids)
        return cls(gaussian_amplitude(spec, pgrids, constants), pgrids, constants)

    @property
    def ndim(self) -> int:
        return len(self.grids)

    def norm(self) -> float:
        return discrete_norm(self.samples, self.grids)

    def momentum_sq(self) -> np.ndarray:
        mesh = np.meshgrid(*(g.points for g in self.grids), indexing="ij")
        return sum((p**2 for p in mesh), np.zeros(self.samples.shape))


@dataclass(frozen=True)
class ScalarField:
    samples: np.ndarray
    time: float
    grids: tuple[UniformGrid1D, ...]
    constants: PhysicalConstants = PhysicalConstants()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=complex)
        grids = tuple(self.grids) if isinstance(self.grids, (list, tuple)) else (self.grids,)
        if s.shape != tuple(g.n for g in grids):
            raise DomainError("field shape does not match its grids")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "grids", grids)

    def norm(self) -> float:
        return discrete_norm(self.samples, self.grids)


def tc_evolve_momentum(amp: TCMomentumAmplitude, t: float) -> TCMomentumAmplitude:
    hb, m = amp.constants.hbar, amp.constants.mass
    phase = np.exp(-1j * amp.momentum_sq() * t / (2 * m * hb))
    return TCMomentumAmplitude(amp.samples * phase, amp.grids, amp.constants)


def _check_conjugate(spatial: Sequence[UniformGrid1D], momentum: Sequence[UniformGrid1D], hbar: float) -> None:
    if len(spatial) != len(momentum):
        raise DomainError(f"{len(spatial)} spatial grids for a {len(momentum)}-axis amplitude")
    for k, (g, p) in enumerate(zip(spatial, momentum)):
        c = g.conjugate(hbar)
        tol = 1e-9 * max(abs(c.lo), abs(c.hi))
        if c.n != p.n or abs(c.lo - p.lo) > tol or abs(c.hi - p.hi) > tol:
            raise DomainError(f"axis {k}: spatial grid is not conjugate to the momentum grid")


def momentum_to_position(amp: TCMomentumAmplitude, spatial_grids) -> np.ndarray:
    """Inverse spatial transforms of ``amp.samples`` (no time evolution)."""
    hb = amp.constants.hbar
    out = amp.samples
    for ax, g in enumerate(spatial_grids):
        out = inverse_transform(out, g, SPACE_TO_MOMENTUM, hb, axis=ax)
    return out


def position_to_momentum(samples, spatial_grids, constants=PhysicalConstants()) -> TCMomentumAmplitude:
    if isinstance(spatial_grids, UniformGrid1D):
        spatial_grids = (spatial_grids,)
    hb = constants.hbar
    out = np.asarray(samples, dtype=complex)
    for ax, g in enumerate(spatial_grids):
        out = forward_transform(out, g, SPACE_TO_MOMENTUM, hb, axis=ax)
    return TCMomentumAmplitude(out, tuple(g.conjugate(hb) for g in spatial_grids), constants)


def tc_position_field(amp: TCMomentumAmplitude, t: float, spatial_grids) -> ScalarField:
    if isinstance(spatial_grids, UniformGrid1D):
        spatial_grids = (spatial_grids,)
    spatial_grids = tuple(spatial_grids)
    _check_conjugate(spatial_grids, amp.grids, amp.constants.hbar)
    evolved = tc_evolve_momentum(amp, t)
    return ScalarField(momentum_to_position(evolved, spatial_grids), float(t), spatial_grids, amp.constants)


def free_schrodinger_residual(amp: TCMomentumAmplitude, t: float, dt: float, spatial_grids,
                              interior: float = 0.25) -> float:
    """Relative residual of ``i hbar d_t psi + hbar^2/2m lap psi`` at time ``t``.

    ``d_t`` is a centered difference with step ``dt``; the Laplacian is
    spectral.  Only the central ``1 - 2*interior`` fraction of each axis
    enters the norm.
    """
    hb, m = amp.constants.hbar, amp.constants.mass
    now = tc_position_field(amp, t, spatial_grids)
    grids = now.grids
    prev = tc_position_field(amp, t - dt, grids).samples
    nxt = tc_position_field(amp, t + dt, grids).samples
    lap_amp = -amp.momentum_sq() / hb**2 * tc_evolve_momentum(amp, t).samples
    kin = hb**2 / (2 * m) * momentum_to_position(TCMomentumAmplitude(lap_amp, amp.grids, amp.constants), grids)
    lhs = 1j * hb * (nxt - prev) / (2 * dt)
    sl = tuple(slice(int(g.n * interior), g.n - int(g.n * interior)) for g in grids)
    num = np.linalg.norm((lhs + kin)[sl])
    den = np.linalg.norm(kin[sl])
    return float(num / den) if den > 0 else float(num)


def tc_cumulative_y_density(field: ScalarField) -> ArrivalDistribution:
    """``P_psi(y|t) = int dx |psi(x, y|t)|^2`` for a field on (x, y) grids."""
    if field.samples.ndim != 2:
        raise DomainError("cumulative y density needs a 2D (x, y) field")
    gx, gy = field.grids
    raw = np.sum(np.abs(field.samples) ** 2, axis=0) * gx.spacing
    norm = field.norm()
    if norm <= 0:
        raise NoSupportError("field has zero norm")
    return ArrivalDistribution(("y",), (gy.points,), raw, norm, (gy.spacing,),
                               {"source": "tc_cumulative_y_density", "time": field.time})


def tc_conditional_y_at_plane(field: ScalarField, L: float) -> ArrivalDistribution:
    """``|psi(L, y|t)|^2 / int dy |psi(L, y|t)|^2`` at the grid column nearest ``L``."""
    if field.samples.ndim != 2:
        raise DomainError("conditional y density needs a 2D (x, y) field")
    gx, gy = field.grids
    if not gx.lo <= L <= gx.hi:
        raise DomainError(f"plane L={L} outside x grid [{gx.lo}, {gx.hi}]")
    col = gx.nearest_index(L)
    raw = np.abs(field.samples[col]) ** 2
    denom = float(np.sum(raw) * gy.spacing)
    if not denom > 0:
        raise NoSupportError(f"no support on plane x={gx.points[col]:.6g}")
    return ArrivalDistribution(("y",), (gy.points,), raw, denom, (gy.spacing,),
                               {"source": "tc_conditional_y_at_plane", "time": field.time,
                                "column": col, "plane": float(gx.points[col])})


def tc_centroid(field: ScalarField) -> np.ndarray:
    """Position first moment along every axis."""
    w = np.abs(field.samples) ** 2
    total = w.sum()
    out = []
    for ax, g in enumerate(field.grids):
        shape = [1] * w.ndim
        shape[ax] = g.n
        out.append(float(np.sum(w * g.points.reshape(shape)) / total))
    return np.array(out)
