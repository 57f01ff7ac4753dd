"""History states over a slice axis and their constraint residuals.

A history stacks slice states along one coordinate: time slices
``psi(x|t_k)`` (``mu = 0``) or plane slices ``phi(t, y|x_k)`` (``mu = 1``;
``mu = 2, 3`` reuse the same machinery with the slice axis relabeled).
The constraint ``(-p_mu + P_mu) Phi = 0`` is checked with the slice-axis
momentum applied as a derivative and ``P_mu`` applied slice by slice.

    mu = 0:  p_t = i hbar d/dt,   P_t = p^2/2m
    mu = 1:  p_x = -i hbar d/dx,  P_x = sigma_z sqrt(2m h - p_perp^2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError
from .operators import apply_px_sigma_z
from .qm import ScalarField, TCMomentumAmplitude, tc_position_field
from .spectral import (
    SPACE_TO_MOMENTUM,
    TIME_TO_ENERGY,
    PhysicalConstants,
    UniformGrid1D,
    apply_multiplier,
    discrete_norm,
)
from .sts import SCMomentumAmplitude, SpinorField, sc_field, sc_norm, time_kernel

DERIVATIVES = ("spectral", "centered")
MIN_SLICES = 4
_SLICE_LABELS = {0: "t", 1: "x", 2: "y", 3: "z"}


@dataclass(frozen=True)
class HistoryState:
    """Slices stacked along axis 0.

    ``mu = 0``: ``slices`` has shape ``(n, *spatial)`` and ``grids`` are the
    spatial grids.  ``mu >= 1``: shape ``(n, 2, nt, *transverse)`` with the
    two spinor components on axis 1 and ``grids = (t_grid, *transverse)``.
    """

    mu: int
    slice_grid: UniformGrid1D
    slices: np.ndarray
    grids: tuple[UniformGrid1D, ...]
    constants: PhysicalConstants = PhysicalConstants()
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.mu not in (0, 1, 2, 3):
            raise DomainError(f"mu must be 0, 1, 2 or 3, got {self.mu}")
        s = np.asarray(self.slices, dtype=complex)
        inner = tuple(g.n for g in self.grids)
        expect = (self.slice_grid.n,) + ((2,) if self.mu else ()) + inner
        if s.shape != expect:
            raise DomainError(f"history shape {s.shape} does not match grids {expect}")
        object.__setattr__(self, "slices", s)
        object.__setattr__(self, "grids", tuple(self.grids))
        if not self.labels:
            object.__setattr__(self, "labels", (_SLICE_LABELS[self.mu],))

    @property
    def count(self) -> int:
        return self.slice_grid.n


@dataclass(frozen=True)
class ConstraintReport:
    residual_l2: float
    slice_norms: np.ndarray
    grid_spacings: tuple[float, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.residual_l2 >= 0:
            raise DomainError("residual must be nonnegative")


def build_history_time(amp: TCMomentumAmplitude, t_grid: UniformGrid1D,
                       spatial_grids: Sequence[UniformGrid1D]) -> HistoryState:
    """Slices ``psi(x|t_k)`` from exact free evolution."""
    grids = (spatial_grids,) if isinstance(spatial_grids, UniformGrid1D) else tuple(spatial_grids)
    slices = np.stack([tc_position_field(amp, t, grids).samples for t in t_grid.points])
    return HistoryState(0, t_grid, slices, grids, amp.constants, ("t",) + tuple(f"q{k}" for k in range(len(grids))))


def build_history_space(amp: SCMomentumAmplitude, x_grid: UniformGrid1D, t_grid: UniformGrid1D,
                        transverse: Sequence[UniformGrid1D] = (), mu: int = 1) -> HistoryState:
    """Slices ``phi(t, y|x_k)`` from the free space-conditional field."""
    if mu not in (1, 2, 3):
        raise DomainError("space histories use mu = 1, 2 or 3")
    tr = (transverse,) if isinstance(transverse, UniformGrid1D) else tuple(transverse)
    kernel = time_kernel(amp, t_grid.points)
    fields = [sc_field(amp, x, t_grid, tr, kernel) for x in x_grid.points]
    slices = np.stack([np.stack([f.plus, f.minus]) for f in fields])
    others = [lab for k, lab in _SLICE_LABELS.items() if k not in (0, mu)][: len(tr)]
    return HistoryState(mu, x_grid, slices, (t_grid,) + tr, amp.constants, (_SLICE_LABELS[mu], "t", *others))


def _require_slices(history: HistoryState) -> None:
    if history.count < MIN_SLICES:
        raise DomainError(f"need at least {MIN_SLICES} slices, got {history.count}")


def _slice_operator(history: HistoryState, s: np.ndarray) -> np.ndarray:
    """``P_mu`` on a single slice (or a stack with the slice axis first)."""
    hb, m = history.constants.hbar, history.constants.mass
    if history.mu == 0:
        lead = s.ndim - len(history.grids)
        out = np.zeros_like(s)
        for k, g in enumerate(history.grids):
            out = out + apply_multiplier(s, g, lambda p: (p**2 / (2 * m)).astype(complex),
                                         SPACE_TO_MOMENTUM, hb, axis=lead + k)
        return out
    t_grid, tr = history.grids[0], history.grids[1:]
    if s.ndim == 2 + len(history.grids):
        return np.stack([_slice_operator(history, x) for x in s])
    plus, minus = apply_px_sigma_z(s[0], s[1], t_grid, tr, history.constants)
    return np.stack([plus, minus])


def _slice_momentum(history: HistoryState, derivative: str) -> tuple[np.ndarray, slice]:
    """``p_mu`` along the slice axis; returns values and the slice range they are valid on."""
    hb = history.constants.hbar
    g = history.slice_grid
    s = history.slices
    if derivative == "spectral":
        # i hbar d/dt is the energy multiplier, -i hbar d/dx the momentum multiplier
        sign = TIME_TO_ENERGY if history.mu == 0 else SPACE_TO_MOMENTUM
        out = apply_multiplier(s, g, lambda q: q.astype(complex), sign, hb, axis=0)
        return out, slice(0, g.n)
    if derivative == "centered":
        d = (s[2:] - s[:-2]) / (2 * g.spacing)
        scale = 1j * hb if history.mu == 0 else -1j * hb
        return scale * d, slice(1, g.n - 1)
    raise DomainError(f"derivative must be one of {DERIVATIVES}, got {derivative!r}")


def slice_norm_report(history: HistoryState) -> np.ndarray:
    """Per-slice inner products."""
    if history.mu == 0:
        return np.array([discrete_norm(s, history.grids) for s in history.slices])
    cell = float(np.prod([g.spacing for g in history.grids]))
    return np.array([float(np.sum(np.abs(s) ** 2) * cell) for s in history.slices])


def constraint_residual(history: HistoryState, constants: PhysicalConstants | None = None,
                        derivative: str = "spectral") -> ConstraintReport:
    """``||(-p_mu + P_mu) Phi|| / ||P_mu Phi||`` over the whole history.

    The slice-axis momentum acts on the full stacked array; the centered
    variant only covers interior slices.
    """
    _require_slices(history)
    if constants is not None and constants != history.constants:
        raise DomainError("constants differ from those the history was built with")
    pmu, sl = _slice_momentum(history, derivative)
    big_p = _slice_operator(history, history.slices)[sl]
    num = float(np.linalg.norm(big_p - pmu))
    den = float(np.linalg.norm(big_p))
    res = num / den if den > 0 else num
    spacings = (history.slice_grid.spacing,) + tuple(g.spacing for g in history.grids)
    return ConstraintReport(res, slice_norm_report(history), spacings,
                            {"mu": history.mu, "derivative": derivative, "slices_used": sl.stop - sl.start})


def project_slice(history: HistoryState, k: int):
    """The stored slice at index ``k`` as a field object."""
    n = history.count
    if not -n <= k < n:
        raise IndexError(f"slice index {k} out of range for {n} slices")
    k %= n
    coord = float(history.slice_grid.points[k])
    s = history.slices[k]
    if history.mu == 0:
        return ScalarField(s, coord, history.grids, history.constants, {"slice": k})
    return SpinorField(s[0], s[1], coord, history.grids[0], history.grids[1:], history.constants,
                       {"slice": k, "axis": _SLICE_LABELS[history.mu]})


def verify_generalized_evolution(history: HistoryState, derivative: str = "centered") -> float:
    """Residual of ``P_mu phi = i hbar eta^{mu nu} d_nu phi`` slice by slice.

    Each slice is projected out, ``P_mu`` is applied to it alone, and the
    slice-axis derivative is taken from its neighbours (centered) or from
    the full history (spectral).  Returns ``||lhs - rhs|| / ||lhs||``.
    """
    _require_slices(history)
    hb = history.constants.hbar
    g = history.slice_grid
    # eta = diag(1, -1, -1, -1)
    coef = 1j * hb * (1.0 if history.mu == 0 else -1.0)
    if derivative == "spectral":
        pmu, _ = _slice_momentum(history, "spectral")
        indices = range(g.n)
    elif derivative == "centered":
        pmu = None
        indices = range(1, g.n - 1)
    else:
        raise DomainError(f"derivative must be one of {DERIVATIVES}, got {derivative!r}")
    num = 0.0
    den = 0.0
    for k in indices:
        s = history.slices[k]
        lhs = _slice_operator(history, s)
        if pmu is None:
            rhs = coef * (history.slices[k + 1] - history.slices[k - 1]) / (2 * g.spacing)
        else:
            rhs = pmu[k]
        num += float(np.sum(np.abs(lhs - rhs) ** 2))
        den += float(np.sum(np.abs(lhs) ** 2))
    return math.sqrt(num / den) if den > 0 else math.sqrt(num)


def corrupt_slice(history: HistoryState, k: int) -> HistoryState:
    """Copy of ``history`` with slice ``k`` sign-flipped."""
    s = history.slices.copy()
    s[k] = -s[k]
    return HistoryState(history.mu, history.slice_grid, s, history.grids, history.constants, history.labels)


def revival_period_time(momentum_spacing: float, constants: PhysicalConstants = PhysicalConstants()) -> float:
    """Time after which ``exp(-i p^2 t/2m hbar)`` returns to 1 for every ``p = j * spacing``."""
    return 4 * math.pi * constants.mass * constants.hbar / momentum_spacing**2


def sc_history_norms(history: HistoryState) -> np.ndarray:
    """Slice norms through :func:`~stsqm.sts.sc_norm` (space histories only)."""
    if history.mu == 0:
        raise DomainError("sc norms apply to space histories")
    return np.array([sc_norm(project_slice(history, k)) for k in range(history.count)])
