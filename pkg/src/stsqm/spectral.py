"""Grids, unitary Fourier transforms and spectral multipliers.

Every transform here is the discrete counterpart of

    F(q) = 1/sqrt(2 pi hbar) * integral dx exp(sign * i q x / hbar) f(x)

on a periodic uniform grid, so the coordinate/conjugate pair is unitary
with respect to the quadrature weights ``grid.spacing`` and
``grid.conjugate(hbar).spacing``.  Energy is paired with time through the
``TIME_TO_ENERGY`` kernel, spatial momenta through ``SPACE_TO_MOMENTUM``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError

# Forward-kernel signs: phi_bar(eps) = int dt e^{+i eps t/hbar} phi(t) / sqrt(2 pi hbar),
# psi_tilde(p) = int dx e^{-i p x/hbar} psi(x) / sqrt(2 pi hbar).
TIME_TO_ENERGY = +1
SPACE_TO_MOMENTUM = -1


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self) -> None:
        if not self.hbar > 0:
            raise DomainError(f"hbar must be positive, got {self.hbar}")
        if not self.mass > 0:
            raise DomainError(f"mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class UniformGrid1D:
    """Periodic uniform grid ``lo + k * spacing`` for ``k = 0 .. n-1``."""

    n: int
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"grid needs n >= 2 points, got n={self.n}")
        if not self.hi > self.lo:
            raise DomainError(f"grid needs hi > lo, got lo={self.lo}, hi={self.hi}")

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / self.n

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def points(self) -> np.ndarray:
        return self.lo + np.arange(self.n) * self.spacing

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n, self.spacing)

    def conjugate_spacing(self, hbar: float = 1.0) -> float:
        return 2.0 * math.pi * hbar / (self.n * self.spacing)

    def conjugate(self, hbar: float = 1.0) -> UniformGrid1D:
        """Centered conjugate grid; its spacing is ``2 pi hbar / (n spacing)``."""
        dq = self.conjugate_spacing(hbar)
        lo = -(self.n // 2) * dq
        return UniformGrid1D(self.n, lo, lo + self.n * dq)

    def nearest_index(self, value: float) -> int:
        k = int(round((value - self.lo) / self.spacing))
        return min(max(k, 0), self.n - 1)

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


def make_grid(n: int, lo: float, hi: float) -> UniformGrid1D:
    return UniformGrid1D(int(n), float(lo), float(hi))


@dataclass(frozen=True)
class QuadratureAxis:
    """Nodes and weights for a momentum integral on ``[lo, hi]``, ``lo >= 0``.

    ``discrete`` marks an axis of isolated modes (weights are delta-function
    strengths, not a quadrature of a continuous amplitude).
    """

    nodes: np.ndarray
    weights: np.ndarray
    lo: float
    hi: float
    panels: int = 0
    order: int = 0
    discrete: bool = False
    rule: str = "gauss-legendre"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise DomainError("quadrature axis needs matching 1D nodes and weights")
        if np.any(nodes < 0):
            raise DomainError("half-line axis nodes must be >= 0")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def points(self) -> np.ndarray:
        return self.nodes

    def __len__(self) -> int:
        return self.nodes.size


def gauss_legendre_axis(lo: float, hi: float, panels: int, order: int = 8) -> QuadratureAxis:
    """Composite Gauss-Legendre rule; never places a node on ``lo`` itself."""
    if lo < 0 or not hi > lo:
        raise DomainError(f"need 0 <= lo < hi, got [{lo}, {hi}]")
    if panels < 1 or order < 1:
        raise DomainError("panels and order must be positive")
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return QuadratureAxis(nodes, weights, float(lo), float(hi), panels, order)


def mode_axis(momenta: Sequence[float], weights: Sequence[float] | None = None) -> QuadratureAxis:
    """Isolated ``p_x`` modes; a weight of 1 is a unit delta function."""
    p = np.asarray(momenta, dtype=float)
    w = np.ones_like(p) if weights is None else np.asarray(weights, dtype=float)
    return QuadratureAxis(p, w, float(p.min()), float(p.max()), discrete=True, rule="modes")


def comb_axis(spacing: float, count: int, first: int = 1) -> QuadratureAxis:
    """Uniform comb ``(first + j) * spacing`` with rectangle weights.

    Fields built on a comb are exactly periodic in the plane coordinate with
    period ``2 pi hbar / spacing``.
    """
    idx = first + np.arange(count)
    if idx[0] < 0:
        raise DomainError("comb must start at a nonnegative index")
    p = idx * spacing
    return QuadratureAxis(
        p, np.full(count, spacing), float(p[0]), float(p[-1]), rule="comb",
        meta={"spacing": spacing, "first": first},
    )


def principal_sqrt(z) -> np.ndarray:
    """Principal square root with the cut on the negative real axis.

    Negative reals map to ``+i sqrt(|z|)`` even when they carry a signed
    zero imaginary part.
    """
    z = np.asarray(z, dtype=complex) + 0j
    return np.sqrt(z)


def _check_axis(samples: np.ndarray, grid: UniformGrid1D, axis: int) -> int:
    if samples.ndim == 0:
        raise DomainError("transform needs at least one axis")
    axis = axis % samples.ndim
    if samples.shape[axis] != grid.n:
        raise DomainError(
            f"length mismatch: axis {axis} has {samples.shape[axis]} samples, grid has {grid.n}"
        )
    return axis


def _along(vec: np.ndarray, ndim: int, axis: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = vec.size
    return vec.reshape(shape)


def _index_phase(n: int, sign: int) -> np.ndarray:
    # exp(sign * i * q_lo * (x_j - lo) / hbar), evaluated with integer arithmetic
    kmin = -(n // 2)
    j = np.arange(n)
    return np.exp(sign * 2j * np.pi * ((kmin * j) % n) / n)


def forward_transform(
    samples, grid: UniformGrid1D, sign: int, hbar: float = 1.0, axis: int = -1
) -> np.ndarray:
    """Coordinate -> conjugate samples on ``grid.conjugate(hbar)``."""
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign}")
    f = np.asarray(samples, dtype=complex)
    axis = _check_axis(f, grid, axis)
    n = grid.n
    q = grid.conjugate(hbar).points
    g = f * _along(_index_phase(n, sign), f.ndim, axis)
    if sign < 0:
        s = np.fft.fft(g, axis=axis)
    else:
        s = np.fft.ifft(g, axis=axis) * n
    post = np.exp(sign * 1j * q * grid.lo / hbar)
    return s * _along(post, f.ndim, axis) * (grid.spacing / math.sqrt(2 * math.pi * hbar))


def inverse_transform(
    spectrum, grid: UniformGrid1D, sign: int, hbar: float = 1.0, axis: int = -1
) -> np.ndarray:
    """Inverse of :func:`forward_transform` with the same ``grid`` and ``sign``."""
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign}")
    F = np.asarray(spectrum, dtype=complex)
    axis = _check_axis(F, grid, axis)
    n = grid.n
    conj = grid.conjugate(hbar)
    pre = np.exp(-sign * 1j * conj.points * grid.lo / hbar)
    g = F * _along(pre, F.ndim, axis)
    if sign < 0:
        s = np.fft.ifft(g, axis=axis) * n
    else:
        s = np.fft.fft(g, axis=axis)
    s = s * _along(_index_phase(n, -sign), F.ndim, axis)
    return s * (conj.spacing / math.sqrt(2 * math.pi * hbar))


def apply_multiplier(
    samples, grid: UniformGrid1D, multiplier, sign: int, hbar: float = 1.0, axis: int = -1
) -> np.ndarray:
    """Multiply each conjugate mode by ``multiplier(q)`` (callable or array)."""
    spec = forward_transform(samples, grid, sign, hbar, axis)
    q = grid.conjugate(hbar).points
    m = multiplier(q) if callable(multiplier) else np.asarray(multiplier)
    if m.ndim == 1:
        m = _along(m, spec.ndim, axis % spec.ndim)
    return inverse_transform(spec * m, grid, sign, hbar, axis)


def half_derivative_apply(samples, grid: UniformGrid1D, hbar: float = 1.0, axis: int = -1) -> np.ndarray:
    """``sqrt(i hbar d/dt)`` as the energy multiplier ``sqrt(eps)`` (principal branch)."""
    return apply_multiplier(samples, grid, principal_sqrt, TIME_TO_ENERGY, hbar, axis)


def energy_derivative_apply(samples, grid: UniformGrid1D, hbar: float = 1.0, axis: int = -1) -> np.ndarray:
    """``i hbar d/dt`` as the energy multiplier ``eps``."""
    return apply_multiplier(samples, grid, lambda e: e.astype(complex), TIME_TO_ENERGY, hbar, axis)


def momentum_derivative_apply(samples, grid: UniformGrid1D, hbar: float = 1.0, axis: int = -1) -> np.ndarray:
    """``-i hbar d/dx`` as the momentum multiplier ``p``."""
    return apply_multiplier(samples, grid, lambda p: p.astype(complex), SPACE_TO_MOMENTUM, hbar, axis)


@dataclass(frozen=True)
class GaussianPacketSpec:
    center_momentum: tuple[float, ...]
    momentum_width: tuple[float, ...]
    center_position: tuple[float, ...] = ()
    center_time: float = 0.0
    correlation: float = 0.0

    def __post_init__(self) -> None:
        p0 = tuple(float(v) for v in np.atleast_1d(self.center_momentum))
        sig = tuple(float(v) for v in np.atleast_1d(self.momentum_width))
        x0 = tuple(float(v) for v in np.atleast_1d(self.center_position)) or (0.0,) * len(p0)
        if not (len(p0) == len(sig) == len(x0)):
            raise DomainError("packet vectors must have equal length")
        if any(s <= 0 for s in sig):
            raise DomainError(f"momentum widths must be positive, got {sig}")
        if not -1.0 < self.correlation < 1.0:
            raise DomainError(f"correlation must lie in (-1, 1), got {self.correlation}")
        if self.correlation and len(p0) < 2:
            raise DomainError("correlation needs at least two momentum axes")
        object.__setattr__(self, "center_momentum", p0)
        object.__setattr__(self, "momentum_width", sig)
        object.__setattr__(self, "center_position", x0)
        object.__setattr__(self, "center_time", float(self.center_time))
        object.__setattr__(self, "correlation", float(self.correlation))

    @property
    def ndim(self) -> int:
        return len(self.center_momentum)


def correlation_factor(p1, p2, spec: GaussianPacketSpec) -> np.ndarray:
    """Turns the product of the first two axis factors into a bivariate Gaussian.

    The resulting ``|amplitude|^2`` is a bivariate normal in ``(p1, p2)``
    with the packet widths as marginal standard deviations and
    ``spec.correlation`` as correlation coefficient.
    """
    rho = spec.correlation
    if rho == 0.0:
        return np.ones(np.broadcast(p1, p2).shape)
    u = (np.asarray(p1) - spec.center_momentum[0]) / spec.momentum_width[0]
    v = (np.asarray(p2) - spec.center_momentum[1]) / spec.momentum_width[1]
    k = rho / (1.0 - rho**2)
    return np.exp(-0.25 * rho * k * (u * u + v * v) + 0.5 * k * u * v)


def gaussian_factor(
    p, p0: float, sigma: float, x0: float = 0.0, t0: float = 0.0,
    constants: PhysicalConstants = PhysicalConstants(),
) -> np.ndarray:
    """Unnormalized single-axis factor of :func:`gaussian_amplitude`."""
    p = np.asarray(p, dtype=float)
    hb, m = constants.hbar, constants.mass
    return np.exp(-((p - p0) ** 2) / (4 * sigma**2) - 1j * p * x0 / hb + 1j * p**2 * t0 / (2 * m * hb))


def gaussian_amplitude(
    spec: GaussianPacketSpec, axes, constants: PhysicalConstants = PhysicalConstants()
) -> np.ndarray:
    """Gaussian momentum amplitude on the product of ``axes``, unit discrete norm.

    ``axes`` holds one momentum axis per packet dimension; each needs
    ``points`` and ``weights`` (a :class:`UniformGrid1D` or a
    :class:`QuadratureAxis`).
    """
    if not isinstance(axes, (list, tuple)):
        axes = (axes,)
    if len(axes) != spec.ndim:
        raise DomainError(f"packet has {spec.ndim} axes, got {len(axes)} momentum axes")
    amp = np.ones((), dtype=complex)
    weight = np.ones(())
    for ax, p0, sig, x0 in zip(axes, spec.center_momentum, spec.momentum_width, spec.center_position):
        f = gaussian_factor(ax.points, p0, sig, x0, spec.center_time, constants)
        amp = np.multiply.outer(amp, f)
        weight = np.multiply.outer(weight, np.asarray(ax.weights, dtype=float))
    if spec.correlation:
        p1, p2 = np.meshgrid(axes[0].points, axes[1].points, indexing="ij")
        amp = amp * correlation_factor(p1, p2, spec).reshape(p1.shape + (1,) * (amp.ndim - 2))
    norm = math.sqrt(float(np.sum(np.abs(amp) ** 2 * weight)))
    if norm == 0.0:
        raise DomainError("gaussian has no support on the supplied momentum axes")
    return amp / norm


def discrete_norm(samples, axes) -> float:
    """``sum |f|^2 * prod(weights)`` over the product of ``axes``."""
    if not isinstance(axes, (list, tuple)):
        axes = (axes,)
    w = np.ones(())
    for ax in axes:
        w = np.multiply.outer(w, np.asarray(ax.weights, dtype=float))
    return float(np.sum(np.abs(np.asarray(samples)) ** 2 * w))
