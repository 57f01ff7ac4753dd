"""Space-evolution generators ``P_x`` and the stationary space-conditional ODE.

Two families of generator are provided:

* the sigma_z form ``sigma_z sqrt(2m(eps - V) - |p_perp|^2)``, and
* Dirac-split forms ``alpha sqrt(a) + beta sqrt(b)`` with anticommuting
  ``alpha, beta`` so that the square is the scalar dispersion.

All square roots use :func:`stsqm.spectral.principal_sqrt`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, SingularCoefficientError, StepSizeError
from .spectral import (
    SPACE_TO_MOMENTUM,
    TIME_TO_ENERGY,
    PhysicalConstants,
    UniformGrid1D,
    forward_transform,
    inverse_transform,
    principal_sqrt,
)

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

DIRAC_VARIANTS = ("dirac", "dirac-swapped", "kinetic-split")


@dataclass(frozen=True)
class ModeCoordinates:
    energy: float
    p_perp: tuple[float, ...] = ()
    potential_value: float = 0.0

    @property
    def p_perp_sq(self) -> float:
        return float(sum(p * p for p in self.p_perp))

    def dispersion(self, constants: PhysicalConstants = PhysicalConstants()) -> float:
        """``2m(eps - V) - |p_perp|^2``; nonnegative iff the mode is classically allowed."""
        m = constants.mass
        return 2 * m * (self.energy - self.potential_value) - self.p_perp_sq

    def allowed(self, constants: PhysicalConstants = PhysicalConstants()) -> bool:
        return self.dispersion(constants) >= 0


def px_eigenvalue_sigma_z(
    mode: ModeCoordinates, constants: PhysicalConstants = PhysicalConstants()
) -> tuple[complex, complex]:
    lam = complex(principal_sqrt(mode.dispersion(constants)))
    return lam, -lam


def dirac_split_matrix(
    mode: ModeCoordinates,
    constants: PhysicalConstants = PhysicalConstants(),
    variant: str = "dirac",
) -> np.ndarray:
    """Explicit 2x2 generator for one ``(eps, p_perp, V)`` mode.

    ``dirac``          sigma_z sqrt(2m eps) + i sigma_x sqrt(2mV + |p_perp|^2)
    ``dirac-swapped``  sigma_x sqrt(2m eps) + sigma_z sqrt(-2mV - |p_perp|^2)
    ``kinetic-split``  sigma_z sqrt(2m eps - |p_perp|^2) + i sigma_x sqrt(2mV)
    """
    m = constants.mass
    eps, v, pp = mode.energy, mode.potential_value, mode.p_perp_sq
    if variant == "dirac":
        a = complex(principal_sqrt(2 * m * eps))
        b = complex(principal_sqrt(2 * m * v + pp))
        return a * SIGMA_Z + 1j * b * SIGMA_X
    if variant == "dirac-swapped":
        a = complex(principal_sqrt(2 * m * eps))
        b = complex(principal_sqrt(-2 * m * v - pp))
        return a * SIGMA_X + b * SIGMA_Z
    if variant == "kinetic-split":
        a = complex(principal_sqrt(2 * m * eps - pp))
        b = complex(principal_sqrt(2 * m * v))
        return a * SIGMA_Z + 1j * b * SIGMA_X
    raise DomainError(f"unknown variant {variant!r}; expected one of {DIRAC_VARIANTS}")


def sigma_z_matrix(mode: ModeCoordinates, constants: PhysicalConstants = PhysicalConstants()) -> np.ndarray:
    lam, _ = px_eigenvalue_sigma_z(mode, constants)
    return lam * SIGMA_Z


@dataclass(frozen=True)
class AnticommutationReport:
    ok: bool
    alpha_sq: float
    beta_sq: float
    anticommutator: float

    @property
    def max_residual(self) -> float:
        return max(self.alpha_sq, self.beta_sq, self.anticommutator)

    def __bool__(self) -> bool:
        return self.ok


def verify_anticommutation(alpha, beta, tol: float = 1e-14) -> AnticommutationReport:
    a = np.asarray(alpha, dtype=complex)
    b = np.asarray(beta, dtype=complex)
    r1 = float(np.max(np.abs(a @ a - IDENTITY)))
    r2 = float(np.max(np.abs(b @ b - IDENTITY)))
    r3 = float(np.max(np.abs(a @ b + b @ a)))
    return AnticommutationReport(max(r1, r2, r3) <= tol, r1, r2, r3)


# -- stationary space-conditional equation ---------------------------------


@dataclass(frozen=True)
class StationaryProfile:
    x_grid: UniformGrid1D
    phi: np.ndarray
    dphi: np.ndarray
    energy: float
    branch: int
    potential: Callable = field(repr=False)

    @property
    def phi_plus(self) -> np.ndarray | None:
        return self.phi if self.branch > 0 else None

    @property
    def phi_minus(self) -> np.ndarray | None:
        return self.phi if self.branch < 0 else None

    @property
    def x(self) -> np.ndarray:
        return self.x_grid.points


def _complex_step(func: Callable, x: np.ndarray, h: float = 1e-30) -> np.ndarray:
    val = np.asarray(func(np.asarray(x, dtype=complex) + 1j * h))
    return np.broadcast_to(np.imag(val) / h, np.shape(x)).astype(float)


def _branch_sign(branch) -> int:
    if branch in (1, "+", "plus"):
        return 1
    if branch in (-1, "-", "minus"):
        return -1
    raise DomainError(f"branch must be '+' or '-', got {branch!r}")


def integrate_stationary_sc(
    phi0: complex,
    dphi0: complex,
    energy: float,
    potential: Callable,
    x_grid: UniformGrid1D,
    branch="+",
    dpotential: Callable | None = None,
    constants: PhysicalConstants = PhysicalConstants(),
    v_min: float = 1e-6,
) -> StationaryProfile:
    """Classical RK4 for the decoupled stationary equation of one branch.

    Solves, from ``x_grid.lo`` over the grid points,

        -(hbar^2/2m)(phi'' - V'/(2V) phi') + (V -+ i hbar sqrt(eps/2m) V'/(2V)) phi = eps phi

    with the upper sign on the ``+`` branch.  ``dpotential`` defaults to a
    complex-step derivative, which is exact for analytic ``potential``.
    """
    sgn = _branch_sign(branch)
    hb, m = constants.hbar, constants.mass
    dV = dpotential if dpotential is not None else (lambda x: _complex_step(potential, x))
    h = x_grid.spacing
    xs = x_grid.points
    probe = np.concatenate([xs, xs + 0.5 * h])
    vals = np.broadcast_to(np.asarray(potential(probe), dtype=float), probe.shape)
    if np.any(np.abs(vals) < v_min):
        bad = float(probe[np.argmin(np.abs(vals))])
        raise SingularCoefficientError(
            f"singular 1/V coefficient: |V| < {v_min:g} near x = {bad:.6g}"
        )
    root = complex(principal_sqrt(energy / (2 * m)))
    k2 = 2 * m / hb**2

    def coeffs(x: float) -> tuple[complex, complex]:
        v = float(potential(x))
        g = float(dV(x)) / (2 * v)
        return g, k2 * (v - sgn * 1j * hb * root * g - energy)

    def rhs(x: float, y: np.ndarray) -> np.ndarray:
        a, b = coeffs(x)
        return np.array([y[1], a * y[1] + b * y[0]])

    n = x_grid.n
    out = np.empty((n, 2), dtype=complex)
    y = np.array([phi0, dphi0], dtype=complex)
    out[0] = y
    for k in range(n - 1):
        x = xs[k]
        s1 = rhs(x, y)
        s2 = rhs(x + 0.5 * h, y + 0.5 * h * s1)
        s3 = rhs(x + 0.5 * h, y + 0.5 * h * s2)
        s4 = rhs(x + h, y + h * s3)
        y = y + (h / 6.0) * (s1 + 2 * s2 + 2 * s3 + s4)
        out[k + 1] = y
    return StationaryProfile(x_grid, out[:, 0].copy(), out[:, 1].copy(), float(energy), sgn, potential)


# -- coupled x-step -----------------------------------------------------------


def _mode_grids(t_grid: UniformGrid1D, transverse: Sequence[UniformGrid1D], hbar: float):
    eps = t_grid.conjugate(hbar).points
    axes = [eps] + [g.conjugate(hbar).points for g in transverse]
    mesh = np.meshgrid(*axes, indexing="ij")
    pp = sum((q**2 for q in mesh[1:]), np.zeros_like(mesh[0]))
    return mesh[0], pp


def _to_modes(f: np.ndarray, t_grid, transverse, hbar) -> np.ndarray:
    out = forward_transform(f, t_grid, TIME_TO_ENERGY, hbar, axis=0)
    for ax, g in enumerate(transverse, start=1):
        out = forward_transform(out, g, SPACE_TO_MOMENTUM, hbar, axis=ax)
    return out


def _from_modes(F: np.ndarray, t_grid, transverse, hbar) -> np.ndarray:
    out = inverse_transform(F, t_grid, TIME_TO_ENERGY, hbar, axis=0)
    for ax, g in enumerate(transverse, start=1):
        out = inverse_transform(out, g, SPACE_TO_MOMENTUM, hbar, axis=ax)
    return out


def _split_parts(eps, pp, v, m, variant):
    if variant == "dirac":
        return principal_sqrt(2 * m * eps), principal_sqrt(2 * m * v + pp)
    if variant == "kinetic-split":
        return principal_sqrt(2 * m * eps - pp), principal_sqrt(2 * m * v + 0 * pp)
    raise DomainError(f"coupled step supports 'dirac' and 'kinetic-split', got {variant!r}")


def coupled_step_propagator(
    t_grid: UniformGrid1D,
    transverse: Sequence[UniformGrid1D],
    dx: float,
    potential: float,
    constants: PhysicalConstants = PhysicalConstants(),
    variant: str = "kinetic-split",
    method: str = "exact",
):
    """Per-mode 2x2 update ``U`` with ``phi(x + dx) = U phi(x)``.

    The generator in each (eps, p_perp) mode is ``M = a sigma_z + i b sigma_x``
    and the evolution is ``d phi/dx = (i/hbar) M phi``.  Returns the four
    entries ``(u_pp, u_pm, u_mp, u_mm)`` and the spectral radius of ``U``
    over all grid modes.
    """
    hb, m = constants.hbar, constants.mass
    eps, pp = _mode_grids(t_grid, transverse, hb)
    a, b = _split_parts(eps, pp, potential, m, variant)
    c = 1j * dx / hb
    if method == "exact":
        # exp(c M) with M^2 = (a^2 - b^2) I
        lam = principal_sqrt(a * a - b * b)
        theta = c * lam
        cosh = np.cosh(theta)
        small = np.abs(theta) < 1e-8
        safe = np.where(small, 1.0, theta)
        sinc = np.where(small, 1.0 + theta**2 / 6.0, np.sinh(safe) / safe)
        u_pp = cosh + c * sinc * a
        u_mm = cosh - c * sinc * a
        u_pm = c * sinc * 1j * b
        u_mp = u_pm
        rho = np.exp(np.abs(np.real(theta)))
    elif method == "midpoint":
        # I + cM + (cM)^2/2
        half = 0.5 * c * c * (a * a - b * b)
        u_pp = 1 + c * a + half
        u_mm = 1 - c * a + half
        u_pm = c * 1j * b
        u_mp = u_pm
        lam = principal_sqrt(a * a - b * b)
        rho = np.maximum(np.abs(1 + c * lam + 0.5 * (c * lam) ** 2), np.abs(1 - c * lam + 0.5 * (c * lam) ** 2))
    else:
        raise DomainError(f"unknown method {method!r}; expected 'exact' or 'midpoint'")
    return (u_pp, u_pm, u_mp, u_mm), float(np.max(rho))


def apply_coupled_sc_step(
    field,
    dx: float,
    potential: float = 0.0,
    constants: PhysicalConstants | None = None,
    variant: str = "kinetic-split",
    method: str = "exact",
    max_amplification: float = 10.0,
):
    """Advance a :class:`~stsqm.sts.SpinorField` from ``x`` to ``x + dx``.

    ``potential`` is the constant slab value.  The square roots act as
    spectral multipliers over (energy, transverse momenta).  Raises
    :class:`StepSizeError` when some grid mode would grow by more than
    ``max_amplification``.
    """
    from .sts import SpinorField

    constants = constants or field.constants
    hb = constants.hbar
    (u_pp, u_pm, u_mp, u_mm), rho = coupled_step_propagator(
        field.t_grid, field.transverse, dx, potential, constants, variant, method
    )
    if rho > max_amplification:
        raise StepSizeError(
            f"step dx={dx:g} amplifies some mode by {rho:.6g} > {max_amplification:g}; reduce dx",
            rho, max_amplification,
        )
    P = _to_modes(field.plus, field.t_grid, field.transverse, hb)
    Q = _to_modes(field.minus, field.t_grid, field.transverse, hb)
    new_p = _from_modes(u_pp * P + u_pm * Q, field.t_grid, field.transverse, hb)
    new_m = _from_modes(u_mp * P + u_mm * Q, field.t_grid, field.transverse, hb)
    meta = dict(field.metadata)
    meta["last_step"] = {"dx": dx, "potential": potential, "variant": variant,
                         "method": method, "spectral_radius": rho}
    return SpinorField(new_p, new_m, field.x + dx, field.t_grid, tuple(field.transverse), constants, meta)


def apply_px_sigma_z(
    plus: np.ndarray, minus: np.ndarray, t_grid: UniformGrid1D,
    transverse: Sequence[UniformGrid1D], constants: PhysicalConstants = PhysicalConstants(),
    potential: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Act with ``sigma_z sqrt(2m(h - V) - p_perp^2)`` on a spinor slice."""
    hb, m = constants.hbar, constants.mass
    eps, pp = _mode_grids(t_grid, transverse, hb)
    lam = principal_sqrt(2 * m * (eps - potential) - pp)
    P = _to_modes(plus, t_grid, transverse, hb)
    Q = _to_modes(minus, t_grid, transverse, hb)
    return (_from_modes(lam * P, t_grid, transverse, hb),
            _from_modes(-lam * Q, t_grid, transverse, hb))


def dispersion_residual(mode: ModeCoordinates, constants: PhysicalConstants = PhysicalConstants(),
                        variant: str = "dirac") -> float:
    """Relative deviation of ``matrix^2`` from ``(2m eps - 2m V - |p_perp|^2) I``."""
    M = dirac_split_matrix(mode, constants, variant)
    m = constants.mass
    target = 2 * m * mode.energy - 2 * m * mode.potential_value - mode.p_perp_sq
    scale = max(abs(2 * m * mode.energy), abs(2 * m * mode.potential_value) + mode.p_perp_sq, 1e-300)
    return float(np.max(np.abs(M @ M - target * IDENTITY)) / scale)


def random_modes(count: int, rng: np.random.Generator, energy_range=(-5.0, 20.0),
                 p_range=(-4.0, 4.0), v_range=(-3.0, 8.0), n_perp: int = 2) -> list[ModeCoordinates]:
    """Randomized modes covering allowed and forbidden regions."""
    e = rng.uniform(*energy_range, count)
    v = rng.uniform(*v_range, count)
    p = rng.uniform(*p_range, (count, n_perp))
    return [ModeCoordinates(float(e[i]), tuple(float(x) for x in p[i]), float(v[i])) for i in range(count)]


def plane_wave_wavenumber(energy: float, potential: float, constants: PhysicalConstants = PhysicalConstants()) -> complex:
    return complex(principal_sqrt(2 * constants.mass * (energy - potential))) / constants.hbar


__all__ = [
    "IDENTITY", "SIGMA_X", "SIGMA_Y", "SIGMA_Z", "DIRAC_VARIANTS", "ModeCoordinates",
    "px_eigenvalue_sigma_z", "dirac_split_matrix", "sigma_z_matrix", "AnticommutationReport",
    "verify_anticommutation", "StationaryProfile", "integrate_stationary_sc",
    "coupled_step_propagator", "apply_coupled_sc_step", "apply_px_sigma_z",
    "dispersion_residual", "random_modes", "plane_wave_wavenumber",
]

