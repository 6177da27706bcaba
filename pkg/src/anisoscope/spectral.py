r"""
Modified wavenumbers, dispersion symbols and direction-dependent velocities.

All wavenumbers are scaled by the grid step: ``z = xi h``. A first-derivative
operator acting on :math:`e^{i z j}` returns :math:`i K(z) / h` times the
mode, and :math:`K(z)` is what every ``*_symbol`` function here reports
(real part only for the non-dissipative centered schemes).

For 2D advection :math:`u_t + c(\cos\alpha\,\partial_x + \sin\alpha\,\partial_y) u = 0`
the semi-discrete frequency of the mode with wavevector
:math:`Kh(\cos\alpha, \sin\alpha)` is

.. math::

    \frac{\omega h}{c} = \cos\alpha\, K_x(\xi h, \eta h) + \sin\alpha\, K_y(\xi h, \eta h).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import singledispatch
from typing import Sequence

import numpy as np

from anisoscope.errors import (
    NoRealSolutionError,
    SingularityError,
    SingularModeError,
    ValidationError,
)
from anisoscope.schemes import (
    MultiDimPrefactored,
    MultiDimScheme,
    PrefactoredScheme,
    SchemeSpec,
    Stencil2D,
)

#: relative step of the central difference used for group velocities
GROUP_VELOCITY_STEP = 1.0e-6


class ExactOperator:
    """Spectral (exact) differentiation; ``K(z) = z``."""

    label = "exact"

    def __repr__(self) -> str:
        return "EXACT"


EXACT = ExactOperator()


# {{{ 1D symbols


def _denominator(scheme: SchemeSpec, z: np.ndarray) -> np.ndarray:
    den = np.ones_like(z)
    for n, al in enumerate(scheme.alpha_array, start=1):
        den = den + 2.0 * al * np.cos(n * z)
    return den


def modified_wavenumber(scheme: SchemeSpec, z):
    """``sum 2 a_n sin(n z) / (1 + sum 2 alpha_n cos(n z))``."""
    z_arr = np.asarray(z, dtype=np.float64)
    num = np.zeros_like(z_arr)
    for n, an in enumerate(scheme.a_array, start=1):
        num = num + 2.0 * an * np.sin(n * z_arr)
    den = _denominator(scheme, z_arr)
    bad = np.abs(den) < 1e-14
    if np.any(bad):
        where = float(np.atleast_1d(z_arr)[np.atleast_1d(bad)][0])
        raise SingularityError(
            f"compact denominator of {scheme.label!r} vanishes at z={where!r}", where)
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


def modified_wavenumber_derivative(scheme: SchemeSpec, z):
    """Analytic ``dK/dz`` (quotient rule)."""
    z_arr = np.asarray(z, dtype=np.float64)
    num = np.zeros_like(z_arr)
    dnum = np.zeros_like(z_arr)
    for n, an in enumerate(scheme.a_array, start=1):
        num = num + 2.0 * an * np.sin(n * z_arr)
        dnum = dnum + 2.0 * an * n * np.cos(n * z_arr)
    den = _denominator(scheme, z_arr)
    dden = np.zeros_like(z_arr)
    for n, al in enumerate(scheme.alpha_array, start=1):
        dden = dden - 2.0 * al * n * np.sin(n * z_arr)
    out = (dnum * den - num * dden) / den**2
    return float(out) if np.ndim(out) == 0 else out


def prefactored_symbol(pref: PrefactoredScheme, z):
    """Complex modified wavenumbers ``(K_F, K_B)`` of the two sweeps."""
    z_arr = np.asarray(z, dtype=np.float64)
    out = []
    for lhs, rhs in (pref.forward_weights(), pref.backward_weights()):
        num = sum(w * np.exp(1j * k * z_arr) for k, w in rhs.items())
        den = sum(w * np.exp(1j * k * z_arr) for k, w in lhs.items())
        if np.any(np.abs(den) < 1e-14):
            raise SingularityError(f"implicit sweep of {pref.label!r} is singular")
        out.append(-1j * num / den)
    fwd, bwd = out
    if np.ndim(fwd) == 0:
        return complex(fwd), complex(bwd)
    return fwd, bwd


def prefactored_real_symbol(pref: PrefactoredScheme, z):
    """Real part shared by both sweeps (the predictor-corrector average)."""
    fwd, _ = prefactored_symbol(pref, z)
    return np.real(fwd) if np.ndim(fwd) else fwd.real


def f4_symbol(z):
    """Averaged symbol of the fourth-order prefactored scheme, ``3 sin z / (2 + cos z)``."""
    return 3.0 * np.sin(z) / (2.0 + np.cos(z))


def f6_symbol(z):
    """Averaged symbol of the sixth-order prefactored scheme."""
    return (28.0 * np.sin(z) + np.sin(2.0 * z)) / (18.0 + 12.0 * np.cos(z))


# }}}


# {{{ 2D symbols


def multidim_symbol(md: MultiDimScheme, xi_h, eta_h):
    """Modified wavenumber of the isotropy-corrected d/dx."""
    beta = float(md.icf_beta)
    xi = np.asarray(xi_h, dtype=np.float64)
    eta = np.asarray(eta_h, dtype=np.float64)
    total = np.zeros(np.broadcast(xi, eta).shape)
    for n, an in enumerate(md.base.a_array, start=1):
        total = total + an * (
            np.sin(n * xi) + 0.5 * beta * (np.sin(n * (xi + eta)) + np.sin(n * (xi - eta))))
    out = 2.0 * total / (1.0 + beta)
    return float(out) if np.ndim(out) == 0 else out


def multidim_prefactored_symbol(md: MultiDimPrefactored, xi_h, eta_h):
    """Real modified wavenumber of the isotropy-corrected prefactored d/dx.

    ``(f(xi) + beta/2 [f(xi + eta) + f(xi - eta)]) / (1 + beta)`` where ``f``
    is the averaged 1D symbol.
    """
    beta = float(md.icf_beta)
    xi = np.asarray(xi_h, dtype=np.float64)
    eta = np.asarray(eta_h, dtype=np.float64)

    def f(z):
        return prefactored_real_symbol(md.base, z)

    out = (f(xi) + 0.5 * beta * (f(xi + eta) + f(xi - eta))) / (1.0 + beta)
    return float(out) if np.ndim(out) == 0 else out


def multidim_prefactored_sweeps(md: MultiDimPrefactored, xi_h, eta_h):
    """Complex forward/backward symbols of the 2D recursive sweeps.

    The forward sweep reads
    ``u'_ij = alpha/(1+beta) [u'_{i+1,j} + beta/2 (u'_{i+1,j-1} + u'_{i+1,j+1})]
    + [b u_{i+1,j} - e u_ij - f u_{i-1,j} + beta/2 (...)] / (h (1+beta))``.

    Because the implicit side couples neighbouring rows, the real part of
    these symbols equals :func:`multidim_prefactored_symbol` only on the grid
    line (``eta = 0``) or for ``beta = 0``.
    """
    beta = float(md.icf_beta)
    sw = md.base.sweep_form()
    xi = np.asarray(xi_h, dtype=np.float64)
    eta = np.asarray(eta_h, dtype=np.float64)
    rho = (1.0 + beta * np.cos(eta)) / (1.0 + beta)
    ep, em = np.exp(1j * xi), np.exp(-1j * xi)
    fwd = (sw["b"] * rho * ep - sw["e"] - sw["f"] * rho * em) / (1.0 - sw["alpha"] * rho * ep)
    bwd = (sw["e"] + sw["f"] * rho * ep - sw["b"] * rho * em) / (1.0 - sw["alpha"] * rho * em)
    fwd, bwd = -1j * fwd, -1j * bwd
    if np.ndim(fwd) == 0:
        return complex(fwd), complex(bwd)
    return fwd, bwd


def stencil_symbol(st: Stencil2D, xi_h, eta_h, h: float = 1.0):
    """Discrete Fourier symbol ``sum w exp(i (di xi h + dj eta h)) / h**m``."""
    xi = np.asarray(xi_h, dtype=np.float64)
    eta = np.asarray(eta_h, dtype=np.float64)
    total = np.zeros(np.broadcast(xi, eta).shape, dtype=np.complex128)
    for di, dj, w in st.entries:
        total = total + float(w) * np.exp(1j * (di * xi + dj * eta))
    out = total / h**st.derivative_order
    return complex(out) if np.ndim(out) == 0 else out


@singledispatch
def derivative_symbols(scheme, xi_h, eta_h):
    """Real modified wavenumbers ``(K_x, K_y)`` of the d/dx and d/dy operators."""
    raise ValidationError(f"no symbol provider for {type(scheme).__name__}")


@derivative_symbols.register
def _(scheme: ExactOperator, xi_h, eta_h):
    return np.asarray(xi_h, dtype=np.float64), np.asarray(eta_h, dtype=np.float64)


@derivative_symbols.register
def _(scheme: SchemeSpec, xi_h, eta_h):
    return modified_wavenumber(scheme, xi_h), modified_wavenumber(scheme, eta_h)


@derivative_symbols.register
def _(scheme: PrefactoredScheme, xi_h, eta_h):
    return prefactored_real_symbol(scheme, xi_h), prefactored_real_symbol(scheme, eta_h)


@derivative_symbols.register
def _(scheme: MultiDimScheme, xi_h, eta_h):
    return multidim_symbol(scheme, xi_h, eta_h), multidim_symbol(scheme, eta_h, xi_h)


@derivative_symbols.register
def _(scheme: MultiDimPrefactored, xi_h, eta_h):
    return (multidim_prefactored_symbol(scheme, xi_h, eta_h),
            multidim_prefactored_symbol(scheme, eta_h, xi_h))


@derivative_symbols.register
def _(scheme: Stencil2D, xi_h, eta_h):
    if scheme.kind != "dx":
        raise ValidationError("advection needs a first-derivative (dx) stencil")
    return (np.imag(stencil_symbol(scheme, xi_h, eta_h)),
            np.imag(stencil_symbol(scheme, eta_h, xi_h)))


# }}}


# {{{ phase and group velocity


def advection_frequency(scheme, kh, angle):
    """Normalized frequency ``omega h / c`` of the advected plane wave."""
    kh = np.asarray(kh, dtype=np.float64)
    angle = np.asarray(angle, dtype=np.float64)
    ca, sa = np.cos(angle), np.sin(angle)
    kx, ky = derivative_symbols(scheme, kh * ca, kh * sa)
    return ca * kx + sa * ky


def advection_phase_group(scheme, kh, angle, step: float = GROUP_VELOCITY_STEP):
    """Normalized phase and group velocities ``(c_n / c, g_n / c)``.

    The group velocity is a central difference of the frequency in ``Kh``
    with relative step ``step``.
    """
    kh_arr = np.asarray(kh, dtype=np.float64)
    if np.any(kh_arr <= 0.0):
        raise ValidationError("phase velocity is undefined at Kh = 0")
    if np.any(kh_arr > math.pi * math.sqrt(2.0) * (1 + 1e-12)):
        raise ValidationError("Kh beyond the resolvable range (pi sqrt 2)")
    omega = advection_frequency(scheme, kh_arr, angle)
    d = step * kh_arr
    g = (advection_frequency(scheme, kh_arr + d, angle)
         - advection_frequency(scheme, kh_arr - d, angle)) / (2.0 * d)
    c = omega / kh_arr
    if np.ndim(c) == 0:
        return float(c), float(g)
    return c, g


def e2_phase_group(kh, angle):
    """Closed-form velocities of the second-order central scheme."""
    ca, sa = np.cos(angle), np.sin(angle)
    c = (ca * np.sin(kh * ca) + sa * np.sin(kh * sa)) / kh
    g = ca**2 * np.cos(kh * ca) + sa**2 * np.cos(kh * sa)
    return c, g


@dataclass(frozen=True)
class VelocityPolar:
    """Phase and group velocity sampled over propagation angle at fixed PPW."""

    ppw: float
    angles: np.ndarray
    phase: np.ndarray
    group: np.ndarray

    @property
    def kh(self) -> float:
        return 2.0 * math.pi / self.ppw

    @property
    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.angles.tolist(), self.phase.tolist(), self.group.tolist()))

    @property
    def max_deviation(self) -> float:
        """``max |c_n / c - 1|``."""
        return float(np.max(np.abs(self.phase - 1.0)))

    @property
    def spread(self) -> float:
        """``max c_n - min c_n`` over the sampled angles."""
        return float(np.max(self.phase) - np.min(self.phase))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("angle_rad,c_n_over_c,g_n_over_c\n")
        for a, c, g in self.rows:
            buf.write(f"{a:.17g},{c:.17g},{g:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, ppw: float) -> "VelocityPolar":
        rows = [line for line in text.splitlines()
                if line and not line.startswith("#") and not line.startswith("angle_rad")]
        data = np.array([[float(x) for x in line.split(",")] for line in rows])
        return cls(ppw, data[:, 0], data[:, 1], data[:, 2])


def anisotropy_polar(scheme, ppw: float, n_angles: int = 72) -> VelocityPolar:
    """Velocities at ``Kh = 2 pi / ppw`` on ``n_angles`` uniform angles in [0, 2 pi)."""
    if ppw < 2.0:
        raise ValidationError(f"ppw must be >= 2, got {ppw}")
    if n_angles < 8:
        raise ValidationError(f"need at least 8 angles, got {n_angles}")
    angles = 2.0 * math.pi * np.arange(n_angles) / n_angles
    kh = np.full(n_angles, 2.0 * math.pi / ppw)
    c, g = advection_phase_group(scheme, kh, angles)
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(g))):
        raise ValidationError("non-finite velocity in polar table")
    return VelocityPolar(float(ppw), angles, np.asarray(c), np.asarray(g))


def wavenumber_curve_csv(z: Sequence[float], k: Sequence[float]) -> str:
    buf = io.StringIO()
    buf.write("z,k_num\n")
    for zi, ki in zip(z, k):
        buf.write(f"{float(zi):.17g},{float(ki):.17g}\n")
    return buf.getvalue()


def resolution_error_area(scheme, kh_max: float = 2.0, n: int = 2001) -> float:
    """Area between the exact line and the modified wavenumber on [0, kh_max]."""
    from scipy.integrate import simpson

    z = np.linspace(0.0, kh_max, n)
    kx, _ = derivative_symbols(scheme, z, np.zeros_like(z))
    return float(simpson(np.abs(z - kx), x=z))


# }}}


# {{{ special-case dispersion relations


def sun_trueman_dispersion(w: float, beta_h: float, direction: str = "axis",
                           h: float = 1.0) -> float:
    """Spatial factor of the weighted staggered scheme, one branch at a time.

    Returns ``F`` with ``(sin(omega k / 2) / (c k))**2 = F**2``: the grid-line
    branch ``w sin(bh/2)/h + (1-w) sin(3bh/2)/(3h)``, or ``sqrt(2)`` times that
    expression for the diagonal branch.
    """
    if not 0.0 <= w <= 1.5:
        raise ValidationError(f"weight must lie in [0, 1.5], got {w}")
    if not 0.0 < beta_h <= math.pi:
        raise ValidationError(f"beta h must lie in (0, pi], got {beta_h}")
    f = (w * math.sin(beta_h / 2.0) + (1.0 - w) * math.sin(1.5 * beta_h) / 3.0) / h
    if direction == "axis":
        return f
    if direction == "diagonal":
        return math.sqrt(2.0) * f
    raise ValidationError(f"direction must be 'axis' or 'diagonal', got {direction!r}")


def _koh_factors(xi_h, eta_h):
    sx = np.sin(np.asarray(xi_h, dtype=np.float64) / 2.0) ** 2
    sy = np.sin(np.asarray(eta_h, dtype=np.float64) / 2.0) ** 2
    return sx + sy, sx * sy


def koh_residual(alpha, xi_h, eta_h, omega_k, courant):
    """Dispersion residual of the transversely averaged Yee scheme, times ``h**2``."""
    cp, cx = _koh_factors(xi_h, eta_h)
    st = np.sin(np.asarray(omega_k) / 2.0) ** 2 / courant**2
    return cp * cx * (alpha - 2.0 / cp) ** 2 - (4.0 * cx / cp - cp) - st


def koh_alpha_of_mode(xi_h, eta_h, omega_k, courant):
    """Averaging weight that puts the mode ``(xi h, eta h, omega k)`` on the dispersion surface.

    ``courant`` is ``c k / h``. Raises for axis-aligned modes, where the
    weight has no effect, and when the quadratic has no real root.
    """
    cp, cx = _koh_factors(xi_h, eta_h)
    if np.any(cx <= 1e-30 * np.maximum(cp, 1e-300) ** 2):
        raise SingularModeError("axis-aligned mode: transverse averaging has no effect")
    st = np.sin(np.asarray(omega_k, dtype=np.float64) / 2.0) ** 2 / courant**2
    x = cp * (cp - st) / (4.0 * cx)
    if np.any(x > 1.0):
        raise NoRealSolutionError("negative discriminant in the averaging-weight quadratic")
    # 1 - sqrt(1 - x) without cancellation
    out = (2.0 / cp) * x / (1.0 + np.sqrt(1.0 - x))
    return float(out) if np.ndim(out) == 0 else out


def koh_axis_frequency(kh, courant):
    """``omega k`` of the grid-aligned mode (independent of the averaging weight)."""
    arg = courant * np.sin(np.asarray(kh, dtype=np.float64) / 2.0)
    if np.any(np.abs(arg) > 1.0):
        raise NoRealSolutionError("Courant number too large for a real axis frequency")
    return 2.0 * np.arcsin(arg)


def _kim_components(alpha_w, beta_w, xi_h, eta_h, zeta_h):
    s = [np.sin(np.asarray(v, dtype=np.float64) / 2.0) for v in (xi_h, eta_h, zeta_h)]
    sx, sy, sz = s
    p = (sy * sz, sx * sz, sx * sy)
    q = (sy**2 + sz**2, sx**2 + sz**2, sx**2 + sy**2)
    return [s[i] * (alpha_w * (p[i] - q[i]) - 0.5 * beta_w * q[i] + 1.0) for i in range(3)]


def kim3d_dispersion_residual(alpha_w, beta_w, xi_h, eta_h, zeta_h, omega_k, courant):
    """``S_t**2 / c0**2 - (K_x**2 + K_y**2 + K_z**2)`` times ``h**2``.

    ``courant`` is ``c0 k / h``; zero residual marks a numerical mode.
    """
    kx, ky, kz = _kim_components(alpha_w, beta_w, xi_h, eta_h, zeta_h)
    st = np.sin(np.asarray(omega_k, dtype=np.float64) / 2.0) ** 2 / courant**2
    out = st - (kx**2 + ky**2 + kz**2)
    return float(out) if np.ndim(out) == 0 else out


def yee3d_dispersion_residual(xi_h, eta_h, zeta_h, omega_k, courant):
    """Residual of the standard Yee relation, scaled like :func:`kim3d_dispersion_residual`."""
    s2 = sum(np.sin(np.asarray(v, dtype=np.float64) / 2.0) ** 2 for v in (xi_h, eta_h, zeta_h))
    out = np.sin(np.asarray(omega_k, dtype=np.float64) / 2.0) ** 2 / courant**2 - s2
    return float(out) if np.ndim(out) == 0 else out


def kim3d_frequency(alpha_w, beta_w, xi_h, eta_h, zeta_h, courant):
    """Root ``omega k`` in [0, pi] of :func:`kim3d_dispersion_residual`."""
    kx, ky, kz = _kim_components(alpha_w, beta_w, xi_h, eta_h, zeta_h)
    arg = courant * np.sqrt(kx**2 + ky**2 + kz**2)
    if np.any(arg > 1.0):
        raise NoRealSolutionError("mode is beyond the stability limit: no real frequency")
    out = 2.0 * np.arcsin(arg)
    return float(out) if np.ndim(out) == 0 else out


# }}}
