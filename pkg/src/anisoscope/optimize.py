"""
Parameter optimization against anisotropy error functionals.

* isotropy corrector factor ``beta`` of the multidimensional explicit
  schemes, from the integrated mismatch between the grid-line and the
  diagonal branches of the 2D wave-equation dispersion relation;
* compact weight ``alpha`` of the fourth-order finite-volume family, from a
  double integral of the isotropy error over wavenumber and angle;
* closed-form weights of the Sun-Trueman and Koh schemes.

Minimization is a bracketed golden-section search preceded by a coarse scan
of the interval, so a non-unimodal objective cannot trap it in a poor local
minimum. Flat objectives resolve to the left end of the bracket.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import singledispatch
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from anisoscope.errors import (
    DegenerateMeshError,
    NoDataError,
    QuadratureError,
    SingularModeError,
    SingularityError,
    ValidationError,
)
from anisoscope.schemes import SchemeSpec
from anisoscope.spectral import (
    ExactOperator,
    koh_alpha_of_mode,
    koh_axis_frequency,
    modified_wavenumber,
    modified_wavenumber_derivative,
)

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

ICF_BRACKET = (0.0, 4.0)
GS_BRACKET = (0.0, 0.45)
ICF_PANELS = 512
GS_PANELS = (256, 128)
FLAT_SPREAD = 1.0e-14


@dataclass(frozen=True)
class MinimizeResult:
    x: float
    fun: float
    flat: bool = False


def golden_minimize(f: Callable[[float], float], lo: float, hi: float,
                    tol: float = 1e-8, n_scan: int = 64) -> MinimizeResult:
    """Minimize ``f`` on ``[lo, hi]`` to absolute ``tol`` in the argument."""
    xs = np.linspace(lo, hi, n_scan + 1)
    fs = np.array([f(x) for x in xs])
    if not np.all(np.isfinite(fs)):
        raise QuadratureError("objective is not finite on the search interval")
    if fs.max() - fs.min() < FLAT_SPREAD:
        logger.info("objective is flat on [%g, %g]; returning %g", lo, hi, lo)
        return MinimizeResult(float(lo), float(fs[0]), flat=True)

    i = int(np.argmin(fs))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, n_scan)]
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)

    candidates = [(f1, x1), (f2, x2), (float(fs[i]), float(xs[i]))]
    fx, x = min(candidates, key=lambda t: (t[0], t[1]))
    if not math.isfinite(fx):
        raise QuadratureError(f"objective is not finite at {x}")
    return MinimizeResult(float(x), float(fx))


# {{{ isotropy corrector factor


@singledispatch
def _symbol_and_slope(scheme, z):
    raise ValidationError(f"ICF optimization needs an explicit scheme, got {scheme!r}")


@_symbol_and_slope.register
def _(scheme: SchemeSpec, z):
    if scheme.is_compact:
        raise ValidationError("ICF optimization needs an explicit base scheme")
    return modified_wavenumber(scheme, z), modified_wavenumber_derivative(scheme, z)


@_symbol_and_slope.register
def _(scheme: ExactOperator, z):
    z = np.asarray(z, dtype=np.float64)
    return z, np.ones_like(z)


@dataclass(frozen=True)
class IcfObjective:
    """Integrated squared mismatch of the grid-line and diagonal velocities.

    ``kh_max`` is the upper limit of the ``Kh`` integral; ``mode`` selects
    phase (``omega / Kh``) or group (``d omega / d Kh``) velocities.
    """

    scheme: object
    kh_max: float = math.pi / 2
    mode: str = "phase"
    panels: int = ICF_PANELS

    def __post_init__(self) -> None:
        if not 0.0 < self.kh_max <= math.pi:
            raise ValidationError(f"kh_max must lie in (0, pi], got {self.kh_max}")
        if self.mode not in ("phase", "group"):
            raise ValidationError(f"mode must be 'phase' or 'group', got {self.mode!r}")
        if self.panels < 2 or self.panels % 2:
            raise ValidationError("panel count must be even")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.kh_max, self.panels + 1)

    def branches(self, beta, kh=None):
        """Velocity curves ``(v_axis, v_diag)``; ``beta`` broadcasts against ``kh``."""
        kh = self.nodes if kh is None else np.asarray(kh, dtype=np.float64)
        beta = np.asarray(beta, dtype=np.float64)[..., None]
        s = kh / math.sqrt(2.0)
        k1, dk1 = _symbol_and_slope(self.scheme, kh)
        ks, dks = _symbol_and_slope(self.scheme, s)
        k2s, dk2s = _symbol_and_slope(self.scheme, 2.0 * s)
        # diagonal: omega = sqrt(2) |xi*| with xi* = (K(s) + beta/2 K(2s)) / (1 + beta)
        diag = (ks + 0.5 * beta * k2s) / (1.0 + beta)
        if self.mode == "group":
            v1 = np.broadcast_to(dk1, diag.shape)
            v2 = np.where(diag < 0.0, -1.0, 1.0) * (dks + beta * dk2s) / (1.0 + beta)
            return v1, v2
        omega1 = np.abs(k1)
        omega2 = math.sqrt(2.0) * np.abs(diag)
        with np.errstate(invalid="ignore", divide="ignore"):
            v1 = np.where(kh > 0, omega1 / np.where(kh > 0, kh, 1.0), dk1)
            v2 = np.where(kh > 0, omega2 / np.where(kh > 0, kh, 1.0),
                          (dks + beta * dk2s) / (1.0 + beta))
        return np.broadcast_to(v1, v2.shape), v2

    def __call__(self, beta):
        v1, v2 = self.branches(beta)
        out = simpson((v1 - v2) ** 2, x=self.nodes, axis=-1)
        if not np.all(np.isfinite(out)):
            raise QuadratureError(f"non-finite ICF objective at beta={beta}")
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class IcfResult:
    beta: float
    value: float
    value_at_zero: float
    flat: bool = False


def icf_optimize(obj: IcfObjective, bracket=ICF_BRACKET, tol: float = 1e-8) -> IcfResult:
    """Isotropy corrector factor minimizing :class:`IcfObjective`."""
    res = golden_minimize(obj, *bracket, tol=tol)
    return IcfResult(res.x, res.fun, obj(0.0), res.flat)


# }}}


# {{{ compact finite-volume family


def gs_coefficients(alpha_c: float) -> tuple[float, float]:
    """Explicit weights ``(a, b)`` of the fourth-order family for compact weight ``alpha_c``."""
    return 2.0 * (2.0 + alpha_c) / 3.0, (-1.0 + 4.0 * alpha_c) / 3.0


def gs_dispersion(alpha_c: float, w):
    """Imaginary part of the spectral function, ``(a sin w + b sin 2w / 2) / (1 + 2 alpha cos w)``."""
    a, b = gs_coefficients(alpha_c)
    w = np.asarray(w, dtype=np.float64)
    den = 1.0 + 2.0 * alpha_c * np.cos(w)
    if np.any(np.abs(den) < 1e-14):
        where = float(np.atleast_1d(w)[np.argmin(np.abs(np.atleast_1d(den)))])
        raise SingularityError(f"compact denominator vanishes at w={where!r}", where)
    return (a * np.sin(w) + 0.5 * b * np.sin(2.0 * w)) / den


def isotropy_wavenumber(w_d: Callable, w, theta):
    """Scaled isotropy wavenumber ``cos t w_d(w cos t) + sin t w_d(w sin t)``."""
    c, s = np.cos(theta), np.sin(theta)
    return c * w_d(w * c) + s * w_d(w * s)


def gs_isotropy_error(alpha_c: float, w_max: float, panels=GS_PANELS,
                      w_d: Callable | None = None) -> float:
    """Double integral of ``|w_i - w|`` over ``[0, w_max] x [0, pi/2]``."""
    if not 0.0 < w_max <= math.pi:
        raise ValidationError(f"w_max must lie in (0, pi], got {w_max}")
    if abs(2.0 * alpha_c) >= 1.0:
        # 1 + 2 alpha cos w = 0 at w = arccos(-1 / (2 alpha))
        w0 = math.acos(-1.0 / (2.0 * alpha_c))
        if w0 <= w_max:
            raise SingularityError(f"compact denominator vanishes at w={w0!r}", w0)
    if w_d is None:
        def w_d(x):
            return gs_dispersion(alpha_c, x)
    nw, nt = panels
    w = np.linspace(0.0, w_max, nw + 1)[:, None]
    theta = np.linspace(0.0, math.pi / 2.0, nt + 1)[None, :]
    integrand = np.abs(isotropy_wavenumber(w_d, w, theta) - w)
    inner = simpson(integrand, x=theta[0], axis=1)
    out = float(simpson(inner, x=w[:, 0]))
    if not math.isfinite(out):
        raise QuadratureError(f"non-finite isotropy error at alpha={alpha_c}")
    return out


@dataclass(frozen=True)
class GsResult:
    alpha: float
    value: float
    flat: bool = False


def gs_optimize(w_max: float, bracket=GS_BRACKET, tol: float = 1e-8,
                panels=GS_PANELS) -> GsResult:
    res = golden_minimize(lambda al: gs_isotropy_error(al, w_max, panels), *bracket, tol=tol)
    return GsResult(res.x, res.fun, res.flat)


# }}}


# {{{ closed-form weights


def sun_trueman_weight(beta_a_h: float, beta_d_h: float, h: float = 1.0) -> float:
    """Weight making the grid-line and diagonal dispersion branches agree.

    Arguments are the scaled phase constants ``beta_a h`` and ``beta_d h``;
    ``h`` cancels and is accepted only to make that explicit.
    """
    sa1, sa3 = math.sin(beta_a_h / 2.0) / h, math.sin(1.5 * beta_a_h) / (3.0 * h)
    sd1, sd3 = math.sin(beta_d_h / 2.0) / h, math.sin(1.5 * beta_d_h) / (3.0 * h)
    num = math.sqrt(2.0) * sd3 - sa3
    den = (sa1 - sa3) - math.sqrt(2.0) * (sd1 - sd3)
    if abs(den * h) < 1e-14:
        raise DegenerateMeshError(
            f"weight is undefined: denominator {den * h:.3e} at beta h = "
            f"({beta_a_h}, {beta_d_h})")
    return num / den


def koh_mean_alpha(resolution_kh: float, courant: float, n_angles: int = 64,
                   reference: str = "axis") -> float:
    """Mean averaging weight over azimuth at fixed ``Kh``.

    ``reference='axis'`` calibrates every direction to the frequency of the
    grid-aligned mode (an isotropic numerical phase velocity);
    ``reference='exact'`` uses ``omega = c |K|`` instead.
    """
    if n_angles < 16:
        raise ValidationError("need at least 16 azimuth samples")
    theta = (np.arange(n_angles) + 0.5) * (math.pi / 2.0) / n_angles
    if reference == "axis":
        omega_k = float(koh_axis_frequency(resolution_kh, courant))
    elif reference == "exact":
        omega_k = courant * resolution_kh
    else:
        raise ValidationError(f"reference must be 'axis' or 'exact', got {reference!r}")
    values = []
    for t in theta:
        try:
            values.append(koh_alpha_of_mode(resolution_kh * math.cos(t),
                                            resolution_kh * math.sin(t), omega_k, courant))
        except SingularModeError:
            continue
    if not values:
        raise NoDataError("every azimuth sample was singular")
    return float(np.mean(values))


# }}}
