"""
Periodic 2D advection and wave-equation solvers used to measure wave speeds
and growth rates.

The field is stored with axis 0 along ``x`` (index ``i``) and axis 1 along
``y`` (index ``j``). Explicit stencils are applied with :func:`numpy.roll` in
a fixed entry order, so runs are bit-reproducible and exactly equivariant
under grid translations. Compact operators are applied as dense periodic
matrices obtained by solving the implicit system once.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Callable, Optional, Sequence, Union

import numpy as np

from anisoscope.errors import DivergenceError, ValidationError
from anisoscope.schemes import (
    MultiDimScheme,
    PrefactoredScheme,
    SchemeSpec,
    Stencil2D,
)
from anisoscope.spectral import ExactOperator, advection_phase_group, stencil_symbol

logger = logging.getLogger(__name__)

MARCHERS = ("leapfrog", "rk4", "maccormack")
MIN_MEASURE_STEPS = 200
MIN_GROWTH_STEPS = 500
GROWTH_WINDOW = 100


@dataclass(frozen=True)
class SimulationConfig:
    """Setup of one periodic advection run.

    ``angle`` is the advection direction in radians; ``record_stride = 0``
    keeps only the initial and final fields.
    """

    scheme: object
    marcher: str = "rk4"
    n: int = 64
    h: float = 1.0
    k: float = 0.1
    c: float = 1.0
    angle: float = 0.0
    steps: int = 100
    record_stride: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.marcher not in MARCHERS:
            raise ValidationError(f"marcher must be one of {MARCHERS}, got {self.marcher!r}")
        if self.n < 16 or self.n % 2:
            raise ValidationError(f"n must be even and >= 16, got {self.n}")
        if not (self.h > 0.0 and self.k > 0.0):
            raise ValidationError("grid step and time step must be positive")
        if self.c < 0.0:
            raise ValidationError("velocity magnitude must be non-negative")
        if self.steps < 1:
            raise ValidationError("need at least one step")
        if self.record_stride < 0:
            raise ValidationError("record stride must be >= 0")
        radius = _stencil_radius(self.scheme)
        if 2 * radius >= self.n:
            raise ValidationError(f"stencil radius {radius} too wide for n={self.n}")

    @property
    def sigma(self) -> float:
        """Courant number ``c k / h``."""
        return self.c * self.k / self.h

    def replace(self, **changes) -> "SimulationConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class FieldHistory:
    record_stride: int
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    def append(self, t: float, u: np.ndarray) -> None:
        if self.times and t <= self.times[-1]:
            raise ValidationError("snapshot times must increase")
        if self.snapshots and u.shape != self.snapshots[0].shape:
            raise ValidationError("snapshot shape changed")
        self.times.append(float(t))
        self.snapshots.append(np.array(u, copy=True))

    @property
    def initial(self) -> np.ndarray:
        return self.snapshots[0]

    @property
    def final(self) -> np.ndarray:
        return self.snapshots[-1]


# {{{ initial conditions


@dataclass(frozen=True)
class PlaneWave:
    """``cos`` plane wave snapped to the nearest exactly periodic grid mode."""

    kh: float
    angle: float = 0.0
    amplitude: float = 1.0

    def mode(self, n: int) -> tuple[int, int]:
        scale = n * self.kh / (2.0 * math.pi)
        mx = int(round(scale * math.cos(self.angle)))
        my = int(round(scale * math.sin(self.angle)))
        if mx == 0 and my == 0:
            raise ValidationError("plane wave is not resolvable on this grid")
        return mx, my

    def snapped(self, n: int) -> tuple[int, int, float, float]:
        """``(mx, my, kh, angle)`` of the mode actually used."""
        mx, my = self.mode(n)
        return mx, my, 2.0 * math.pi * math.hypot(mx, my) / n, math.atan2(my, mx)

    def __call__(self, n: int, h: float = 1.0) -> np.ndarray:
        mx, my = self.mode(n)
        i = np.arange(n)[:, None]
        j = np.arange(n)[None, :]
        return self.amplitude * np.cos(2.0 * math.pi * (mx * i + my * j) / n)


@dataclass(frozen=True)
class GaussianPulse:
    """Gaussian of the given width (in units of ``h``) centred on the grid."""

    width: float = 4.0

    def __call__(self, n: int, h: float = 1.0) -> np.ndarray:
        x = np.arange(n) - n / 2
        r2 = x[:, None] ** 2 + x[None, :] ** 2
        return np.exp(-r2 / self.width**2)


def random_field(n: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((n, n))


# }}}


# {{{ spatial operators


def _periodic_matrix(weights: dict, n: int) -> np.ndarray:
    mat = np.zeros((n, n))
    rows = np.arange(n)
    for offset, w in sorted(weights.items()):
        mat[rows, (rows + offset) % n] += float(w)
    return mat


@dataclass(frozen=True)
class _Operators:
    dx: Callable[[np.ndarray], np.ndarray]
    dy: Callable[[np.ndarray], np.ndarray]
    sweeps: Optional[tuple] = None  # (dx_f, dy_f, dx_b, dy_b)


def _stencil_ops(st: Stencil2D, h: float) -> _Operators:
    tr = st.transpose()
    return _Operators(lambda u: st.apply(u, h), lambda u: tr.apply(u, h))


def _matrix_ops(mat: np.ndarray) -> tuple[Callable, Callable]:
    return (lambda u: mat @ u), (lambda u: u @ mat.T)


@singledispatch
def derivative_operators(scheme, n: int, h: float) -> _Operators:
    raise ValidationError(f"solver does not support {type(scheme).__name__}")


@derivative_operators.register
def _(scheme: ExactOperator, n: int, h: float) -> _Operators:
    k = 2.0 * math.pi * np.fft.fftfreq(n) / h
    k[n // 2] = 0.0  # Nyquist derivative of a real field

    def dx(u):
        return np.real(np.fft.ifft(1j * k[:, None] * np.fft.fft(u, axis=0), axis=0))

    def dy(u):
        return np.real(np.fft.ifft(1j * k[None, :] * np.fft.fft(u, axis=1), axis=1))

    return _Operators(dx, dy)


@derivative_operators.register
def _(scheme: SchemeSpec, n: int, h: float) -> _Operators:
    if not scheme.is_compact:
        entries = []
        for m, am in enumerate(scheme.a, start=1):
            entries += [(m, 0, am), (-m, 0, -am)]
        return _stencil_ops(Stencil2D(tuple(entries), "dx"), h)
    lhs = {0: 1.0}
    for m, al in enumerate(scheme.alpha, start=1):
        lhs[m] = lhs[-m] = float(al)
    rhs = {}
    for m, am in enumerate(scheme.a, start=1):
        rhs[m], rhs[-m] = float(am), -float(am)
    mat = np.linalg.solve(_periodic_matrix(lhs, n), _periodic_matrix(rhs, n)) / h
    return _Operators(*_matrix_ops(mat))


@derivative_operators.register
def _(scheme: PrefactoredScheme, n: int, h: float) -> _Operators:
    mats = []
    for lhs, rhs in (scheme.forward_weights(), scheme.backward_weights()):
        mats.append(np.linalg.solve(_periodic_matrix(lhs, n), _periodic_matrix(rhs, n)) / h)
    fwd, bwd = mats
    avg = 0.5 * (fwd + bwd)
    return _Operators(*_matrix_ops(avg), sweeps=(*_matrix_ops(fwd), *_matrix_ops(bwd)))


@derivative_operators.register
def _(scheme: MultiDimScheme, n: int, h: float) -> _Operators:
    return _stencil_ops(scheme.to_stencil(), h)


@derivative_operators.register
def _(scheme: Stencil2D, n: int, h: float) -> _Operators:
    if scheme.kind != "dx":
        raise ValidationError("advection needs a first-derivative (dx) stencil")
    return _stencil_ops(scheme, h)


def _stencil_radius(scheme) -> int:
    if isinstance(scheme, SchemeSpec):
        return scheme.half_width
    if isinstance(scheme, MultiDimScheme):
        return len(scheme.base.a)
    if isinstance(scheme, Stencil2D):
        if scheme.kind != "dx":
            raise ValidationError("advection needs a first-derivative (dx) stencil")
        return scheme.radius
    if isinstance(scheme, PrefactoredScheme):
        return 1
    if isinstance(scheme, ExactOperator):
        return 0
    raise ValidationError(f"solver does not support {type(scheme).__name__}")


def advection_operator(config: SimulationConfig):
    """Right-hand side ``-c (cos a d/dx + sin a d/dy) u`` (and sweep variants)."""
    ops = derivative_operators(config.scheme, config.n, config.h)
    cx = config.c * math.cos(config.angle)
    cy = config.c * math.sin(config.angle)

    def rhs(dx, dy):
        return lambda u: -(cx * dx(u) + cy * dy(u))

    central = rhs(ops.dx, ops.dy)
    if ops.sweeps is None:
        return central, central, central
    dxf, dyf, dxb, dyb = ops.sweeps
    return central, rhs(dxf, dyf), rhs(dxb, dyb)


def operator_eigenvalues(op: Callable, n: int) -> np.ndarray:
    """Eigenvalues of a periodic shift-invariant operator, on the ``fft2`` grid."""
    delta = np.zeros((n, n))
    delta[0, 0] = 1.0
    return np.fft.fft2(op(delta))


# }}}


# {{{ time integration


def _integrate(config: SimulationConfig, u0: np.ndarray,
               observer: Callable[[int, np.ndarray], None]) -> None:
    central, forward, backward = advection_operator(config)
    k = config.k
    u = np.array(u0, dtype=np.float64, copy=True)
    observer(0, u)

    if config.marcher == "leapfrog":
        # second level from the physical root of g**2 - 2 k lam g - 1 = 0, mode by mode
        lam = k * operator_eigenvalues(central, config.n)
        g = lam + np.sqrt(lam**2 + 1.0 + 0j)
        prev = u
        u = u + np.real(np.fft.ifft2((g - 1.0) * np.fft.fft2(u)))
        _check(u, 1)
        observer(1, u)
        for step in range(2, config.steps + 1):
            prev, u = u, prev + 2.0 * k * central(u)
            _check(u, step)
            observer(step, u)
        return

    for step in range(1, config.steps + 1):
        if config.marcher == "rk4":
            k1 = central(u)
            k2 = central(u + 0.5 * k * k1)
            k3 = central(u + 0.5 * k * k2)
            k4 = central(u + k * k3)
            u = u + (k / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            pred = u + k * forward(u)
            u = 0.5 * (u + pred + k * backward(pred))
        _check(u, step)
        observer(step, u)


def _check(u: np.ndarray, step: int) -> None:
    if not np.isfinite(u).all():
        raise DivergenceError(f"non-finite field at step {step}", step)


def _initial_field(initial, n: int, h: float, seed: int) -> np.ndarray:
    if initial is None:
        return random_field(n, seed)
    if callable(initial):
        return np.asarray(initial(n, h), dtype=np.float64)
    u0 = np.asarray(initial, dtype=np.float64)
    if u0.shape != (n, n):
        raise ValidationError(f"initial field has shape {u0.shape}, expected {(n, n)}")
    return u0


def run_advection2d(config: SimulationConfig,
                    initial: Union[PlaneWave, GaussianPulse, np.ndarray, None] = None,
                    ) -> FieldHistory:
    """Advance the advection equation and record snapshots."""
    from anisoscope.stability import closed_form_sigma_limit, leapfrog_cfl

    if isinstance(config.scheme, SchemeSpec) and config.marcher == "leapfrog":
        limit = closed_form_sigma_limit(leapfrog_cfl(config.scheme), config.angle)
        if config.sigma > limit:
            logger.warning("sigma=%.4g exceeds the leap-frog limit %.4g", config.sigma, limit)

    u0 = _initial_field(initial, config.n, config.h, config.seed)
    hist = FieldHistory(config.record_stride)
    stride = config.record_stride

    def observer(step, u):
        if step == 0 or step == config.steps or (stride and step % stride == 0):
            hist.append(step * config.k, u)

    _integrate(config, u0, observer)
    return hist


def run_wave2d(stencil: Stencil2D, initial, n: int = 64, h: float = 1.0, k: float = 0.5,
               c: float = 1.0, steps: int = 100, record_stride: int = 0) -> FieldHistory:
    """Leap-frog for ``u_tt = c**2 lap(u)`` with the Laplacian ``stencil``.

    The field starts at rest: the second level is ``cos(omega k)`` times the
    first, mode by mode, with the discrete ``omega`` of the stencil.
    """
    if stencil.kind != "laplacian":
        raise ValidationError("the wave equation needs a Laplacian stencil")
    if n < 16 or n % 2:
        raise ValidationError(f"n must be even and >= 16, got {n}")
    if not (h > 0.0 and k > 0.0 and c > 0.0) or steps < 1 or record_stride < 0:
        raise ValidationError("h, k, c must be positive, steps >= 1 and stride >= 0")
    if 2 * stencil.radius >= n:
        raise ValidationError(f"stencil radius {stencil.radius} too wide for n={n}")
    r2 = (c * k) ** 2

    def lap(u):
        return stencil.apply(u, h)

    lam = np.real(operator_eigenvalues(lap, n))
    cos_wk = 1.0 + 0.5 * r2 * lam
    if np.min(cos_wk) < -1.0 - 1e-12:
        logger.warning("c k / h beyond the leap-frog limit of this Laplacian")
    u0 = _initial_field(initial, n, h, 0)
    hist = FieldHistory(record_stride)
    hist.append(0.0, u0)
    prev, u = u0, np.real(np.fft.ifft2(cos_wk * np.fft.fft2(u0)))
    _check(u, 1)
    for step in range(1, steps + 1):
        if step > 1:
            prev, u = u, 2.0 * u - prev + r2 * lap(u)
            _check(u, step)
        if step == steps or (record_stride and step % record_stride == 0):
            hist.append(step * k, u)
    return hist


# }}}


# {{{ measurements


@dataclass(frozen=True)
class AnisotropyRow:
    angle_requested: float
    angle_used: float
    mode: tuple
    kh: float
    empirical: float
    predicted: float

    @property
    def snapped(self) -> bool:
        return abs(self.angle_used - self.angle_requested) > 1e-12


def mode_phase_speed(config: SimulationConfig, wave: PlaneWave) -> tuple[float, float, tuple]:
    """Run one plane wave and fit its phase against time.

    Returns ``(c_n / c, Kh, (mx, my))``.
    """
    n = config.n
    mx, my, kh, _ = wave.snapped(n)
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    kernel = np.exp(-2j * math.pi * (mx * i + my * j) / n)
    coef = np.empty(config.steps + 1, dtype=np.complex128)

    def observer(step, u):
        coef[step] = np.sum(kernel * u)

    _integrate(config, wave(n, config.h), observer)
    phase = np.unwrap(np.angle(coef))
    t = config.k * np.arange(config.steps + 1)
    slope = np.polyfit(t, phase, 1)[0]
    if config.c == 0.0:
        return 0.0, kh, (mx, my)
    return -slope * config.h / (config.c * kh), kh, (mx, my)


def measure_anisotropy(template: SimulationConfig, ppw: float,
                       angles: Sequence[float]) -> list[AnisotropyRow]:
    """Empirical vs predicted phase speed for plane waves at ``Kh = 2 pi / ppw``."""
    if ppw < 2.5:
        raise ValidationError(f"ppw must be >= 2.5, got {ppw}")
    steps = max(template.steps, MIN_MEASURE_STEPS)
    rows = []
    for angle in angles:
        wave = PlaneWave(2.0 * math.pi / ppw, angle)
        mx, my, kh, used = wave.snapped(template.n)
        if abs(used - angle) > 1e-12:
            logger.info("angle %.6g snapped to %.6g (mode %d, %d)", angle, used, mx, my)
        cfg = template.replace(angle=used, steps=steps)
        emp, kh, mode = mode_phase_speed(cfg, PlaneWave(kh, used))
        pred, _ = advection_phase_group(template.scheme, kh, used)
        rows.append(AnisotropyRow(float(angle), used, mode, kh, emp, float(pred)))
    return rows


def anisotropy_spread(rows: Sequence[AnisotropyRow], which: str = "empirical") -> float:
    values = [getattr(r, which) for r in rows]
    return max(values) - min(values)


def laplacian_anisotropy(stencil: Stencil2D, kh):
    """``|S(axis) - S(diagonal)| / Kh**2`` for a Laplacian stencil at magnitude ``Kh``."""
    if stencil.kind != "laplacian":
        raise ValidationError("anisotropy order fit needs a Laplacian stencil")
    kh = np.asarray(kh, dtype=np.float64)
    d = kh / math.sqrt(2.0)
    axis = np.real(stencil_symbol(stencil, kh, 0.0 * kh))
    diag = np.real(stencil_symbol(stencil, d, d))
    return np.abs(axis - diag) / kh**2


def fit_anisotropy_order(stencil: Stencil2D, kh_values: Sequence[float]) -> float:
    """Log-log slope of the relative axis/diagonal discrepancy against ``Kh``."""
    kh = np.asarray(kh_values, dtype=np.float64)
    if np.any(kh <= 0.0) or np.any(kh >= 1.0):
        raise ValidationError("Kh values must lie in (0, 1)")
    if kh.max() / kh.min() < 10.0 * (1 - 1e-12):
        raise ValidationError("Kh values must span at least one decade")
    disc = laplacian_anisotropy(stencil, kh)
    keep = disc > 1e-15
    if not np.any(keep):
        logger.info("stencil is isotropic to machine precision")
        return math.inf
    if keep.sum() < 2:
        raise ValidationError("too few resolvable discrepancies to fit a slope")
    return float(np.polyfit(np.log(kh[keep]), np.log(disc[keep]), 1)[0])


def growth_rate(config: SimulationConfig, initial=None) -> float:
    """Mean per-step amplification of the discrete L2 norm over the last 100 steps."""
    if config.steps < MIN_GROWTH_STEPS:
        raise ValidationError(f"growth rate needs at least {MIN_GROWTH_STEPS} steps")
    norms = np.empty(config.steps + 1)

    def observer(step, u):
        norms[step] = math.sqrt(float(np.sum(u * u)))

    try:
        # overflow on the way to divergence is an expected outcome here
        with np.errstate(over="ignore", invalid="ignore"):
            _integrate(config, _initial_field(initial, config.n, config.h, config.seed), observer)
    except DivergenceError as exc:
        logger.info("diverged at step %s", exc.step)
        return math.inf
    start, end = norms[config.steps - GROWTH_WINDOW], norms[config.steps]
    if not math.isfinite(end):
        return math.inf
    if start == 0.0:
        return 1.0 if end == 0.0 else math.inf
    return (end / start) ** (1.0 / GROWTH_WINDOW)


# }}}
