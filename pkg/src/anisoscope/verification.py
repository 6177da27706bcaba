"""
Quick invariant checks behind the ``verify`` command.

Each check returns a :class:`Check` and never raises for a failed
comparison; library errors inside a check are reported as failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from anisoscope.errors import AnisoscopeError
from anisoscope.schemes import (
    PrefactoredScheme,
    TABLE1,
    builtin_catalog,
    five_point_laplacian,
    kumar_stencils,
    leading_error_terms,
    trefethen_laplacian,
    verify_formal_order,
)
from anisoscope.spectral import (
    advection_phase_group,
    anisotropy_polar,
    e2_phase_group,
    f6_symbol,
    kim3d_dispersion_residual,
    koh_alpha_of_mode,
    koh_axis_frequency,
    koh_residual,
    modified_wavenumber,
    prefactored_real_symbol,
    prefactored_symbol,
    resolution_error_area,
    yee3d_dispersion_residual,
)
from anisoscope.stability import leapfrog_md_factor, maccormack_diagonal_bound

#: printed weights, transcribed as text: (alpha_1, alpha_2), (a_1, a_2, a_3)
PRINTED_WEIGHTS = {
    "E2": (("0", "0"), ("1/2", "0", "0")),
    "E4": (("0", "0"), ("2/3", "-1/12", "0")),
    "E6": (("0", "0"), ("3/4", "-3/20", "1/60")),
    "DRP": (("0", "0"), ("0.770882380", "-0.166705904", "0.020843142")),
    "C4": (("1/4", "0"), ("3/4", "0", "0")),
    "Haras": (("0.3534620", "0"), ("1.5669657/2", "0.13995831/4", "0")),
    "Lui": (("0.5381301", "0.0666331"),
            ("1.36757772/2", "0.823428170/4", "0.0185207834/6")),
    "Lele": (("0.5771439", "0.0896406"),
             ("1.3025166/2", "0.99355/4", "0.03750245/6")),
}

#: orders obtained from the weights as printed
MEASURED_ORDERS = {"E2": 2, "E4": 4, "E6": 6, "DRP": 4, "C4": 4,
                   "Haras": 2, "Lui": 6, "Lele": 4}


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _parse_printed(text: str) -> Fraction:
    num, _, den = text.partition("/")
    return Fraction(num) / Fraction(den or 1)


def _padded(values, width):
    return tuple(values) + (0,) * (width - len(values))


def check_table_weights() -> Check:
    bad = []
    for label, (alpha, a) in PRINTED_WEIGHTS.items():
        s = TABLE1[label]
        got = (_padded(s.alpha, 2), _padded(s.a, 3))
        want = (tuple(_parse_printed(x) for x in alpha), tuple(_parse_printed(x) for x in a))
        if any(Fraction(g) != w for gs, ws in zip(got, want) for g, w in zip(gs, ws)):
            bad.append(label)
    return Check("table weights", not bad and len(TABLE1) == 8,
                 "mismatch: " + ",".join(bad) if bad else "8 schemes match exactly")


def check_table_orders() -> Check:
    measured = {label: verify_formal_order(s) for label, s in TABLE1.items()}
    nominal_ok = all(measured[k] >= TABLE1[k].formal_order
                     for k in measured if k not in ("DRP", "Haras"))
    ok = measured == MEASURED_ORDERS and nominal_ok and measured["DRP"] >= 2
    return Check("formal orders", ok, " ".join(f"{k}={v}" for k, v in measured.items()))


def dft_oracle_error(scheme, n: int = 64, modes=range(1, 32)) -> float:
    """Worst relative gap between direct application and the symbol on grid modes."""
    from anisoscope.solver import derivative_operators

    ops = derivative_operators(scheme, n, 1.0)
    j = np.arange(n)
    worst = 0.0
    for m in modes:
        z = 2.0 * math.pi * m / n
        u = np.exp(1j * z * j)[:, None] * np.ones((1, n))
        if isinstance(scheme, PrefactoredScheme):
            kf, kb = prefactored_symbol(scheme, z)
            pairs = [(ops.sweeps[0], kf), (ops.sweeps[2], kb)]
        else:
            pairs = [(ops.dx, modified_wavenumber(scheme, z))]
        for op, k in pairs:
            got = op(u) / u
            worst = max(worst, float(np.max(np.abs(got - 1j * k)) / max(abs(k), 1e-300)))
    return worst


def check_dft_oracle(tol: float = 1e-10) -> Check:
    errs = {label: dft_oracle_error(s) for label, s in builtin_catalog().items()}
    worst = max(errs.values())
    return Check("DFT oracle", worst <= tol, f"worst relative gap {worst:.2e}")


def check_e2_velocities(tol: float = 1e-6) -> Check:
    kh = 2.0 * math.pi / 4.0
    e2 = TABLE1["E2"]
    c0, _ = advection_phase_group(e2, kh, 0.0)
    c45, _ = advection_phase_group(e2, kh, math.pi / 4)
    _, g0 = advection_phase_group(e2, math.pi / 2, 0.0)
    c_closed, g_closed = e2_phase_group(kh, math.pi / 4)
    g45 = advection_phase_group(e2, kh, math.pi / 4)[1]
    ok = (abs(c0 - 2.0 / math.pi) < tol and abs(c45 - c_closed) < tol
          and abs(g0) < tol and abs(g45 - g_closed) < tol)
    return Check("E2 velocities", ok, f"c(0)={c0:.10f} c(pi/4)={c45:.10f} g={g0:.1e}")


def check_prefactored_sixth() -> Check:
    pref = builtin_catalog()["Hixon6"]
    z = np.linspace(0.01, math.pi - 0.01, 100)
    gap = float(np.max(np.abs(prefactored_real_symbol(pref, z) - f6_symbol(z))))
    kf, kb = prefactored_symbol(pref, z)
    cancel = float(np.max(np.abs(np.imag(kf) + np.imag(kb))))
    return Check("prefactored sixth order", gap < 1e-12 and cancel < 1e-14,
                 f"symbol gap {gap:.1e}, imaginary sum {cancel:.1e}")


def check_kumar_terms() -> Check:
    dx, dxx, _, _ = kumar_stencils()
    ok = (leading_error_terms(dx) == {(3, 0): Fraction(1, 6), (1, 2): Fraction(1, 6)}
          and leading_error_terms(dxx) == {(4, 0): Fraction(1, 12), (2, 2): Fraction(1, 12)})
    return Check("Kumar leading terms", ok, "h^2/6 lap(u_x), h^2/12 lap(u_xx)")


def check_laplacian_orders() -> Check:
    from anisoscope.solver import fit_anisotropy_order

    kh = np.geomspace(0.05, 0.5, 12)
    tref = fit_anisotropy_order(trefethen_laplacian(), kh)
    five = fit_anisotropy_order(five_point_laplacian(), kh)
    ok = abs(tref - 4.0) <= 0.2 and abs(five - 2.0) <= 0.2
    return Check("anisotropy orders", ok, f"blend {tref:.4f}, five-point {five:.4f}")


def check_kim_reduction(n: int = 1000, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    xi, eta, zeta = rng.uniform(-math.pi, math.pi, (3, n))
    omega = rng.uniform(0.0, math.pi, n)
    courant = rng.uniform(0.1, 0.55, n)
    gap = float(np.max(np.abs(kim3d_dispersion_residual(0.0, 0.0, xi, eta, zeta, omega, courant)
                              - yee3d_dispersion_residual(xi, eta, zeta, omega, courant))))
    return Check("Kim reduces to Yee", gap <= 1e-14, f"max gap {gap:.1e}")


def check_koh_backsubstitution() -> Check:
    worst = 0.0
    for kh in (2 * math.pi / 40, 2 * math.pi / 20, 2 * math.pi / 10):
        for courant in (0.3, 0.6):
            wk = float(koh_axis_frequency(kh, courant))
            theta = np.linspace(0.05, math.pi / 2 - 0.05, 16)
            xi, eta = kh * np.cos(theta), kh * np.sin(theta)
            alpha = koh_alpha_of_mode(xi, eta, wk, courant)
            worst = max(worst, float(np.max(np.abs(koh_residual(alpha, xi, eta, wk, courant)))))
    return Check("Koh back-substitution", worst < 1e-12, f"max residual {worst:.1e}")


def check_stability_closed_forms() -> Check:
    ok = leapfrog_md_factor(0.0) == 1.0 and leapfrog_md_factor(2.0) == 1.5
    ok &= abs(maccormack_diagonal_bound(0.0) - 1.0 / (2.0 * math.pi) ** 1.5) < 1e-15
    # the bound approaches its limit like 1 - 1.5 beta**(-2/3)
    betas = np.geomspace(1.0, 1e6, 25)
    ratios = np.array([maccormack_diagonal_bound(b) for b in betas]) * math.pi**1.5
    ok &= bool(np.all(np.diff(ratios) > 0.0)) and ratios[-1] < 1.0
    ok &= abs(ratios[-1] - 1.0) < 0.005
    return Check("stability closed forms", ok,
                 f"bound/limit {ratios[12]:.5f} at beta=1e3, {ratios[-1]:.5f} at 1e6")


def check_polar_symmetry() -> Check:
    worst = 0.0
    for label, s in builtin_catalog().items():
        pol = anisotropy_polar(s, 6.0, 72)
        c = pol.phase
        # angles k*5 deg: rotation by 90 deg and reflection about the axis
        for other in (np.roll(c, -18), c[(-np.arange(72)) % 72], c[(18 - np.arange(72)) % 72]):
            worst = max(worst, float(np.max(np.abs(other - c))))
    return Check("8-fold polar symmetry", worst < 1e-12, f"max asymmetry {worst:.1e}")


def check_resolution_ordering() -> Check:
    order = ["E2", "E4", "E6", "DRP"]
    areas = {k: resolution_error_area(TABLE1[k]) for k in TABLE1}
    explicit_ok = all(areas[a] > areas[b] for a, b in zip(order, order[1:]))
    compact_ok = max(areas[k] for k in ("C4", "Haras", "Lui", "Lele")) < areas["DRP"]
    return Check("resolution ordering", explicit_ok and compact_ok,
                 " ".join(f"{k}={v:.4g}" for k, v in areas.items()))


CHECKS: tuple[Callable[[], Check], ...] = (
    check_table_weights,
    check_table_orders,
    check_dft_oracle,
    check_e2_velocities,
    check_prefactored_sixth,
    check_kumar_terms,
    check_laplacian_orders,
    check_kim_reduction,
    check_koh_backsubstitution,
    check_stability_closed_forms,
    check_polar_symmetry,
    check_resolution_ordering,
)


def run_checks() -> list[Check]:
    out = []
    for check in CHECKS:
        try:
            out.append(check())
        except AnisoscopeError as exc:
            out.append(Check(check.__name__.removeprefix("check_"), False,
                             f"{exc.category}: {exc}"))
    return out


def kumar_refinement_ratios(levels=(16, 32, 64, 128)) -> dict[str, list[float]]:
    """Observed error over predicted leading term on refined periodic grids.

    The test field is a sum of two oblique waves on ``[0, 2 pi)**2``; the
    predicted terms are ``h**2/6 lap(u_x)`` and ``h**2/12 lap(u_xx)``.
    """
    dx, dxx, _, _ = kumar_stencils()
    waves = ((1.0, 2.0, 0.0), (2.0, -1.0, 0.7))
    out = {"dx": [], "dxx": []}
    for n in levels:
        h = 2.0 * math.pi / n
        x = h * np.arange(n)
        X, Y = np.meshgrid(x, x, indexing="ij")
        u = sum(np.sin(p * X + q * Y + s) for p, q, s in waves)
        ux = sum(p * np.cos(p * X + q * Y + s) for p, q, s in waves)
        uxx = sum(-p * p * np.sin(p * X + q * Y + s) for p, q, s in waves)
        lap_ux = sum(-(p * p + q * q) * p * np.cos(p * X + q * Y + s) for p, q, s in waves)
        lap_uxx = sum((p * p + q * q) * p * p * np.sin(p * X + q * Y + s) for p, q, s in waves)
        for key, st, exact, pred in (("dx", dx, ux, h * h / 6.0 * lap_ux),
                                     ("dxx", dxx, uxx, h * h / 12.0 * lap_uxx)):
            err = st.apply(u, h) - exact
            out[key].append(float(np.sum(err * pred) / np.sum(pred * pred)))
    return out
