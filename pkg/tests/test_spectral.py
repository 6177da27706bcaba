import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import solve_circulant

from anisoscope.errors import (
    NoRealSolutionError,
    SingularityError,
    SingularModeError,
    ValidationError,
)
from anisoscope.schemes import (
    TABLE1,
    MultiDimPrefactored,
    MultiDimScheme,
    SchemeSpec,
    builtin_catalog,
    five_point_laplacian,
    kumar_stencils,
)
from anisoscope.spectral import (
    EXACT,
    VelocityPolar,
    advection_phase_group,
    anisotropy_polar,
    derivative_symbols,
    e2_phase_group,
    f6_symbol,
    kim3d_dispersion_residual,
    kim3d_frequency,
    koh_alpha_of_mode,
    koh_residual,
    modified_wavenumber,
    multidim_prefactored_sweeps,
    multidim_prefactored_symbol,
    multidim_symbol,
    prefactored_real_symbol,
    prefactored_symbol,
    resolution_error_area,
    stencil_symbol,
    sun_trueman_dispersion,
    yee3d_dispersion_residual,
)

E2, E4, C4 = TABLE1["E2"], TABLE1["E4"], TABLE1["C4"]
HIXON6 = builtin_catalog()["Hixon6"]


def test_modified_wavenumber_examples():
    assert modified_wavenumber(E2, math.pi / 2) == pytest.approx(1.0, abs=1e-15)
    assert modified_wavenumber(E4, math.pi / 2) == pytest.approx(4 / 3, abs=1e-15)
    assert modified_wavenumber(C4, math.pi / 2) == pytest.approx(1.5, abs=1e-15)


def test_singular_denominator():
    bad = SchemeSpec("bad", (0.5,), (0.75,), 2)  # 1 + cos z vanishes at pi
    with pytest.raises(SingularityError) as info:
        modified_wavenumber(bad, np.array([0.0, math.pi]))
    assert info.value.where == pytest.approx(math.pi)


@settings(max_examples=100)
@given(st.sampled_from(list(TABLE1)), st.floats(-math.pi, math.pi))
def test_symbol_is_odd(label, z):
    s = TABLE1[label]
    assert modified_wavenumber(s, -z) == pytest.approx(-modified_wavenumber(s, z), abs=1e-15)


def _direct_derivative(scheme, u):
    """Apply the scheme to a periodic 1D sample by circulant solve."""
    n = len(u)
    col_b = np.zeros(n)
    for m, am in enumerate(scheme.a, 1):
        # row i of B: am (u[i+m] - u[i-m]); first column holds the i-offset pattern
        col_b[(-m) % n] += float(am)
        col_b[m % n] -= float(am)
    rhs = np.real(np.fft.ifft(np.fft.fft(col_b) * np.fft.fft(u)))
    col_a = np.zeros(n)
    col_a[0] = 1.0
    for m, al in enumerate(scheme.alpha, 1):
        col_a[m] += float(al)
        col_a[-m] += float(al)
    return solve_circulant(col_a, rhs)


@pytest.mark.parametrize("label", list(TABLE1))
def test_dft_oracle_against_circulant_solve(label):
    s = TABLE1[label]
    n = 64
    x = np.arange(n)
    for m in range(1, 32):
        z = 2 * math.pi * m / n
        got = _direct_derivative(s, np.sin(z * x))
        want = modified_wavenumber(s, z) * np.cos(z * x)
        assert np.max(np.abs(got - want)) <= 1e-10 * max(abs(modified_wavenumber(s, z)), 1e-3)


def test_prefactored_sixth_symbol():
    z = np.linspace(-3.0, 3.0, 101)
    kf, kb = prefactored_symbol(HIXON6, z)
    assert np.max(np.abs(np.imag(kf) + np.imag(kb))) < 1e-14
    assert np.max(np.abs(np.real(kf) - np.real(kb))) < 1e-14
    assert np.max(np.abs(prefactored_real_symbol(HIXON6, z) - f6_symbol(z))) < 1e-12
    assert prefactored_real_symbol(HIXON6, math.pi / 2) == pytest.approx(14 / 9, abs=1e-14)
    assert prefactored_symbol(HIXON6, 0.0) == (0j, 0j)


@settings(max_examples=100)
@given(st.sampled_from(["E2", "E4", "E6", "DRP"]), st.floats(-math.pi, math.pi),
       st.floats(-math.pi, math.pi))
def test_multidim_beta_zero_reduces(label, xi, eta):
    md = MultiDimScheme(TABLE1[label], 0.0)
    assert multidim_symbol(md, xi, eta) == pytest.approx(
        modified_wavenumber(TABLE1[label], xi), abs=1e-14)


@settings(max_examples=50)
@given(st.floats(0.0, 4.0), st.floats(-math.pi, math.pi))
def test_multidim_e2_on_axis(beta, xi):
    md = MultiDimScheme(E2, beta)
    assert multidim_symbol(md, xi, 0.0) == pytest.approx(math.sin(xi), abs=1e-14)


@pytest.mark.parametrize("beta", [0.0, 0.5, 1.0, 3.0])
def test_multidim_symbol_matches_plane_wave_eigenvalue(beta):
    md = MultiDimScheme(E4, beta)
    st2 = md.to_stencil()
    n = 32
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    for mx, my in [(1, 0), (3, 5), (8, 8), (11, -4)]:
        xi, eta = 2 * math.pi * mx / n, 2 * math.pi * my / n
        u = np.exp(1j * (xi * i + eta * j))
        eig = (st2.apply(u) / u)[5, 7]
        assert eig == pytest.approx(1j * multidim_symbol(md, xi, eta), abs=1e-13)


def test_multidim_prefactored_sweeps_conjugate():
    md = MultiDimPrefactored(HIXON6, 0.7)
    xi = np.linspace(-3, 3, 41)[:, None]
    eta = np.linspace(-3, 3, 41)[None, :]
    fwd, bwd = multidim_prefactored_sweeps(md, xi, eta)
    assert np.max(np.abs(np.imag(fwd) + np.imag(bwd))) < 1e-13
    assert np.max(np.abs(np.real(fwd) - np.real(bwd))) < 1e-13
    # on the grid line the recursive sweeps and the averaged formula coincide
    on_axis, _ = multidim_prefactored_sweeps(md, xi[:, 0], 0.0)
    assert np.max(np.abs(np.real(on_axis) - multidim_prefactored_symbol(md, xi[:, 0], 0.0))) < 1e-13
    flat = multidim_prefactored_symbol(MultiDimPrefactored(HIXON6, 0.0), xi, eta)
    assert np.max(np.abs(flat - f6_symbol(xi))) < 1e-12


def test_stencil_symbol_examples():
    assert stencil_symbol(five_point_laplacian(), math.pi, 0.0) == pytest.approx(-4.0)
    assert stencil_symbol(five_point_laplacian(), math.pi, 0.0, h=0.5) == pytest.approx(-16.0)
    dx = kumar_stencils()[0]
    for xi in (0.3, 1.1, 2.9):
        assert stencil_symbol(dx, xi, 0.0) == pytest.approx(1j * math.sin(xi), abs=1e-15)
    assert abs(stencil_symbol(dx, 0.0, 0.0)) < 1e-15


def test_e2_reference_velocities():
    c, g = advection_phase_group(E2, math.pi / 2, 0.0)
    assert c == pytest.approx(2 / math.pi, abs=1e-12)
    assert g == pytest.approx(0.0, abs=1e-9)
    c45, _ = advection_phase_group(E2, math.pi / 2, math.pi / 4)
    assert c45 == pytest.approx(math.sqrt(2) * math.sin(math.pi / (2 * math.sqrt(2))) / (math.pi / 2),
                                abs=1e-12)


@settings(max_examples=100)
@given(st.floats(0.05, math.pi), st.floats(0.0, 2 * math.pi))
def test_e2_group_velocity_closed_form(kh, angle):
    c, g = advection_phase_group(E2, kh, angle)
    c_ref, g_ref = e2_phase_group(kh, angle)
    assert c == pytest.approx(c_ref, abs=1e-12)
    assert g == pytest.approx(g_ref, abs=1e-6)


@settings(max_examples=30)
@given(st.floats(0.01, 4.0), st.floats(0.0, 2 * math.pi))
def test_exact_operator_is_isotropic(kh, angle):
    c, g = advection_phase_group(EXACT, kh, angle)
    assert c == pytest.approx(1.0, abs=1e-12)
    assert g == pytest.approx(1.0, abs=1e-8)


def test_phase_velocity_rejects_zero_wavenumber():
    with pytest.raises(ValidationError):
        advection_phase_group(E2, 0.0, 0.0)
    with pytest.raises(ValidationError):
        advection_phase_group(E2, 5.0, 0.0)


def test_polar_e2_spread():
    pol = anisotropy_polar(E2, 4.0, 72)
    c0, c45 = pol.phase[0], pol.phase[9]
    assert c0 == pytest.approx(2 / math.pi)
    assert pol.spread == pytest.approx(c45 - c0, abs=1e-12)
    assert anisotropy_polar(EXACT, 4.0, 16).spread == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("label", list(builtin_catalog()))
def test_polar_eightfold_symmetry(label):
    pol = anisotropy_polar(builtin_catalog()[label], 5.0, 32)
    c = pol.phase
    k = np.arange(32)
    assert np.allclose(c, c[(-k) % 32], atol=1e-13)        # alpha -> -alpha
    assert np.allclose(c, c[(16 - k) % 32], atol=1e-13)    # alpha -> pi - alpha
    assert np.allclose(c, c[(8 - k) % 32], atol=1e-13)     # alpha -> pi/2 - alpha


def test_polar_csv_round_trip():
    pol = anisotropy_polar(E4, 4.0, 24)
    back = VelocityPolar.from_csv(pol.to_csv(), 4.0)
    assert np.array_equal(back.phase, pol.phase)
    assert np.array_equal(back.group, pol.group)
    assert back.spread == pol.spread


def test_stencil_provider_matches_scheme():
    dx = MultiDimScheme(E4, 0.0).to_stencil()
    kx, ky = derivative_symbols(dx, 0.4, 1.2)
    assert kx == pytest.approx(modified_wavenumber(E4, 0.4), abs=1e-15)
    assert ky == pytest.approx(modified_wavenumber(E4, 1.2), abs=1e-15)


def test_resolution_ordering():
    area = {k: resolution_error_area(s) for k, s in TABLE1.items()}
    assert area["E2"] > area["E4"] > area["E6"] > area["DRP"]
    assert all(area[k] < area["DRP"] for k in ("C4", "Haras", "Lui", "Lele"))


# {{{ special dispersion relations


def test_sun_trueman_limits():
    bh = 0.7
    assert sun_trueman_dispersion(1.0, bh) == pytest.approx(math.sin(bh / 2))
    assert sun_trueman_dispersion(0.0, bh) == pytest.approx(math.sin(1.5 * bh) / 3)
    assert sun_trueman_dispersion(1.0, bh, "diagonal") == pytest.approx(
        math.sqrt(2) * math.sin(bh / 2))
    with pytest.raises(ValidationError):
        sun_trueman_dispersion(2.0, bh)


def test_sun_trueman_fourth_order_weight():
    # with w = 9/8 the cubic term cancels: error / (bh/2) ~ (bh)^4
    errs = [abs(sun_trueman_dispersion(9 / 8, bh) - bh / 2) / (bh / 2)
            for bh in (0.1, 0.05)]
    assert math.log2(errs[0] / errs[1]) == pytest.approx(4.0, abs=0.05)


def test_sun_trueman_h_scaling():
    assert sun_trueman_dispersion(0.6, 0.9, h=0.25) == pytest.approx(
        4 * sun_trueman_dispersion(0.6, 0.9))


def test_koh_alpha_zero_on_matching_mode():
    xi = eta = 0.4
    cp = 2 * math.sin(xi / 2) ** 2
    courant = 0.5
    omega_k = 2 * math.asin(courant * math.sqrt(cp))
    assert koh_alpha_of_mode(xi, eta, omega_k, courant) == pytest.approx(0.0, abs=1e-14)


def test_koh_alpha_back_substitution():
    xi = eta = math.pi / 4
    omega_k = 0.5 * math.hypot(xi, eta)
    alpha = koh_alpha_of_mode(xi, eta, omega_k, 0.5)
    assert abs(koh_residual(alpha, xi, eta, omega_k, 0.5)) < 1e-12


def test_koh_errors():
    with pytest.raises(SingularModeError):
        koh_alpha_of_mode(0.5, 0.0, 0.2, 0.5)
    with pytest.raises(NoRealSolutionError):
        koh_alpha_of_mode(3.0, 0.1, 0.0, 0.5)


def test_kim_reduces_to_yee():
    rng = np.random.default_rng(3)
    xi, eta, zeta = rng.uniform(-math.pi, math.pi, (3, 1000))
    omega = rng.uniform(0, math.pi, 1000)
    a = kim3d_dispersion_residual(0.0, 0.0, xi, eta, zeta, omega, 0.5)
    b = yee3d_dispersion_residual(xi, eta, zeta, omega, 0.5)
    assert np.max(np.abs(a - b)) <= 1e-14


def test_kim_zero_mode_and_root():
    assert kim3d_dispersion_residual(0.3, 0.2, 0.0, 0.0, 0.0, 0.0, 0.5) == 0.0
    wk = kim3d_frequency(0.1, 0.05, 0.3, 0.5, -0.2, 0.4)
    assert abs(kim3d_dispersion_residual(0.1, 0.05, 0.3, 0.5, -0.2, wk, 0.4)) < 1e-12


# }}}
