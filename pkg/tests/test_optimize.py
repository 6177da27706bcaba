import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import simpson

from anisoscope.errors import DegenerateMeshError, SingularityError, ValidationError
from anisoscope.optimize import (
    IcfObjective,
    golden_minimize,
    gs_coefficients,
    gs_isotropy_error,
    gs_optimize,
    icf_optimize,
    koh_mean_alpha,
    sun_trueman_weight,
)
from anisoscope.schemes import TABLE1
from anisoscope.spectral import EXACT, advection_phase_group, koh_alpha_of_mode, koh_residual

E2, E4 = TABLE1["E2"], TABLE1["E4"]


def test_golden_on_parabola():
    res = golden_minimize(lambda x: (x - 1.234567) ** 2 + 3.0, 0.0, 4.0)
    assert res.x == pytest.approx(1.234567, abs=1e-7)
    assert not res.flat


def test_golden_picks_global_basin():
    # two wells; the coarse scan must find the deeper right one
    f = lambda x: min((x - 0.5) ** 2 + 0.1, (x - 3.2) ** 2)  # noqa: E731
    assert golden_minimize(f, 0.0, 4.0).x == pytest.approx(3.2, abs=1e-7)


def test_golden_flat_returns_left_end():
    res = golden_minimize(lambda x: 2.0, 0.5, 4.0)
    assert res.flat and res.x == 0.5


def test_icf_exact_operator_is_flat():
    res = icf_optimize(IcfObjective(EXACT))
    assert res.flat and res.beta == 0.0 and res.value < 1e-28


@pytest.mark.parametrize("mode", ["phase", "group"])
def test_icf_objective_panel_convergence(mode):
    coarse = IcfObjective(E4, math.pi / 2, mode, panels=512)
    fine = IcfObjective(E4, math.pi / 2, mode, panels=1024)
    for beta in (0.0, 0.4, 1.5):
        assert abs(fine(beta) - coarse(beta)) <= 1e-6 * fine(beta)


@pytest.mark.parametrize("label", ["E2", "E4", "E6"])
def test_icf_zero_beta_matches_advection_gap(label):
    scheme = TABLE1[label]
    obj = IcfObjective(scheme, math.pi / 2)
    kh = obj.nodes[1:]
    c_axis, _ = advection_phase_group(scheme, kh, 0.0)
    c_diag, _ = advection_phase_group(scheme, kh, math.pi / 4)
    v1, v2 = obj.branches(0.0, kh)
    assert np.allclose(v1, c_axis, rtol=1e-12, atol=0)
    assert np.allclose(v2, c_diag, rtol=1e-12, atol=0)
    # the Kh = 0 node carries no gap, so the integral over nodes agrees too
    gap = simpson(np.concatenate([[0.0], (c_axis - c_diag) ** 2]), x=obj.nodes)
    assert obj(0.0) == pytest.approx(gap, rel=1e-8)


@pytest.mark.parametrize("label,mode", [("E2", "phase"), ("E4", "group")])
def test_icf_minimizer_audit(label, mode):
    obj = IcfObjective(TABLE1[label], math.pi / 2, mode)
    res = icf_optimize(obj)
    audit = obj(np.arange(0.0, 4.0 + 5e-4, 1e-3))
    assert res.value <= audit.min() + 1e-15
    assert res.beta > 0.0 and res.value < res.value_at_zero


def test_icf_validation():
    with pytest.raises(ValidationError):
        IcfObjective(E2, 4.0)
    with pytest.raises(ValidationError):
        IcfObjective(E2, 1.0, "speed")
    with pytest.raises(ValidationError):
        icf_optimize(IcfObjective(TABLE1["C4"]))


# {{{ finite-volume family


def test_gs_coefficients():
    assert gs_coefficients(0.25) == pytest.approx((1.5, 0.0))
    assert gs_coefficients(1 / 3) == pytest.approx((14 / 9, 1 / 9))
    assert gs_coefficients(0.0) == pytest.approx((4 / 3, -1 / 3))


def test_gs_exact_symbol_has_no_error():
    assert gs_isotropy_error(0.3, 2.0, w_d=lambda w: w) == pytest.approx(0.0, abs=1e-14)


def test_gs_panel_convergence():
    a = gs_isotropy_error(0.3, math.pi / 2)
    b = gs_isotropy_error(0.3, math.pi / 2, panels=(512, 256))
    assert abs(a - b) <= 1e-6 * b


def test_gs_singularity():
    with pytest.raises(SingularityError) as info:
        gs_isotropy_error(0.6, math.pi)
    assert info.value.where == pytest.approx(math.acos(-1 / 1.2))


def test_gs_optimum_audit():
    w_max = math.pi / 2
    res = gs_optimize(w_max)
    grid = np.arange(0.0, 0.45 + 5e-4, 1e-3)
    audit = np.array([gs_isotropy_error(a, w_max) for a in grid])
    assert res.value <= audit.min() + 1e-15
    assert res.value <= gs_isotropy_error(0.25, w_max)
    assert res.value < gs_isotropy_error(0.0, w_max)
    assert abs(res.alpha - grid[np.argmin(audit)]) <= 1e-3


def test_gs_small_band_tends_to_sixth_order_weight():
    # 1/3 cancels the fourth-order term of the family
    assert gs_optimize(0.1).alpha == pytest.approx(1 / 3, abs=1e-3)


# }}}


# {{{ closed-form weights


def test_sun_trueman_weight_frozen():
    assert sun_trueman_weight(math.pi / 5, math.pi / 5) == pytest.approx(-6.854101966249691,
                                                                        rel=1e-12)


@settings(max_examples=50)
@given(st.floats(0.2, 2.5), st.floats(0.2, 2.5), st.floats(0.01, 10.0))
def test_sun_trueman_weight_depends_only_on_scaled_arguments(ba, bd, h):
    try:
        ref = sun_trueman_weight(ba, bd)
    except DegenerateMeshError:
        return
    assert sun_trueman_weight(ba, bd, h=h) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("ba,bd", [(math.pi / 5, math.pi / 5), (0.5, 0.45), (1.2, 1.0)])
def test_sun_trueman_weight_balances_branches(ba, bd):
    w = sun_trueman_weight(ba, bd)
    axis = w * math.sin(ba / 2) + (1 - w) * math.sin(1.5 * ba) / 3
    diag = math.sqrt(2) * (w * math.sin(bd / 2) + (1 - w) * math.sin(1.5 * bd) / 3)
    assert axis**2 == pytest.approx(diag**2, abs=1e-12)


def test_sun_trueman_weight_degenerate():
    with pytest.raises(DegenerateMeshError):
        sun_trueman_weight(1e-6, 1e-6)


def test_koh_quadrature_converges():
    kh = 2 * math.pi / 20
    assert abs(koh_mean_alpha(kh, 0.5, 64) - koh_mean_alpha(kh, 0.5, 256)) < 1e-3


def test_koh_insensitive_to_courant():
    kh = 2 * math.pi / 20
    assert abs(koh_mean_alpha(kh, 0.3) - koh_mean_alpha(kh, 0.7)) < 1e-3


def test_koh_samples_back_substitute():
    kh, courant = 2 * math.pi / 10, 0.5
    wk = 2 * math.asin(courant * math.sin(kh / 2))
    theta = (np.arange(64) + 0.5) * (math.pi / 2) / 64
    xi, eta = kh * np.cos(theta), kh * np.sin(theta)
    alpha = koh_alpha_of_mode(xi, eta, wk, courant)
    assert np.max(np.abs(koh_residual(alpha, xi, eta, wk, courant))) < 1e-12


def test_koh_validation():
    with pytest.raises(ValidationError):
        koh_mean_alpha(0.3, 0.5, 8)
    with pytest.raises(ValidationError):
        koh_mean_alpha(0.3, 0.5, reference="other")


# }}}
