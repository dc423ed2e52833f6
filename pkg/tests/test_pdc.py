import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from biphoton.analysis import schmidt_number
from biphoton.core import DeviceSpec, PumpSpec, make_grid, translation_omega_minus
from biphoton.errors import InvalidArgument, NumericalError
from biphoton.pdc import (
    JointAmplitude,
    assemble_jsa,
    default_grid,
    fabry_perot_factor,
    fit_global_scale,
    phase_match_closed_form,
    phase_match_quadrature,
    spectral_envelope,
    spectral_width,
)
from biphoton.pump import PumpProfile

NO_CAVITY = DeviceSpec(cavity_enabled=False)


def test_envelope_peak_and_fwhm():
    p = PumpSpec(pulse_duration_fwhm=6.0)
    assert spectral_envelope(p, p.omega_p) == 1.0
    half = 2.0 * math.log(2.0) / 6.0  # intensity FWHM is 4 ln2 / tau
    assert spectral_envelope(p, p.omega_p + half) ** 2 == pytest.approx(0.5, rel=1e-12)
    assert spectral_width(p) == pytest.approx(math.sqrt(2 * math.log(2)) / 6.0)


@pytest.mark.parametrize("w", [0.1, 0.6, 1.0, 3.0])
def test_gaussian_integral_at_origin(w):
    d = DeviceSpec()
    got = phase_match_quadrature(PumpProfile.gaussian(w), d, PumpSpec(), 0.0)
    want = w * math.sqrt(math.pi) * erf(d.length_L / (2 * w))
    assert abs(got - want) < 1e-6 * want


def test_gaussian_transform_off_origin():
    d, w = DeviceSpec(length_L=20.0), 0.5
    om = np.linspace(-1.0, 1.0, 21)
    got = phase_match_quadrature(PumpProfile.gaussian(w), d, PumpSpec(), om)
    want = w * math.sqrt(math.pi) * np.exp(-(om * w / d.group_velocity_vg) ** 2 / 4)
    np.testing.assert_allclose(got, want, atol=1e-10)


def test_pi_step_is_odd_and_vanishes_at_origin():
    d, p = DeviceSpec(), PumpSpec()
    prof = PumpProfile.phase_step(1.0, math.pi)
    om = np.linspace(-3, 3, 61)
    v = phase_match_quadrature(prof, d, p, om)
    np.testing.assert_allclose(v, -v[::-1], atol=1e-14)
    assert abs(phase_match_quadrature(prof, d, p, 0.0)) < 1e-14


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(-0.5, 0.5))
def test_gaussian_pm_is_even(w, om):
    d, p = DeviceSpec(), PumpSpec()
    a = phase_match_quadrature(PumpProfile.gaussian(w), d, p, np.array([om, -om]))
    assert abs(a[0] - a[1]) <= 1e-13 * max(1.0, abs(a[0]))


def test_closed_form_at_origin():
    d = DeviceSpec()
    assert phase_match_closed_form(0.5, 0.0, d, 0.0) == pytest.approx(1.0)  # 2w
    assert abs(phase_match_closed_form(0.5, math.pi, d, 0.0)) < 1e-15


@pytest.mark.parametrize("dphi", [0.0, math.pi / 4, math.pi / 2, math.pi, 3 * math.pi / 2])
def test_closed_form_matches_quadrature_up_to_scale(dphi):
    w = 0.2  # L >> w so truncation is below 1e-10
    d, p = DeviceSpec(), PumpSpec()
    om = np.linspace(-8.0, 8.0, 401)
    quad = phase_match_quadrature(PumpProfile.phase_step(w, dphi), d, p, om)
    cf = phase_match_closed_form(w, dphi, d, om)
    s = fit_global_scale(cf, quad)
    assert s == pytest.approx(math.sqrt(math.pi) / 2 * np.exp(1j * dphi), abs=1e-9)
    assert np.max(np.abs(s * cf - quad)) < 1e-9


def test_fit_scale_zero_model():
    with pytest.raises(NumericalError):
        fit_global_scale(np.zeros(3), np.ones(3))


def test_fabry_perot_extrema():
    d = DeviceSpec(birefringent_comb_shift=0.0)
    rt = 2 * d.group_index_ng * d.length_L / 0.299792458
    on = 2 * math.pi * 600 / rt
    off = 2 * math.pi * 600.5 / rt
    assert fabry_perot_factor(d, on, "TM") == pytest.approx(1.0)
    r = d.reflectivity_TE
    assert fabry_perot_factor(d, off, "TE") == pytest.approx((1 - r) ** 2 / (1 + r) ** 2)
    assert fabry_perot_factor(d, off, "TE") == pytest.approx(0.335, abs=5e-4)


def test_fabry_perot_comb_shift_moves_te_only():
    d0, d1 = DeviceSpec(birefringent_comb_shift=0.0), DeviceSpec()
    om = np.linspace(1218.0, 1220.0, 50)
    np.testing.assert_array_equal(fabry_perot_factor(d0, om, "TM"), fabry_perot_factor(d1, om, "TM"))
    assert np.max(np.abs(fabry_perot_factor(d0, om, "TE") - fabry_perot_factor(d1, om, "TE"))) > 1e-3


def test_fabry_perot_disabled_and_bad_polarization():
    np.testing.assert_array_equal(fabry_perot_factor(NO_CAVITY, np.ones(4), "TE"), np.ones(4))
    with pytest.raises(InvalidArgument):
        fabry_perot_factor(DeviceSpec(), 1.0, "XY")


def test_balanced_widths_give_separable_state():
    d = DeviceSpec(length_L=40.0, cavity_enabled=False)
    p = PumpSpec(pulse_duration_fwhm=6.0)
    w = d.group_velocity_vg / spectral_width(p)  # sigma_+ == sigma_-
    p = p.with_(profile=PumpProfile.gaussian(w))
    j = assemble_jsa(d, p, default_grid(d, p, 128, spread=6))
    s = np.linalg.svd(j.values, compute_uv=False)
    assert s[1] < 1e-8 * s[0]
    assert schmidt_number(j) == pytest.approx(1.0, abs=1e-6)


def test_exchange_symmetry_of_jsa():
    p = PumpSpec(pulse_duration_fwhm=4.0)
    sym = assemble_jsa(NO_CAVITY, p.with_(profile=PumpProfile.gaussian(1.0)), threads=1)
    np.testing.assert_allclose(sym.values, sym.values.T, atol=1e-14)
    anti = assemble_jsa(NO_CAVITY, p.with_(profile=PumpProfile.phase_step(1.0, math.pi)), threads=1)
    np.testing.assert_allclose(anti.values, -anti.values.T, atol=1e-14)


def test_angle_translates_along_omega_minus():
    d = DeviceSpec()
    prof = PumpProfile.phase_step(1.0, math.pi / 2)
    p0 = PumpSpec(profile=prof)
    p1 = p0.with_(incidence_angle_theta=0.0089)
    shift = translation_omega_minus(d, p1)
    assert shift != 0.0
    om = np.linspace(-2, 2, 41)
    np.testing.assert_allclose(phase_match_quadrature(prof, d, p1, om + shift),
                               phase_match_quadrature(prof, d, p0, om), atol=1e-9)


def test_normalization_and_readonly():
    j = assemble_jsa(DeviceSpec(), PumpSpec(), make_grid(1219.0, 1219.0, 2.0, 64))
    assert j.norm() == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        j.values[0, 0] = 1.0
    raw = assemble_jsa(DeviceSpec(), PumpSpec(), make_grid(1219.0, 1219.0, 2.0, 64), normalize=False)
    assert not raw.normalization


def test_jointamplitude_validation():
    g = make_grid(1.0, 1.0, 1.0, 4)
    with pytest.raises(InvalidArgument):
        JointAmplitude(g, np.zeros((3, 3)))
    with pytest.raises(NumericalError):
        JointAmplitude(g, np.full((4, 4), np.nan))
    with pytest.raises(NumericalError):
        JointAmplitude(g, np.zeros((4, 4))).normalized()


def test_thread_count_does_not_change_output():
    p = PumpSpec(profile=PumpProfile.phase_step(0.8, 1.0))
    a = assemble_jsa(DeviceSpec(), p, threads=1)
    b = assemble_jsa(DeviceSpec(), p, threads=4)
    np.testing.assert_array_equal(a.values, b.values)


def test_default_grid_is_exchange_compatible():
    g = default_grid(DeviceSpec(), PumpSpec())
    assert g.exchange_compatible and g.n_points == 512
