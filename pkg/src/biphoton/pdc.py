"""Joint spectral amplitude: pump envelope x phase matching x facet cavity.

Pump envelope convention: the pulse is a transform-limited Gaussian whose
temporal intensity FWHM is ``pulse_duration_fwhm`` (tau). Its spectral
amplitude is exp(-(w+ - wp)^2 / (4 s^2)) with s = sqrt(2 ln 2) / tau, the rms
width of the spectral intensity; the intensity FWHM in w+ is then 4 ln 2 / tau.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    C_MM_PER_PS,
    NM_PER_MM,
    DeviceSpec,
    FrequencyGrid,
    PumpSpec,
    make_grid,
    phase_mismatch,
    translation_omega_minus,
)
from .errors import InvalidArgument, NumericalError
from .parallel import map_blocks
from .pump import PumpProfile, evaluate_profile
from .quadrature import symmetric_panel_rule
from .special import faddeeva

__all__ = [
    "JointAmplitude",
    "PhaseMatchFunction",
    "spectral_width",
    "spectral_envelope",
    "phase_match_quadrature",
    "phase_match_function",
    "phase_match_closed_form",
    "fit_global_scale",
    "fabry_perot_factor",
    "default_grid",
    "assemble_jsa",
]

POINTS_PER_PERIOD = 20


@dataclass(frozen=True, eq=False)
class JointAmplitude:
    grid: FrequencyGrid
    values: np.ndarray  # [signal, idler]
    normalization: bool = True

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        n = self.grid.n_points
        if v.shape != (n, n):
            raise InvalidArgument(f"values must be {n}x{n}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NumericalError("non-finite JSA entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def norm(self) -> float:
        h = self.grid.spacing
        return math.sqrt(float(np.sum(np.abs(self.values) ** 2)) * h * h)

    def normalized(self) -> "JointAmplitude":
        nrm = self.norm()
        if nrm == 0:
            raise NumericalError("cannot normalize an all-zero JSA")
        return JointAmplitude(self.grid, self.values / nrm, True)


@dataclass(frozen=True, eq=False)
class PhaseMatchFunction:
    omega_minus: np.ndarray  # rad/ps
    values: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.omega_minus, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if w.shape != v.shape or w.ndim != 1:
            raise InvalidArgument("omega_minus and values must be matching 1-D arrays")
        if not np.all(np.isfinite(v)):
            raise NumericalError("non-finite phase-matching values")
        object.__setattr__(self, "omega_minus", w)
        object.__setattr__(self, "values", v)


def spectral_width(pump: PumpSpec) -> float:
    """rms width (rad/ps) of the pump spectral intensity, sqrt(2 ln 2) / tau."""
    return math.sqrt(2.0 * math.log(2.0)) / pump.pulse_duration_fwhm


def spectral_envelope(pump: PumpSpec, omega_plus):
    """Real Gaussian pump spectral amplitude, peak 1 at w+ = wp."""
    s = spectral_width(pump)
    d = np.asarray(omega_plus, dtype=float) - pump.omega_p
    out = np.exp(-(d * d) / (4.0 * s * s))
    return float(out) if out.ndim == 0 else out


def _quadrature_rule(profile: PumpProfile, device: DeviceSpec, pump: PumpSpec, max_abs_omega: float):
    half_l = device.length_L / 2.0
    lo, hi = -half_l, half_l
    if profile.is_sampled:
        s_lo, s_hi = profile.support()
        lo, hi = max(lo, s_lo), min(hi, s_hi)
        if lo >= hi:
            return np.empty(0), np.empty(0)
    rate = max_abs_omega / device.group_velocity_vg + abs(phase_mismatch(device, pump))
    if profile.kind == "quadratic_phase":
        rate += math.pi * device.length_L * NM_PER_MM / (pump.wavelength_p * abs(profile.curvature_radius))
    if profile.waist_w is not None:
        rate += 4.0 / profile.waist_w
    rate = max(rate, 2.0 * math.pi / device.length_L)
    order = 8 if profile.is_sampled else 16
    max_panel = order * (2.0 * math.pi / rate) / POINTS_PER_PERIOD
    return symmetric_panel_rule(profile.breakpoints(), lo, hi, max_panel, order)


def phase_match_quadrature(profile: PumpProfile, device: DeviceSpec, pump: PumpSpec, omega_minus):
    """phi_PM(w-) = int_{-L/2}^{L/2} A(z) e^{i(k-k_deg)z} e^{-i w- z / v_g} dz.

    Composite Gauss-Legendre with at least 20 nodes per period of the fastest
    phase term; panel edges sit on profile discontinuities.
    """
    om = np.asarray(omega_minus, dtype=float)
    flat = np.atleast_1d(om).ravel()
    if not np.all(np.isfinite(flat)):
        raise InvalidArgument("omega_minus must be finite")
    max_abs = float(np.max(np.abs(flat))) if flat.size else 0.0
    z, wts = _quadrature_rule(profile, device, pump, max_abs)
    out = np.zeros(flat.shape, dtype=complex)
    if z.size:
        dk = phase_mismatch(device, pump)
        amp = evaluate_profile(profile, z, wavelength_nm=pump.wavelength_p) * wts
        if dk != 0.0:
            amp = amp * np.exp(1j * dk * z)
        zs = z / device.group_velocity_vg
        step = max(1, 2_000_000 // z.size)
        for a in range(0, flat.size, step):
            ph = np.multiply.outer(flat[a:a + step], zs)
            out[a:a + step] = np.sum(amp * (np.cos(ph) - 1j * np.sin(ph)), axis=1)
    if om.ndim == 0:
        return complex(out[0])
    return out.reshape(om.shape)


def phase_match_function(profile: PumpProfile, device: DeviceSpec, pump: PumpSpec, omega_minus) -> PhaseMatchFunction:
    om = np.asarray(omega_minus, dtype=float)
    return PhaseMatchFunction(om, phase_match_quadrature(profile, device, pump, om))


def phase_match_closed_form(waist_w: float, delta_phi: float, device: DeviceSpec, omega_minus):
    """Closed-form phase matching for a Gaussian pump with a phase step, L >> w.

    Returns w [(e^{-i dphi} - 1) fadf(x/2) + 2 exp(-x^2/4)] with x = w- w / v_g.
    This is the integral times (2/sqrt(pi)) e^{-i dphi}: the closed form is
    only defined up to one global complex scale (see fit_global_scale).
    At w- = 0 the bracket is 1 + e^{-i dphi}: 2w for dphi = 0 and 0 for dphi = pi.
    """
    if not waist_w > 0:
        raise InvalidArgument("waist_w must be > 0")
    x = np.asarray(omega_minus, dtype=float) * waist_w / device.group_velocity_vg
    out = waist_w * ((np.exp(-1j * delta_phi) - 1.0) * faddeeva(x / 2.0) + 2.0 * np.exp(-(x * x) / 4.0))
    return complex(out) if np.ndim(out) == 0 else out


def fit_global_scale(model, reference) -> complex:
    """Least-squares complex s minimizing ||s*model - reference||."""
    m = np.asarray(model, dtype=complex).ravel()
    r = np.asarray(reference, dtype=complex).ravel()
    den = np.vdot(m, m)
    if den == 0:
        raise NumericalError("cannot fit a scale to an all-zero model")
    return complex(np.vdot(m, r) / den)


def fabry_perot_factor(device: DeviceSpec, omega, polarization: str):
    """Peak-normalized Airy transmission of the facet cavity.

    T = (1-R)^2 / (1 + R^2 - 2R cos(2 w n_g L / c + delta)); TM (signal) has
    delta = 0, TE (idler) resonances are displaced by birefringent_comb_shift
    in wavelength. Returns ones when the cavity is disabled.
    """
    pol = polarization.upper()
    if pol not in ("TE", "TM"):
        raise InvalidArgument(f"polarization must be TE or TM, got {polarization!r}")
    w = np.asarray(omega, dtype=float)
    if not device.cavity_enabled:
        return np.ones_like(w) if w.ndim else 1.0
    r = device.reflectivity_TE if pol == "TE" else device.reflectivity_TM
    rt = 2.0 * device.group_index_ng * device.length_L / C_MM_PER_PS
    delta = 0.0
    if pol == "TE" and device.birefringent_comb_shift != 0.0:
        shift_mm = device.birefringent_comb_shift / NM_PER_MM
        d_omega = -shift_mm * w * w / (2.0 * math.pi * C_MM_PER_PS)
        delta = -d_omega * rt
    t = (1.0 - r) ** 2 / (1.0 + r * r - 2.0 * r * np.cos(w * rt + delta))
    return float(t) if t.ndim == 0 else t


def default_grid(device: DeviceSpec, pump: PumpSpec, n_points: int = 512, spread: float = 4.0,
                 extra_omega_minus: float = 0.0) -> FrequencyGrid:
    """Exchange-compatible grid centred at wp/2 covering +-spread sigma along
    both w+ and w- (including any angle-induced translation along w-)."""
    sp = spectral_width(pump)
    sk = pump.profile.spatial_bandwidth(pump.wavelength_p, device.length_L)
    sm = device.group_velocity_vg * sk
    x_plus = spread * sp
    x_minus = spread * sm + abs(translation_omega_minus(device, pump)) + abs(extra_omega_minus)
    half = 0.5 * math.hypot(x_plus, x_minus)
    c = pump.omega_p / 2.0
    return make_grid(c, c, half, n_points)


def assemble_jsa(device: DeviceSpec, pump: PumpSpec, grid: Optional[FrequencyGrid] = None,
                 threads: Optional[int] = None, normalize: bool = True) -> JointAmplitude:
    """JSA[s, i] = env(ws + wi) phi_PM(ws - wi) sqrt(T_TM(ws)) sqrt(T_TE(wi)).

    phi_PM is evaluated once per distinct w- (2n - 1 values); rows are filled
    in fixed blocks, so output is independent of the thread count.
    """
    if grid is None:
        grid = default_grid(device, pump)
    n = grid.n_points
    h = grid.spacing
    k = np.arange(-(n - 1), n)
    om_minus = (grid.center_signal - grid.center_idler) + k * h
    om_plus = (grid.center_signal + grid.center_idler) + k * h
    pm = phase_match_quadrature(pump.profile, device, pump, om_minus)
    env = spectral_envelope(pump, om_plus)
    ts = np.sqrt(fabry_perot_factor(device, grid.signal_axis, "TM"))
    ti = np.sqrt(fabry_perot_factor(device, grid.idler_axis, "TE"))
    out = np.empty((n, n), dtype=complex)
    cols = np.arange(n)

    def fill(a, b):
        for s in range(a, b):
            # w+ index: s + i ; w- index: s - i + n - 1
            out[s] = env[s + cols] * pm[s - cols + n - 1] * (ts[s] * ti)

    map_blocks(fill, n, threads)
    jsa = JointAmplitude(grid, out, False)
    return jsa.normalized() if normalize else jsa
