"""Pump spatial profiles along the waveguide and the inverse (anyonic) design.

Profiles are carrier-free: the e^{ikz} factor of the pump is applied by the
phase-matching integral, not here.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import gammainccinv, roots_jacobi

from .core import NM_PER_MM, DeviceSpec, PumpSpec, phase_mismatch
from .errors import DesignInfeasible, FormatError, InvalidArgument
from .quadrature import gauss_legendre_panels

__all__ = [
    "PROFILE_KINDS",
    "PumpProfile",
    "AnyonicTarget",
    "evaluate_profile",
    "import_sampled_profile",
    "read_profile_csv",
    "write_profile_csv",
    "design_anyonic_profile",
    "anyonic_target_values",
]

PROFILE_KINDS = ("gaussian", "phase_step", "quadratic_phase", "sampled", "designed")
_PARAMETRIC = ("gaussian", "phase_step", "quadratic_phase")


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PumpProfile:
    kind: str
    waist_w: Optional[float] = None  # mm
    phase_step_delta_phi: float = 0.0  # rad
    curvature_radius: Optional[float] = None  # mm
    samples: Optional[tuple] = None  # (z, amplitude, phase) arrays
    center_offset: float = 0.0  # mm

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise InvalidArgument(f"unknown profile kind {self.kind!r}")
        if self.kind in _PARAMETRIC:
            if self.waist_w is None or not self.waist_w > 0:
                raise InvalidArgument("waist_w must be > 0 for parametric profiles")
        if self.kind == "quadratic_phase":
            if self.curvature_radius is None or self.curvature_radius == 0 or not math.isfinite(self.curvature_radius):
                raise InvalidArgument("curvature_radius must be finite and non-zero")
        if not math.isfinite(self.center_offset) or not math.isfinite(self.phase_step_delta_phi):
            raise InvalidArgument("center_offset and phase_step_delta_phi must be finite")
        if self.kind in ("sampled", "designed"):
            if self.samples is None:
                raise FormatError("sampled profiles need samples")
            z, amp, ph = (np.asarray(a, dtype=float) for a in self.samples)
            if not (z.ndim == amp.ndim == ph.ndim == 1 and z.size == amp.size == ph.size):
                raise FormatError("samples must be three equal-length 1-D columns")
            if z.size < 2:
                raise FormatError("need at least 2 samples")
            if not np.all(np.isfinite(z)) or not np.all(np.isfinite(amp)) or not np.all(np.isfinite(ph)):
                raise FormatError("samples must be finite")
            if np.any(np.diff(z) <= 0):
                raise FormatError("sample z must be strictly increasing")
            if np.any(amp < 0):
                raise FormatError("sample amplitudes must be non-negative")
            object.__setattr__(self, "samples", (_readonly(z), _readonly(amp), _readonly(ph)))

    # constructors
    @classmethod
    def gaussian(cls, waist_w: float, center_offset: float = 0.0) -> "PumpProfile":
        return cls("gaussian", waist_w=waist_w, center_offset=center_offset)

    @classmethod
    def phase_step(cls, waist_w: float, delta_phi: float, center_offset: float = 0.0) -> "PumpProfile":
        return cls("phase_step", waist_w=waist_w, phase_step_delta_phi=delta_phi, center_offset=center_offset)

    @classmethod
    def quadratic_phase(cls, waist_w: float, curvature_radius: float, center_offset: float = 0.0) -> "PumpProfile":
        return cls("quadratic_phase", waist_w=waist_w, curvature_radius=curvature_radius, center_offset=center_offset)

    @classmethod
    def sampled(cls, z, amplitude, phase, kind: str = "sampled", center_offset: float = 0.0) -> "PumpProfile":
        return cls(kind, samples=(z, amplitude, phase), center_offset=center_offset)

    def with_offset(self, center_offset: float) -> "PumpProfile":
        return PumpProfile(self.kind, self.waist_w, self.phase_step_delta_phi, self.curvature_radius,
                           self.samples, center_offset)

    @property
    def is_sampled(self) -> bool:
        return self.kind in ("sampled", "designed")

    def breakpoints(self) -> np.ndarray:
        """Positions (mm) where the profile or its derivative is discontinuous."""
        if self.kind == "phase_step":
            return np.array([self.center_offset])
        if self.is_sampled:
            return self.samples[0] + self.center_offset
        return np.empty(0)

    def support(self) -> tuple[float, float]:
        if self.is_sampled:
            z = self.samples[0]
            return float(z[0] + self.center_offset), float(z[-1] + self.center_offset)
        return -math.inf, math.inf

    def spatial_bandwidth(self, wavelength_nm: float, length_L: float) -> float:
        """Rough rms spatial frequency (1/mm) of the profile truncated to the device."""
        if self.is_sampled:
            z, amp, ph = self.samples
            zz = np.linspace(z[0], z[-1], 4 * z.size)
            f = evaluate_profile(self, zz + self.center_offset)
            df = np.gradient(f, zz)
            num = np.trapezoid(np.abs(df) ** 2, zz)
            den = np.trapezoid(np.abs(f) ** 2, zz)
            return math.sqrt(num / den) if den > 0 else 1.0 / length_L
        w = self.waist_w
        s2 = 1.0 / w**2 + (math.pi / length_L) ** 2
        if self.kind == "quadratic_phase":
            kappa = math.pi * NM_PER_MM / (wavelength_nm * self.curvature_radius)
            we = min(w, length_L / 2)
            s2 += (kappa * we) ** 2
        return math.sqrt(s2)


def evaluate_profile(profile: PumpProfile, z, wavelength_nm: Optional[float] = None):
    """Carrier-free complex pump amplitude at positions z (mm).

    ``wavelength_nm`` is required for the quadratic-phase kind, whose phase is
    pi z^2 / (lambda_p R_c).
    """
    zarr = np.asarray(z, dtype=float)
    u = zarr - profile.center_offset
    if profile.kind in _PARAMETRIC:
        out = np.exp(-(u * u) / profile.waist_w**2).astype(complex)
        if profile.kind == "phase_step" and profile.phase_step_delta_phi != 0.0:
            out = np.where(u >= 0, out * np.exp(1j * profile.phase_step_delta_phi), out)
        elif profile.kind == "quadratic_phase":
            if wavelength_nm is None:
                raise InvalidArgument("quadratic_phase profiles need the pump wavelength")
            lam_mm = wavelength_nm / NM_PER_MM
            out = out * np.exp(1j * math.pi * u * u / (lam_mm * profile.curvature_radius))
    else:
        zs, amp, ph = profile.samples
        field_ = amp * np.exp(1j * ph)
        # linear interpolation of the complex field; zero outside the samples
        out = np.interp(u, zs, field_.real, left=0.0, right=0.0) + 1j * np.interp(
            u, zs, field_.imag, left=0.0, right=0.0
        )
    if zarr.ndim == 0:
        return complex(out)
    return out


def import_sampled_profile(rows: Iterable[Sequence[float]]) -> PumpProfile:
    """Build a sampled profile from (z_mm, intensity, phase_rad) rows.

    Amplitude is sqrt(intensity), normalized to peak 1. The phase is taken to be
    carrier-free.
    """
    data = np.asarray([tuple(map(float, r)) for r in rows], dtype=float)
    if data.ndim != 2 or data.shape[1] != 3:
        raise FormatError("expected rows of (z, intensity, phase)")
    if data.shape[0] < 2:
        raise FormatError("need at least 2 rows")
    if not np.all(np.isfinite(data)):
        raise FormatError("non-finite value in profile rows")
    z, inten, ph = data.T
    if np.any(np.diff(z) <= 0):
        bad = int(np.argmax(np.diff(z) <= 0)) + 1
        raise FormatError(f"z not strictly increasing at row {bad + 1}")
    if np.any(inten < 0):
        bad = int(np.argmax(inten < 0))
        raise FormatError(f"negative intensity at row {bad + 1}")
    amp = np.sqrt(inten)
    peak = amp.max()
    if peak <= 0:
        raise FormatError("intensity column is all zeros")
    return PumpProfile.sampled(z, amp / peak, ph)


def read_profile_csv(path) -> PumpProfile:
    """Read a z_mm,intensity,phase_rad CSV (header optional)."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not c.strip() for c in rec) or rec[0].lstrip().startswith("#"):
                continue
            try:
                vals = [float(c) for c in rec]
            except ValueError:
                if not rows:  # header line
                    continue
                raise FormatError(f"{path}:{lineno}: non-numeric field") from None
            if len(vals) != 3:
                raise FormatError(f"{path}:{lineno}: expected 3 columns, got {len(vals)}")
            rows.append(vals)
    try:
        return import_sampled_profile(rows)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_profile_csv(profile: PumpProfile, path) -> None:
    """Write a sampled profile in the importer's format (intensity = amplitude^2)."""
    if not profile.is_sampled:
        raise InvalidArgument("only sampled/designed profiles can be written")
    z, amp, ph = profile.samples
    with open(path, "w", newline="") as fh:
        fh.write("z_mm,intensity,phase_rad\n")
        for a, b, c in zip((z + profile.center_offset).tolist(), (amp * amp).tolist(), ph.tolist()):
            fh.write(f"{a!r},{b!r},{c!r}\n")


@dataclass(frozen=True)
class AnyonicTarget:
    exchange_phase_delta_phi: float
    alpha: float
    beta: float  # rad^2/ps^2

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 2.0:
            raise InvalidArgument(f"alpha must lie in [0, 2], got {self.alpha}")
        if not self.beta > 0:
            raise InvalidArgument(f"beta must be > 0, got {self.beta}")
        if not math.isfinite(self.exchange_phase_delta_phi):
            raise InvalidArgument("exchange phase must be finite")


def anyonic_target_values(target: AnyonicTarget, omega_minus) -> np.ndarray:
    """|w|^alpha exp(-w^2/beta), times e^{i dphi} on the w < 0 half-line."""
    w = np.asarray(omega_minus, dtype=float)
    mag = np.abs(w) ** target.alpha * np.exp(-(w * w) / target.beta)
    return np.where(w < 0, np.exp(1j * target.exchange_phase_delta_phi), 1.0) * mag


def _target_half_width(target: AnyonicTarget, tail: float = 1e-6) -> float:
    # energy beyond W: Q(alpha + 1/2, 2 W^2 / beta)
    x = float(gammainccinv(target.alpha + 0.5, tail))
    return math.sqrt(target.beta * x / 2.0)


def _omega_rule(target: AnyonicTarget, half_width: float, rate: float, order: int = 16):
    """Nodes/weights on [-W, W] split at 0; first panel each side Gauss-Jacobi
    so that |w|^alpha is integrated exactly. Returns nodes, weights including |w|^alpha."""
    period = 2.0 * math.pi / max(rate, 1e-12)
    n_pan = max(4, math.ceil(20.0 * half_width / (period * order)) + 1)
    h = half_width / n_pan
    xj, wj = roots_jacobi(order, 0.0, target.alpha)
    first_nodes = h * (1.0 + xj) / 2.0
    first_weights = wj * (h / 2.0) ** (1.0 + target.alpha)  # |w|^alpha already in the weight
    rest_nodes, rest_w = gauss_legendre_panels(np.linspace(h, half_width, n_pan), order)
    rest_w = rest_w * rest_nodes**target.alpha
    pos_n = np.concatenate((first_nodes, rest_nodes))
    pos_w = np.concatenate((first_weights, rest_w))
    nodes = np.concatenate((-pos_n[::-1], pos_n))
    weights = np.concatenate((pos_w[::-1], pos_w))
    return nodes, weights


def design_anyonic_profile(target: AnyonicTarget, device: DeviceSpec, pump: PumpSpec,
                           n_samples: int = 1024, max_outside: float = 0.01) -> PumpProfile:
    """Inverse-Fourier construction of a pump profile whose phase-matching
    function is |w|^alpha exp(-w^2/beta) with exchange phase dphi on w < 0.

    Raises DesignInfeasible when more than ``max_outside`` of the profile's
    energy falls outside the device (|z| > L/2).
    """
    if int(n_samples) != n_samples or n_samples < 2:
        raise InvalidArgument("n_samples must be an integer >= 2")
    vg = device.group_velocity_vg
    half_l = device.length_L / 2.0
    wmax = _target_half_width(target)
    nodes, weights = _omega_rule(target, wmax, rate=half_l / vg)
    # phase factor e^{i dphi} on w < 0 (magnitude handled by the weights)
    spec = np.where(nodes < 0, np.exp(1j * target.exchange_phase_delta_phi), 1.0) * np.exp(-(nodes**2) / target.beta)
    spec_w = spec * weights

    def inverse(z):
        z = np.asarray(z, dtype=float)
        out = np.empty(z.shape, dtype=complex)
        for start in range(0, z.size, 256):
            zz = z[start:start + 256]
            out[start:start + 256] = np.exp(1j * np.outer(zz, nodes) / vg) @ spec_w
        return out / (2.0 * math.pi * vg)

    # Parseval: total profile energy = (1 / (2 pi vg)) * int |phi|^2 dw
    mag2 = np.abs(spec) ** 2 * np.abs(nodes) ** target.alpha  # weights carry one |w|^alpha
    total = float(np.sum(mag2 * weights)) / (2.0 * math.pi * vg)
    zq, wq = gauss_legendre_panels(np.linspace(-half_l, half_l, 33), 16)
    inside = float(np.sum(wq * np.abs(inverse(zq)) ** 2))
    outside = max(0.0, 1.0 - inside / total)
    if outside > max_outside:
        raise DesignInfeasible(
            f"designed profile has {100 * outside:.2f}% of its energy outside the "
            f"{device.length_L} mm device (limit {100 * max_outside:.1f}%)"
        )

    z = np.linspace(-half_l, half_l, int(n_samples))
    a = inverse(z)
    # compensate a non-degenerate pump angle so the forward PM hits the target
    a = a * np.exp(-1j * phase_mismatch(device, pump) * z)
    amp = np.abs(a)
    peak = amp.max()
    if peak <= 0:
        raise DesignInfeasible("designed profile vanishes")
    phase = np.angle(a)
    return PumpProfile.sampled(z, amp / peak, phase, kind="designed")
