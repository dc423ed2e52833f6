"""Units, frequency grids and the device/pump records.

Internal units: length in mm, time in ps, angular frequency in rad/ps.
Wavelengths cross the API boundary in nm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Optional

import numpy as np

from .errors import InvalidArgument

if TYPE_CHECKING:  # pragma: no cover
    from .pump import PumpProfile

__all__ = [
    "C_MM_PER_PS",
    "NM_PER_MM",
    "wavelength_to_omega",
    "omega_to_wavelength",
    "FrequencyGrid",
    "DeviceSpec",
    "PumpSpec",
    "make_grid",
    "degeneracy_angle",
    "wavelength_offset_to_angle",
    "phase_mismatch",
    "translation_omega_minus",
]

C_MM_PER_PS = 0.299792458
NM_PER_MM = 1.0e6

# Default modal propagation-constant mismatch (1/mm), chosen so that the
# degeneracy angle is 0.5 deg at 773 nm.
DEFAULT_DELTA_BETA = 2.0 * math.pi * NM_PER_MM / 773.0 * math.sin(math.radians(0.5))
# Group velocity fitted by calibrate_group_velocity (K = 1.01 at w = 0.6 mm, 6 ps).
DEFAULT_GROUP_VELOCITY = 0.10206107867115989


def wavelength_to_omega(wavelength_nm):
    """Vacuum wavelength (nm) to angular frequency (rad/ps)."""
    return 2.0 * np.pi * C_MM_PER_PS * NM_PER_MM / np.asarray(wavelength_nm, dtype=float)


def omega_to_wavelength(omega):
    """Angular frequency (rad/ps) to vacuum wavelength (nm)."""
    return 2.0 * np.pi * C_MM_PER_PS * NM_PER_MM / np.asarray(omega, dtype=float)


@dataclass(frozen=True)
class FrequencyGrid:
    center_signal: float
    center_idler: float
    half_span: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise InvalidArgument(f"n_points must be an integer >= 2, got {self.n_points}")
        if not (self.half_span > 0 and math.isfinite(self.half_span)):
            raise InvalidArgument(f"half_span must be positive, got {self.half_span}")
        for name in ("center_signal", "center_idler"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgument(f"{name} must be finite")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_span / (self.n_points - 1)

    @property
    def offsets(self) -> np.ndarray:
        """Axis offsets from the center, exactly antisymmetric."""
        n = self.n_points
        k = np.arange(n) - (n - 1) / 2.0
        return k * self.spacing

    @property
    def signal_axis(self) -> np.ndarray:
        return self.center_signal + self.offsets

    @property
    def idler_axis(self) -> np.ndarray:
        return self.center_idler + self.offsets

    @property
    def exchange_compatible(self) -> bool:
        """Signal and idler axes coincide, so transposition is particle exchange."""
        return self.center_signal == self.center_idler

    def omega_minus_offsets(self) -> np.ndarray:
        """The 2n-1 distinct omega_- values, indexed by d = s - i + n - 1."""
        n = self.n_points
        d = np.arange(-(n - 1), n)
        return (self.center_signal - self.center_idler) + d * self.spacing


def make_grid(center_signal: float, center_idler: float, half_span: float, n_points: int) -> FrequencyGrid:
    return FrequencyGrid(float(center_signal), float(center_idler), float(half_span), int(n_points))


@dataclass(frozen=True)
class DeviceSpec:
    length_L: float = 2.0
    group_velocity_vg: float = DEFAULT_GROUP_VELOCITY
    group_index_ng: float = 3.5
    reflectivity_TE: float = 0.267
    reflectivity_TM: float = 0.247
    birefringent_comb_shift: float = 0.015  # nm
    cavity_enabled: bool = True
    delta_beta: float = DEFAULT_DELTA_BETA  # 1/mm

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise InvalidArgument("; ".join(f"{k}: {v}" for k, v in problems))

    def problems(self) -> list[tuple[str, str]]:
        out = []
        if not self.length_L > 0:
            out.append(("length_L", "must be > 0"))
        if not 0 < self.group_velocity_vg < C_MM_PER_PS:
            out.append(("group_velocity_vg", f"must lie in (0, c={C_MM_PER_PS})"))
        if not self.group_index_ng > 0:
            out.append(("group_index_ng", "must be > 0"))
        for name in ("reflectivity_TE", "reflectivity_TM"):
            r = getattr(self, name)
            if not 0 <= r < 1:
                out.append((name, f"must lie in [0, 1), got {r}"))
        if not math.isfinite(self.birefringent_comb_shift):
            out.append(("birefringent_comb_shift", "must be finite"))
        if not math.isfinite(self.delta_beta):
            out.append(("delta_beta", "must be finite"))
        return out

    def with_(self, **kw) -> "DeviceSpec":
        return replace(self, **kw)


@dataclass(frozen=True)
class PumpSpec:
    wavelength_p: float = 773.0  # nm
    # None means "at the degeneracy angle" (resolved lazily against a device)
    incidence_angle_theta: Optional[float] = None  # rad
    pulse_duration_fwhm: float = 6.0  # ps, intensity FWHM
    profile: "PumpProfile" = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.profile is None:
            from .pump import PumpProfile

            object.__setattr__(self, "profile", PumpProfile.gaussian(1.0))
        problems = self.problems()
        if problems:
            raise InvalidArgument("; ".join(f"{k}: {v}" for k, v in problems))

    def problems(self) -> list[tuple[str, str]]:
        out = []
        if not self.wavelength_p > 0:
            out.append(("wavelength_p", "must be > 0"))
        if not self.pulse_duration_fwhm > 0:
            out.append(("pulse_duration_fwhm", "must be > 0"))
        if self.incidence_angle_theta is not None and not math.isfinite(self.incidence_angle_theta):
            out.append(("incidence_angle_theta", "must be finite"))
        return out

    @property
    def omega_p(self) -> float:
        return float(wavelength_to_omega(self.wavelength_p))

    def with_(self, **kw) -> "PumpSpec":
        return replace(self, **kw)


def degeneracy_angle(device: DeviceSpec, pump: PumpSpec) -> float:
    """Incidence angle giving degenerate pairs: sin(theta_deg) = c * delta_beta / omega_p."""
    arg = C_MM_PER_PS * device.delta_beta / pump.omega_p
    if abs(arg) > 1:
        raise InvalidArgument(f"no degeneracy angle: |c*delta_beta/omega_p| = {abs(arg):.3g} > 1")
    return math.asin(arg)


def phase_mismatch(device: DeviceSpec, pump: PumpSpec) -> float:
    """k - k_deg (1/mm) for the pump's incidence angle; exactly 0 at degeneracy."""
    theta = pump.incidence_angle_theta
    if theta is None:
        return 0.0
    k = pump.omega_p * math.sin(theta) / C_MM_PER_PS
    return k - device.delta_beta


def translation_omega_minus(device: DeviceSpec, pump: PumpSpec) -> float:
    """Shift of the phase-matching peak along omega_- (rad/ps)."""
    return device.group_velocity_vg * phase_mismatch(device, pump)


def wavelength_offset_to_angle(device: DeviceSpec, pump: PumpSpec, signal_idler_offset: float) -> float:
    """Incidence angle that separates the signal and idler central wavelengths.

    ``signal_idler_offset`` is lambda_s - lambda_i in nm. The JSA centre sits at
    omega_s = (omega_p + delta)/2, omega_i = (omega_p - delta)/2 with
    delta = v_g (k - k_deg); the offset fixes delta through an exact quadratic.
    """
    if not math.isfinite(signal_idler_offset):
        raise InvalidArgument("signal_idler_offset must be finite")
    wp = pump.omega_p
    d_mm = signal_idler_offset / NM_PER_MM
    a = 8.0 * math.pi * C_MM_PER_PS
    # D (wp^2 - delta^2) = -8 pi c delta, small root in rationalized form
    delta = -2.0 * d_mm * wp * wp / (a + math.sqrt(a * a + 4.0 * d_mm * d_mm * wp * wp))
    k_deg = device.delta_beta
    arg = C_MM_PER_PS * (k_deg + delta / device.group_velocity_vg) / wp
    if abs(arg) > 1:
        raise InvalidArgument("requested offset needs |sin(theta)| > 1")
    return math.asin(arg)
