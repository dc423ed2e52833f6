"""Derived quantities: JSI, Schmidt decomposition, exchange symmetry, HOM,
chronocyclic Wigner slice, visibility budgets and v_g calibration."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core import DeviceSpec, FrequencyGrid, PumpSpec, translation_omega_minus, wavelength_offset_to_angle
from .errors import InvalidArgument, NumericalError
from .parallel import map_blocks
from .pdc import (
    JointAmplitude,
    PhaseMatchFunction,
    assemble_jsa,
    default_grid,
    fabry_perot_factor,
    phase_match_quadrature,
    spectral_envelope,
    spectral_width,
)
from .pump import PumpProfile

__all__ = [
    "SchmidtResult",
    "HomTrace",
    "WignerSlice",
    "Perturbation",
    "VisibilityRow",
    "jsi",
    "schmidt_decompose",
    "schmidt_number",
    "schmidt_number_flat_phase",
    "schmidt_number_reduced",
    "symmetry_defect",
    "interference",
    "coherence_time",
    "hom_trace",
    "wigner_minus",
    "hom_from_wigner",
    "find_zero_delay",
    "visibility_study",
    "calibrate_group_velocity",
    "exchange_relation_residual",
    "design_check",
]

CONVENTIONS = ("boson", "fermion")


def _matrix(jsa) -> np.ndarray:
    if isinstance(jsa, JointAmplitude):
        return jsa.values
    m = np.asarray(jsa)
    if m.ndim != 2:
        raise InvalidArgument("expected a 2-D matrix")
    return m


def jsi(jsa) -> np.ndarray:
    """|JSA|^2, max-normalized to 1."""
    p = np.abs(_matrix(jsa)) ** 2
    peak = p.max() if p.size else 0.0
    if not peak > 0:
        raise InvalidArgument("JSI of an all-zero JSA cannot be normalized")
    return p / peak


# --- Schmidt ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SchmidtResult:
    singular_values: np.ndarray  # normalized, sum of squares 1
    schmidt_number_K: float
    signal_modes: np.ndarray  # columns
    idler_modes: np.ndarray  # columns


def _normalized_singular_values(s: np.ndarray) -> tuple[np.ndarray, float]:
    tot = float(np.sum(s * s))
    if not tot > 0:
        raise NumericalError("Schmidt decomposition of an all-zero matrix")
    lam = s / math.sqrt(tot)
    p = lam * lam
    return lam, 1.0 / float(np.sum(p * p))


def schmidt_decompose(jsa, n_modes: int = 10) -> SchmidtResult:
    """SVD of the JSA matrix; K = 1 / sum(lambda_n^4)."""
    m = _matrix(jsa)
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed: {exc}") from exc
    lam, k = _normalized_singular_values(s)
    n_modes = min(int(n_modes), s.size)
    return SchmidtResult(lam, k, u[:, :n_modes], vh[:n_modes].conj().T)


def schmidt_number(jsa) -> float:
    m = _matrix(jsa)
    try:
        s = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed: {exc}") from exc
    return _normalized_singular_values(s)[1]


def schmidt_number_flat_phase(jsi_matrix) -> float:
    """K of sqrt(JSI), i.e. the phase-blind estimate used on measured spectra."""
    p = np.asarray(jsi_matrix, dtype=float)
    if np.any(p < 0):
        raise InvalidArgument("JSI must be non-negative")
    return schmidt_number(np.sqrt(p))


def schmidt_number_reduced(device: DeviceSpec, pump: PumpSpec, n_points: int = 8193, spread: float = 6.0) -> float:
    """K for strongly anticorrelated states (pump band much narrower than the
    phase-matching band), from a 1-D reduction.

    With J ~ E(w+) g(u), u = (ws - wi)/2, and g slow on the scale of E:
    K = (int G du * C(0))^2 / (int G^2 du * int |C|^2), G = |g|^2 including
    the cavity factors and C the autocorrelation of the pump envelope.
    """
    vg = device.group_velocity_vg
    sm = vg * pump.profile.spatial_bandwidth(pump.wavelength_p, device.length_L)
    shift = translation_omega_minus(device, pump)
    wp = pump.omega_p
    half = 0.5 * spread * sm
    if device.cavity_enabled:
        fsr = math.pi * 0.299792458 / (device.group_index_ng * device.length_L)
        n_points = max(n_points, int(2 * half / (fsr / 32)) + 1)
    u = shift / 2.0 + np.linspace(-half, half, n_points)
    du = u[1] - u[0]
    g2 = np.abs(phase_match_quadrature(pump.profile, device, pump, 2.0 * u)) ** 2
    g2 = g2 * fabry_perot_factor(device, wp / 2.0 + u, "TM") * fabry_perot_factor(device, wp / 2.0 - u, "TE")
    sp = spectral_width(pump)
    x = np.linspace(-12.0 * sp, 12.0 * sp, 4001)
    dx = x[1] - x[0]
    env = spectral_envelope(pump, wp + x)
    c = np.correlate(env, env, mode="full") * dx  # lags (k - (N-1)) dx
    c0 = float(np.sum(env * env) * dx)
    norm = float(np.sum(g2) * du) * c0
    purity = float(np.sum(g2 * g2) * du) * float(np.sum(np.abs(c) ** 2) * dx)
    if not purity > 0:
        raise NumericalError("degenerate reduced purity")
    return norm * norm / purity


# --- exchange symmetry -----------------------------------------------------

def symmetry_defect(jsa: JointAmplitude, exchange_phase: float, region: str = "full") -> float:
    """||J - e^{i phase} J^T|| / ||J||.

    region="lower" restricts both norms to ws < wi (the w- < 0 half-plane),
    where an anyonic relation with a non-real exchange factor can hold.
    """
    if isinstance(jsa, JointAmplitude):
        if not jsa.grid.exchange_compatible:
            raise InvalidArgument("symmetry_defect needs identical signal and idler axes")
        m = jsa.values
    else:
        m = np.asarray(jsa)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgument("symmetry_defect needs a square matrix")
    d = m - np.exp(1j * exchange_phase) * m.T
    if region == "lower":
        mask = np.tril(np.ones(m.shape, dtype=bool), -1).T  # s < i
        d, m = d[mask], m[mask]
    elif region != "full":
        raise InvalidArgument(f"unknown region {region!r}")
    den = np.linalg.norm(m)
    if den == 0:
        raise InvalidArgument("zero JSA")
    return float(np.linalg.norm(d) / den)


# --- HOM ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HomTrace:
    delays_tau: np.ndarray
    coincidence_probability: np.ndarray
    visibility: float
    exchange_convention: str = "boson"
    plateau: float = 0.5
    zero_delay_probability: float = 0.0


def _diagonal_sums(jsa: JointAmplitude) -> tuple[np.ndarray, np.ndarray]:
    """c_d = sum_{s-i=d} J[s,i] conj(J[i,s]) h^2, and w- for each d."""
    if not jsa.grid.exchange_compatible:
        raise InvalidArgument("HOM needs an exchange-compatible grid (equal signal/idler centres)")
    m = jsa.values
    n = m.shape[0]
    h = jsa.grid.spacing
    prod = (m * np.conj(m.T)).ravel()
    s, i = np.indices((n, n))
    idx = (s - i + n - 1).ravel()
    c = np.bincount(idx, weights=prod.real, minlength=2 * n - 1) + 1j * np.bincount(
        idx, weights=prod.imag, minlength=2 * n - 1
    )
    om = np.arange(-(n - 1), n) * h
    return c * h * h, om


def interference(jsa: JointAmplitude, delays) -> np.ndarray:
    """I(tau) = sum J(ws,wi) J*(wi,ws) e^{i w- tau} dws dwi (complex)."""
    c, om = _diagonal_sums(jsa)
    tau = np.atleast_1d(np.asarray(delays, dtype=float))
    out = np.empty(tau.shape, dtype=complex)
    for a in range(0, tau.size, 512):
        out[a:a + 512] = np.exp(1j * np.multiply.outer(tau[a:a + 512], om)) @ c
    return out


def coherence_time(jsa: JointAmplitude) -> float:
    """1 / rms width of the w- marginal of the JSI."""
    if not jsa.grid.exchange_compatible:
        raise InvalidArgument("HOM needs an exchange-compatible grid (equal signal/idler centres)")
    p = np.abs(jsa.values) ** 2
    n = p.shape[0]
    s, i = np.indices((n, n))
    marg = np.bincount((s - i + n - 1).ravel(), weights=p.ravel(), minlength=2 * n - 1)
    om = np.arange(-(n - 1), n) * jsa.grid.spacing
    tot = marg.sum()
    mean = float(np.sum(marg * om) / tot)
    var = float(np.sum(marg * (om - mean) ** 2) / tot)
    if not var > 0:
        raise NumericalError("zero spectral width")
    return 1.0 / math.sqrt(var)


def _sign(convention: str) -> float:
    if convention not in CONVENTIONS:
        raise InvalidArgument(f"convention must be one of {CONVENTIONS}")
    return -1.0 if convention == "boson" else 1.0


def _plateau(delays: np.ndarray, prob: np.ndarray) -> float:
    lo, hi = float(delays.min()), float(delays.max())
    mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
    outer = np.abs(delays - mid) >= 0.9 * half
    return float(np.mean(prob[outer]))


def hom_trace(jsa: JointAmplitude, delays=None, convention: str = "boson",
              reference_delay: float = 0.0, n_delays: int = 401) -> HomTrace:
    """P(tau) = 1/2 (1 -+ Re I(tau)); '-' for bosons, '+' for fermions.

    Visibility (N_inf - N_0)/N_inf with N_inf the mean over the outer 10% of
    the delay window and N_0 = P(reference_delay). It is negative for a
    coincidence peak. Default window: +-5 coherence times, n_delays points.
    """
    sgn = _sign(convention)
    if delays is None:
        tc = coherence_time(jsa)
        delays = np.linspace(-5.0 * tc, 5.0 * tc, n_delays) + reference_delay
    tau = np.asarray(delays, dtype=float)
    if tau.ndim != 1 or tau.size < 2:
        raise InvalidArgument("delays must be a 1-D array of at least 2 points")
    vals = interference(jsa, np.concatenate((tau, [reference_delay]))).real
    prob = 0.5 * (1.0 + sgn * vals[:-1])
    p0 = 0.5 * (1.0 + sgn * vals[-1])
    plateau = _plateau(tau, prob)
    vis = (plateau - p0) / plateau if plateau > 0 else float("nan")
    return HomTrace(tau, prob, float(vis), convention, plateau, float(p0))


# --- Wigner ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WignerSlice:
    omega_minus: np.ndarray  # rad/ps
    t_minus: np.ndarray  # ps
    values: np.ndarray  # [omega, t]


def _pm_wigner(pm: PhaseMatchFunction, t: np.ndarray, omega_limit: Optional[float], threads) -> WignerSlice:
    om = pm.omega_minus
    n = om.size
    if n < 2:
        raise InvalidArgument("need at least two omega samples")
    h = (om[-1] - om[0]) / (n - 1)
    tol = 1e-9 * abs(h)
    if not (np.allclose(np.diff(om), h, rtol=0, atol=tol) and np.all(np.abs(om + om[::-1]) <= tol * n)):
        raise InvalidArgument("wigner_minus needs a uniform omega grid symmetric about 0")
    phi = pm.values
    norm = float(np.sum(np.abs(phi) ** 2))
    if norm == 0:
        raise InvalidArgument("zero phase-matching function")
    rows = om[0] + np.arange(2 * n - 1) * (h / 2.0)  # (w_j + w_k)/2
    rows[n - 1] = 0.0
    keep = np.ones(rows.size, dtype=bool) if omega_limit is None else np.abs(rows) <= omega_limit + tol
    out = np.empty((int(keep.sum()), t.size))

    def fill(a, b):
        for k in range(a, b):
            x = phi * np.exp(1j * om * t[k])
            w = np.convolve(x, np.conj(x))
            out[:, k] = w[keep].real / norm

    map_blocks(fill, t.size, threads, block=16)
    return WignerSlice(rows[keep], t, out)


def _jsa_wigner(jsa: JointAmplitude, t: np.ndarray, omega_limit: Optional[float], threads) -> WignerSlice:
    if not jsa.grid.exchange_compatible:
        raise InvalidArgument("wigner_minus needs an exchange-compatible grid")
    m = jsa.values
    n = m.shape[0]
    h = jsa.grid.spacing
    dmax = n - 1 if omega_limit is None else min(n - 1, int(math.floor(omega_limit / h + 1e-9)))
    ds = np.arange(-dmax, dmax + 1)
    norm = float(np.sum(np.abs(m) ** 2))
    if norm == 0:
        raise InvalidArgument("zero JSA")
    mt_conj = np.conj(m.T)
    out = np.empty((ds.size, t.size))
    s_idx, i_idx = np.indices((n, n))
    diff = (s_idx - i_idx + n - 1).ravel()
    lag = np.arange(-(n - 1), n)

    def fill(a, b):
        for r in range(a, b):
            d = int(ds[r])
            # partner element conj(J[i + d, s - d]) = conj(J^T)[s - d, i + d]
            prod = np.zeros((n, n), dtype=complex)
            s0, s1 = max(0, d), min(n, n + d)
            i0, i1 = max(0, -d), min(n, n - d)
            prod[s0:s1, i0:i1] = m[s0:s1, i0:i1] * mt_conj[s0 - d:s1 - d, i0 + d:i1 + d]
            flat = prod.ravel()
            c = np.bincount(diff, weights=flat.real, minlength=2 * n - 1) + 1j * np.bincount(
                diff, weights=flat.imag, minlength=2 * n - 1
            )
            # phase e^{2 i (w- - w-_row) t}
            ph = np.exp(2j * np.multiply.outer(t, (lag - d) * h))
            out[r] = (ph @ c).real / norm

    map_blocks(fill, ds.size, threads, block=8)
    return WignerSlice(ds * h, t, out)


def wigner_minus(source: Union[PhaseMatchFunction, JointAmplitude], t_minus, omega_limit: Optional[float] = None,
                 threads: Optional[int] = None) -> WignerSlice:
    """Chronocyclic Wigner slice W(w-, t-) = int dw' f(w- + w') f*(w- - w') e^{2 i w' t-}.

    From a PhaseMatchFunction the rows sit on half-spacing midpoints; from a
    JointAmplitude the w+ variable is integrated out (rows on the grid
    spacing). Normalized by the total norm, so a symmetric state has
    W(0, 0) = 1 and an antisymmetric one -1.
    """
    t = np.atleast_1d(np.asarray(t_minus, dtype=float))
    if not np.all(np.isfinite(t)):
        raise InvalidArgument("t_minus must be finite")
    if isinstance(source, JointAmplitude):
        return _jsa_wigner(source, t, omega_limit, threads)
    if isinstance(source, PhaseMatchFunction):
        return _pm_wigner(source, t, omega_limit, threads)
    raise InvalidArgument("wigner_minus takes a PhaseMatchFunction or JointAmplitude")


def hom_from_wigner(wslice: WignerSlice) -> HomTrace:
    """P(tau) = 1/2 (1 - W(0, t-)) with tau = 2 t-.

    The factor 2 follows from t- = (t_s - t_i)/2 being conjugate to w- = ws - wi
    through the kernel e^{2 i w' t-}.
    """
    om = wslice.omega_minus
    step = np.min(np.abs(np.diff(om))) if om.size > 1 else 1.0
    hit = np.flatnonzero(np.abs(om) <= 1e-9 * step)
    if hit.size == 0:
        raise InvalidArgument("Wigner slice has no omega_minus = 0 row")
    cut = wslice.values[hit[0]]
    tau = 2.0 * wslice.t_minus
    prob = 0.5 * (1.0 - cut)
    order = np.argsort(tau)
    p0 = float(np.interp(0.0, tau[order], prob[order]))
    plateau = _plateau(tau, prob) if tau.size > 1 else float("nan")
    vis = (plateau - p0) / plateau if plateau > 0 else float("nan")
    return HomTrace(tau, prob, float(vis), "boson", plateau, p0)


# --- visibility budget ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Perturbation:
    """One perturbed configuration; fields combine.

    degeneracy_offset: signal-idler central wavelength difference (nm) set
    through the pump angle; comb_shift: added to the device's TE/TM comb shift
    (nm); centering_offset: added to the pump centre (mm); profile: replaces
    the pump profile (e.g. a measured, sampled one).
    """
    label: str = "baseline"
    degeneracy_offset: float = 0.0
    comb_shift: float = 0.0
    centering_offset: float = 0.0
    profile: Optional[PumpProfile] = None

    def apply(self, device: DeviceSpec, pump: PumpSpec) -> tuple[DeviceSpec, PumpSpec]:
        if self.comb_shift:
            device = replace(device, birefringent_comb_shift=device.birefringent_comb_shift + self.comb_shift)
        prof = self.profile if self.profile is not None else pump.profile
        if self.centering_offset:
            prof = prof.with_offset(prof.center_offset + self.centering_offset)
        pump = replace(pump, profile=prof)
        if self.degeneracy_offset:
            pump = replace(pump, incidence_angle_theta=wavelength_offset_to_angle(device, pump, self.degeneracy_offset))
        return device, pump


@dataclass(frozen=True)
class VisibilityRow:
    label: str
    visibility: float
    delta_v: float
    zero_delay: float


def find_zero_delay(jsa: JointAmplitude, sign: float, window: float, n_scan: int = 201) -> float:
    """Delay in [-window, window] where sign * Re I(tau) is largest."""
    tau = np.linspace(-window, window, n_scan)
    vals = sign * interference(jsa, tau).real
    k = int(np.argmax(vals))
    step = tau[1] - tau[0]
    lo, hi = tau[max(k - 1, 0)], tau[min(k + 1, n_scan - 1)]
    if hi - lo < step / 2:
        return float(tau[k])
    res = minimize_scalar(lambda x: -sign * interference(jsa, [x]).real[0], bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-6 * max(window, 1.0)})
    return float(res.x) if -res.fun >= vals[k] else float(tau[k])


def visibility_study(device: DeviceSpec, pump: PumpSpec, perturbations: Sequence[Perturbation],
                     n_points: int = 512, grid: Optional[FrequencyGrid] = None,
                     threads: Optional[int] = None) -> list[VisibilityRow]:
    """Forward-simulate each perturbed configuration and report HOM visibility.

    Visibility here is |N_inf - N_0| / N_inf with N_inf = 1/2 (the exact
    long-delay plateau of a normalized state, free of cavity echoes) and N_0
    taken at the delay-compensated centre of the dip or peak, as an
    experiment would re-zero the delay line. The first row is the baseline.
    """
    configs = [("baseline", device, pump)]
    for p in perturbations:
        d, q = p.apply(device, pump)
        configs.append((p.label, d, q))
    if grid is None:
        shifts = [abs(translation_omega_minus(d, q)) for _, d, q in configs]
        grids = [default_grid(d, q, n_points) for _, d, q in configs]
        half = max(g.half_span for g in grids)
        base = grids[0]
        grid = FrequencyGrid(base.center_signal, base.center_idler, half + 0.5 * max(shifts), n_points)
    rows = []
    base_jsa = assemble_jsa(device, pump, grid, threads=threads)
    sign = 1.0 if interference(base_jsa, [0.0]).real[0] >= 0 else -1.0
    window = coherence_time(base_jsa)
    v_base = None
    for label, d, q in configs:
        j = base_jsa if label == "baseline" and d is device and q is pump else assemble_jsa(d, q, grid, threads=threads)
        t0 = find_zero_delay(j, sign, window)
        i0 = float(interference(j, [t0]).real[0])
        v = abs(i0)  # |1/2 - P0| / (1/2)
        if v_base is None:
            v_base = v
        rows.append(VisibilityRow(label, v, v_base - v, t0))
    return rows


# --- calibration -----------------------------------------------------------------

def calibrate_group_velocity(device: DeviceSpec, pump: PumpSpec, target_K: float = 1.01,
                             n_points: int = 512, branch: str = "correlated", xtol: float = 1e-10) -> float:
    """Solve K(v_g) = target_K for the given device/pump.

    K(v_g) has a minimum near the separable point; "correlated" takes the
    root with a narrower phase-matching band (smaller v_g), "anticorrelated"
    the other one.
    """
    sp = spectral_width(pump)
    sk = pump.profile.spatial_bandwidth(pump.wavelength_p, device.length_L)
    v_sep = sp / sk

    def f(vg):
        d = replace(device, group_velocity_vg=vg)
        return schmidt_number(assemble_jsa(d, pump, default_grid(d, pump, n_points))) - target_K

    # locate the minimum of K near the separable estimate
    res = minimize_scalar(f, bounds=(0.6 * v_sep, min(1.6 * v_sep, 0.299)), method="bounded",
                          options={"xatol": 1e-5})
    v_min = float(res.x)
    if res.fun >= 0:
        raise NumericalError(f"K never drops to {target_K} (minimum {res.fun + target_K:.4f})")
    if branch == "correlated":
        lo, hi = 0.25 * v_min, v_min
    elif branch == "anticorrelated":
        lo, hi = v_min, min(4.0 * v_min, 0.2997)
    else:
        raise InvalidArgument("branch must be 'correlated' or 'anticorrelated'")
    if f(lo) * f(hi) > 0:
        raise NumericalError("could not bracket the calibration root")
    return float(brentq(f, lo, hi, xtol=xtol))


# --- anyonic design forward check ---------------------------------------------------

def exchange_relation_residual(pm: PhaseMatchFunction, delta_phi: float) -> float:
    """max over w- < 0 of |phi(w-) - e^{i dphi} phi(-w-)| / max|phi|.

    The grid must be symmetric about 0. Only the w- < 0 half-line is checked:
    for a non-real e^{i dphi} the relation cannot hold on both halves at once
    (applying it twice gives phi = e^{2 i dphi} phi), and for dphi in {0, pi}
    the two halves are equivalent.
    """
    om = pm.omega_minus
    if not np.allclose(om, -om[::-1], rtol=0, atol=1e-9 * np.max(np.abs(om))):
        raise InvalidArgument("exchange_relation_residual needs a grid symmetric about 0")
    v = pm.values
    neg = om < 0
    mirrored = v[::-1]
    peak = float(np.max(np.abs(v)))
    if peak == 0:
        raise InvalidArgument("zero phase-matching function")
    return float(np.max(np.abs(v[neg] - np.exp(1j * delta_phi) * mirrored[neg])) / peak)


def design_check(profile: PumpProfile, target, device: DeviceSpec, pump: PumpSpec, n_omega: int = 1001) -> dict:
    """Forward phase matching of a designed profile versus its target."""
    from .pump import _target_half_width, anyonic_target_values  # noqa: PLC0415

    half = _target_half_width(target)
    om = np.linspace(-half, half, n_omega)
    pm = PhaseMatchFunction(om, phase_match_quadrature(profile, device, replace(pump, profile=profile), om))
    want = anyonic_target_values(target, om)
    scale = np.vdot(pm.values, want) / np.vdot(pm.values, pm.values)
    shape_err = float(np.linalg.norm(scale * pm.values - want) / np.linalg.norm(want))
    return {"pm": pm, "relation_residual": exchange_relation_residual(pm, target.exchange_phase_delta_phi),
            "shape_error": shape_err}
