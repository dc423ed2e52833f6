"""Simulation of photon-pair joint spectra from transverse-pumped
counter-propagating parametric down-conversion with a shaped pump."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    C_MM_PER_PS,
    DeviceSpec,
    FrequencyGrid,
    PumpSpec,
    degeneracy_angle,
    make_grid,
    omega_to_wavelength,
    wavelength_offset_to_angle,
    wavelength_to_omega,
)
from .errors import BiphotonError, DesignInfeasible, FormatError, InvalidArgument, NumericalError  # noqa: E402
from .pump import AnyonicTarget, PumpProfile, design_anyonic_profile, evaluate_profile, import_sampled_profile  # noqa: E402
from .pdc import JointAmplitude, PhaseMatchFunction, assemble_jsa, default_grid  # noqa: E402
from .analysis import (  # noqa: E402
    hom_from_wigner,
    hom_trace,
    jsi,
    schmidt_decompose,
    schmidt_number,
    symmetry_defect,
    visibility_study,
    wigner_minus,
)
