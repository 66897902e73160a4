"""Quantized electromagnetic fields in dispersive, absorbing magneto-dielectrics.

Submodules
----------
medium
    Susceptibility models, dispersion relations and admissibility checks.
coupling
    Squared bath couplings from susceptibilities and back.
laplace
    Residue and contour inversion of Laplace images.
kernels
    Field kernels Z, zeta, eta, Q and their validators.
noise
    Noise commutator coefficients and weight bundles.
scenarios
    Worked media compared with their closed forms.
cli
    The ``maxdiq`` command.
"""

__version__ = "0.1.0"

from .coupling import (
    CouplingTable,
    DeltaCoupling,
    chi_from_coupling,
    coupling_from_chi,
    coupling_table,
    delta_coupling,
    dispersion_invariance_check,
)
from .errors import (
    AccuracyWarning,
    ConsistencyError,
    ContourRefusedError,
    DivergenceError,
    ExtrapolationWarning,
    InconclusiveError,
    LosslessCouplingError,
    MaxdiqError,
    NumericalError,
    ParameterError,
    PassivityError,
    PoleError,
    RangeError,
    ResolutionError,
    ResonanceError,
    SingularityError,
    UnphysicalDispersionError,
    UnsupportedConfigurationError,
)
from .kernels import (
    KernelRequest,
    KernelSeries,
    asymptotic_decay_check,
    energy_invariant,
    kernel,
    kernel_eta,
    kernel_Q,
    kernel_Z,
    kernel_zeta,
    ode_residual,
    residual_grid,
    uniform_grid,
)
from .laplace import ContourParams, RationalImage, invert_contour, invert_rational
from .medium import (
    Box,
    Linear,
    Lorentz,
    PhysicalConstants,
    PowerLaw,
    Step,
    TabulatedFrequency,
    TabulatedTime,
    Vacuum,
    check_causality_passivity,
    kk_real_from_imag,
    model_from_dict,
)
from .noise import NoiseWeight, noise_commutator_coefficient, noise_weight_bundle
from .scenarios import ScenarioReport, ScenarioSpec, reference_kernel, run_scenario

__all__ = [
    "AccuracyWarning",
    "Box",
    "ConsistencyError",
    "ContourParams",
    "ContourRefusedError",
    "CouplingTable",
    "DeltaCoupling",
    "DivergenceError",
    "ExtrapolationWarning",
    "InconclusiveError",
    "KernelRequest",
    "KernelSeries",
    "Linear",
    "Lorentz",
    "LosslessCouplingError",
    "MaxdiqError",
    "NoiseWeight",
    "NumericalError",
    "ParameterError",
    "PassivityError",
    "PhysicalConstants",
    "PoleError",
    "PowerLaw",
    "RangeError",
    "RationalImage",
    "ResolutionError",
    "ResonanceError",
    "ScenarioReport",
    "ScenarioSpec",
    "SingularityError",
    "Step",
    "TabulatedFrequency",
    "TabulatedTime",
    "UnphysicalDispersionError",
    "UnsupportedConfigurationError",
    "Vacuum",
    "__version__",
    "asymptotic_decay_check",
    "check_causality_passivity",
    "chi_from_coupling",
    "coupling_from_chi",
    "coupling_table",
    "delta_coupling",
    "dispersion_invariance_check",
    "energy_invariant",
    "invert_contour",
    "invert_rational",
    "kernel",
    "kernel_Q",
    "kernel_Z",
    "kernel_eta",
    "kernel_zeta",
    "kk_real_from_imag",
    "model_from_dict",
    "noise_commutator_coefficient",
    "noise_weight_bundle",
    "ode_residual",
    "residual_grid",
    "reference_kernel",
    "run_scenario",
    "uniform_grid",
]
