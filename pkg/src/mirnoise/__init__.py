"""Internal thermal noise of a plano-convex mirror read out by a Gaussian beam."""

from .errors import (
    BudgetExceededError,
    InfeasibleGeometryError,
    QuadratureConvergenceError,
    RecurrenceOverflowError,
)
from .geometry import (
    FUSED_SILICA,
    Material,
    PlanoConvexGeometry,
    solve_geometry,
    thickness_profile,
)
from .modes import (
    ModeData,
    ModeIndex,
    effective_mass_oracle,
    fundamental_frequency,
    mode_data,
    surface_displacement,
)
from .overlap import (
    BeamSpec,
    OverlapWeight,
    beam_profile,
    overlap_centered,
    overlap_offaxis,
    overlap_quadrature_oracle,
)
from .susceptibility import (
    BOLTZMANN,
    OpticalMassApprox,
    SpectrumPoint,
    SusceptibilityResult,
    TruncationPolicy,
    displacement_noise_spectrum,
    effective_susceptibility,
    mode_susceptibility,
    optical_mass_model,
    thermal_force_spectrum,
)
from .sweeps import (
    CompareReport,
    SweepRow,
    SweepSpec,
    compare_report,
    convergence_study,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BOLTZMANN",
    "BeamSpec",
    "BudgetExceededError",
    "CompareReport",
    "FUSED_SILICA",
    "InfeasibleGeometryError",
    "Material",
    "ModeData",
    "ModeIndex",
    "OpticalMassApprox",
    "OverlapWeight",
    "PlanoConvexGeometry",
    "QuadratureConvergenceError",
    "RecurrenceOverflowError",
    "SpectrumPoint",
    "SusceptibilityResult",
    "SweepRow",
    "SweepSpec",
    "TruncationPolicy",
    "beam_profile",
    "compare_report",
    "convergence_study",
    "displacement_noise_spectrum",
    "effective_mass_oracle",
    "effective_susceptibility",
    "fundamental_frequency",
    "mode_data",
    "mode_susceptibility",
    "optical_mass_model",
    "overlap_centered",
    "overlap_offaxis",
    "overlap_quadrature_oracle",
    "run_sweep",
    "solve_geometry",
    "surface_displacement",
    "thermal_force_spectrum",
    "thickness_profile",
]
