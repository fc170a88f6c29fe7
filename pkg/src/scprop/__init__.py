"""Semiclassical coherent-state propagators through phase-space caustics.

The package evaluates the two-dimensional coherent-state propagator three
ways: the quadratic semiclassical formula built from complex classical
trajectories, a uniform Airy-function formula that stays finite through a
phase-space caustic, and an exact quantum split-operator reference.  It also
orchestrates parameter-plane scans that compare all three.
"""

__version__ = "0.1.0"

from .phase_core import CoherentLabel, CoherentParams, PhasePointUV, overlap, qp_from_uv, uv_from_qp
from .hamiltonians import (
    HamiltonianModel,
    NelsonParams,
    harmonic_coherent_propagator,
    harmonic_smoothed,
    nelson_smoothed,
)
from .trajectory import (
    ExtendedState,
    ShootingProblem,
    TrajectoryResult,
    action_total,
    integrate_extended,
    multistart_roots,
    newton_shoot,
    track_root,
)
from .semiclassical import Contribution, k2_combine, k2_single, stokes_filter
from .uniform import (
    AiryBranch,
    UniformInputs,
    airy_contour_quadrature,
    airy_f,
    airy_f_prime,
    k_uniform,
    select_uniform_branch,
    uniform_inputs,
)
from .exact_qm import GridSpec, WaveField, coherent_wavefunction, k_exact, propagate
from .scan import (
    CausticRecord,
    ScanConfig,
    ScanGrid,
    export,
    locate_caustic,
    resolve_point,
    run_scan,
)

__all__ = [
    "__version__",
    "CoherentLabel", "CoherentParams", "PhasePointUV", "overlap", "qp_from_uv", "uv_from_qp",
    "HamiltonianModel", "NelsonParams", "harmonic_coherent_propagator",
    "harmonic_smoothed", "nelson_smoothed",
    "ExtendedState", "ShootingProblem", "TrajectoryResult", "action_total",
    "integrate_extended", "multistart_roots", "newton_shoot", "track_root",
    "Contribution", "k2_combine", "k2_single", "stokes_filter",
    "AiryBranch", "UniformInputs", "airy_contour_quadrature", "airy_f",
    "airy_f_prime", "k_uniform", "select_uniform_branch", "uniform_inputs",
    "GridSpec", "WaveField", "coherent_wavefunction", "k_exact", "propagate",
    "CausticRecord", "ScanConfig", "ScanGrid", "export", "locate_caustic",
    "resolve_point", "run_scan",
]
