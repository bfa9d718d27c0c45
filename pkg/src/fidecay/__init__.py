"""fidecay: a desk-scale laboratory for Gaussian fidelity decay.

Spin chains under nearest-neighbor Hamiltonians, the integrable limit of
collective radiation-matter coupling, decay-rate scaling analysis, and an
exact-arithmetic demonstration that undersampling an ultra-fast sine
yields usable randomness.
"""

__version__ = "0.1.0"

from .dicke import (
    DickeParams,
    RadiationState,
    SurvivalAmplitude,
    assoc_laguerre,
    displaced_fock_element,
    displacement_amplitude,
    fock_fidelity_gaussian,
    fock_fidelity_smalltime,
    gaussian_fidelity,
    global_phase,
    ground_fidelity_exact,
    sigma_fock,
    sigma_superposition,
    survival_amplitude,
    survival_curve,
)
from .errors import (
    CapacityError,
    ConvergenceError,
    DegeneratePhaseError,
    FidecayError,
    FitError,
    PeakError,
    RangeError,
    ValidationError,
)
from .fidelity import (
    FidelityCurve,
    GaussianDeviation,
    HMHReport,
    ProductStateRule,
    analytic_ground_curve,
    default_time_grid,
    fidelity_curve,
    gaussian_convergence,
    gaussian_model_curve,
    hmh_condition_check,
    local_term_norm,
    tfi_family,
)
from .operators import (
    OperatorHandle,
    SpinChainSpec,
    build_effective_radiation_hamiltonian,
    build_full_dicke_hamiltonian,
    build_spin_hamiltonian,
    expectation,
    fock_cutoff,
    variance,
)
from .propagate import evolve, survival_series
from .sampling import (
    Periodogram,
    SineSamplingSpec,
    UniformityReport,
    arcsine_to_uniform,
    chi_square_uniformity,
    periodogram,
    phase_at,
    sample_sine,
    sample_sine_float,
    undersampled_uniform,
)
from .scaling import (
    Peak,
    ScalingReport,
    fit_gaussian,
    fwhm,
    loglog_slope,
    recurrence_peaks,
)
from .states import (
    Basis,
    QuantumState,
    all_up_state,
    basis_state,
    bloch_site,
    fock_basis,
    fock_state,
    product_state,
    spin_basis,
    spin_fock_basis,
)
