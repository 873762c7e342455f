"""Truncated Fock-space toolkit for photon-added coherent states and cubic
phase states: simulated heterodyne postselection, maximum-likelihood
reconstruction, Gaussian-orbit fidelity optimization, Wigner functions and
photon statistics. hbar = 2 throughout (vacuum quadrature variance 1)."""

__version__ = "0.1.0"

from .analysis import (
    Negativity,
    PhaseFitResult,
    WignerGrid,
    cubic_unitary_label,
    fidelity,
    islands,
    negativity,
    phase_fit,
    photon_statistics,
    wigner,
)
from .fock import (
    DensityMatrix,
    FockOperator,
    StateVector,
    TruncationError,
    annihilation,
    apply,
    creation,
    dagger,
    expect,
    expm_hermitian,
    inner,
    normalize,
    number_operator,
    position_wavefunctions,
    quadrature,
)
from .gaussian import (
    GaussianParams,
    OrbitFit,
    SearchConfig,
    apply_gaussian,
    best_gaussian_fidelity,
    displacement_op,
    gaussian_unitary,
    orbit_fidelity,
    rotation_op,
    squeeze_op,
    unwind,
)
from .measurement import (
    DEFAULT_ACCEPTANCE_RADIUS_SQ,
    HeterodyneSample,
    SampleBatch,
    SamplingError,
    acceptance_probability,
    expected_acceptance,
    postselect,
    q_function,
    sample_heterodyne,
    sample_homodyne,
)
from .states import (
    CubicState,
    coherent,
    coherent_tail_mass,
    cubic_phase_state,
    fock,
    minimum_coherent_dim,
    perturbative_cubic,
    photon_added_coherent,
    vacuum,
)
from .tomography import (
    MaxLikOptions,
    MaxLikResult,
    loglikelihood,
    maxlik_reconstruct,
    read_density_json,
    write_density_json,
)
