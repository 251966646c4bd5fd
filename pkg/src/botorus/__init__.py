"""Benjamin-Ono equation on the torus: Lax spectrum, Birkhoff coordinates and flows."""
from .birkhoff import (
    BirkhoffSeq,
    birkhoff_coordinates,
    functional_gradient,
    gaps_from_spectrum,
    generating_function_product,
    kappa,
    kappas,
    poisson_bracket,
    torus_distance,
    trace_formula_check,
    weighted_norm,
)
from .errors import (
    AliasingError,
    BOError,
    DegeneratePhaseError,
    DimensionError,
    DomainError,
    EigensolverError,
    InstabilityError,
    InvariantError,
    InverseError,
    NearSingularError,
    TruncationError,
)
from .flow import FlowParams, flow_B, frequencies, frequencies_c, hamiltonian_B, solve
from .fourier import (
    GridSpec,
    HardyVector,
    RealPotential,
    analyze,
    hardy_project,
    hilbert_transform,
    inner,
    smooth_random_potential,
    sobolev_norm,
    synthesize,
    toeplitz_apply,
)
from .inverse import (
    InverseSettings,
    invert,
    linear_initializer,
    one_gap_frequency,
    one_gap_gap,
    one_gap_potential,
    one_gap_solution,
)
from .lax import SpectralData, build_matrix, eigen_decompose, generating_function_resolvent, spectrum
from .pde import PdeState, Trajectory, conserved, evolve

__version__ = "0.1.0"
