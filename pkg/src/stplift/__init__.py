"""Bounds on the joint spectral radius of arbitrary and DFA-constrained
switched linear systems, via the semi-tensor-product lift ``{F_i ⊗ A_i}``."""

from .automaton import (
    Dfa,
    DfaError,
    StructureMatrices,
    accepts,
    accepts_many,
    enumerate_accepted,
    f_product,
    f_products,
    has_cycle,
    omega_to_dfa,
    structure_matrices,
)
from .radius import (
    BoundsResult,
    cjsr_bounds,
    cjsr_bounds_via_lift,
    gripenberg,
    jsr_bounds,
    markovian_bounds,
)
from .spectra import NormKind, Spectrum, block_norm, eigenvalues, matrix_norm, spectral_radius
from .systems import (
    ArbitrarySystem,
    ConstrainedSystem,
    LiftedSystem,
    edge_lift,
    h_tilde,
    lifted_state,
    omega_lift,
    product,
    step,
    stp_lift,
    t_product_lift,
)
from .tensor import (
    DeltaVector,
    LogicalMatrix,
    SizeCapError,
    Word,
    delta,
    index_to_word,
    kron,
    power_reducing_matrix,
    stp,
    swap_matrix,
    word_to_index,
)

__version__ = "0.1.0"
