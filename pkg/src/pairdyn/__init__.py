"""Momentum-space pair-production dynamics of dissociating condensates.

Core objects: a momentum lattice (``GridSpec``), the condensate's sparse
Fourier coefficients (``FourierTensor``), the implicit block-Hankel system
matrix (``SystemOperator``), matrix-free propagator rows (``expv``,
``rows_of_M``), and the moment/correlation calculus built on them.
"""

from .condensate import (
    CondensateSpec,
    FourierTensor,
    Symmetry,
    build_condensate,
    fourier_coefficients,
    reconstruct_density,
    truncate_coefficients,
)
from .errors import PropagationError, ValidationError
from .lattice import (
    GridSpec,
    all_momenta,
    flatten_index,
    momentum_of,
    negate_index,
    unflatten_index,
)
from .observables import (
    ClSlice,
    MomentTable,
    anomalous_moment,
    cl_slice,
    g2_opposite_spin,
    g2_same_spin,
    normal_moment,
    occupation,
    total_atom_number,
)
from .oracles import (
    UniformSolution,
    cl_asymptote,
    golden_rule_number,
    golden_rule_rate,
    pair_identity_check,
    uniform_blocks,
    uniform_moments,
)
from .propagator import (
    BlockRow,
    KrylovConfig,
    MRows,
    RowPlan,
    compute_rows,
    expv,
    minimal_row_set,
    rows_of_M,
)
from .system_matrix import (
    PhysicalParams,
    SystemOperator,
    build_operator,
    skew_transpose,
)

__version__ = "0.1.0"
