"""stinesim: numerical toolkit for the random Stinespring superchannel.

Builds quantum channels and their dilations, evaluates the exact
Weingarten-calculus formula for the channel induced by a randomly gauged
dilation, realises the same map as an explicit encoder/decoder circuit,
certifies both against Monte-Carlo Haar averaging, and exposes the
query-complexity calculators for channel learning.
"""

__version__ = "0.1.0"

from .channels import (
    ChoiMatrix,
    DilationDistance,
    KrausChannel,
    StinespringIsometry,
    Superoperator,
    apply_superoperator,
    choi_rank,
    choi_to_kraus,
    choi_trace_distance,
    kraus_to_choi,
    kraus_to_stinespring,
    kraus_to_superoperator,
    procrustes_dilation_distance,
    random_kraus_channel,
    stinespring_to_channel,
    superoperator_to_choi,
)
from .learning import (
    BoundReport,
    LearnResult,
    PackingInterval,
    TomographyConfig,
    bosonic_entropy,
    distinguishing_bound_check,
    invert_bosonic_entropy,
    learn_channel,
    packing_log_cardinality,
    query_lower_bound,
    sym_multiset_count,
)
from .schur import SchurBasis, SnFourierBasis, controlled_permutation, schur_transform, sn_qft
from .superchannel import (
    McSuperoperator,
    PurificationSpec,
    SuperchannelSpec,
    choi_consistency_check,
    circuit_superchannel,
    instance_equality_report,
    omega_explicit,
    pad_kraus,
    r_n_operator,
    random_purification_apply,
    stinespring_rand_isometry_mc,
    dilation_conversion_check,
)
from .symrep import (
    WeingartenTable,
    character,
    dim_irrep_sym,
    dim_irrep_unitary,
    haar_twirl,
    isotypical_projector,
    partial_haar_twirl,
    partitions,
    weingarten,
    weingarten_table,
    young_orthogonal_matrix,
)
from .tensor import (
    DIM_CAP,
    InstanceTooLargeError,
    ShapeMismatchError,
    haar_unitary,
    kron,
    partial_trace,
    permutation_twirl,
    permutation_unitary,
)
