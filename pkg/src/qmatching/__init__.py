"""Quantum permanents, operator scaling and hidden matroid intersection."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BasisError,
    DegenerateInputError,
    DimensionError,
    DomainError,
    NotCompletelyPositiveError,
    QMatchingError,
    RankDeficiencyError,
    ResourceLimitError,
    ShapeError,
    SingularMatrixError,
)
from .exactmat import CQ, Matrix, charpoly, det_exact, inverse_exact, psd_check, rank_exact  # noqa: E402
from .qstate import (  # noqa: E402
    Budm,
    CpOperator,
    PairFamily,
    apply,
    choi,
    cp_from_subspace_basis,
    decohere,
    dual_apply,
    marginals,
    operator_from_choi,
    separable_from_pairs,
    sk3,
    swap_parties,
)
from .permanents import (  # noqa: E402
    MatrixTuple,
    barvinok_estimate,
    matroidal_permanent,
    mixed_discriminant,
    permanent,
    qp_upper_bound,
    quantum_permanent,
)
from .scaling import (  # noqa: E402
    ScalingState,
    cap_tuple,
    capacity_upper,
    ds_defect,
    extract_ds_scaling,
    indecomposability_coefficient,
    local_scale,
    osi_run,
    osi_step,
)
from .hmip import HmipInstance, HmipVerdict, decide_matching, first_step_normalization, iteration_bound  # noqa: E402
from .matroid import edmonds_rado_check, lin_rank_randomized, mi_rank_bruteforce  # noqa: E402
from .hardness import Gadget, build_gadget, gadget_value_lhs, gadget_value_rhs  # noqa: E402
