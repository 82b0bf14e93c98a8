"""Workbench for one-sided sampling discretization and recovery.

Measures left/right discretization constants of finite-dimensional
function spaces on point sets, constructs point sets (verified i.i.d.,
replication, optimal design measures, randomized search), runs
sample-based recovery algorithms, and audits the inequalities connecting
them, with independent oracles at desk scale.
"""

from .errors import (
    CertificationError,
    ConfigError,
    ConvergenceError,
    DegenerateSystemError,
    DomainMismatchError,
    InvalidParameterError,
    PremiseError,
    SampdiscError,
    SizeGuardError,
)
from .fnspace import (
    BestApprox,
    DomainSpec,
    FunctionSystem,
    HatFunction,
    OrthoBasis,
    as_function,
    best_approx,
    christoffel,
    eval_system,
    export_value_table,
    function_lp_norm,
    gram,
    lp_norm,
    make_fa,
    nikolskii_constant,
    orthonormalize,
)
from .discretize import (
    DiscReport,
    PointSet,
    disc_constants,
    disc_norm,
    is_injective,
    khinchin_audit,
    khinchin_constant,
    rademacher_pth_moment,
    ril1_audit,
    rip3_bound,
    sample_vector,
    wrdi_transfer,
    wrdi_transfer_audit,
)
from .matrixtools import (
    DesignMatrix,
    RowSelection,
    build_design,
    opnorm_rp,
    pointwise_check,
    select_rdi_rows,
)
from .design import (
    CollectionSpec,
    DesignMeasure,
    EqualizeResult,
    IidResult,
    SearchResult,
    equalize_weights,
    iid_points_verified,
    kw_design,
    search_ldi_points,
    universal_ldi_constant,
    weight_budget_trick,
)
from .recovery import (
    AuditInstance,
    AuditRecord,
    RecoveryReport,
    ell_fit,
    lebesgue_audit,
    recover_universal,
    sigma_v,
    uniform_norm_chain_audit,
)
from .harness import REGISTRY, REQUIRED_CLAIMS, ExperimentReport, run_experiment

__version__ = "0.1.0"
