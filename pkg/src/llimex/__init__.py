"""Finite-difference Landau-Lifshitz solver with IMEX-RK and BDF2 integrators."""

from .grid import (
    FieldNorms,
    GridMismatchError,
    GridSpec,
    TensorField,
    VectorField3,
    avg_gradient,
    face_gradient,
    face_inner,
    fill_ghosts,
    gradient,
    inner_product,
    laplacian,
    lp_norm,
    norms,
)
from .linsolve import (
    GmresConfig,
    GmresResult,
    HelmholtzPlan,
    dense_helmholtz_matrix,
    dense_oracle_solve,
    gmres_solve,
    helmholtz_plan,
    helmholtz_solve,
)
from .physics import (
    GAMMA_GYROMAGNETIC,
    DemagTensor,
    EnergyBreakdown,
    FieldTerms,
    LLProblem,
    MaterialParams,
    assemble_f,
    build_demag_tensor,
    effective_field,
    field_from_mT,
    rhs_equivalent_form,
    rhs_full,
    rhs_simplified,
    stray_field,
    time_from_seconds,
    total_energy,
)
from .steppers import (
    Bdf2Stepper,
    ButcherPair,
    ImexStepper,
    ProjectionError,
    SchemeId,
    StepState,
    builtin_tableau,
    imex_step,
    make_stepper,
    project,
    startup,
)

__version__ = "0.1.0"
