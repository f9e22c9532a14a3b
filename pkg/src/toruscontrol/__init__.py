"""Toolkit for deciding which volume-preserving torus motions the system
dx/dt = f(x) + u(t) generates, exactly, and for demonstrating the answer
numerically by flow simulation and finite-ensemble motion planning."""

from .closure import (
    ClosureDescriptor,
    ModeSpanTable,
    bruteforce_closure,
    compare_tables,
    isolate_mode,
    membership,
    predicted_closure,
    table_from_descriptor,
)
from .dynamics import (
    ControlSignal,
    Segment,
    Trajectory,
    cone_mean_check,
    integrate_flow,
    variation_decompose,
    variational_jacobian,
)
from .ensemble import (
    BumpField,
    EnsembleState,
    bracket_generating_test,
    bump_field,
    interpolating_divfree_field,
    lift_eval,
    separation_bound,
)
from .lattice import (
    DualGroup,
    LatticeSubgroup,
    Mode,
    canonical_mode,
    contains,
    cross3,
    dual_group,
    gcd_wedge_criterion,
    ik_closure,
    span_dimension,
    subgroup_generated,
    wedge2,
)
from .planner import PlanProblem, PlanResult, plan_ensemble, verify_plan
from .trigfield import (
    CoeffPair,
    StreamFunction,
    TrigField,
    TrigScalar,
    bracket,
    c1_norm_bound,
    check_class_Vd,
    constant_field,
    basis_constant_fields,
    divergence,
    from_stream,
    hamiltonian_part,
    is_divergence_free,
    mean,
    mean_normalized,
    partial_ad,
    poisson,
    single_mode_field,
    translate,
    translate_exact,
    trig_field,
    trig_scalar,
    zero_field,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
