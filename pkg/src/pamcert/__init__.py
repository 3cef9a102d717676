"""Classicality certification for prepare-and-measure statistics.

Library + CLI deciding, by linear programming over deterministic-strategy
polytopes, whether sets of qubit preparations (or measurements) can only
produce classically simulable statistics, with witnesses for activation of
non-classicality, random access code figures of merit, and joint
measurability robustness for comparison.
"""

from .bloch import (
    BlochVector,
    HermitianOperator,
    MeasurementSet,
    Preparation,
    behavior_of,
    binary_measurement,
    bloch_coords,
    born,
    depolarize,
    generators,
    inflate,
    projector_from_unit_vector,
    state_from_bloch,
)
from .certifier import (
    POVM_DEPOLARIZING_DEFAULT,
    CertificationResult,
    IterationConfig,
    LpProblem,
    SolverFailure,
    Verdict,
    certify_measurements_pm,
    certify_measurements_povm,
    certify_preparations_pm,
    certify_preparations_povm,
    check_feasibility,
    iterate_visibility,
    probe_operators_measurements,
    probe_operators_preparations,
    solve_lp,
    solve_visibility,
)
from .geometry import (
    HullFacets,
    PolyhedronSpec,
    convex_hull,
    inscribed_radius,
    load_polyhedron,
    measurements_from_vertices,
    polyhedron,
)
from .incompatibility import (
    ParentMeasurement,
    RobustnessResult,
    jm_feasible,
    mirror_symmetric,
    robustness,
    verify_parent,
)
from .strategies import (
    Behavior,
    DeterministicStrategy,
    Scenario,
    behavior_columns,
    count,
    deterministic_behavior,
    from_index,
    sample_distinct,
    to_index,
)
from .witnesses import (
    ActivationFamily,
    activation_measurements,
    activation_preparations,
    analytic_s,
    correlator,
    rac_success,
    rac_success_from_behavior,
    s_value,
)

__version__ = "0.1.0"
