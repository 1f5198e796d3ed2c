"""Kinetic/fluid coupling in one dimension.

A discrete-velocity BGK half line talks to a Burgers half line through a
half-space layer problem at x = 0.  The package provides the layer solver,
the boundary admissibility test with its certificate, the coupled
time-marcher, a naive flux coupling to compare against, and the scale-limit
experiment harness behind the ``bgkcoupling`` command.
"""

from .errors import (
    AdmissibilityError,
    BlnError,
    CflError,
    ConeError,
    ConfigError,
    ConvergenceError,
    GridMismatchError,
)
from .velocity import (
    DiscreteDistribution,
    VelocityGrid,
    check_admissible,
    density_moment,
    entropy_defect_cumulative,
    flux_moment,
    indicator_cell_average,
    indicator_cell_flux,
    l1_distance,
    maxwellian,
    maxwellian_moment,
    maxwellian_table,
    maxwellian_values,
    relax_toward_maxwellian,
)
from .kinetic import (
    InflowBoundary,
    KineticField,
    KineticHistory,
    SpaceGrid,
    StiffnessProfile,
    duhamel_trace_oracle,
    l1_field_distance,
    outgoing_trace,
    run_with_history,
    stable_dt,
    step,
)
from .milne import (
    LayerClass,
    LayerData,
    LayerGrid,
    LayerProfile,
    back_flux,
    classify,
    confinement_norm,
    golse_iterate,
    relaxation_layer_profile,
    solve_layer,
    start_profile,
)
from .fluid import (
    BlnCertificate,
    FluidField,
    bln_admissible,
    boundary_trace,
    build_bln_certificate,
    fluid_step,
    fluid_step_with_boundary_flux,
    godunov_flux,
    l1_fluid_distance,
    riemann_interface_state,
)
from .coupling import (
    ContractionReport,
    CoupledState,
    CouplingParams,
    InterfaceRecord,
    Snapshot,
    contraction_check,
    coupled_step,
    naive_coupled_step,
    run_coupled,
    state_distance,
)
from .experiments import (
    ConvergenceReport,
    FullRunResult,
    ScenarioConfig,
    build_coupled_initial,
    build_full_initial,
    extract_rescaled_layer,
    random_coupled_state,
    run_convergence_study,
    run_limit_system,
    solve_full_epsilon,
    stability_study,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError",
    "BlnError",
    "CflError",
    "ConeError",
    "ConfigError",
    "ConvergenceError",
    "GridMismatchError",
    "DiscreteDistribution",
    "VelocityGrid",
    "check_admissible",
    "density_moment",
    "entropy_defect_cumulative",
    "flux_moment",
    "indicator_cell_average",
    "indicator_cell_flux",
    "l1_distance",
    "maxwellian",
    "maxwellian_moment",
    "maxwellian_table",
    "maxwellian_values",
    "relax_toward_maxwellian",
    "InflowBoundary",
    "KineticField",
    "KineticHistory",
    "SpaceGrid",
    "StiffnessProfile",
    "duhamel_trace_oracle",
    "l1_field_distance",
    "outgoing_trace",
    "run_with_history",
    "stable_dt",
    "step",
    "LayerClass",
    "LayerData",
    "LayerGrid",
    "LayerProfile",
    "back_flux",
    "classify",
    "confinement_norm",
    "golse_iterate",
    "relaxation_layer_profile",
    "solve_layer",
    "start_profile",
    "BlnCertificate",
    "FluidField",
    "bln_admissible",
    "boundary_trace",
    "build_bln_certificate",
    "fluid_step",
    "fluid_step_with_boundary_flux",
    "godunov_flux",
    "l1_fluid_distance",
    "riemann_interface_state",
    "ContractionReport",
    "CoupledState",
    "CouplingParams",
    "InterfaceRecord",
    "Snapshot",
    "contraction_check",
    "coupled_step",
    "naive_coupled_step",
    "run_coupled",
    "state_distance",
    "ConvergenceReport",
    "FullRunResult",
    "ScenarioConfig",
    "build_coupled_initial",
    "build_full_initial",
    "extract_rescaled_layer",
    "random_coupled_state",
    "run_convergence_study",
    "run_limit_system",
    "solve_full_epsilon",
    "stability_study",
]
