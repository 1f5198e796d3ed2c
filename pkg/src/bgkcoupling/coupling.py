"""Time marching for the coupled limit system and the naive flux coupling.

The limit system keeps the kinetic description on x < 0 and the scalar
conservation law on x > 0, glued through three interface ingredients per
step, all evaluated on the data available at the step boundary:

1. the kinetic outgoing trace g at x = 0- defines the fluid boundary datum
   v = sqrt(2 flux(g)), imposed weakly through the Godunov flux;
2. the updated fluid trace u(0+) fixes the layer flux V = u^2/2, and the
   half-space layer problem for (V, g) is solved;
3. the layer's returning slice F(0, xi < 0) feeds the kinetic domain as its
   right-edge inflow.

The naive variant skips the admissibility mechanism entirely: it imposes the
kinetic outflux directly as the positive part of the fluid boundary flux and
reflects the fluid trace back as an equilibrium inflow.  The two variants
agree while the fluid trace stays on the inflow branch and separate as soon
as a standing transition sits at the interface.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConeError
from .fluid import (
    FluidField,
    boundary_trace,
    fluid_step,
    fluid_step_with_boundary_flux,
    l1_fluid_distance,
)
from .kinetic import (
    InflowBoundary,
    KineticField,
    StiffnessProfile,
    l1_field_distance,
    outgoing_trace,
    step as kinetic_step,
)
from .milne import (
    LayerClass,
    LayerGrid,
    LayerData,
    LayerProfile,
    back_flux,
    classify,
    relaxation_layer_profile,
    solve_layer,
)
from .velocity import DiscreteDistribution, flux_moment, maxwellian_values

__all__ = [
    "CouplingParams",
    "InterfaceRecord",
    "CoupledState",
    "coupled_step",
    "naive_coupled_step",
    "run_coupled",
    "Snapshot",
    "ContractionReport",
    "contraction_check",
]


@dataclass
class CouplingParams:
    """Knobs of the interface exchange, with the defaults used everywhere."""

    layer_grid: LayerGrid
    tol_fix: float = 1e-8
    max_iter: int = 10000
    tol_class: float = 1e-8
    warm_start: bool = True
    cone_defect_tol: float | None = None   # default: largest flux the velocity interval carries

    @staticmethod
    def default(half_width: float = 1.0) -> "CouplingParams":
        return CouplingParams(layer_grid=LayerGrid(20.0, 400), cone_defect_tol=0.5 * half_width**2)


@dataclass
class InterfaceRecord:
    """Per-step log of everything exchanged across x = 0."""

    time: float
    flux_out: float            # first moment of the outgoing kinetic trace
    v: float                   # fluid boundary datum sqrt(2 flux_out)
    u_trace: float             # fluid first-cell trace after the step
    layer_flux: float          # V actually fed to the layer (cone-projected)
    cone_defect: float         # max(0, flux_out - u_trace^2/2) before projection
    layer_class: str | None
    back_flux_values: np.ndarray | None
    interface_defect: float    # |flux(g) + flux(back) - V|, the trace flux balance
    layer_iterations: int
    layer_residual: float


@dataclass
class CoupledState:
    """Kinetic field on x < 0, fluid field on x > 0, and the interface log."""

    kinetic: KineticField
    fluid: FluidField
    far_left_inflow: np.ndarray | None = None
    layer: LayerProfile | None = None
    trace_log: list[InterfaceRecord] = dc_field(default_factory=list)

    def copy(self) -> "CoupledState":
        return CoupledState(
            kinetic=self.kinetic.copy(),
            fluid=self.fluid.copy(),
            far_left_inflow=None if self.far_left_inflow is None else self.far_left_inflow.copy(),
            layer=self.layer,
            trace_log=list(self.trace_log),
        )


def _negative_flux(values: np.ndarray, grid) -> float:
    """First moment restricted to xi < 0 (nonnegative for admissible data)."""
    neg = ~grid.positive
    return grid.dxi * float(np.dot(grid.centers[neg], values[neg]))


def coupled_step(state: CoupledState, dt: float, params: CouplingParams) -> CoupledState:
    """Advance the limit system by one step (see the module docstring).

    The flux V handed to the layer is projected onto the admissible cone
    when the first-cell trace transiently undershoots the incoming flux
    (an O(dx) effect while a boundary wave crosses the first cell); the raw
    defect is logged, and a defect beyond cone_defect_tol raises, since no
    admissible trace can be that far inside the cone boundary.
    """
    kin, fluid = state.kinetic, state.fluid
    g = outgoing_trace(kin, "right")
    flux_out = flux_moment(g)
    v = float(np.sqrt(max(2.0 * flux_out, 0.0)))

    new_fluid = fluid_step(fluid, v, dt)
    u0 = boundary_trace(new_fluid)

    v_raw = 0.5 * u0 * u0
    cone_defect = max(0.0, flux_out - v_raw)
    tol_cone = params.cone_defect_tol
    if tol_cone is None:
        tol_cone = 0.5 * kin.velocity.half_width**2
    if cone_defect > tol_cone:
        raise ConeError(
            f"fluid trace {u0} sits {cone_defect:.3e} inside the layer cone boundary"
        )
    layer_flux = max(v_raw, flux_out)

    data = LayerData(layer_flux, g)
    if classify(data, params.tol_class) is LayerClass.RELAXATION:
        # Zero returning half-range makes the layer causal in y; the single
        # march is exact and spares the sweep iteration, whose spectral gap
        # closes as the interface flux decays.
        layer = relaxation_layer_profile(data, params.layer_grid, params.tol_class)
    else:
        warm = None
        if params.warm_start and state.layer is not None:
            warm = state.layer.values
        layer = solve_layer(
            data,
            grid=params.layer_grid,
            tol_fix=params.tol_fix,
            max_iter=params.max_iter,
            tol_class=params.tol_class,
            start=warm,
        )
    returning = back_flux(layer)

    bc = InflowBoundary(left=state.far_left_inflow, right=returning.values)
    new_kin = kinetic_step(kin, bc, StiffnessProfile.uniform(kin.space, 1.0), dt)

    record = InterfaceRecord(
        time=new_kin.time,
        flux_out=flux_out,
        v=v,
        u_trace=u0,
        layer_flux=layer_flux,
        cone_defect=cone_defect,
        layer_class=layer.classification.value,
        back_flux_values=returning.values.copy(),
        interface_defect=abs(
            flux_out + _negative_flux(returning.values, kin.velocity) - layer_flux
        ),
        layer_iterations=layer.iterations,
        layer_residual=layer.last_change,
    )
    log = state.trace_log + [record]
    return CoupledState(new_kin, new_fluid, state.far_left_inflow, layer, log)


def naive_coupled_step(state: CoupledState, dt: float) -> CoupledState:
    """Advance the flux-identification coupling by one step.

    The fluid boundary flux is the kinetic outflux plus the negative
    semi-flux of the first cell (the upwind split of the boundary flux), and
    the kinetic domain receives the equilibrium of the updated fluid trace on
    its returning half-range.  No layer problem is solved.
    """
    kin, fluid = state.kinetic, state.fluid
    vgrid = kin.velocity
    g = outgoing_trace(kin, "right")
    flux_out = flux_moment(g)

    u_first = fluid.values[0]
    negative_semi_flux = -0.5 * min(u_first, 0.0) ** 2
    new_fluid = fluid_step_with_boundary_flux(fluid, flux_out + negative_semi_flux, dt)
    u0 = boundary_trace(new_fluid)

    eq = maxwellian_values(u0, vgrid)
    returning = np.where(vgrid.positive, 0.0, eq)
    bc = InflowBoundary(left=state.far_left_inflow, right=returning)
    new_kin = kinetic_step(kin, bc, StiffnessProfile.uniform(kin.space, 1.0), dt)

    record = InterfaceRecord(
        time=new_kin.time,
        flux_out=flux_out,
        v=float(np.sqrt(max(2.0 * flux_out, 0.0))),
        u_trace=u0,
        layer_flux=float("nan"),
        cone_defect=float("nan"),
        layer_class=None,
        back_flux_values=returning.copy(),
        interface_defect=float("nan"),
        layer_iterations=0,
        layer_residual=float("nan"),
    )
    log = state.trace_log + [record]
    return CoupledState(new_kin, new_fluid, state.far_left_inflow, None, log)


@dataclass
class Snapshot:
    time: float
    kinetic_values: np.ndarray
    fluid_values: np.ndarray
    kinetic_measure: float     # dx * dxi of the kinetic grid
    fluid_measure: float       # dx of the fluid grid


def run_coupled(
    state: CoupledState,
    dt: float,
    n_steps: int,
    params: CouplingParams,
    mode: str = "limit",
    log_every: int = 0,
) -> tuple[CoupledState, list[Snapshot]]:
    """March n_steps in the requested mode, optionally recording snapshots."""
    if mode not in ("limit", "naive"):
        raise ValueError(f"mode must be 'limit' or 'naive', got {mode!r}")
    snapshots: list[Snapshot] = []

    def record(s: CoupledState):
        snapshots.append(
            Snapshot(
                s.kinetic.time,
                s.kinetic.values.copy(),
                s.fluid.values.copy(),
                s.kinetic.space.dx * s.kinetic.velocity.dxi,
                s.fluid.grid.dx,
            )
        )

    if log_every:
        record(state)
    for n in range(n_steps):
        state = coupled_step(state, dt, params) if mode == "limit" else naive_coupled_step(state, dt)
        if log_every and ((n + 1) % log_every == 0 or n + 1 == n_steps):
            record(state)
    return state, snapshots


def state_distance(a: CoupledState, b: CoupledState) -> float:
    """L1 distance of the pair: kinetic (x, xi) norm plus fluid x norm."""
    return l1_field_distance(a.kinetic, b.kinetic) + l1_fluid_distance(a.fluid, b.fluid)


@dataclass
class ContractionReport:
    times: np.ndarray
    distances: np.ndarray
    slack: float
    ok: bool

    @property
    def initial(self) -> float:
        return float(self.distances[0])

    @property
    def peak_ratio(self) -> float:
        d0 = self.distances[0]
        return float(self.distances.max() / d0) if d0 > 0 else float("inf")


def contraction_check(
    first: list[Snapshot], second: list[Snapshot], slack: float = 0.05
) -> ContractionReport:
    """Compare two snapshot trajectories on common grids.

    The continuous system contracts the combined L1 distance; the discrete
    check allows a relative slack for first-order boundary wiggle.  Snapshots
    must have been taken at the same times on the same grids.
    """
    if len(first) != len(second) or not first:
        raise ValueError("trajectories must be nonempty and equally long")
    times = np.array([s.time for s in first])
    if not np.allclose(times, [s.time for s in second], atol=1e-12):
        raise ValueError("trajectories were not logged at the same times")
    dist = np.empty(len(first))
    for k, (a, b) in enumerate(zip(first, second)):
        if a.kinetic_values.shape != b.kinetic_values.shape or a.fluid_values.shape != b.fluid_values.shape:
            raise ValueError("snapshot shapes differ between the trajectories")
        dk = np.abs(a.kinetic_values - b.kinetic_values).sum() * a.kinetic_measure
        df = np.abs(a.fluid_values - b.fluid_values).sum() * a.fluid_measure
        dist[k] = dk + df
    ok = bool(np.all(dist <= dist[0] * (1.0 + slack) + 1e-14))
    return ContractionReport(times=times, distances=dist, slack=slack, ok=ok)
