"""Explicit finite-volume integrator for the radial flow equations.

Mass is advanced in the r**(N-1)-weighted conservative form, which absorbs
the geometric source exactly and keeps the discrete mass telescoping to
roundoff. Velocity is advanced in primitive form with a local Lax-Friedrichs
advective flux, an interface pressure gradient, and the radial force field;
vacuum cells are skipped. Compact support is enforced by zeroed margin cells
at the outer wall acting as the solid container boundary.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import diagnostics
from .model import (
    FluidState,
    ModelConfig,
    RadialGrid,
    pressure,
    sound_speed,
    validate_initial_data,
)
from .poisson import radial_field

NUM_GHOSTS = 2

#: Positivity slack and vacuum floor, both relative to the initial peak density.
POSITIVITY_REL_TOL = 1e-14
VACUUM_FLOOR_REL = 1e-12


class NumericalBreakdownError(ArithmeticError):
    """A tendency turned non-finite; carries the first offending cell index."""

    def __init__(self, cell_index: int, field: str):
        self.cell_index = cell_index
        self.field = field
        super().__init__(f"non-finite {field} tendency at cell {cell_index}")


class PositivityError(ArithmeticError):
    """Density dipped below the allowed roundoff band after a full step."""


class Termination(str, enum.Enum):
    REACHED_T_END = "reached_t_end"
    STEEPENING_DETECTED = "steepening_detected"
    DT_COLLAPSED = "dt_collapsed"
    POSITIVITY_VIOLATED = "positivity_violated"


@dataclass(frozen=True)
class NumericsConfig:
    """Resolution-independent numerical parameters of a run."""

    cfl: float = 0.4
    t_end: float = 1.0
    dt_floor: float = 1e-10
    steepening_threshold: float = 50.0
    output_stride: int = 10
    support_margin_cells: int = 2

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must be in (0, 1]")
        if self.t_end <= 0:
            raise ValueError("t_end must be > 0")
        if self.dt_floor <= 0:
            raise ValueError("dt_floor must be > 0")
        if self.steepening_threshold <= 0:
            raise ValueError("steepening_threshold must be > 0")
        if self.output_stride < 1:
            raise ValueError("output_stride must be >= 1")
        if self.support_margin_cells < 1:
            raise ValueError("support_margin_cells must be >= 1")


@dataclass(frozen=True)
class SteepeningDetection:
    """Location and value of a gradient-threshold crossing."""

    cell_index: int
    radius: float
    slope: float


@dataclass(frozen=True)
class Trajectory:
    """Stored snapshots plus how and when the run ended."""

    snapshots: tuple[FluidState, ...]
    termination: Termination
    t_detect: Optional[float]

    def __post_init__(self):
        times = [s.time for s in self.snapshots]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("snapshot times must be strictly increasing")
        detecting = self.termination in (
            Termination.STEEPENING_DETECTED,
            Termination.DT_COLLAPSED,
        )
        if detecting != (self.t_detect is not None):
            raise ValueError("t_detect must be present iff a singularity was flagged")


class RunResult(NamedTuple):
    trajectory: Trajectory
    series: diagnostics.DiagnosticsSeries
    report: diagnostics.RunReport


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def mirror_pad(rho: np.ndarray, vel: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Extend fields by NUM_GHOSTS cells: even/odd reflection at the origin,
    zeros beyond the outer wall."""
    g = NUM_GHOSTS
    zeros = np.zeros(g)
    rho_ext = np.concatenate((rho[:g][::-1], rho, zeros))
    vel_ext = np.concatenate((-vel[:g][::-1], vel, zeros))
    return rho_ext, vel_ext


def _interface_states(ext: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Minmod-limited left/right states at the n+1 interfaces of the interior."""
    slope = np.zeros_like(ext)
    slope[1:-1] = _minmod(ext[1:-1] - ext[:-2], ext[2:] - ext[1:-1])
    g = NUM_GHOSTS
    # interface j sits between extended cells (g-1+j, g+j), j = 0..n
    left = ext[g - 1 : -g] + 0.5 * slope[g - 1 : -g]
    right = ext[g : ext.size - g + 1] - 0.5 * slope[g : ext.size - g + 1]
    return left, right


def rhs_eval(
    state: FluidState,
    cfg: ModelConfig,
    grid: RadialGrid,
    num: NumericsConfig,
    rho_floor: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Discrete tendencies (drho/dt, dvel/dt) for one stage evaluation.

    Mass fluxes are hard-zeroed at the origin interface and at every
    interface at or beyond the wall margin, so the discrete mass telescopes
    exactly. Velocity tendencies vanish in vacuum cells.
    """
    n = grid.n_cells
    dr = grid.cell_width
    x = grid.interfaces
    r = grid.cell_centers
    dim = cfg.dim

    rho_ext, vel_ext = mirror_pad(state.rho, state.vel)
    rho_l, rho_r = _interface_states(rho_ext)
    vel_l, vel_r = _interface_states(vel_ext)
    rho_l = np.maximum(rho_l, 0.0)
    rho_r = np.maximum(rho_r, 0.0)

    a = np.maximum(
        np.abs(vel_l) + sound_speed(rho_l, cfg),
        np.abs(vel_r) + sound_speed(rho_r, cfg),
    )

    # mass flux rho*V with local Lax-Friedrichs dissipation, weighted by x**(N-1)
    f_mass = 0.5 * (rho_l * vel_l + rho_r * vel_r) - 0.5 * a * (rho_r - rho_l)
    flux = x ** (dim - 1) * f_mass
    flux[0] = 0.0
    flux[n - num.support_margin_cells :] = 0.0
    drho = -(flux[1:] - flux[:-1]) / (r ** (dim - 1) * dr)

    # velocity advection flux V**2/2 with the same dissipation speed
    g_adv = 0.25 * (vel_l**2 + vel_r**2) - 0.5 * a * (vel_r - vel_l)
    dvel = -(g_adv[1:] - g_adv[:-1]) / dr

    if cfg.pressure_const > 0.0:
        rho_face = 0.5 * (rho_l + rho_r)
        if cfg.gamma > 1.0:
            # pressure force per unit mass as an exact enthalpy gradient,
            # K*g/(g-1) * d(rho**(g-1))/dr: bounded at the vacuum edge
            h_face = (
                cfg.pressure_const
                * cfg.gamma
                / (cfg.gamma - 1.0)
                * rho_face ** (cfg.gamma - 1.0)
            )
            dvel = dvel - (h_face[1:] - h_face[:-1]) / dr
        else:
            p_face = pressure(rho_face, cfg)
            denom = np.where(state.rho > rho_floor, state.rho, 1.0)
            dvel = dvel - (p_face[1:] - p_face[:-1]) / (dr * denom)

    if cfg.delta != 0:
        field = radial_field(np.maximum(state.rho, 0.0), grid, cfg)
        dvel = dvel + field.phi_r

    dvel = np.where(state.rho > rho_floor, dvel, 0.0)

    for name, tendency in (("density", drho), ("velocity", dvel)):
        bad = ~np.isfinite(tendency)
        if bad.any():
            raise NumericalBreakdownError(int(np.argmax(bad)), name)
    return drho, dvel


def max_wave_speed(state: FluidState, cfg: ModelConfig) -> float:
    """Fastest signal speed max(|V| + c) over the cells."""
    return float(
        np.max(np.abs(state.vel) + sound_speed(np.maximum(state.rho, 0.0), cfg))
    )


def cfl_dt(
    state: FluidState, cfg: ModelConfig, num: NumericsConfig, grid: RadialGrid
) -> float:
    """Stable step cfl*dr/max(|V|+c), capped by the time left to t_end."""
    cap = max(num.t_end - state.time, 0.0)
    speed = max_wave_speed(state, cfg)
    if speed <= 0.0:
        return cap
    return min(num.cfl * grid.cell_width / speed, cap)


def apply_boundary(state: FluidState, num: NumericsConfig) -> FluidState:
    """Zero both fields over the wall margin cells; idempotent."""
    m = num.support_margin_cells
    rho = state.rho.copy()
    vel = state.vel.copy()
    rho[rho.size - m :] = 0.0
    vel[vel.size - m :] = 0.0
    return FluidState(time=state.time, rho=rho, vel=vel)


def step(
    state: FluidState,
    dt: float,
    cfg: ModelConfig,
    grid: RadialGrid,
    num: NumericsConfig,
    rho_floor: float = 0.0,
    positivity_tol: float = 0.0,
) -> FluidState:
    """One two-stage strong-stability-preserving Runge-Kutta step.

    The boundary margin is re-applied after each stage. Raises
    PositivityError when the full step leaves density below -positivity_tol.
    """
    k1_rho, k1_vel = rhs_eval(state, cfg, grid, num, rho_floor)
    mid = apply_boundary(
        FluidState(
            time=state.time + dt,
            rho=state.rho + dt * k1_rho,
            vel=state.vel + dt * k1_vel,
        ),
        num,
    )
    k2_rho, k2_vel = rhs_eval(mid, cfg, grid, num, rho_floor)
    new = apply_boundary(
        FluidState(
            time=state.time + dt,
            rho=0.5 * state.rho + 0.5 * (mid.rho + dt * k2_rho),
            vel=0.5 * state.vel + 0.5 * (mid.vel + dt * k2_vel),
        ),
        num,
    )
    rho_min = float(np.min(new.rho))
    if rho_min < -positivity_tol:
        raise PositivityError(
            f"density {rho_min:.3e} below -{positivity_tol:.3e} at t={new.time:.6g}"
        )
    return new


def detect_steepening(
    state: FluidState, grid: RadialGrid, num: NumericsConfig
) -> Optional[SteepeningDetection]:
    """Central-difference gradient check against the steepening threshold."""
    slope, idx = diagnostics.max_velocity_gradient(state, grid)
    if slope > num.steepening_threshold:
        return SteepeningDetection(
            cell_index=idx, radius=float(grid.cell_centers[idx]), slope=slope
        )
    return None


def run(
    rho0: np.ndarray,
    v0: np.ndarray,
    cfg: ModelConfig,
    num: NumericsConfig,
) -> RunResult:
    """Advance the initial data until t_end or a termination event.

    Initial data must be nonnegative with exact zeros over the wall margin.
    Diagnostics and a snapshot are recorded every ``output_stride`` steps and
    at the final state; the report carries the bound comparison and verdict.
    """
    rho0 = np.asarray(rho0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    grid = RadialGrid(n_cells=rho0.size, support_radius=cfg.support_radius)
    check = validate_initial_data(
        rho0, v0, grid, cfg, margin_cells=num.support_margin_cells
    )
    if not check.admissible:
        problems = []
        if not check.rho_nonnegative:
            problems.append("density must be nonnegative")
        if not check.compact_support:
            problems.append("fields must vanish over the wall margin cells")
        raise ValueError("inadmissible initial data: " + "; ".join(problems))

    rho_peak = float(np.max(rho0))
    rho_floor = VACUUM_FLOOR_REL * rho_peak
    pos_tol = POSITIVITY_REL_TOL * rho_peak
    h0 = check.h0
    t_bound = diagnostics.blowup_time_bound(h0, cfg.support_radius) if h0 > 0 else None
    applicable = h0 > 0 and cfg.delta >= 0 and check.eos_in_scope

    state = apply_boundary(FluidState(time=0.0, rho=rho0.copy(), vel=v0.copy()), num)

    snapshots: list[FluidState] = []
    times: list[float] = []
    h_list: list[float] = []
    mass_list: list[float] = []
    energy_list: list[float] = []
    env_list: list[float] = []
    gap_list: list[float] = []
    grad_list: list[float] = []

    def record(s: FluidState):
        snapshots.append(s)
        times.append(s.time)
        h_list.append(diagnostics.blowup_functional(s, grid))
        mass_list.append(diagnostics.total_mass(s, grid, cfg))
        energy_list.append(diagnostics.energy_condition(s, grid, cfg).lhs)
        if applicable and s.time < t_bound * (1.0 - 1e-12):
            env_list.append(
                float(diagnostics.lower_envelope(s.time, h0, cfg.support_radius))
            )
        else:
            env_list.append(float("nan"))
        gap_list.append(diagnostics.cauchy_schwarz_gap(s, grid))
        grad_list.append(diagnostics.max_velocity_gradient(s, grid)[0])

    record(state)

    termination = Termination.REACHED_T_END
    t_detect: Optional[float] = None
    t_eps = 1e-12 * max(1.0, num.t_end)
    steps = 0
    while state.time < num.t_end - t_eps:
        speed = max_wave_speed(state, cfg)
        if speed > 0.0 and num.cfl * grid.cell_width / speed < num.dt_floor:
            termination = Termination.DT_COLLAPSED
            t_detect = state.time
            break
        dt = cfl_dt(state, cfg, num, grid)
        try:
            state = step(state, dt, cfg, grid, num, rho_floor, pos_tol)
        except PositivityError:
            termination = Termination.POSITIVITY_VIOLATED
            break
        steps += 1
        detection = detect_steepening(state, grid, num)
        if detection is not None:
            record(state)
            termination = Termination.STEEPENING_DETECTED
            t_detect = state.time
            break
        if steps % num.output_stride == 0:
            record(state)

    if times[-1] < state.time:
        record(state)

    if len(times) >= 2:
        res = diagnostics.riccati_residuals(h_list, times, cfg.support_radius)
    else:
        res = np.asarray([], dtype=float)
    series = diagnostics.DiagnosticsSeries(
        times=np.asarray(times),
        h_values=np.asarray(h_list),
        mass_values=np.asarray(mass_list),
        energy_values=np.asarray(energy_list),
        riccati_residuals=np.append(res, np.nan),
        envelope_values=np.asarray(env_list),
        cauchy_gaps=np.asarray(gap_list),
        max_gradients=np.asarray(grad_list),
    )
    report = diagnostics.build_report(
        series,
        cfg,
        h0=h0,
        n_cells=grid.n_cells,
        t_final=state.time,
        termination=termination.value,
        t_detect=t_detect,
    )
    trajectory = Trajectory(
        snapshots=tuple(snapshots), termination=termination, t_detect=t_detect
    )
    return RunResult(trajectory=trajectory, series=series, report=report)
