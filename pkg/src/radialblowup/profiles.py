"""Initial-data families: compactly supported bumps with known structure.

Every builder returns fields with exact zeros over the outer wall margin and,
where the family has closed-form expressions, callables for the velocity
profile and its derivative (used by the characteristic oracle).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import RadialGrid

FAMILIES = ("polynomial_bump", "gaussian_truncated", "random_smooth")


@dataclass(frozen=True)
class InitialProfile:
    rho0: np.ndarray
    v0: np.ndarray
    v_of_r: Optional[Callable[[np.ndarray], np.ndarray]]
    dv_dr: Optional[Callable[[np.ndarray], np.ndarray]]


def _zero_margin(fields: list[np.ndarray], n_cells: int, margin: int) -> None:
    for f in fields:
        f[n_cells - margin :] = 0.0


def polynomial_bump(
    grid: RadialGrid,
    margin: int,
    velocity_amplitude: float = 1.0,
    density_amplitude: float = 1.0,
) -> InitialProfile:
    """V0 = a*r*(1 - r/R), rho0 = b*(1 - (r/R)**2)**2.

    For R = 1 and unit amplitude the momentum integral is 1/12 up to
    quadrature error, so the lifespan bound evaluates to about 6.
    """
    R = grid.support_radius
    r = grid.cell_centers
    v0 = velocity_amplitude * r * (1.0 - r / R)
    rho0 = density_amplitude * (1.0 - (r / R) ** 2) ** 2
    _zero_margin([rho0, v0], grid.n_cells, margin)

    def v_of_r(s):
        s = np.asarray(s, dtype=float)
        return velocity_amplitude * s * (1.0 - s / R)

    def dv_dr(s):
        s = np.asarray(s, dtype=float)
        return velocity_amplitude * (1.0 - 2.0 * s / R)

    return InitialProfile(rho0=rho0, v0=v0, v_of_r=v_of_r, dv_dr=dv_dr)


def gaussian_truncated(
    grid: RadialGrid,
    margin: int,
    velocity_amplitude: float = 1.0,
    density_amplitude: float = 1.0,
    width: float = 0.25,
) -> InitialProfile:
    """Gaussian-enveloped fields, hard-truncated to zero over the margin."""
    if width <= 0:
        raise ValueError("width must be > 0")
    R = grid.support_radius
    r = grid.cell_centers
    w = width * R
    v0 = velocity_amplitude * (r / R) * np.exp(-((r / w) ** 2))
    rho0 = density_amplitude * np.exp(-((r / w) ** 2))
    _zero_margin([rho0, v0], grid.n_cells, margin)

    def v_of_r(s):
        s = np.asarray(s, dtype=float)
        return velocity_amplitude * (s / R) * np.exp(-((s / w) ** 2))

    def dv_dr(s):
        s = np.asarray(s, dtype=float)
        return (
            velocity_amplitude
            / R
            * np.exp(-((s / w) ** 2))
            * (1.0 - 2.0 * s**2 / w**2)
        )

    return InitialProfile(rho0=rho0, v0=v0, v_of_r=v_of_r, dv_dr=dv_dr)


def random_smooth(
    grid: RadialGrid,
    margin: int,
    seed: int,
    velocity_amplitude: float = 1.0,
    density_amplitude: float = 1.0,
    modes: int = 3,
) -> InitialProfile:
    """Seeded low-mode random fields under a compact polynomial envelope.

    Reproducible: the same seed yields bit-identical fields.
    """
    if modes < 1:
        raise ValueError("modes must be >= 1")
    rng = np.random.default_rng(seed)
    R = grid.support_radius
    r = grid.cell_centers
    envelope = (1.0 - (r / R) ** 2) ** 2

    k = np.arange(1, modes + 1)
    cv = rng.uniform(-1.0, 1.0, modes) / k
    cd = rng.uniform(-1.0, 1.0, modes) / k
    phases = np.sin(np.pi * np.outer(k, r) / R)  # (modes, n)

    v0 = velocity_amplitude * envelope * (r / R) * (cv @ phases)
    # bounded mode sum keeps the density strictly positive inside the support
    wiggle = (cd @ phases) / (2.0 * np.sum(np.abs(cd)) + 1e-300)
    rho0 = density_amplitude * envelope * (1.0 + wiggle)
    _zero_margin([rho0, v0], grid.n_cells, margin)
    return InitialProfile(rho0=rho0, v0=v0, v_of_r=None, dv_dr=None)


FAMILY_PARAMS = {
    "polynomial_bump": {"velocity_amplitude", "density_amplitude"},
    "gaussian_truncated": {"velocity_amplitude", "density_amplitude", "width"},
    "random_smooth": {"velocity_amplitude", "density_amplitude", "modes"},
}


def build_initial_profile(
    family: str,
    params: dict,
    seed: int,
    grid: RadialGrid,
    margin: int,
) -> InitialProfile:
    """Dispatch to the named family; unknown family or parameter raises."""
    if family not in FAMILY_PARAMS:
        raise ValueError(f"unknown profile family '{family}'; choose from {FAMILIES}")
    unknown = set(params) - FAMILY_PARAMS[family]
    if unknown:
        raise ValueError(
            f"family '{family}' does not accept parameters {sorted(unknown)}"
        )
    if family == "polynomial_bump":
        return polynomial_bump(grid, margin, **params)
    if family == "gaussian_truncated":
        return gaussian_truncated(grid, margin, **params)
    return random_smooth(grid, margin, seed=seed, **params)
