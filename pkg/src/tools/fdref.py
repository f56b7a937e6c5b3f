"""
Explicit finite-difference reference solver for large-strain consolidation.

Solves the conservative form

    J_t = (1/phi0^3) d/dX [ D_i(J) dJ/dX ]

with forward Euler in time and centred fluxes in space. Interface
diffusivities use the arithmetic mean of the neighbouring nodes. X=0 is a
Dirichlet node (J = J_bar from the first step on), X=1 is a no-flow boundary
closed by a mirror ghost node.
"""

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from src.core.exceptions import ConfigError, DomainError, NumericalError, UnstableSchemeError
from src.core.file_operations import load_csv, save_csv
from src.core.logger import logger
from src.models.constitutive import as_law, diffusivity


def _default_snapshots():
    return tuple((np.arange(100) + 1) / 100)


@dataclass(frozen=True)
class FdGridSpec:
    """Grid and output times of an FD run.

    Args:
        dx: Spatial step, 1/dx must be an integer.
        dt: Time step.
        t_end: Final time.
        snapshot_times: Times to record; each maps to the nearest step.
    """

    dx: float = 0.02
    dt: float = 1e-5
    t_end: float = 1.0
    snapshot_times: tuple = field(default_factory=_default_snapshots)

    def __post_init__(self):
        cells = 1.0 / self.dx if self.dx > 0 else 0.0
        if self.dx <= 0 or abs(cells - round(cells)) > 1e-9:
            raise ConfigError(f"1/dx must be a positive integer, got dx={self.dx}")
        if self.dt <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_end <= 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))
        for t in self.snapshot_times:
            if not 0.0 <= t <= self.t_end + 1e-12:
                raise ConfigError(f"Snapshot time {t} lies outside [0, {self.t_end}]")

    @property
    def n_cells(self):
        return int(round(1.0 / self.dx))

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))

    def nodes(self):
        return np.arange(self.n_cells + 1) / self.n_cells


@dataclass
class SolutionGrid:
    """J on nodes x at snapshot times t; j has shape (len(t), len(x))."""

    x: np.ndarray
    t: np.ndarray
    j: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.t = np.asarray(self.t, dtype=np.float64)
        self.j = np.asarray(self.j, dtype=np.float64)
        if self.j.shape != (self.t.size, self.x.size):
            raise ValueError(f"Solution values have shape {self.j.shape}, "
                             f"expected ({self.t.size}, {self.x.size})")
        if not np.all(np.isfinite(self.j)):
            raise NumericalError("Solution grid contains non-finite values")

    def to_frame(self):
        """Rows ordered by snapshot, then node: x_hat, t_hat, j."""
        tt, xx = np.meshgrid(self.t, self.x, indexing="ij")
        return pd.DataFrame({"x_hat": xx.ravel(), "t_hat": tt.ravel(), "j": self.j.ravel()})

    @classmethod
    def from_frame(cls, frame):
        missing = {"x_hat", "t_hat", "j"} - set(frame.columns)
        if missing:
            raise ConfigError(f"Solution grid CSV is missing columns {sorted(missing)}")
        x = np.unique(frame["x_hat"].to_numpy())
        t = np.unique(frame["t_hat"].to_numpy())
        if len(frame) != x.size * t.size:
            raise ConfigError("Solution grid CSV is not a full (t, x) lattice")
        ordered = frame.sort_values(["t_hat", "x_hat"], kind="mergesort")
        return cls(x, t, ordered["j"].to_numpy().reshape(t.size, x.size))


def save_solution_grid(grid, filepath):
    """Write a SolutionGrid as CSV (x_hat, t_hat, j)."""
    save_csv(grid.to_frame(), filepath)


def load_solution_grid(filepath):
    """Read a SolutionGrid written by save_solution_grid."""
    return SolutionGrid.from_frame(load_csv(filepath))


def max_scaled_diffusivity(law, props, spacing=1e-3):
    """Largest D_i(J)/phi0^3 over J in [J_bar, 1], scanned on a uniform grid."""
    count = int(round((1.0 - props.j_bar) / spacing)) + 1
    j = np.linspace(props.j_bar, 1.0, max(count, 2))
    return float(np.max(diffusivity(law, j, props)) / props.phi0_cubed)


def stability_bound(law, props, dx):
    """Largest stable time step dx^2 / (2 max D_i/phi0^3) of the explicit scheme."""
    return dx ** 2 / (2.0 * max_scaled_diffusivity(law, props))


def stability_check(law, props, spec):
    """Largest stable time step of the explicit scheme.

    Args:
        law (LawId or int): Constitutive law.
        props (MaterialProps): Material constants.
        spec (FdGridSpec): Grid to check.

    Returns:
        float: dx^2 / (2 max D_i/phi0^3).

    Raises:
        UnstableSchemeError: If spec.dt exceeds the bound.
    """
    bound = stability_bound(law, props, spec.dx)
    if spec.dt > bound:
        raise UnstableSchemeError(
            f"Time step {spec.dt:g} exceeds the stability bound {bound:g} "
            f"for law {int(as_law(law))} at dx={spec.dx:g}", bound)
    return bound


def _step(j, law, props, dx, dt):
    """One forward-Euler update of all nodes except the Dirichlet node."""
    # Mirror ghost node at X=1: J_{K+1} = J_{K-1}.
    padded = np.concatenate([j, j[-2:-1]])
    mid = 0.5 * (padded[:-1] + padded[1:])
    flux = diffusivity(law, mid, props) * (padded[1:] - padded[:-1]) / dx
    updated = j.copy()
    updated[1:] = j[1:] + dt / props.phi0_cubed * (flux[1:] - flux[:-1]) / dx
    return updated


def fd_solve(law, props, spec):
    """March the reference solution to t_end and record snapshots.

    Args:
        law (LawId or int): Constitutive law.
        props (MaterialProps): Material constants.
        spec (FdGridSpec): Grid and snapshot times.

    Returns:
        SolutionGrid: J at the requested snapshots.

    Raises:
        UnstableSchemeError: If the time step is too large.
        DomainError: If J reaches 1 - phi0 (with node and step).
        NumericalError: If the state becomes non-finite.
    """
    law = as_law(law)
    stability_check(law, props, spec)
    x = spec.nodes()
    n_steps = spec.n_steps
    wanted = {}
    for slot, t in enumerate(spec.snapshot_times):
        wanted.setdefault(int(round(t / spec.dt)), []).append(slot)

    snapshots = np.empty((len(spec.snapshot_times), x.size))
    j = np.ones_like(x)
    for slot in wanted.get(0, []):
        snapshots[slot] = j

    logger.info(f"FD solve law {int(law)}: dx={spec.dx:g}, dt={spec.dt:g}, {n_steps} steps")
    j[0] = props.j_bar
    for step in range(1, n_steps + 1):
        try:
            j = _step(j, law, props, spec.dx, spec.dt)
        except DomainError as e:
            raise DomainError(f"FD law {int(law)} step {step}: {e}", index=e.index) from e
        if not np.all(np.isfinite(j)):
            node = int(np.flatnonzero(~np.isfinite(j))[0])
            raise NumericalError(f"FD law {int(law)} became non-finite at node {node}, step {step}")
        for slot in wanted.get(step, []):
            snapshots[slot] = j

    late = [k for k in wanted if k > n_steps]
    if late:
        raise ConfigError(f"Snapshot steps {late} lie beyond the final step {n_steps}")
    return SolutionGrid(x, np.asarray(spec.snapshot_times), snapshots)


def interpolate(grid, x_hat, t_hat):
    """Bilinear interpolation of a SolutionGrid.

    Exact at stored nodes and snapshots. Works elementwise on arrays.

    Args:
        grid (SolutionGrid): Reference solution.
        x_hat (float or numpy.ndarray): Query positions.
        t_hat (float or numpy.ndarray): Query times.

    Returns:
        float or numpy.ndarray: Interpolated J.

    Raises:
        ConfigError: If a query lies outside the grid hull.
    """
    x = np.asarray(x_hat, dtype=np.float64)
    t = np.asarray(t_hat, dtype=np.float64)
    x, t = np.broadcast_arrays(x, t)
    tol = 1e-12
    outside = (x < grid.x[0] - tol) | (x > grid.x[-1] + tol) | (t < grid.t[0] - tol) | (t > grid.t[-1] + tol)
    if np.any(outside):
        first = int(np.flatnonzero(np.atleast_1d(outside))[0])
        raise ConfigError(f"Query ({np.atleast_1d(x)[first]}, {np.atleast_1d(t)[first]}) "
                         f"lies outside the grid hull")

    def bracket(axis, q):
        if axis.size == 1:
            zeros = np.zeros(q.shape, dtype=np.int64)
            return zeros, zeros, np.zeros(q.shape)
        hi = np.clip(np.searchsorted(axis, q, side="right"), 1, axis.size - 1)
        lo = hi - 1
        weight = np.clip((q - axis[lo]) / (axis[hi] - axis[lo]), 0.0, 1.0)
        return lo, hi, weight

    x_lo, x_hi, wx = bracket(grid.x, x)
    t_lo, t_hi, wt = bracket(grid.t, t)
    values = ((1.0 - wt) * ((1.0 - wx) * grid.j[t_lo, x_lo] + wx * grid.j[t_lo, x_hi])
              + wt * ((1.0 - wx) * grid.j[t_hi, x_lo] + wx * grid.j[t_hi, x_hi]))
    return float(values) if values.ndim == 0 else values


def _fitting_step(law, props, dx, t_end, fraction=0.5):
    """Largest step below fraction * stability bound that divides t_end."""
    n_steps = int(np.ceil(t_end / (fraction * stability_bound(law, props, dx))))
    return t_end / n_steps


def convergence_study(law, props, dx=0.05, dt=None, t_end=1.0, spatial_dt=None):
    """Self-convergence factors of the scheme.

    Spatial: errors at dx and dx/2 against a dx/8 reference, all with the
    same small time step so temporal error cancels. Temporal: errors at dt
    and dt/2 against a dt/16 reference on the same grid. Errors are RMS over
    the coarse nodes at t_end.

    Args:
        law (LawId or int): Constitutive law.
        props (MaterialProps): Material constants.
        dx (float): Coarsest spatial step.
        dt (float, optional): Coarsest time step of the temporal study.
            Defaults to half the stability bound at dx.
        t_end (float): Comparison time.
        spatial_dt (float, optional): Time step shared by the spatial study.
            Defaults to half the stability bound at dx/8.

    Returns:
        dict: {"spatial": factor, "temporal": factor}; ~4 and ~2 expected.

    Raises:
        UnstableSchemeError: If an explicit dt or spatial_dt is too large.
    """
    if dt is None:
        dt = _fitting_step(law, props, dx, t_end)
    if spatial_dt is None:
        spatial_dt = _fitting_step(law, props, dx / 8.0, t_end)

    def run(step_x, step_t):
        spec = FdGridSpec(dx=step_x, dt=step_t, t_end=t_end, snapshot_times=(t_end,))
        return fd_solve(law, props, spec)

    def error(coarse, reference):
        ref_on_coarse = interpolate(reference, coarse.x, np.full(coarse.x.size, t_end))
        return float(np.sqrt(np.mean((coarse.j[-1] - ref_on_coarse) ** 2)))

    reference = run(dx / 8.0, spatial_dt)
    spatial = error(run(dx, spatial_dt), reference) / error(run(dx / 2.0, spatial_dt), reference)

    reference = run(dx, dt / 16.0)
    temporal = error(run(dx, dt), reference) / error(run(dx, dt / 2.0), reference)
    logger.info(f"Convergence law {int(as_law(law))}: spatial factor {spatial:.3f}, "
                f"temporal factor {temporal:.3f}")
    return {"spatial": spatial, "temporal": temporal}

