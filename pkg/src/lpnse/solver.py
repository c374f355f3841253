"""Pseudospectral incompressible Navier-Stokes on the torus.

Integrating-factor RK4: the viscous semigroup is applied exactly through
exp(-nu |k|^2 dt) multipliers and the projected advection term is treated
with classical RK4 in the transformed variable.  The advection product is
formed on a 3/2 padded grid, so the Galerkin truncation conserves energy
through the nonlinearity to round-off and the energy balance measures
time-integration error only.

Twin runs integrate a base flow and a perturbed flow with identical
stepping so their snapshots align exactly in time.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import cumulative_simpson

from . import ensembles
from .errors import GridError, SolverAbort
from .field import (Field, SPECTRAL, _deriv_multiplier, _fftn, _fine_physical,
                    _leray_project_spec, _truncate_spectrum, advect,
                    from_components, l2_norm_spectral, laplacian,
                    leray_project, scale, spectral_data)
from .grid import Grid

INITIAL_CONDITIONS = ("taylor-green", "random-divfree")

_CONFIG_TYPES = {
    "dim": int, "n": int, "nu": float, "dt": float, "t_end": float,
    "ic": str, "seed": int, "slope": float, "ic_kmax": float,
    "snap_every": int, "cfl_safety": float, "dealias": bool,
}


@dataclass(frozen=True)
class SolverConfig:
    dim: int = 2
    n: int = 64
    nu: float = 1.0
    dt: float = 1e-3
    t_end: float = 0.5
    ic: str = "taylor-green"
    seed: int = 0
    slope: float = 2.0
    ic_kmax: float = 8.0
    snap_every: int = 10
    cfl_safety: float = 0.5
    dealias: bool = True

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("viscosity must be non-negative")
        if self.dt == 0 or self.t_end <= 0:
            raise ValueError("dt must be nonzero and t_end positive")
        if self.snap_every < 1:
            raise ValueError("snapshot cadence must be >= 1")
        if self.ic not in INITIAL_CONDITIONS:
            raise ValueError(f"unknown initial condition {self.ic!r}; "
                             f"choose from {INITIAL_CONDITIONS}")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SolverConfig":
        kwargs = {}
        for key, raw in mapping.items():
            if key not in _CONFIG_TYPES:
                raise ValueError(f"unknown config key {key!r}")
            typ = _CONFIG_TYPES[key]
            if typ is bool and isinstance(raw, str):
                low = raw.strip().lower()
                if low not in ("true", "false", "0", "1"):
                    raise ValueError(f"boolean key {key!r} got {raw!r}")
                kwargs[key] = low in ("true", "1")
            else:
                kwargs[key] = typ(raw)
        return cls(**kwargs)

    def to_mapping(self) -> dict:
        return {
            "dim": self.dim, "n": self.n, "nu": self.nu, "dt": self.dt,
            "t_end": self.t_end, "ic": self.ic, "seed": self.seed,
            "slope": self.slope, "ic_kmax": self.ic_kmax,
            "snap_every": self.snap_every, "cfl_safety": self.cfl_safety,
            "dealias": self.dealias,
        }


@dataclass
class Trajectory:
    """Snapshots plus per-step scalar series of one solver run."""

    config: SolverConfig
    grid: Grid
    times: np.ndarray
    snapshots: list
    series: dict
    cache: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.snapshots):
            raise ValueError("one snapshot per time required")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("snapshot times must increase strictly")

    def __len__(self):
        return len(self.snapshots)

    @property
    def final(self) -> Field:
        return self.snapshots[-1]

    def aligned_with(self, other: "Trajectory") -> bool:
        return (self.grid == other.grid and len(self) == len(other)
                and bool(np.all(self.times == other.times)))


def taylor_green(grid: Grid) -> Field:
    """The decaying vortex lattice; in 2D the nonlinearity is a pure
    gradient, so u(t) = u0 exp(-2 nu t) exactly."""
    if grid.dim == 2:
        return from_components(
            grid,
            lambda x, y: np.sin(x) * np.cos(y),
            lambda x, y: -np.cos(x) * np.sin(y),
        )
    return from_components(
        grid,
        lambda x, y, z: np.sin(x) * np.cos(y) * np.cos(z),
        lambda x, y, z: -np.cos(x) * np.sin(y) * np.cos(z),
        lambda x, y, z: np.zeros_like(z),
    )


def initial_condition(config: SolverConfig, grid: Grid) -> Field:
    if config.ic == "taylor-green":
        return taylor_green(grid)
    kmax = min(config.ic_kmax, grid.dealias_radius)
    u = ensembles.solenoidal_field(grid, kmax, config.seed, config.slope)
    norm = l2_norm_spectral(u)
    if norm == 0.0:
        raise ValueError("random initial condition is empty; increase ic_kmax")
    return scale(u, 1.0 / norm)


def nse_rhs(u: Field, nu: float, dealias: bool = True) -> Field:
    """-P(u.grad u) + nu Laplacian u, advection dealiased."""
    adv = advect(u, u, dealias)
    proj = leray_project(adv)
    rhs = -proj.data + nu * laplacian(u).data
    return Field(u.grid, rhs, SPECTRAL)


class _Integrator:
    """Precomputed multipliers for repeated IF-RK4 steps."""

    def __init__(self, grid: Grid, config: SolverConfig, dt: float = None):
        self.grid = grid
        self.config = config
        self.dt = config.dt if dt is None else dt
        self.e_half = np.exp(-config.nu * grid.k_sq * (self.dt / 2.0))
        self.e_full = self.e_half**2
        self.derivs = [
            _deriv_multiplier(grid, tuple(1 if a == axis else 0
                                          for a in range(grid.dim)))
            for axis in range(grid.dim)
        ]
        self.fine = 3 * grid.n // 2
        self.zero = (slice(None),) + (0,) * grid.dim

    def nonlinear(self, spec: np.ndarray):
        """Projected advection term and the max velocity magnitude."""
        grid = self.grid
        if self.config.dealias:
            vf = _fine_physical(spec, grid.n, self.fine, grid.dim)
            acc = np.zeros_like(vf)
            for axis in range(grid.dim):
                acc += vf[axis] * _fine_physical(spec * self.derivs[axis],
                                                 grid.n, self.fine, grid.dim)
            umax = float(np.sqrt(np.max(np.sum(vf**2, axis=0))))
            adv = _truncate_spectrum(_fftn(acc, grid.dim), self.fine, grid.n,
                                     grid.dim, 1)
        else:
            from .field import _ifftn
            vp = _ifftn(spec, grid.dim).real
            acc = np.zeros_like(vp)
            for axis in range(grid.dim):
                acc += vp[axis] * _ifftn(spec * self.derivs[axis], grid.dim).real
            umax = float(np.sqrt(np.max(np.sum(vp**2, axis=0))))
            adv = _fftn(acc, grid.dim)
        out = -_leray_project_spec(adv, grid)
        out[self.zero] = 0.0
        return out, umax

    def step(self, spec: np.ndarray, time: float, index: int) -> np.ndarray:
        dt = self.dt
        a, umax = self.nonlinear(spec)
        if umax > 0:
            dt_max = self.config.cfl_safety * self.grid.spacing / umax
            if abs(dt) > dt_max:
                raise SolverAbort(
                    "cfl",
                    f"advective CFL violated at t={time:.6g}: |dt|={abs(dt):.3g} "
                    f"> {dt_max:.3g} (umax={umax:.3g})",
                    time, index)
        e1, e2 = self.e_half, self.e_full
        b, _ = self.nonlinear(e1 * (spec + 0.5 * dt * a))
        c, _ = self.nonlinear(e1 * spec + 0.5 * dt * b)
        d, _ = self.nonlinear(e2 * spec + dt * e1 * c)
        out = e2 * spec + (dt / 6.0) * (e2 * a + 2.0 * e1 * (b + c) + d)
        return _leray_project_spec(out, self.grid)


def step(u: Field, config: SolverConfig, dt: float = None) -> Field:
    """One IF-RK4 step of the projected equations (public, stateless)."""
    grid = u.grid
    integ = _Integrator(grid, config, dt)
    out = integ.step(spectral_data(u), 0.0, 0)
    return Field(grid, out, SPECTRAL)


def run(config: SolverConfig, initial: Field = None) -> Trajectory:
    """Integrate from t=0 to t_end, recording snapshots on the cadence
    and per-step energy/dissipation series for the balance audit."""
    grid = Grid(config.dim, config.n)
    if initial is None:
        initial = initial_condition(config, grid)
    grid.require_same(initial.grid)
    if initial.ncomp != grid.dim:
        raise GridError("velocity field must have dim components")
    spec = spectral_data(leray_project(initial)).copy()
    nsteps = int(round(config.t_end / config.dt))
    if nsteps < 1 or abs(nsteps * config.dt - config.t_end) > 1e-9 * config.t_end:
        raise ValueError("t_end must be a whole number of steps")
    integ = _Integrator(grid, config)
    times, snaps = [], []
    s_t, s_energy, s_diss = [], [], []
    for i in range(nsteps + 1):
        t = i * config.dt
        energy = grid.volume * float(np.sum(np.abs(spec) ** 2))
        if not math.isfinite(energy):
            raise SolverAbort("nan", f"non-finite energy at t={t:.6g}", t, i)
        s_t.append(t)
        s_energy.append(energy)
        s_diss.append(grid.volume * float(np.sum(grid.k_sq * np.abs(spec) ** 2)))
        if i % config.snap_every == 0 or i == nsteps:
            times.append(t)
            snaps.append(Field(grid, spec.copy(), SPECTRAL))
        if i < nsteps:
            spec = integ.step(spec, t, i)
    series = {
        "t": np.asarray(s_t),
        "energy": np.asarray(s_energy),
        "grad_sq": np.asarray(s_diss),
    }
    return Trajectory(config, grid, np.asarray(times), snaps, series)


def energy_balance_residual(traj: Trajectory) -> float:
    """Max over time of |E(t) + 2 nu int grad^2 - E(0)| / E(0), with the
    dissipation integral accumulated by Simpson on the per-step series."""
    t = traj.series["t"]
    energy = traj.series["energy"]
    diss = traj.series["grad_sq"]
    if len(t) < 3:
        integral = np.concatenate([[0.0], np.cumsum(
            0.5 * (diss[1:] + diss[:-1]) * np.diff(t))])
    else:
        integral = cumulative_simpson(diss, x=t, initial=0.0)
    residual = np.abs(energy + 2.0 * traj.config.nu * integral - energy[0])
    return float(np.max(residual) / energy[0])


def perturbation_field(grid: Grid, seed: int, kmax: float = 8.0,
                       slope: float = 1.0) -> Field:
    """Divergence-free random perturbation, resolution-independent: the
    same (seed, kmax) gives the same continuum field on any grid that
    resolves it."""
    kmax = min(kmax, grid.dealias_radius)
    return ensembles.solenoidal_field(grid, kmax, seed, slope)


def twin_run(config: SolverConfig, delta: float, seed: int,
             base: Trajectory = None, pert_kmax: float = 8.0):
    """Integrate the base flow and a flow whose initial data is shifted
    by a divergence-free perturbation of relative size delta.

    Returns (base trajectory, perturbed trajectory) with identical
    stepping and aligned snapshot times.  Pass a previously computed
    base trajectory to amortize delta sweeps.
    """
    if delta < 0:
        raise ValueError("perturbation size must be non-negative")
    grid = Grid(config.dim, config.n)
    if base is None:
        base = run(config)
    elif base.config != config:
        raise ValueError("base trajectory was produced by a different config")
    u0 = base.snapshots[0]
    pert = perturbation_field(grid, seed, pert_kmax)
    pnorm = l2_norm_spectral(pert)
    factor = delta * l2_norm_spectral(u0) / pnorm if pnorm > 0 else 0.0
    if factor == 0.0:
        # v0 equals u0 exactly and the flow map is deterministic, so the
        # twin is the base trajectory bit for bit (a fresh container, so
        # downstream caches stay per-trajectory)
        twin = Trajectory(config, grid, base.times, list(base.snapshots),
                          dict(base.series))
        return base, twin
    v0 = Field(grid, spectral_data(u0) + factor * spectral_data(pert), SPECTRAL)
    twin = run(config, initial=v0)
    return base, twin
