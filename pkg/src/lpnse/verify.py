"""Property suites behind `lpnse verify`.

Each suite runs fixed-seed randomized checks of the exact identities and
measured-constant bounds, returning a row table (check, measured, bound,
ok).  The bony suite accepts dealias=False as a deliberate negative
control: skipping the padded products breaks the orthogonality and
decomposition identities, and the suite is expected to fail loudly.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import ensembles
from .besov import bkm_ratio
from .blocks import (bernstein_report, block_indices, block_multiplier,
                     delta_j, reconstruct, reverse_bernstein_report, s_j)
from .cutoffs import DEFAULT_CUTOFFS
from .field import (Field, SPECTRAL, advect, dealiased_product, divergence,
                    gradient, h1_seminorm, inner, l2_norm_spectral,
                    leray_project, scale, spectral_data)
from .grid import Grid
from .paraproduct import bony_decomposition, commutator, commutator_bound_ratio
from .solver import (SolverConfig, energy_balance_residual,
                     initial_condition, run)

SUITES = ("lp", "bony", "bernstein", "bkm", "solver")


@dataclass
class SuiteResult:
    name: str
    rows: list = dc_field(default_factory=list)
    reports: dict = dc_field(default_factory=dict)

    def add(self, check: str, measured: float, bound: float, ok=None):
        if ok is None:
            ok = measured <= bound
        self.rows.append((check, float(measured), float(bound), bool(ok)))

    @property
    def passed(self) -> bool:
        return all(ok for _, _, _, ok in self.rows)

    def table(self) -> str:
        width = max(len(r[0]) for r in self.rows) if self.rows else 10
        lines = [f"suite: {self.name}"]
        for check, measured, bound, ok in self.rows:
            flag = "ok  " if ok else "FAIL"
            lines.append(f"  [{flag}] {check:<{width}}  measured={measured:.6e}"
                         f"  bound={bound:.6e}")
        lines.append(f"  => {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def suite_lp(n: int = 32, seed: int = 0) -> SuiteResult:
    """Partition of unity, reconstruction, orthogonality, telescoping,
    and the dissipation lower bound."""
    res = SuiteResult("lp")
    cut = DEFAULT_CUTOFFS
    rng = np.random.default_rng(seed)

    grid3 = Grid(3, n)
    sample = np.linspace(0.0, 2.0**grid3.jmax, 4097)
    part = cut.partition(sample, grid3.jmax)
    res.add("partition residual (radial, r <= 2^jmax)",
            float(np.max(np.abs(part - 1.0))), 1e-14)
    lattice = grid3.k_mag[grid3.k_mag <= 2.0**grid3.jmax]
    part_lat = cut.partition(lattice, grid3.jmax)
    res.add("partition residual (lattice)",
            float(np.max(np.abs(part_lat - 1.0))), 1e-14)
    res.add("chi plateau and support",
            abs(cut.chi(0.5) - 1.0) + abs(cut.chi(1.5)), 0.0,
            ok=(cut.chi(0.5) == 1.0 and cut.chi(1.5) == 0.0))
    res.add("phi support edges", abs(cut.phi(0.7)) + abs(cut.phi(2.7)), 0.0,
            ok=(cut.phi(0.7) == 0.0 and cut.phi(2.7) == 0.0))

    f = ensembles.band_noise(grid3, rng)
    err = l2_norm_spectral(
        Field(grid3, reconstruct(f).data - spectral_data(f), SPECTRAL))
    res.add("reconstruction residual", err / l2_norm_spectral(f), 1e-12)

    worst = 0.0
    for j in block_indices(grid3):
        for k in block_indices(grid3):
            if abs(j - k) >= 2:
                worst = max(worst, l2_norm_spectral(
                    delta_j(delta_j(f, k), j)) / l2_norm_spectral(f))
    res.add("block orthogonality |j-k|>=2", worst, 1e-13)

    grid2 = Grid(2, max(n, 64))
    g = ensembles.band_noise(grid2, rng)
    gnorm = l2_norm_spectral(g)
    worst = 0.0
    for k in block_indices(grid2):
        for j in block_indices(grid2):
            if abs(j - k) >= 5:
                prod = dealiased_product(s_j(g, k - 1), delta_j(g, k))
                worst = max(worst, l2_norm_spectral(delta_j(prod, j)) / gnorm**2)
    res.add("paraproduct orthogonality |j-k|>=5", worst, 1e-12)

    worst = 0.0
    for j in range(0, grid3.jmax + 1):
        diff = (block_multiplier(grid3, j + 1, kind="low")
                - block_multiplier(grid3, j, kind="low")
                - block_multiplier(grid3, j))
        worst = max(worst, float(np.max(np.abs(diff))))
    res.add("telescoping S_{j+1}-S_j = block_j", worst, 1e-15)

    res.add("conventions block(-2)=0 and block(-1)=S_0",
            float(np.max(np.abs(delta_j(f, -2).data)))
            + l2_norm_spectral(Field(grid3, delta_j(f, -1).data - s_j(f, 0).data,
                                     SPECTRAL)), 1e-15)

    worst = math.inf
    for j in range(0, grid3.jmax + 1):
        fj = delta_j(ensembles.band_noise(grid3, rng), j)
        nj = l2_norm_spectral(fj)
        if nj == 0:
            continue
        worst = min(worst, h1_seminorm(fj) ** 2 / ((0.75 * 2.0**j) ** 2 * nj**2))
    res.add("dissipation bound inverse margin (<= 1)", 1.0 / worst, 1.0)

    phi = ensembles.band_noise(grid3, rng)
    grad = gradient(phi)
    res.add("leray projector kills gradients",
            l2_norm_spectral(leray_project(grad)) / l2_norm_spectral(grad),
            1e-13)
    return res


def suite_bony(n: int = 32, seed: int = 1, pairs: int = 10,
               dealias: bool = True) -> SuiteResult:
    """Decomposition identity, support bookkeeping, cancellations, and
    the commutator checks.

    Residuals are always measured against the dealiased (projected)
    product, so running with dealias=False exposes the aliasing error
    instead of cancelling it on both sides.  The full-spectrum inputs
    exist for the same reason: products of band-limited fields alias so
    mildly that skipping the padding would go unnoticed."""
    res = SuiteResult("bony")
    rng = np.random.default_rng(seed)
    grid = Grid(3, n)
    full = grid.n / 2.0 - 1.0   # widest band clear of the Nyquist planes
    recon = 0.375 * grid.n      # blocks reconstruct only below (3/4) 2^{jmax+1}

    worst = 0.0
    for _ in range(pairs):
        u = ensembles.band_noise(grid, rng)
        v = ensembles.band_noise(grid, rng)
        parts = bony_decomposition(u, v, dealias=dealias)
        prod = dealiased_product(u, v)
        err = l2_norm_spectral(
            Field(grid, parts.total().data - prod.data, SPECTRAL))
        worst = max(worst, err / l2_norm_spectral(prod))
    res.add("bony residual (relative)", worst, 1e-12)

    fu = ensembles.band_noise(grid, rng, kmax=recon)
    fv = ensembles.band_noise(grid, rng, kmax=recon)
    parts = bony_decomposition(fu, fv, dealias=dealias)
    prod = dealiased_product(fu, fv)
    res.add("bony residual (reconstruction band)",
            l2_norm_spectral(Field(grid, parts.total().data - prod.data,
                                   SPECTRAL)) / l2_norm_spectral(prod),
            1e-12)

    u = ensembles.band_noise(grid, rng)
    v = ensembles.band_noise(grid, rng)
    worst = 0.0
    for j in range(1, grid.jmax + 1):
        term = dealiased_product(s_j(u, j - 1), delta_j(v, j), dealias=dealias)
        lo, hi = 2.0**j * (0.75 - 2.0 / 3.0), 2.0**j * (8.0 / 3.0 + 2.0 / 3.0)
        outside = (grid.k_mag < lo - 1e-9) | (grid.k_mag > hi + 1e-9)
        worst = max(worst, float(np.max(np.abs(term.data[:, outside]))))
    res.add("paraproduct term support (exact zeros outside annuli)",
            worst, 1e-13)

    vdf = ensembles.divfree_noise(grid, rng, kmax=full)
    g = ensembles.band_noise(grid, rng, kmax=full)
    cancel = abs(inner(advect(vdf, g, dealias=dealias), g))
    scale = l2_norm_spectral(vdf) * l2_norm_spectral(g) * h1_seminorm(g)
    res.add("divergence-free cancellation <v.grad g, g>",
            cancel / scale, 1e-11)

    w = ensembles.divfree_noise(grid, rng, kmax=full)
    worst = 0.0
    for j in range(0, grid.jmax + 1):
        w_j = delta_j(w, j)
        for jp in range(max(-1, j - 1), min(grid.jmax, j + 1) + 1):
            val = abs(inner(advect(delta_j(vdf, jp), w_j, dealias=dealias), w_j))
            s = max(l2_norm_spectral(delta_j(vdf, jp))
                    * l2_norm_spectral(w_j) * h1_seminorm(w_j), 1e-30)
            worst = max(worst, val / s)
    res.add("block cancellation <grad w_j . v_j', w_j>", worst, 1e-11)

    vband = ensembles.divfree_noise(grid, rng)
    wband = ensembles.divfree_noise(grid, rng)
    const = Field(grid, np.zeros((3,) + grid.shape, dtype=np.complex128), SPECTRAL)
    data = const.data.copy()
    data[(slice(None),) + (0,) * grid.dim] = [0.7, -0.3, 1.1]
    const = Field(grid, data, SPECTRAL)
    czero = max(l2_norm_spectral(commutator(const, j, wband, dealias=dealias))
                for j in range(0, grid.jmax + 1))
    res.add("commutator vanishes for constant drift", czero, 1e-13)

    com1 = commutator(vband, 1, wband, dealias=dealias)
    com2 = commutator(Field(grid, 2.0 * vband.data, SPECTRAL), 1, wband,
                      dealias=dealias)
    lin = l2_norm_spectral(Field(grid, com2.data - 2.0 * com1.data, SPECTRAL))
    res.add("commutator linearity in drift",
            lin / max(l2_norm_spectral(com1), 1e-30), 1e-12)

    ratios = {j: commutator_bound_ratio(vband, j, wband)
              for j in range(1, grid.jmax + 1)}
    res.add("commutator bound constant", max(ratios.values()), 1.0)
    top = ratios[grid.jmax] / ratios[grid.jmax - 1]
    res.add("commutator constant saturation at top shells",
            max(top, 1.0 / top), 4.0)
    return res


def suite_bernstein(n: int = 64, seed: int = 7, ensemble: int = 100) -> SuiteResult:
    res = SuiteResult("bernstein")
    grid = Grid(3, n)
    fwd = bernstein_report(grid, ensemble=ensemble, seed=seed)
    rev = reverse_bernstein_report(grid, ensemble=ensemble, seed=seed)
    res.reports["bernstein_forward"] = fwd
    res.reports["bernstein_reverse"] = rev
    for case, spread in sorted(fwd.spread_by_case().items()):
        p, q, alpha = case
        res.add(f"forward spread (p={p:g}, q={q:g}, alpha={alpha})", spread, 4.0)
    res.add("reverse constant", rev.max_ratio(), 4.0 / 3.0 * 1.1)
    return res


def suite_bkm(ns=(32, 64), seed: int = 11, ensemble: int = 100) -> SuiteResult:
    res = SuiteResult("bkm")
    maxima = {}
    for n in ns:
        grid = Grid(3, n)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(ensemble):
            u = ensembles.divfree_noise(grid, rng)
            worst = max(worst, bkm_ratio(u))
        maxima[n] = worst
        res.add(f"max ratio at n={n} (finite)", worst, math.inf,
                ok=math.isfinite(worst) and worst > 0)
    vals = list(maxima.values())
    res.add("cross-resolution spread", max(vals) / min(vals), 2.0)
    return res


def suite_solver(seed: int = 3) -> SuiteResult:
    res = SuiteResult("solver")

    cfg = SolverConfig(dim=2, n=64, nu=1.0, dt=1e-3, t_end=0.5, snap_every=50)
    traj = run(cfg)
    grid = traj.grid
    exact = Field(grid, spectral_data(traj.snapshots[0])
                  * math.exp(-2.0 * cfg.nu * cfg.t_end), SPECTRAL)
    err = l2_norm_spectral(Field(grid, traj.final.data - exact.data, SPECTRAL))
    res.add("vortex-lattice decay error (relative)",
            err / l2_norm_spectral(exact), 1e-8)
    res.add("energy balance residual (2D)", energy_balance_residual(traj), 1e-6)
    div_worst = max(l2_norm_spectral(divergence(s)) / l2_norm_spectral(s)
                    for s in traj.snapshots)
    res.add("divergence preserved", div_worst, 1e-10)

    # observed convergence order; the flow is scaled up so truncation
    # error sits far above the roundoff floor on the whole dt ladder
    base = SolverConfig(dim=2, n=32, nu=0.01, dt=2.5e-4, t_end=0.2,
                        ic="random-divfree", seed=seed, snap_every=10000)
    u0 = scale(initial_condition(base, Grid(2, 32)), 5.0)
    ref = run(base, initial=u0).final
    errs = []
    for dt in (8e-3, 4e-3, 2e-3):
        t = run(SolverConfig(dim=2, n=32, nu=0.01, dt=dt, t_end=0.2,
                             ic="random-divfree", seed=seed,
                             snap_every=10000), initial=u0)
        errs.append(l2_norm_spectral(
            Field(t.grid, t.final.data - ref.data, SPECTRAL)))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    res.add("observed RK4 order (>= 3.5)", min(orders), math.inf,
            ok=min(orders) >= 3.5)

    cfg3 = SolverConfig(dim=3, n=32, nu=1.0, dt=5e-3, t_end=0.5, snap_every=20)
    traj3 = run(cfg3)
    res.add("energy balance residual (3D)", energy_balance_residual(traj3), 1e-4)
    res.add("3D run finite", 0.0 if math.isfinite(
        traj3.series["energy"][-1]) else 1.0, 0.5)
    return res


def run_suites(names, n=None, seed=None, ensemble=None, dealias=True) -> list:
    out = []
    for name in names:
        if name == "lp":
            out.append(suite_lp(n=n or 32, seed=0 if seed is None else seed))
        elif name == "bony":
            out.append(suite_bony(n=n or 32, seed=1 if seed is None else seed,
                                  dealias=dealias))
        elif name == "bernstein":
            out.append(suite_bernstein(n=n or 64,
                                       seed=7 if seed is None else seed,
                                       ensemble=ensemble or 100))
        elif name == "bkm":
            out.append(suite_bkm(seed=11 if seed is None else seed,
                                 ensemble=ensemble or 100))
        elif name == "solver":
            out.append(suite_solver(seed=3 if seed is None else seed))
        else:
            raise ValueError(f"unknown suite {name!r}")
    return out
