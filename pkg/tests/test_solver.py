import math

import numpy as np
import pytest

from lpnse import (Grid, SolverConfig, energy_balance_residual, nse_rhs, run,
                   step, taylor_green, twin_run)
from lpnse.errors import GridError, SolverAbort
from lpnse.field import (Field, add, advect, divergence, h1_seminorm, inner,
                         l2_norm_spectral, laplacian, leray_project, scale,
                         spectral_data)
from lpnse.solver import initial_condition, perturbation_field


# --- configuration -----------------------------------------------------------

def test_config_from_mapping_round_trip():
    config = SolverConfig(dim=3, n=16, nu=0.25, dt=2e-3, t_end=0.1, seed=4)
    assert SolverConfig.from_mapping(config.to_mapping()) == config


def test_config_from_mapping_parses_strings():
    config = SolverConfig.from_mapping({
        "dim": "3", "n": "16", "nu": "0.5", "dealias": "false",
        "ic": "random-divfree", "snap_every": "5",
    })
    assert config.dim == 3 and config.n == 16
    assert config.nu == 0.5
    assert config.dealias is False
    assert config.ic == "random-divfree"


def test_config_rejects_unknown_key():
    with pytest.raises(ValueError, match="unknown config key"):
        SolverConfig.from_mapping({"viscosity": "1.0"})


def test_config_rejects_bad_bool():
    with pytest.raises(ValueError, match="boolean key"):
        SolverConfig.from_mapping({"dealias": "maybe"})


def test_config_validation():
    with pytest.raises(ValueError, match="non-negative"):
        SolverConfig(nu=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0)
    with pytest.raises(ValueError):
        SolverConfig(t_end=-0.5)
    with pytest.raises(ValueError):
        SolverConfig(snap_every=0)
    with pytest.raises(ValueError, match="unknown initial condition"):
        SolverConfig(ic="vortex-sheet")


def test_run_validates_grid_parameters():
    with pytest.raises(GridError):
        run(SolverConfig(dim=2, n=20, t_end=0.01, dt=0.01))


# --- initial data ------------------------------------------------------------

def test_taylor_green_2d_closed_form(grid2):
    u = taylor_green(grid2)
    x, y = grid2.meshes()
    np.testing.assert_allclose(u.data[0], np.sin(x) * np.cos(y), atol=1e-14)
    np.testing.assert_allclose(u.data[1], -np.cos(x) * np.sin(y), atol=1e-14)
    assert l2_norm_spectral(divergence(u)) <= 1e-13


def test_taylor_green_3d_closed_form(grid3):
    u = taylor_green(grid3)
    x, y, z = grid3.meshes()
    np.testing.assert_allclose(u.data[0], np.sin(x) * np.cos(y) * np.cos(z),
                               atol=1e-14)
    np.testing.assert_allclose(u.data[1], -np.cos(x) * np.sin(y) * np.cos(z),
                               atol=1e-14)
    np.testing.assert_allclose(u.data[2], 0.0, atol=1e-14)
    assert l2_norm_spectral(divergence(u)) <= 1e-13


def test_random_initial_condition_normalized(grid2):
    config = SolverConfig(dim=2, n=32, ic="random-divfree", seed=9)
    u = initial_condition(config, grid2)
    assert l2_norm_spectral(u) == pytest.approx(1.0, rel=1e-12)
    assert l2_norm_spectral(divergence(u)) <= 1e-12 * h1_seminorm(u)


def test_perturbation_resolution_independent():
    # same (seed, kmax) must give the same continuum field on finer grids
    coarse = perturbation_field(Grid(2, 32), seed=11, kmax=6.0)
    fine = perturbation_field(Grid(2, 64), seed=11, kmax=6.0)
    sc = spectral_data(coarse)
    sf = spectral_data(fine)
    idx = np.fft.fftfreq(32, 1.0 / 32).astype(int)
    np.testing.assert_allclose(sf[np.ix_(range(2), idx, idx)], sc,
                               rtol=0.0, atol=1e-15)


# --- equation structure ------------------------------------------------------

def test_tg2d_rhs_is_pure_decay(grid2):
    # the 2D vortex nonlinearity is a gradient: P(u.grad u) = 0, so the
    # right side reduces to nu * Laplacian = -2 nu u
    u = taylor_green(grid2)
    nu = 0.7
    rhs = nse_rhs(u, nu)
    diff = add(rhs, u, alpha=2.0 * nu)
    assert l2_norm_spectral(diff) <= 1e-13 * l2_norm_spectral(u)


def test_advection_energy_neutral(grid3, rng):
    from lpnse.ensembles import divfree_noise
    u = divfree_noise(grid3, rng, kmax=10.0)
    val = inner(advect(u, u), u)
    scale_ = l2_norm_spectral(u) ** 2 * h1_seminorm(u)
    assert abs(val) <= 1e-11 * scale_


def test_single_step_matches_run(grid2):
    config = SolverConfig(dim=2, n=32, nu=0.5, dt=1e-3, t_end=1e-3,
                          snap_every=1)
    u0 = taylor_green(grid2)
    traj = run(config, initial=u0)
    manual = step(leray_project(u0), config)
    np.testing.assert_array_equal(spectral_data(traj.final),
                                  spectral_data(manual))


# --- integration -------------------------------------------------------------

def test_tg2d_exact_decay():
    config = SolverConfig(dim=2, n=32, nu=0.5, dt=1e-3, t_end=0.1,
                          snap_every=20)
    traj = run(config)
    expected = scale(traj.snapshots[0], math.exp(-2.0 * 0.5 * 0.1))
    err = l2_norm_spectral(add(traj.final, expected, alpha=-1.0))
    assert err <= 1e-12 * l2_norm_spectral(expected)


def test_energy_dissipates_monotonically():
    config = SolverConfig(dim=2, n=32, nu=1.0, dt=1e-3, t_end=0.05,
                          ic="random-divfree", seed=2, snap_every=10)
    traj = run(config)
    energy = traj.series["energy"]
    assert np.all(np.diff(energy) < 0.0)


def test_energy_balance_residual(tg2d_traj):
    assert energy_balance_residual(tg2d_traj) <= 1e-6


def test_divergence_preserved(twin_pair):
    base, twin = twin_pair
    for traj in (base, twin):
        for snap in traj.snapshots:
            assert l2_norm_spectral(divergence(snap)) <= 1e-10 * max(
                h1_seminorm(snap), 1e-30)


def test_zero_mode_conserved_exactly():
    # a mean drift rides along: the nonlinear term's zero mode is pinned
    # to zero and the viscous factor at k = 0 is exactly 1
    grid = Grid(2, 32)
    config = SolverConfig(dim=2, n=32, nu=0.3, dt=2e-3, t_end=0.02,
                          snap_every=5)
    drift = np.zeros((2,) + grid.shape, dtype=np.complex128)
    drift[0, 0, 0] = 0.3
    drift[1, 0, 0] = -0.2
    u0 = Field(grid, spectral_data(taylor_green(grid)) + drift, "spectral")
    traj = run(config, initial=u0)
    zero = (slice(None), 0, 0)
    for snap in traj.snapshots:
        np.testing.assert_array_equal(spectral_data(snap)[zero],
                                      np.array([0.3, -0.2]))


def test_snapshot_cadence_and_final_time():
    config = SolverConfig(dim=2, n=32, nu=1.0, dt=1e-3, t_end=1e-2,
                          snap_every=7)
    traj = run(config)
    np.testing.assert_allclose(traj.times, [0.0, 7e-3, 1e-2])
    assert len(traj) == 3
    assert traj.series["t"].shape == (11,)


def test_t_end_not_multiple_of_dt():
    with pytest.raises(ValueError, match="whole number of steps"):
        run(SolverConfig(dim=2, n=32, dt=3e-3, t_end=1e-2))


def test_initial_field_needs_dim_components(grid2):
    from lpnse.field import zero_field
    config = SolverConfig(dim=2, n=32, dt=1e-3, t_end=1e-3)
    with pytest.raises(GridError):
        run(config, initial=zero_field(grid2, 1))


# --- aborts ------------------------------------------------------------------

def test_cfl_abort():
    config = SolverConfig(dim=2, n=32, nu=1.0, dt=0.1, t_end=0.1)
    with pytest.raises(SolverAbort) as exc:
        run(config)
    assert exc.value.reason == "cfl"
    assert exc.value.step == 0


def test_nan_abort(grid2):
    config = SolverConfig(dim=2, n=32, nu=1.0, dt=1e-3, t_end=1e-2)
    bad = np.zeros((2,) + grid2.shape, dtype=np.complex128)
    bad[0, 1, 1] = np.nan
    with pytest.raises(SolverAbort) as exc:
        run(config, initial=Field(grid2, bad, "spectral"))
    assert exc.value.reason == "nan"


# --- reversibility and discrete residual --------------------------------------

def _reversal_error(dt):
    config = SolverConfig(dim=2, n=32, nu=0.0, dt=dt, t_end=0.1,
                          ic="random-divfree", seed=7, snap_every=10**6)
    u0 = scale(initial_condition(config, Grid(2, 32)), 4.0)
    fwd = run(config, initial=u0).final
    back = run(config, initial=scale(fwd, -1.0)).final
    err = add(scale(back, -1.0), u0, alpha=-1.0)
    return l2_norm_spectral(err) / l2_norm_spectral(u0)


def test_inviscid_reversal():
    # nu = 0: v(t) = -u(T - t) solves the same equations, so running
    # forward from -u(T) must return -u0 up to the RK4 truncation error
    e1 = _reversal_error(5e-3)
    e2 = _reversal_error(2.5e-3)
    assert e1 <= 1e-9
    assert math.log2(e1 / e2) >= 3.5


def _twin_residual(dt, t_center=0.016, nu=0.1):
    # residual of w_t = nu Lap w - P(w.grad u + v.grad w) at a fixed
    # physical time, with w_t from a 5-point stencil on per-step snapshots
    steps = int(round(2.0 * t_center / dt))
    config = SolverConfig(dim=2, n=32, nu=nu, dt=dt, t_end=steps * dt,
                          ic="taylor-green", snap_every=1)
    base, twin = twin_run(config, delta=1e-2, seed=3)
    i = int(round(t_center / dt))

    def w(k):
        return Field(base.grid, spectral_data(base.snapshots[k])
                     - spectral_data(twin.snapshots[k]), "spectral")

    num = (spectral_data(w(i - 2)) - 8.0 * spectral_data(w(i - 1))
           + 8.0 * spectral_data(w(i + 1)) - spectral_data(w(i + 2)))
    dwdt = num / (12.0 * dt)
    wi = w(i)
    transport = add(advect(wi, base.snapshots[i]), advect(twin.snapshots[i], wi))
    rhs = (nu * spectral_data(laplacian(wi))
           - spectral_data(leray_project(transport)))
    resid = Field(base.grid, dwdt - rhs, "spectral")
    return l2_norm_spectral(resid) / l2_norm_spectral(Field(base.grid, rhs,
                                                            "spectral"))


def test_twin_difference_equation_residual():
    r1 = _twin_residual(2e-3)
    r2 = _twin_residual(1e-3)
    assert r2 <= 1e-9
    assert math.log2(r1 / r2) >= 3.5


# --- twins --------------------------------------------------------------------

def test_twin_zero_delta_identical():
    config = SolverConfig(dim=2, n=32, nu=1.0, dt=2e-3, t_end=0.02,
                          snap_every=5)
    base, twin = twin_run(config, delta=0.0, seed=1)
    for a, b in zip(base.snapshots, twin.snapshots):
        np.testing.assert_array_equal(spectral_data(a), spectral_data(b))


def test_twin_initial_offset_is_delta():
    config = SolverConfig(dim=2, n=32, nu=1.0, dt=2e-3, t_end=0.02,
                          snap_every=5)
    delta = 1e-3
    base, twin = twin_run(config, delta=delta, seed=1)
    w0 = add(twin.snapshots[0], base.snapshots[0], alpha=-1.0)
    rel = l2_norm_spectral(w0) / l2_norm_spectral(base.snapshots[0])
    assert rel == pytest.approx(delta, rel=1e-12)


def test_twin_rejects_negative_delta():
    config = SolverConfig(dim=2, n=32, dt=2e-3, t_end=0.02)
    with pytest.raises(ValueError, match="non-negative"):
        twin_run(config, delta=-1e-3, seed=0)


def test_twin_rejects_mismatched_base():
    config = SolverConfig(dim=2, n=32, nu=1.0, dt=2e-3, t_end=0.02,
                          snap_every=5)
    base, _ = twin_run(config, delta=0.0, seed=0)
    other = SolverConfig(dim=2, n=32, nu=0.5, dt=2e-3, t_end=0.02,
                         snap_every=5)
    with pytest.raises(ValueError, match="different config"):
        twin_run(other, delta=1e-3, seed=0, base=base)


def test_twin_deterministic():
    config = SolverConfig(dim=2, n=32, nu=1.0, dt=2e-3, t_end=0.02,
                          snap_every=5)
    _, twin_a = twin_run(config, delta=1e-4, seed=6)
    _, twin_b = twin_run(config, delta=1e-4, seed=6)
    for a, b in zip(twin_a.snapshots, twin_b.snapshots):
        np.testing.assert_array_equal(spectral_data(a), spectral_data(b))


def test_inviscid_energy_conserved():
    config = SolverConfig(dim=2, n=32, nu=0.0, dt=2e-3, t_end=0.05,
                          ic="random-divfree", seed=12, snap_every=25)
    traj = run(config)
    energy = traj.series["energy"]
    assert np.max(np.abs(energy - energy[0])) <= 1e-10 * energy[0]
