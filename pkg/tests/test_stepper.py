# -*- coding: utf-8 -*-

import numpy as np
import pytest
import scipy.optimize

from sklearn.utils import check_random_state

from chemoclust import stepper
from chemoclust.analysis.diagnostics import record
from chemoclust.model import (
    ModelParams, equilibrium_grid, init_grid_from_density, two_peaks_density)
from chemoclust.stepper import (
    CriticalPointMonitor, CriticalPointViolation, StepConfig, StepFailure,
    Trajectory, jacobian_banded, newton, residual, run, step)


def make_symmetric_bumps(n=100):
    def rho(x):
        x = np.asarray(x, dtype=float)
        return .5 * (np.exp(-np.abs(x + 3)) + np.exp(-np.abs(x - 3)))
    rho.breakpoints = np.array([-3., 3.])
    grid = init_grid_from_density(rho, n, ModelParams())
    x = grid.positions
    return grid.with_positions(.5 * (x - x[::-1]))


def test_config_validation():
    with pytest.raises(ValueError):
        StepConfig(dt=0.)
    with pytest.raises(ValueError):
        StepConfig(newton_tol=-1.)
    with pytest.raises(ValueError):
        StepConfig(damping=1.)


def test_jacobian_matches_differences():
    """The banded Jacobian agrees with finite differences of the
    residual."""
    rng = check_random_state(3)
    x = np.cumsum(rng.uniform(.5, 1.5, size=6))
    drift = rng.choice([-.1, 0., .1], size=6)
    dt = .2
    y = x + rng.uniform(-.1, .1, size=6)
    ab = jacobian_banded(y, dt)
    dense = np.diag(ab[1]) + np.diag(ab[0, 1:], 1) + np.diag(ab[2, :-1], -1)
    eps = 1e-7
    numeric = np.empty((6, 6))
    for j in range(6):
        e = np.zeros(6)
        e[j] = eps
        numeric[:, j] = (residual(y + e, x, drift, dt)
                         - residual(y - e, x, drift, dt)) / (2 * eps)
    assert np.allclose(dense, numeric, atol=1e-6), 'wrong Jacobian'


def test_pure_diffusion_three_particles():
    """Without drift the particles spread; Newton agrees with a dense root
    finder."""
    x = np.array([-1., 0., 2.])
    dt = .1
    cfg = StepConfig(dt=dt)
    y, n_iter = newton(x, np.zeros(3), dt, cfg)
    reference = scipy.optimize.fsolve(
        lambda z: residual(z, x, np.zeros(3), dt), x, xtol=1e-14)
    assert np.allclose(y, reference, atol=1e-10), 'Newton disagrees'
    assert (np.diff(y) ** 2).sum() > (np.diff(x) ** 2).sum(), \
        'particles did not spread'
    assert np.abs(residual(y, x, np.zeros(3), dt)).max() <= 1e-12, \
        'residual not converged'
    assert 0 < n_iter <= cfg.newton_max_iter, 'odd iteration count'


def test_zero_step_is_identity():
    p = ModelParams()
    grid = equilibrium_grid(p, 20)
    assert step(grid, p, StepConfig(), dt=0.) is grid, 'zero step moved'
    with pytest.raises(ValueError):
        step(grid, p, StepConfig(), dt=-1.)


def test_equilibrium_nearly_stationary():
    """One step from the stationary grid moves the core by at most the
    squared mass spacing."""
    p = ModelParams()
    grid = equilibrium_grid(p, 200)
    cfg = StepConfig(dt=1e-2)
    new = step(grid, p, cfg)
    moved = np.abs(new.positions - grid.positions)
    core = np.abs(grid.positions) < 3
    assert moved[core].max() <= grid.delta_eta ** 2, \
        'core moved by %g' % moved[core].max()
    assert moved.max() <= .2 * cfg.dt, 'grid moved by %g' % moved.max()
    assert new.total_mass == grid.total_mass, 'mass changed'


def test_step_keeps_order_and_mass():
    p = ModelParams()
    grid = init_grid_from_density(two_peaks_density(p), 100, p)
    new = step(grid, p, StepConfig(dt=5e-2))
    assert (np.diff(new.positions) > 0).all(), 'ordering lost'
    assert new.total_mass == grid.total_mass, 'mass changed'
    assert new.delta_eta == grid.delta_eta, 'mass spacing changed'


def test_kernels_agree():
    p = ModelParams()
    grid = init_grid_from_density(two_peaks_density(p), 100, p)
    a = step(grid, p, StepConfig(kernel='direct'))
    b = step(grid, p, StepConfig(kernel='prefix'))
    assert np.allclose(a.positions, b.positions, rtol=0, atol=1e-12), \
        'summation method changes the step'


def test_symmetry_preserved():
    p = ModelParams()
    grid = make_symmetric_bumps()
    trajectory = run(grid, p, StepConfig(dt=1e-2), .2)
    x = trajectory.grids[-1].positions
    assert np.abs(x + x[::-1]).max() <= 1e-10, 'symmetry broken'


def test_run_to_zero():
    p = ModelParams()
    grid = equilibrium_grid(p, 10)
    trajectory = run(grid, p, StepConfig(), 0.)
    assert len(trajectory) == 1, 'expected a single sample'
    assert trajectory[0] == (0., grid), 'wrong sample'


def test_run_sampling():
    p = ModelParams()
    grid = equilibrium_grid(p, 10)
    seen = []
    trajectory = run(grid, p, StepConfig(dt=1e-2), .05, sample_every=2,
                     monitor=lambda t, g: seen.append(t))
    assert np.allclose(trajectory.times, [0, .02, .04, .05]), \
        'sampled at %r' % trajectory.times
    assert len(seen) == 5, 'monitor called %i times' % len(seen)
    d = trajectory.as_dict()
    assert d['positions'].shape == (4, 10), 'wrong array shape'


def test_run_rejects_bad_arguments():
    p = ModelParams()
    grid = equilibrium_grid(p, 10)
    with pytest.raises(ValueError):
        run(grid, p, StepConfig(), -1.)
    with pytest.raises(ValueError):
        run(grid, p, StepConfig(), 1., sample_every=0)


def test_failed_step_is_halved(monkeypatch):
    """A step that fails above a step size is retried as two half steps."""
    calls = []

    def fake_step(grid, params, cfg, dt=None):
        calls.append(dt)
        if dt > .004:
            raise StepFailure('too large')
        return grid.translate(dt)

    monkeypatch.setattr(stepper, 'step', fake_step)
    p = ModelParams()
    grid = equilibrium_grid(p, 10)
    trajectory = run(grid, p, StepConfig(dt=1e-2), 1e-2)
    moved = trajectory.grids[-1].positions - grid.positions
    assert np.allclose(moved, 1e-2), 'halved steps do not add up'
    assert calls[:3] == [1e-2, 5e-3, 2.5e-3], 'wrong retries %r' % calls


def test_failing_step_gives_up(monkeypatch):
    def fake_step(grid, params, cfg, dt=None):
        raise StepFailure('always')

    monkeypatch.setattr(stepper, 'step', fake_step)
    p = ModelParams()
    grid = equilibrium_grid(p, 10)
    with pytest.raises(StepFailure):
        run(grid, p, StepConfig(dt=1e-2, max_halvings=2), 1e-2)


def test_trajectory_container():
    p = ModelParams()
    grid = equilibrium_grid(p, 10)
    trajectory = Trajectory()
    trajectory.append(0., grid)
    trajectory.append(1., grid.translate(1.))
    assert [t for t, _ in trajectory] == [0., 1.], 'wrong iteration'
    assert trajectory.positions.shape == (2, 10), 'wrong positions'


def test_equilibrium_run_stays_close():
    """The distance to equilibrium stays of the size of the initial
    discretization error."""
    p = ModelParams()
    grid = equilibrium_grid(p, 400)
    trajectory = run(grid, p, StepConfig(dt=1e-2, kernel='prefix'), 10.,
                     sample_every=100)
    h1 = np.array([record(t, g, p).h1_chi for t, g in trajectory])
    assert np.isfinite(h1).all(), 'lost the peak'
    assert (h1 <= 5 * h1[0]).all(), 'distances %r' % h1
    assert not (np.diff(h1) > 0).all(), 'distance grows monotonically'
    assert trajectory.grids[-1].total_mass == grid.total_mass, 'mass changed'


def _matched_error(coarse, reference):
    """Return the mass weighted distance of coarse particles to the matching
    average of reference particles."""
    k = reference.n // coarse.n
    i = np.arange(coarse.n) * k + k // 2
    matched = .5 * (reference.positions[i - 1] + reference.positions[i])
    return (np.abs(coarse.positions - matched) * coarse.delta_eta).sum()


def test_convergence_order():
    """Positions converge at first order under joint refinement of the
    time step and the mass spacing."""
    p = ModelParams()
    rho0 = two_peaks_density(p)

    def final(n, dt):
        grid = init_grid_from_density(rho0, n, p)
        return run(grid, p, StepConfig(dt=dt, kernel='prefix'), 1.).grids[-1]

    reference = final(400, .005)
    levels = [(50, .04), (100, .02), (200, .01)]
    errors = [_matched_error(final(n, dt), reference) for n, dt in levels]
    slope = -np.polyfit(np.log2([n for n, _ in levels]), np.log2(errors), 1)[0]
    assert slope >= .9, 'observed order %g, errors %r' % (slope, errors)


def test_two_peaks_merge():
    """The two peaks of the aggregation experiment merge into one, and the
    single peak survives every later step."""
    p = ModelParams()
    grid = init_grid_from_density(two_peaks_density(p), 200, p)
    monitor = CriticalPointMonitor(p, kernel='prefix', strict=True)
    monitor(0., grid)
    run(grid, p, StepConfig(dt=1e-2, kernel='prefix'), 20., sample_every=100,
        monitor=monitor)
    assert monitor.counts[0] == 3, 'initial count %i' % monitor.counts[0]
    assert monitor.counts[-1] == 1, 'final count %i' % monitor.counts[-1]
    assert len(monitor.counts) == 2001, 'monitor skipped steps'
    first = monitor.counts.index(1)
    assert set(monitor.counts[first:]) == {1}, 'single peak lost'
    assert monitor.stays_single, 'violations %r' % monitor.violations
    assert monitor.single_from == monitor.times[first], 'wrong merge time'


def test_monitor_records_lost_peak(monkeypatch):
    counts = iter([3, 1, 1, 2, 1])
    monkeypatch.setattr(stepper, 'count_critical_points',
                        lambda grid, params, method: next(counts))
    p = ModelParams()
    grid = equilibrium_grid(p, 10)
    monitor = CriticalPointMonitor(p)
    for t in range(5):
        monitor(float(t), grid)
    assert monitor.single_from == 1., 'merge at %r' % monitor.single_from
    assert monitor.violations == [(3., 2)], \
        'violations %r' % monitor.violations
    assert not monitor.stays_single, 'lost peak not noticed'


def test_strict_monitor_raises(monkeypatch):
    counts = iter([1, 3])
    monkeypatch.setattr(stepper, 'count_critical_points',
                        lambda grid, params, method: next(counts))
    p = ModelParams()
    monitor = CriticalPointMonitor(p, strict=True)
    grid = equilibrium_grid(p, 10)
    monitor(0., grid)
    with pytest.raises(CriticalPointViolation):
        monitor(1., grid)


def test_monitor_without_merge():
    p = ModelParams()
    monitor = CriticalPointMonitor(p)
    assert not monitor.stays_single, 'no observation counts as single peak'
