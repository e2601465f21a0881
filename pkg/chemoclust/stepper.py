# -*- coding: utf-8 -*-

"""Time stepping of the mass grid.

One step solves

    0 = Y_i - X_i + dt (1 / (Y_{i+1} - Y_i) - 1 / (Y_i - Y_{i-1}))
        + chi dt sign(G_i(X))

for the new positions ``Y``: implicit Euler for the diffusion, the drift
frozen at the old positions. The first and last rows drop the missing
neighbour, which closes the system with zero diffusive flux across the mass
endpoints. The system is solved by a damped Newton iteration whose Jacobian
is tridiagonal.
"""

import logging

import numpy as np
import scipy.linalg

from chemoclust.field import count_critical_points, grad_S_sums
from chemoclust.model import OrderingViolation, check_ordering


logger = logging.getLogger(__name__)


class StepFailure(Exception):
    pass


class CriticalPointViolation(Exception):
    pass


class StepConfig(object):
    """Settings of the time stepper.

    Attributes
    ----------

    dt : float
        Time step.

    newton_tol : float
        Tolerance on the maximum absolute residual.

    newton_max_iter : int
        Maximum number of Newton iterations per step.

    damping : float
        Factor by which the Newton step is shortened during backtracking.

    max_backtracks : int
        Maximum number of shortenings per Newton iteration.

    max_halvings : int
        Maximum number of times ``run`` halves the time step of a failing
        step.

    kernel : {'direct', 'prefix'}
        Summation method for the drift, see ``field.grad_S_sums``.
    """

    def __init__(self, dt=1e-2, newton_tol=1e-12, newton_max_iter=50,
                 damping=.5, max_backtracks=30, max_halvings=5,
                 kernel='direct'):
        if not dt > 0:
            raise ValueError('dt has to be positive, got %r' % dt)
        if not newton_tol > 0:
            raise ValueError('newton_tol has to be positive, got %r'
                             % newton_tol)
        if not 0 < damping < 1:
            raise ValueError('damping has to lie in (0, 1), got %r' % damping)
        self.dt = dt
        self.newton_tol = newton_tol
        self.newton_max_iter = newton_max_iter
        self.damping = damping
        self.max_backtracks = max_backtracks
        self.max_halvings = max_halvings
        self.kernel = kernel

    def __repr__(self):
        return ('StepConfig(dt=%r, newton_tol=%r, newton_max_iter=%r, '
                'damping=%r, kernel=%r)' % (
                    self.dt, self.newton_tol, self.newton_max_iter,
                    self.damping, self.kernel))


def residual(y, x, drift, dt):
    """Return the residual of the implicit step at the candidate ``y``."""
    flux = dt / np.diff(y)
    res = y - x + drift
    res[:-1] += flux
    res[1:] -= flux
    return res


def jacobian_banded(y, dt):
    """Return the tridiagonal Jacobian of ``residual`` in banded storage."""
    n = y.shape[0]
    g = dt / np.diff(y) ** 2
    ab = np.zeros((3, n))
    ab[1] = 1.
    ab[1, :-1] += g
    ab[1, 1:] += g
    ab[0, 1:] = -g
    ab[2, :-1] = -g
    return ab


def _is_ordered(y):
    return np.isfinite(y).all() and (np.diff(y) > 0).all()


def newton(x, drift, dt, cfg):
    """Solve the implicit step by damped Newton iteration.

    Returns
    -------

    y : array_like
        Converged positions.

    n_iter : int
        Number of Newton iterations used.
    """
    y = x.copy()
    res = residual(y, x, drift, dt)
    norm = np.abs(res).max()
    scale = 4 * np.finfo(float).eps * (1 + np.abs(x).max())
    for i in range(cfg.newton_max_iter + 1):
        if norm <= cfg.newton_tol:
            return y, i
        if i == cfg.newton_max_iter:
            break
        delta = scipy.linalg.solve_banded(
            (1, 1), jacobian_banded(y, dt), -res, check_finite=False)
        step = 1.
        for _ in range(cfg.max_backtracks):
            trial = y + step * delta
            if _is_ordered(trial):
                trial_res = residual(trial, x, drift, dt)
                trial_norm = np.abs(trial_res).max()
                if trial_norm < norm:
                    break
            step *= cfg.damping
        else:
            # Stagnation at the rounding floor counts as convergence.
            if (np.abs(delta).max() <= scale
                    and norm <= np.sqrt(cfg.newton_tol)):
                logger.debug('newton stagnated at residual %g', norm)
                return y, i
            raise StepFailure('line search failed at residual %g after %i '
                              'iterations' % (norm, i))
        y, res, norm = trial, trial_res, trial_norm
    raise StepFailure('newton did not converge in %i iterations, residual %g'
                      % (cfg.newton_max_iter, norm))


def step(grid, params, cfg, dt=None):
    """Advance ``grid`` by one time step.

    Parameters
    ----------

    grid : MassGrid

    params : ModelParams

    cfg : StepConfig

    dt : float, optional
        Overrides ``cfg.dt``. A zero step returns the grid unchanged.

    Returns
    -------

    grid : MassGrid
        New grid with the same mass spacing.
    """
    dt = cfg.dt if dt is None else dt
    if dt < 0:
        raise ValueError('dt has to be non-negative, got %r' % dt)
    if dt == 0:
        return grid
    x = np.array(grid.positions)
    G = grad_S_sums(grid, params, method=cfg.kernel)
    drift = params.chi * dt * np.sign(G)
    y, n_iter = newton(x, drift, dt, cfg)
    try:
        check_ordering(y)
    except OrderingViolation:
        logger.warning('converged step lost the ordering of particles')
        raise
    logger.debug('step dt=%g converged in %i newton iterations', dt, n_iter)
    return grid.with_positions(y)


def _advance(grid, params, cfg, dt, halvings=0):
    try:
        return step(grid, params, cfg, dt)
    except StepFailure as e:
        if halvings >= cfg.max_halvings:
            raise StepFailure('step failed after %i halvings of dt: %s'
                              % (halvings, e))
        logger.info('step of size %g failed (%s), halving', dt, e)
        half = _advance(grid, params, cfg, dt / 2, halvings + 1)
        return _advance(half, params, cfg, dt / 2, halvings + 1)


class Trajectory(object):
    """Sampled time series of mass grids.

    Attributes
    ----------

    times : list of floats

    grids : list of MassGrid
    """

    def __init__(self, times=None, grids=None):
        self.times = list(times or [])
        self.grids = list(grids or [])

    def append(self, t, grid):
        self.times.append(t)
        self.grids.append(grid)

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        return iter(zip(self.times, self.grids))

    def __getitem__(self, i):
        return self.times[i], self.grids[i]

    @property
    def positions(self):
        return np.array([g.positions for g in self.grids])

    def as_dict(self):
        """Return the trajectory as a dictionary of arrays."""
        return {
            't': np.asarray(self.times),
            'positions': self.positions,
            'delta_eta': self.grids[0].delta_eta if self.grids else np.nan,
        }


def run(grid0, params, cfg, t_final, sample_every=1, monitor=None):
    """Integrate up to ``t_final`` and sample every ``sample_every`` steps.

    A step raising ``StepFailure`` is retried as two steps of half the size,
    up to ``cfg.max_halvings`` times.

    Parameters
    ----------

    grid0 : MassGrid
        Initial grid.

    params : ModelParams

    cfg : StepConfig

    t_final : float
        Final time. A zero final time returns the initial grid only.

    sample_every : int, optional
        Sampling stride in steps. The final grid is always sampled.

    monitor : callable, optional
        Called as ``monitor(t, grid)`` after every step.

    Returns
    -------

    trajectory : Trajectory
    """
    if t_final < 0:
        raise ValueError('t_final has to be non-negative, got %r' % t_final)
    if sample_every < 1:
        raise ValueError('sample_every has to be at least 1')
    n_steps = int(round(t_final / cfg.dt))
    trajectory = Trajectory([0.], [grid0])
    grid = grid0
    for k in range(1, n_steps + 1):
        grid = _advance(grid, params, cfg, cfg.dt)
        t = k * cfg.dt
        if monitor is not None:
            monitor(t, grid)
        if k % sample_every == 0 or k == n_steps:
            trajectory.append(t, grid)
            logger.debug('t = %g, span [%g, %g]', t, grid.positions[0],
                         grid.positions[-1])
    logger.info('integrated %i steps up to t = %g', n_steps,
                n_steps * cfg.dt)
    return trajectory


class CriticalPointMonitor(object):
    """Count the critical points of the concentration after every step.

    Once the concentration has a single peak it has to keep it. Later
    samples with another count are collected in ``violations``; with
    ``strict`` the first one raises ``CriticalPointViolation``.

    Attributes
    ----------

    times, counts : lists
        Every observed time and its number of critical points.

    single_from : float or None
        First time with a single critical point.

    violations : list of tuples
        ``(t, count)`` of the samples that lost the single peak again.
    """

    def __init__(self, params, kernel='direct', strict=False):
        self.params = params
        self.kernel = kernel
        self.strict = strict
        self.times = []
        self.counts = []
        self.single_from = None
        self.violations = []

    def __call__(self, t, grid):
        count = count_critical_points(grid, self.params, method=self.kernel)
        self.times.append(t)
        self.counts.append(count)
        if self.single_from is None:
            if count == 1:
                self.single_from = t
                logger.info('single peak from t = %g', t)
        elif count != 1:
            self.violations.append((t, count))
            logger.warning('t = %g: %i critical points after a single peak '
                           'at t = %g', t, count, self.single_from)
            if self.strict:
                raise CriticalPointViolation(
                    '%i critical points at t = %g, single since t = %g'
                    % (count, t, self.single_from))

    @property
    def stays_single(self):
        return self.single_from is not None and not self.violations
