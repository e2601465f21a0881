# -*- coding: utf-8 -*-

"""Command line entry point.

    chemoclust <mode> --config <path> [--out <dir>] [--verbose]

Exit status is 0 on success, 1 if an invariant is violated, 2 for bad
input or I/O errors and 3 if the time stepper fails.
"""

import argparse
import logging
import os
import sys

import numpy as np
import scipy.integrate

from chemoclust import model, scl
from chemoclust.analysis import diagnostics, inequalities
from chemoclust.field import critical_points, drift_map
from chemoclust.run import config as config_
from chemoclust.run.report import OneLinePrinter, RunSummary
from chemoclust.stepper import CriticalPointMonitor, StepFailure, run
from chemoclust.utils import dict_to_hdf5, parallel_map


logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_STEP = 3


class InvariantViolation(Exception):
    pass


energy_header = ['t', 'E', 'F', 'G', 'h1_chi', 'x_center', 'xdot',
                 'cons_chi', 'cons_lambda', 'w0', 'mu']


def initial_density(cfg, params):
    """Return the density sampler named by ``cfg.initial_condition``."""
    ic = cfg.initial_condition
    if ic in model.builtin_densities:
        return model.builtin_densities[ic](params, shift=cfg.shift,
                                           amplitude=cfg.amplitude)
    return model.load_density_csv(ic)


def initial_grid(cfg, params):
    if cfg.initial_condition == 'equilibrium':
        return model.equilibrium_grid(params, cfg.n)
    return model.init_grid_from_density(initial_density(cfg, params), cfg.n,
                                        params)


def simulate(cfg, progress=None):
    """Integrate the configured run and analyse every sample.

    Returns
    -------

    trajectory : Trajectory

    records : list of EnergyRecord

    monitor : CriticalPointMonitor
        Number of critical points of the concentration after every step.
    """
    params = config_.model_params(cfg)
    grid0 = initial_grid(cfg, params)
    logger.info('simulating %r from %s with %i particles up to t = %g',
                params, cfg.initial_condition, grid0.n, cfg.t_final)
    monitor = CriticalPointMonitor(params, kernel=cfg.kernel)
    monitor(0., grid0)
    trajectory = run(grid0, params, config_.step_config(cfg), cfg.t_final,
                     cfg.sample_every, monitor=monitor)
    records = diagnostics.analyse(
        trajectory, params, cfg.y_step, cfg.y_radius,
        interpolation=cfg.frame_interpolation, tails=cfg.frame_tails)
    if progress is not None:
        for rec in records:
            progress({'t': rec.t, 'F': rec.F, 'x_center': rec.x_center})
    return trajectory, records, monitor


def _field_rows(trajectory, params, x):
    """Rows ``t, x, dS/dx`` of the concentration gradient on ``x``."""
    columns = parallel_map(lambda grid: -drift_map(grid, params, x),
                           trajectory.grids)
    for t, dS in zip(trajectory.times, columns):
        for xi, di in zip(x, dS):
            yield t, xi, di


def _critical_point_rows(trajectory, params):
    points = parallel_map(lambda grid: critical_points(grid, params),
                          trajectory.grids)
    for t, xs in zip(trajectory.times, points):
        for x in xs:
            yield t, x


def _rate_summary(summary, records, cfg, params):
    t, F, E, h1 = (np.array([getattr(r, k) for r in records])
                   for k in ('t', 'F', 'E', 'h1_chi'))
    summary['rate.gamma0'] = diagnostics.gamma0(params)
    fits = (('rate', F), ('rate_E', E), ('rate_h1', h1 ** 2))
    ok = True
    for prefix, values in fits:
        try:
            fit = diagnostics.fit_decay_rate(t, values, params,
                                             cfg.rate_window)
        except diagnostics.InsufficientData as e:
            logger.warning('no %s fit: %s', prefix, e)
            summary['%s.status' % prefix] = 'insufficient_data'
            ok = ok and prefix != 'rate'
            continue
        summary['%s.status' % prefix] = 'ok'
        summary['%s.gamma_fit' % prefix] = fit.gamma_fit
        summary['%s.window' % prefix] = fit.window
        summary['%s.r_squared' % prefix] = fit.r_squared
    return ok


def run_simulate(cfg, summary):
    params = config_.model_params(cfg)
    progress = OneLinePrinter(['t', 'F', 'x_center'], stream=sys.stderr)
    trajectory, records, monitor = simulate(cfg, progress)

    summary.csv('energies.csv', energy_header, records)
    summary.csv('trajectory.csv', ['t', 'eta', 'x'], (
        (t, eta, x) for t, grid in trajectory
        for eta, x in zip(grid.eta, grid.positions)))
    summary.csv('critical_points.csv', ['t', 'x'],
                _critical_point_rows(trajectory, params))
    summary.csv('critical_count.csv', ['t', 'count'],
                zip(monitor.times, monitor.counts))
    x = diagnostics.uniform_grid(cfg.field_radius, cfg.field_step)
    summary.csv('field.csv', ['t', 'x', 'dS'],
                _field_rows(trajectory, params, x))
    if cfg.archive:
        dict_to_hdf5({
            'trajectory': trajectory.as_dict(),
            'energies': dict((k, np.array([getattr(r, k) for r in records]))
                             for k in energy_header),
            'params': params.as_dict(),
        }, summary.path(cfg.archive))
        summary.declare(cfg.archive, len(trajectory))

    grids = trajectory.grids
    summary['mass.initial'] = grids[0].total_mass
    summary['mass.final'] = grids[-1].total_mass
    summary['critical_points.final'] = monitor.counts[-1]
    if monitor.single_from is not None:
        summary['critical_points.single_from'] = monitor.single_from
    summary['critical_points.stays_single'] = monitor.stays_single
    summary['critical_points.violations'] = len(monitor.violations)
    _rate_summary(summary, records, cfg, params)
    try:
        checks = diagnostics.bound_checks(records, params)
    except diagnostics.InsufficientData as e:
        logger.warning('no bound checks: %s', e)
    else:
        summary.update(dict(('check.%s' % k, v) for k, v in checks.items()))
        t_from = diagnostics.single_peak_from(records)
        summary['check.single_peak_from'] = t_from
        if np.isfinite(t_from):
            summary['check.center_oscillation'] = (
                diagnostics.center_oscillation(records, t_from))
    if grids[-1].total_mass != grids[0].total_mass:
        raise InvariantViolation('mass changed from %r to %r'
                                 % (grids[0].total_mass, grids[-1].total_mass))
    if monitor.violations:
        t, count = monitor.violations[0]
        raise InvariantViolation(
            '%i critical points at t = %g after a single peak from t = %g'
            % (count, t, monitor.single_from))
    return EXIT_OK


def run_rates(cfg, summary):
    params = config_.model_params(cfg)
    _, records, _ = simulate(cfg)
    if not _rate_summary(summary, records, cfg, params):
        return EXIT_VIOLATION
    return EXIT_OK


def run_poincare(cfg, summary, tol=1e-3):
    chi = cfg.chi
    functions = inequalities.random_test_functions(cfg.n_functions,
                                                   random_state=cfg.seed)
    sampled = [inequalities.SampledFunction.from_callable(
        f, cfg.y_radius, cfg.y_step) for f in functions]

    rows, gaps, interpolation = [], [], []
    for lam in cfg.lambdas:
        kp = inequalities.KernelParams(lam, chi)

        def check(w):
            result = inequalities.poincare_check(w, kp)
            gap = inequalities.quadratic_form_identity(w, kp)[2]
            lhs, rhs = inequalities.interpolation_check(w, lam, chi)
            return result, gap, lhs <= rhs * (1 + 1e-6) + 1e-14

        for i, (result, gap, interp) in enumerate(parallel_map(check,
                                                               sampled)):
            rows.append((lam, chi, i, result.ratio, result.lhs, result.rhs))
            gaps.append(gap)
            interpolation.append(interp)
    summary.csv('poincare_report.csv',
                ['lambda', 'chi', 'function_id', 'ratio', 'lhs', 'rhs'], rows)

    ratios = np.array([r[3] for r in rows])
    summary['poincare.max_ratio'] = ratios.max()
    summary['poincare.identity_max_gap'] = max(gaps)
    summary['poincare.interpolation_holds'] = all(interpolation)

    xs = np.linspace(-10., 10., 21)
    pointwise = np.array([[inequalities.pointwise_bound(
        inequalities.KernelParams(lam, chi), x) for x in xs]
        for lam in cfg.lambdas])
    summary['pointwise.max'] = pointwise.max()
    summary['pointwise.lambda_spread'] = (pointwise.max(axis=0)
                                          - pointwise.min(axis=0)).max()
    radii = (10., 20., 40.)
    sweep = inequalities.rayleigh_sweep(
        radii, inequalities.KernelParams(chi, chi), h=cfg.y_step)
    summary['near_optimizer.radii'] = radii
    summary['near_optimizer.ratios'] = sweep

    if ratios.max() > 1 + tol:
        raise InvariantViolation('Poincare ratio %g exceeds one'
                                 % ratios.max())
    if pointwise.max() > 2 + 1e-6:
        raise InvariantViolation('pointwise bound %g exceeds two'
                                 % pointwise.max())
    return EXIT_OK


def initial_scl_state(cfg, params, x):
    """Return ``z0 = 1/chi - int_{-inf}^x rho0``, normalized to the far field
    states, for the configured initial density."""
    if cfg.initial_condition == 'equilibrium':
        rho = model.equilibrium_density(params)(x)
    else:
        rho = initial_density(cfg, params)(x)
    cumulative = scipy.integrate.cumulative_trapezoid(rho, x, initial=0.)
    if not cumulative[-1] > 0:
        raise model.InvalidDensity('initial density has no mass on the '
                                   'domain')
    lo, hi = scl.far_field(cfg.chi)
    z = lo + (hi - lo) * cumulative / cumulative[-1]
    return scl.SCLState(x, z, (lo, hi))


def run_scl(cfg, summary):
    params = config_.model_params(cfg)
    spec = config_.response_spec(cfg)
    chi = cfg.chi
    if spec.kind == 'stiff' and not np.isclose(spec.chi, chi):
        logger.warning('stiff response with mean speed %g differs from '
                       'chi = %g', spec.chi, chi)
    profile = scl.stationary_profile(spec, chi, L=cfg.scl_L, dx=cfg.scl_dx)
    flux = scl.Flux(spec, 2. / chi)
    dt = min(cfg.scl_dt, scl.stable_dt(flux, chi, profile.dx))
    summary['scl.dt'] = dt
    summary['scl.stationary_residual'] = scl.stationary_residual(
        profile, flux)
    summary['scl.step_residual'] = scl.stationary_residual(profile, flux, dt)

    z0 = initial_scl_state(cfg, params, profile.x)
    t_final = cfg.scl_t_final
    result = scl.l1_convergence_run(
        z0, spec, chi, t_final, dt=dt, sample_every=cfg.sample_every,
        z_inf=profile, keep_states=(0., t_final))
    summary.csv('scl_run.csv',
                ['t', 'l1_distance', 'pair_distance', 'mass_residual'],
                zip(result.t, result.l1_distance, result.pair_distance,
                    result.mass_residual))
    for t in sorted(result.states):
        state = result.states[t]
        summary.csv('z_profile_%g.csv' % t, ['x', 'z'], zip(state.x, state.z))
    summary.csv('z_profile_stationary.csv', ['x', 'z'],
                zip(profile.x, profile.z))

    summary['scl.shift'] = result.shift
    summary['scl.l1_initial'] = result.l1_distance[0]
    summary['scl.l1_final'] = result.l1_distance[-1]
    if result.l1_distance[0] > 0:
        summary['scl.l1_ratio'] = (result.l1_distance[-1]
                                   / result.l1_distance[0])
    summary['scl.pair_distance_final'] = result.pair_distance[-1]
    summary['scl.mass_residual_final'] = result.mass_residual[-1]
    return EXIT_OK


runners = {
    'simulate': run_simulate,
    'poincare': run_poincare,
    'scl': run_scl,
    'rates': run_rates,
}


def run_mode(cfg):
    """Run ``cfg.mode``, write its artifacts and the summary.

    Returns
    -------

    status : int
        The exit status.
    """
    if not os.path.isdir(cfg.output_dir):
        os.makedirs(cfg.output_dir)
    summary = RunSummary(cfg.output_dir)
    summary['mode'] = cfg.mode
    summary.update(dict(('config.%s' % k, v)
                        for k, v in cfg._asdict().items()
                        if k not in ('mode', 'output_dir') and v is not None))
    try:
        status = runners[cfg.mode](cfg, summary)
    except StepFailure as e:
        logger.error('time stepping failed: %s', e)
        summary['status'] = 'step_failure'
        status = EXIT_STEP
    except scl.StepRejected as e:
        logger.error('scl step rejected: %s', e)
        summary['status'] = 'step_rejected'
        status = EXIT_STEP
    except (InvariantViolation, model.OrderingViolation,
            scl.ContractionViolation, scl.ProfileDiverged) as e:
        logger.error('invariant violated: %s', e)
        summary['status'] = 'violation'
        summary['violation'] = str(e)
        status = EXIT_VIOLATION
    except (diagnostics.InsufficientData,
            diagnostics.NonUniformSampling) as e:
        logger.error('analysis failed: %s', e)
        summary['status'] = 'analysis_failed'
        summary['violation'] = str(e)
        status = EXIT_VIOLATION
    else:
        summary['status'] = 'ok' if status == EXIT_OK else 'failed'
    summary.write()
    return status


def parse_args(argv=None):
    parser = argparse.ArgumentParser(
        prog='chemoclust',
        description='Simulate and analyse chemotactic aggregation.')
    parser.add_argument('mode', choices=config_.modes)
    parser.add_argument('--config', required=True,
                        help='Path to a key = value configuration file.')
    parser.add_argument('--out', default=None,
                        help='Output directory, overrides output_dir.')
    parser.add_argument('--verbose', action='store_true',
                        help='Log at debug level.')
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s %(name)s %(levelname)s %(message)s')
    try:
        cfg = config_.read_config(args.config, args.mode)
        if args.out is not None:
            cfg = cfg._replace(output_dir=args.out)
        return run_mode(cfg)
    except config_.ConfigError as e:
        logger.error('bad configuration %s: %s', args.config, e)
        return EXIT_INPUT
    except (OSError, ValueError) as e:
        logger.error('%s: %s', type(e).__name__, e)
        return EXIT_INPUT


if __name__ == '__main__':
    sys.exit(main())
