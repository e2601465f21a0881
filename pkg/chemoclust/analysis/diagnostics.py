# -*- coding: utf-8 -*-

"""Analysis of a trajectory in the frame moving with the concentration peak.

In that frame the density is compared with the stationary profile through
the relative perturbation ``v = exp(chi |y|) rho(center + y) - 1`` and its
derivative ``w``. The weighted energies

    E = 1/2 int v^2 exp(-chi |y|),
    F = 1/2 int w^2 exp(-chi |y|),
    G = 1/2 int (w')^2 exp(-chi |y|)

measure the distance to equilibrium; ``2 E + 2 F`` is the squared weighted
H1 distance.
"""

import collections
import logging
import warnings

import numpy as np
import scipy.interpolate
import scipy.stats

from chemoclust.field import DegeneratePeak, critical_points, peak_curvature
from chemoclust.field import xdot as peak_velocity
from chemoclust.model import reconstruct_density
from chemoclust.utils import parallel_map, trapezoid_weights


logger = logging.getLogger(__name__)


class AmbiguousFrame(Exception):
    pass


class InsufficientData(ValueError):
    pass


class NonUniformSampling(ValueError):
    pass


EnergyRecord = collections.namedtuple(
    'EnergyRecord',
    ['t', 'E', 'F', 'G', 'h1_chi', 'x_center', 'xdot', 'cons_chi',
     'cons_lambda', 'w0', 'mu'])


RateFit = collections.namedtuple(
    'RateFit', ['gamma_fit', 'gamma0', 'window', 'r_squared'])


class MovingFrame(object):
    """Relative perturbation sampled on a uniform grid around the peak.

    Attributes
    ----------

    y : array_like
        Uniform grid, symmetric about zero.

    v : array_like
        Relative perturbation.

    w : array_like
        First derivative of ``v``.

    dw : array_like
        First derivative of ``w``.

    center : float
        Position of the peak in the original frame.
    """

    def __init__(self, y, v, w=None, dw=None, center=0.):
        self.y = np.asarray(y, dtype=float)
        self.v = np.asarray(v, dtype=float)
        h = self.h
        self.w = np.gradient(self.v, h) if w is None else np.asarray(w)
        self.dw = np.gradient(self.w, h) if dw is None else np.asarray(dw)
        self.center = center

    @property
    def h(self):
        return self.y[1] - self.y[0]

    @property
    def origin(self):
        return int(np.argmin(np.abs(self.y)))

    @property
    def v0(self):
        return self.v[self.origin]

    @property
    def w0(self):
        return self.w[self.origin]

    @classmethod
    def from_function(cls, v, radius, h):
        """Sample the callable ``v`` on ``[-radius, radius]``."""
        y = uniform_grid(radius, h)
        return cls(y, v(y))


def uniform_grid(radius, h):
    """Return ``k h`` for ``|k h| <= radius``; exactly symmetric."""
    m = int(round(radius / h))
    return np.arange(-m, m + 1) * h


def weighted_integral(y, f, r):
    """Trapezoid rule for ``int f(y) exp(-r |y|) dy``.

    On a symmetric grid the integrand is folded onto ``y >= 0`` first, so
    odd ``f`` integrate to zero exactly.
    """
    y = np.asarray(y, dtype=float)
    f = np.asarray(f, dtype=float)
    c = trapezoid_weights(y)
    n = y.shape[0]
    if n % 2 and np.array_equal(y[::-1], -y):
        m = n // 2
        folded = f[m:] + f[m::-1]
        folded[0] *= .5
        return (c[m:] * folded * np.exp(-r * y[m:])).sum()
    return (c * f * np.exp(-r * np.abs(y))).sum()


def weighted_mean(y, f, r):
    """Return ``<f>_r``, normalized by the quadrature of the weight."""
    return (weighted_integral(y, f, r)
            / weighted_integral(y, np.ones_like(y), r))


def find_center(grid, params):
    points = critical_points(grid, params)
    if len(points) != 1:
        raise AmbiguousFrame('expected a single peak, found %i critical '
                             'points' % len(points))
    return points[0]


def _half_frame(s, si, ui, h, interpolation, support):
    """Return ``u``, ``u'`` and ``u''`` on the half grid ``s >= 0``.

    The samples ``(si, ui)`` lie at positive distances from the peak. The
    interpolant is extrapolated down to ``s = 0`` and continued by its last
    value beyond ``si[-1]``, where both derivatives vanish. Past
    ``support`` the density and with it ``u`` vanish.
    """
    covered = s <= si[-1]
    u = np.full_like(s, ui[-1])
    if interpolation == 'spline':
        u[covered] = scipy.interpolate.CubicSpline(si, ui)(s[covered])
    else:
        u[covered] = np.interp(s[covered], si, ui)
        near = s < si[0]
        slope = (ui[1] - ui[0]) / (si[1] - si[0])
        u[near] = ui[0] + slope * (s[near] - si[0])
    if support is not None:
        u[s > support] = 0.
    du = np.zeros_like(s)
    d2u = np.zeros_like(s)
    c = np.count_nonzero(covered)
    if c >= 3:
        du[:c] = np.gradient(u[:c], h, edge_order=2)
        d2u[:c] = np.gradient(du[:c], h, edge_order=2)
    return u, du, d2u


def moving_frame(grid, params, h_y=None, radius=None, center=None,
                 interpolation='spline', edge=4, tails='flat'):
    """Return the relative perturbation around the peak of ``grid``.

    The relative density ``u = exp(chi |y|) rho`` is evaluated at the
    particles and interpolated onto a uniform grid of spacing ``h_y``
    covering ``[-radius, radius]``. Both sides of the peak are interpolated
    separately and only from particles whose centered density sample stays
    on that side, so the kink of ``rho`` at the peak is not smeared. The
    two one sided values at ``y = 0`` are averaged. Derivatives are
    centered differences within each side.

    Parameters
    ----------

    grid : MassGrid

    params : ModelParams

    h_y : float, optional
        Grid spacing. Defaults to ``1e-2 / chi``.

    radius : float, optional
        Half width of the grid. Defaults to ``40 / chi``.

    center : float, optional
        Peak position. Determined from ``grid`` if not given.

    interpolation : {'spline', 'linear'}, optional
        Interpolation of ``u`` between particles. A piecewise linear ``u``
        has a piecewise constant ``w``, whose differences concentrate ``w'``
        at the particles; ``G`` is only meaningful with ``spline``.

    edge : int, optional
        Number of particles skipped at either end of the grid. The density
        samples of the outermost particles carry relative errors of order
        one.

    tails : {'flat', 'empty'}, optional
        Continuation of ``u`` beyond the last used particle. ``flat`` keeps
        its last value; ``empty`` does so up to the outermost particle and
        sets ``v = -1`` beyond, where the density vanishes.

    Returns
    -------

    frame : MovingFrame
    """
    chi = params.chi
    h_y = 1e-2 / chi if h_y is None else h_y
    radius = 40. / chi if radius is None else radius
    if interpolation not in ('spline', 'linear'):
        raise ValueError('unknown interpolation %r' % interpolation)
    if tails not in ('flat', 'empty'):
        raise ValueError('unknown tails %r' % tails)
    if center is None:
        center = find_center(grid, params)

    profile = reconstruct_density(grid)
    x = profile.positions
    n = x.shape[0]
    # Particles k - 1 and k have neighbours on both sides of the peak.
    k = int(np.searchsorted(x, center, side='right'))
    left = np.arange(edge, k - 1)[::-1]
    right = np.arange(k + 1, n - edge)
    if left.shape[0] < 4 or right.shape[0] < 4:
        raise AmbiguousFrame('too few particles on one side of the peak at '
                             '%g' % center)
    dist = np.abs(x - center)
    ui = np.exp(chi * dist) * profile.density

    y = uniform_grid(radius, h_y)
    m = y.shape[0] // 2
    s = y[m:]
    empty = tails == 'empty'
    ul, dul, d2ul = _half_frame(s, dist[left], ui[left], h_y, interpolation,
                                dist[0] if empty else None)
    ur, dur, d2ur = _half_frame(s, dist[right], ui[right], h_y,
                                interpolation, dist[-1] if empty else None)

    u = np.concatenate([ul[:0:-1], ur])
    w = np.concatenate([-dul[:0:-1], dur])
    dw = np.concatenate([d2ul[:0:-1], d2ur])
    u[m] = .5 * (ul[0] + ur[0])
    w[m] = .5 * (dur[0] - dul[0])
    dw[m] = .5 * (d2ul[0] + d2ur[0])
    return MovingFrame(y, u - 1, w, dw, center)


def energies(frame, params):
    """Return ``(E, F, G)`` of a moving frame."""
    chi = params.chi
    E = .5 * weighted_integral(frame.y, frame.v ** 2, chi)
    F = .5 * weighted_integral(frame.y, frame.w ** 2, chi)
    G = .5 * weighted_integral(frame.y, frame.dw ** 2, chi)
    return E, F, G


def conservation_residuals(frame, params):
    """Return ``(<v>_chi, <w>_lambda)``; both vanish along exact dynamics."""
    return (weighted_mean(frame.y, frame.v, params.chi),
            weighted_mean(frame.y, frame.w, params.lam))


def mu_denominator(frame, params):
    """Return ``chi + lambda v(0) - sqrt(alpha) <v>_lambda``.

    Divided by ``lambda`` it equals minus the curvature of the
    concentration at the peak.
    """
    return (params.chi + params.lam * frame.v0
            - params.sqrt_alpha * weighted_mean(frame.y, frame.v, params.lam))


def mu_of_v(frame, params, d2S=None, rtol=5e-2):
    """Return the nonlocal coefficient ``lambda w(0) / denominator``.

    If the curvature ``d2S`` of the concentration at the peak is given, the
    denominator is compared against ``-lambda d2S`` and a warning issued if
    they differ by more than ``rtol`` relatively.
    """
    den = mu_denominator(frame, params)
    if abs(den) <= 1e-8:
        raise DegeneratePeak('denominator of mu is %r' % den)
    if d2S is not None:
        alt = -params.lam * d2S
        if abs(den - alt) > rtol * abs(alt):
            warnings.warn('peak curvature from the frame (%g) and from the '
                          'field (%g) disagree' % (den / params.lam, -d2S))
    return params.lam * frame.w0 / den


def gamma0(params):
    """Return the theoretical decay rate bound of the energy."""
    chi, sa = params.chi, params.sqrt_alpha
    return chi ** 2 / 8. * (chi + sa) / (chi / 2. + sa)


def _nan_record(t, x_center=np.nan):
    return EnergyRecord(t, *([np.nan] * 4 + [x_center] + [np.nan] * 5))


def record(t, grid, params, h_y=None, radius=None, interpolation='spline',
           tails='flat'):
    """Return the ``EnergyRecord`` of ``grid`` at time ``t``.

    Frame quantities are NaN if the concentration has more than one peak.
    ``interpolation`` and ``tails`` are passed on to ``moving_frame``.
    """
    try:
        center = find_center(grid, params)
        frame = moving_frame(grid, params, h_y, radius, center=center,
                             interpolation=interpolation, tails=tails)
    except AmbiguousFrame as e:
        logger.debug('t = %g: %s', t, e)
        return _nan_record(t)
    E, F, G = energies(frame, params)
    cons_chi, cons_lambda = conservation_residuals(frame, params)
    try:
        d2S = peak_curvature(grid, params, center)
        xdot = peak_velocity(grid, params, center)
    except DegeneratePeak as e:
        logger.warning('t = %g: %s', t, e)
        d2S, xdot = None, np.nan
    try:
        mu = mu_of_v(frame, params, d2S)
    except DegeneratePeak as e:
        logger.warning('t = %g: %s', t, e)
        mu = np.nan
    return EnergyRecord(t, E, F, G, np.sqrt(2 * E + 2 * F), center, xdot,
                        cons_chi, cons_lambda, frame.w0, mu)


def analyse(trajectory, params, h_y=None, radius=None, n_workers=None,
            interpolation='spline', tails='flat'):
    """Return one ``EnergyRecord`` per sample of ``trajectory``."""
    return parallel_map(
        lambda item: record(item[0], item[1], params, h_y, radius,
                            interpolation, tails),
        list(trajectory), n_workers)


def _columns(records, *keys):
    return [np.array([getattr(r, k) for r in records], dtype=float)
            for k in keys]


def uniform_prefix(t, rtol=1e-6):
    """Return the length of the longest uniformly spaced prefix of ``t``.

    Only the last interval may differ, as it does when the final time is
    not a multiple of the sampling stride; a gap anywhere else raises
    ``NonUniformSampling``.
    """
    dt = np.diff(np.asarray(t, dtype=float))
    if dt.shape[0] == 0:
        return len(t)
    regular = np.isclose(dt, dt[0], rtol=rtol, atol=0)
    if regular.all():
        return len(t)
    if regular[:-1].all():
        logger.debug('dropping the last sample at t = %g, spaced %g instead '
                     'of %g', t[-1], dt[-1], dt[0])
        return len(t) - 1
    raise NonUniformSampling('records are not uniformly sampled in time')


def dissipation_residual(records, params):
    """Return ``dF/dt + 2 G - 2 sqrt(alpha) w(0)^2`` at interior samples.

    ``dF/dt`` is taken by centered differences, so the samples have to be
    uniform in time; a shorter last interval is dropped.

    Returns
    -------

    t : array_like
        Times of the interior samples.

    r : array_like
        Residual, an estimate of the nonlinear remainder of the dissipation
        identity.
    """
    if len(records) >= 3:
        records = records[:uniform_prefix([r.t for r in records])]
    if len(records) < 3:
        raise InsufficientData('need at least 3 uniformly spaced records, '
                               'got %i' % len(records))
    t, F, G, w0 = _columns(records, 't', 'F', 'G', 'w0')
    dFdt = (F[2:] - F[:-2]) / (t[2:] - t[:-2])
    r = dFdt + 2 * G[1:-1] - 2 * params.sqrt_alpha * w0[1:-1] ** 2
    return t[1:-1], r


def fit_decay_rate(t, F, params=None, window=None, floor=0., tiny=1e-300):
    """Fit an exponential rate to a decaying energy.

    The slope of ``log(F - floor)`` is fitted by least squares on the window;
    the rate of the underlying norm is minus half the slope.

    Parameters
    ----------

    t, F : array_like
        Times and energies.

    params : ModelParams, optional
        If given, the theoretical bound is filled in.

    window : tuple, optional
        ``(t_lo, t_hi)``, defaults to the second half of the time range.

    floor : float, optional
        Offset subtracted before taking the logarithm.

    tiny : float, optional
        Values at or below are treated as exhausted; the window is cut
        before the first one.

    Returns
    -------

    fit : RateFit
    """
    t = np.asarray(t, dtype=float)
    F = np.asarray(F, dtype=float) - floor
    if window is None:
        window = (t[-1] / 2., t[-1])
    lo, hi = window
    sel = np.flatnonzero((t >= lo) & (t <= hi) & np.isfinite(F))
    exhausted = sel[F[sel] <= tiny]
    if exhausted.shape[0]:
        cut = exhausted[0]
        warnings.warn('energy reaches the floor at t = %g, truncating the '
                      'fit window' % t[cut])
        sel = sel[sel < cut]
        hi = t[sel[-1]] if sel.shape[0] else lo
    if sel.shape[0] < 2:
        raise InsufficientData('need at least 2 positive samples in window')
    fit = scipy.stats.linregress(t[sel], np.log(F[sel]))
    g0 = gamma0(params) if params is not None else np.nan
    return RateFit(-fit.slope / 2., g0, (lo, hi), fit.rvalue ** 2)


def fit_records(records, params, window=None, key='F', floor=0.):
    """Fit the decay rate of the energy ``key`` along ``records``."""
    t, values = _columns(records, 't', key)
    return fit_decay_rate(t, values, params, window, floor)


def bound_checks(records, params, tol=5e-2):
    """Check the energy inequalities on every record with a unique peak.

    Returns
    -------

    report : dict
        Booleans for the inequalities that hold with constant one, plus the
        smallest constants for the inequalities whose constant is unknown.
    """
    rows = [r for r in records if np.isfinite(r.F)]
    if not rows:
        raise InsufficientData('no record with a unique peak')
    chi, sa = params.chi, params.sqrt_alpha
    E, F, G, h1, w0 = _columns(rows, 'E', 'F', 'G', 'h1_chi', 'w0')
    c = 4. / chi ** 2
    # Constants of inequalities without explicit values are fitted.
    with np.errstate(divide='ignore', invalid='ignore'):
        c_w0 = np.nanmax(np.abs(w0) / (G + F ** (1. / 3) + F ** .5))
    report = {
        'n_records': len(rows),
        'poincare_F_G': bool((F <= c * G * (1 + tol)).all()),
        'poincare_E_F': bool((E <= c * F * (1 + tol)).all()),
        'w0_interpolation': bool(
            (w0 ** 2 <= G / (chi + 2 * sa) * (1 + tol)).all()),
        'w0_elementary': bool(
            (w0 ** 2 <= (2 * np.sqrt(F * G) + chi * F) * (1 + tol)).all()),
        'h1_by_F': bool(
            (h1 ** 2 <= (8. / chi ** 2 + 2) * F * (1 + tol)).all()),
        'c_w0': float(c_w0),
    }
    try:
        _, r = dissipation_residual(records, params)
    except InsufficientData as e:
        logger.debug('no dissipation remainder: %s', e)
        return report
    Fi, Gi = _columns(records[1:1 + len(r)], 'F', 'G')
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = np.abs(r) / ((Fi ** .5 + Fi) * Gi)
    report['c_remainder'] = float(np.nanmax(ratio)) if np.isfinite(
        ratio).any() else np.nan
    return report


def center_oscillation(records, t_from):
    """Return ``sup_{t >= t_from} |x(t) - x(t_from)|``."""
    t, x = _columns(records, 't', 'x_center')
    sel = (t >= t_from) & np.isfinite(x)
    if not sel.any():
        return np.nan
    x = x[sel]
    return float(np.abs(x - x[0]).max())


def single_peak_from(records):
    """Return the first time from which every record has a unique peak, or
    NaN if the last one has not."""
    t, x = _columns(records, 't', 'x_center')
    missing = np.flatnonzero(~np.isfinite(x))
    if missing.shape[0] == 0:
        return float(t[0]) if t.shape[0] else np.nan
    if missing[-1] == t.shape[0] - 1:
        return np.nan
    return float(t[missing[-1] + 1])
