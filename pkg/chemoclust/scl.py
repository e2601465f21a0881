# -*- coding: utf-8 -*-

"""The model without chemical decay as a viscous scalar conservation law.

For ``alpha = 0`` the gradient ``z`` of the concentration satisfies

    z_t + f(z)_x = z_xx,    z(-inf) = 1 / chi,   z(+inf) = -1 / chi,

with the convex flux ``f(r) = -1/|V| int_V Phi(v r) dv`` built from the
antiderivative ``Phi`` of the signal response over the velocity set
``V = (-v_max, v_max)``. The stationary profile is a viscous shock joining
the far field states.
"""

import collections
import logging
import warnings

import numpy as np
import scipy.integrate
import scipy.interpolate
import scipy.linalg


logger = logging.getLogger(__name__)


class ProfileDiverged(Exception):
    pass


class StepRejected(Exception):
    pass


class ContractionViolation(Exception):
    pass


class ResponseSpec(object):
    """Signal response of a cell moving with velocity ``v``.

    Attributes
    ----------

    kind : {'stiff', 'tanh'}
        ``stiff`` is ``phi(x) = -sign(x)``, ``tanh`` is
        ``phi(x) = -tanh(k x)``.

    v_max : float
        Half width of the velocity set.

    k : float
        Steepness of the smooth response.

    n_nodes : int
        Number of midpoint nodes of the velocity quadrature.
    """

    kinds = ('stiff', 'tanh')

    def __init__(self, kind='stiff', v_max=2., k=10., n_nodes=2048):
        if kind not in self.kinds:
            raise ValueError('unknown response %r, expected one of %r'
                             % (kind, self.kinds))
        if not v_max > 0:
            raise ValueError('v_max has to be positive, got %r' % v_max)
        if kind == 'tanh' and not k > 0:
            raise ValueError('k has to be positive, got %r' % k)
        self.kind = kind
        self.v_max = float(v_max)
        self.k = float(k)
        self.n_nodes = n_nodes

    @property
    def chi(self):
        """Mean speed ``1/|V| int_V |v| dv``, the flux slope of the stiff
        response."""
        return self.v_max / 2.

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == 'stiff':
            return -np.sign(x)
        return -np.tanh(self.k * x)

    def Phi(self, x):
        """Antiderivative of ``phi`` vanishing at zero."""
        x = np.asarray(x, dtype=float)
        if self.kind == 'stiff':
            return -np.abs(x)
        z = np.abs(self.k * x)
        return -(z + np.log1p(np.exp(-2 * z)) - np.log(2.)) / self.k

    def velocities(self):
        edges = np.linspace(-self.v_max, self.v_max, self.n_nodes + 1)
        return .5 * (edges[:-1] + edges[1:])

    def __repr__(self):
        return 'ResponseSpec(kind=%r, v_max=%r, k=%r)' % (
            self.kind, self.v_max, self.k)


def flux_from_response(spec, r):
    """Return ``f(r) = -1/|V| int_V Phi(v r) dv`` by the midpoint rule."""
    r = np.asarray(r, dtype=float)
    v = spec.velocities()
    return -spec.Phi(r[..., np.newaxis] * v).mean(axis=-1)


class Flux(object):
    """Fast evaluation of the flux of a response and of its derivative.

    The stiff flux ``chi |r|`` is evaluated in closed form, the smooth one
    through a cubic spline of the quadrature over ``[-r_max, r_max]``.
    """

    def __init__(self, spec, r_max, n_table=4001):
        self.spec = spec
        self.r_max = r_max
        if spec.kind == 'stiff':
            self._spline = None
        else:
            r = np.linspace(-r_max, r_max, n_table)
            self._spline = scipy.interpolate.CubicSpline(
                r, flux_from_response(spec, r))
            self._slope = self._spline.derivative()

    def __call__(self, r):
        if self._spline is None:
            return self.spec.chi * np.abs(r)
        return self._spline(np.clip(r, -self.r_max, self.r_max))

    def derivative(self, r):
        if self._spline is None:
            return self.spec.chi * np.sign(r)
        return self._slope(np.clip(r, -self.r_max, self.r_max))


class SCLState(object):
    """Grid function ``z`` on ``[-L, L]`` with pinned boundary values.

    Attributes
    ----------

    x : array_like
        Uniform grid.

    z : array_like
        Values; ``z[0]`` and ``z[-1]`` equal the far field states.

    far_field : tuple
        ``(z_minus, z_plus)``.
    """

    def __init__(self, x, z, far_field):
        self.x = np.asarray(x, dtype=float)
        z = np.array(z, dtype=float)
        z[0], z[-1] = far_field
        self.z = z
        self.far_field = tuple(far_field)

    @property
    def dx(self):
        return self.x[1] - self.x[0]

    def with_values(self, z):
        return SCLState(self.x, z, self.far_field)

    def shifted(self, a):
        """Return ``z(. - a)``, continued by the far field states."""
        lo, hi = self.far_field
        return self.with_values(np.interp(self.x - a, self.x, self.z,
                                          left=lo, right=hi))

    def integral(self):
        return scipy.integrate.trapezoid(self.z, self.x)


def far_field(chi):
    return (1. / chi, -1. / chi)


def scl_grid(L, dx):
    m = int(round(L / dx))
    return np.arange(-m, m + 1) * dx


def _rk4(g, z, h):
    k1 = g(z)
    k2 = g(z + .5 * h * k1)
    k3 = g(z + .5 * h * k2)
    k4 = g(z + h * k3)
    return z + h / 6. * (k1 + 2 * k2 + 2 * k3 + k4)


def stationary_profile(spec, chi, L=None, dx=1e-3, clamp_tol=1e-14):
    """Integrate ``Z' = f(Z) - f(1/chi)`` outwards from ``Z(0) = 0``.

    Parameters
    ----------

    spec : ResponseSpec

    chi : float
        Fixes the far field states ``-+1/chi``.

    L : float, optional
        Half width of the domain, defaults to ``20 / chi``.

    dx : float, optional
        Grid step and integration step.

    Returns
    -------

    state : SCLState
    """
    L = 20. / chi if L is None else L
    x = scl_grid(L, dx)
    m = x.shape[0] // 2
    flux = Flux(spec, 2. / chi)
    target = float(flux(1. / chi))
    bound = 1. / chi
    z = np.zeros_like(x)

    for direction, indices in ((1., range(m + 1, x.shape[0])),
                               (-1., range(m - 1, -1, -1))):
        g = lambda zz: direction * (float(flux(zz)) - target)
        current = 0.
        limit = -direction * bound
        for i in indices:
            if abs(current - limit) <= clamp_tol:
                current = limit
            else:
                current = _rk4(g, current, dx)
            if abs(current) > bound * (1 + 1e-12):
                raise ProfileDiverged('profile left [-1/chi, 1/chi] at x = %g'
                                      % x[i])
            z[i] = current
    return SCLState(x, z, far_field(chi))


def density_from_profile(state):
    """Return ``-Z'``, the density of the stationary profile."""
    return -np.gradient(state.z, state.dx)


def godunov_flux(flux, left, right):
    """Godunov numerical flux of a convex flux with its minimum at zero."""
    fl = flux(left)
    fr = flux(right)
    rarefaction = np.where((left < 0) & (right > 0), flux(0.),
                           np.minimum(fl, fr))
    return np.where(left <= right, rarefaction, np.maximum(fl, fr))


def _as_flux(flux, state):
    if isinstance(flux, ResponseSpec):
        return Flux(flux, 2. * max(abs(v) for v in state.far_field) or 1.)
    return flux


def step_scl(state, flux, dt):
    """Advance by one step: explicit Godunov transport, implicit diffusion.

    Parameters
    ----------

    state : SCLState

    flux : Flux or ResponseSpec

    dt : float
        Has to satisfy ``dt <= dx / max |f'(z)|``.

    Returns
    -------

    state : SCLState
    """
    flux = _as_flux(flux, state)
    z = state.z
    dx = state.dx
    speed = np.abs(flux.derivative(z)).max()
    if speed * dt > dx * (1 + 1e-12):
        raise StepRejected('CFL violated: dt = %g > dx / max|f\'| = %g'
                           % (dt, dx / speed))
    F = godunov_flux(flux, z[:-1], z[1:])
    star = z.copy()
    star[1:-1] -= dt / dx * (F[1:] - F[:-1])

    n = z.shape[0] - 2
    c = dt / dx ** 2
    ab = np.empty((3, n))
    ab[0] = -c
    ab[1] = 1 + 2 * c
    ab[2] = -c
    rhs = star[1:-1].copy()
    rhs[0] += c * z[0]
    rhs[-1] += c * z[-1]
    new = z.copy()
    new[1:-1] = scipy.linalg.solve_banded((1, 1), ab, rhs, check_finite=False)
    return state.with_values(new)


def stable_dt(flux, chi, dx):
    """Return the largest step allowed by the CFL condition on the band."""
    band = np.linspace(-1. / chi, 1. / chi, 201)
    return dx / float(np.abs(flux.derivative(band)).max())


def stationary_residual(profile, flux, dt=None):
    """Return how far the stationary profile ``Z`` is from being stationary
    for the scheme.

    Without ``dt`` this is the largest interior value of the discrete
    operator, ``|(F_{i+1/2} - F_{i-1/2}) / dx - (Z_{i+1} - 2 Z_i + Z_{i-1})
    / dx^2|``, the truncation error in space, of first order in ``dx``.
    With ``dt`` it is ``max |T_dt Z - Z| / dt`` for one step of the scheme,
    in which the implicit diffusion damps the error by an amount depending
    on ``dt / dx^2``.
    """
    flux = _as_flux(flux, profile)
    if dt is not None:
        advanced = step_scl(profile, flux, dt)
        return float(np.abs(advanced.z - profile.z).max()) / dt
    z, dx = profile.z, profile.dx
    F = godunov_flux(flux, z[:-1], z[1:])
    transport = (F[1:] - F[:-1]) / dx
    diffusion = (z[2:] - 2 * z[1:-1] + z[:-2]) / dx ** 2
    return float(np.abs(diffusion - transport).max())


def shift_h(z0, z_inf, chi, tol=1e-8):
    """Return the shift ``chi / 2 int (z0 - Z_inf) dx`` selected by ``z0``.
    """
    diff = z0.z - z_inf.z
    edge = max(abs(diff[1]), abs(diff[-2]))
    if edge > tol:
        warnings.warn('difference to the profile is %g at the boundary, the '
                      'shift is affected by truncation' % edge)
    return .5 * chi * scipy.integrate.trapezoid(diff, z0.x)


def l1_norm(state_a, state_b):
    return scipy.integrate.trapezoid(np.abs(state_a.z - state_b.z), state_a.x)


SCLRun = collections.namedtuple(
    'SCLRun', ['t', 'l1_distance', 'pair_distance', 'mass_residual', 'shift',
              'states'])


def l1_convergence_run(z0, spec, chi, t_final, dt=None, sample_every=1,
                       z_inf=None, slack=1e-6, keep_states=()):
    """Evolve ``z0`` and measure its distance to the shifted profile.

    The distance to ``Z_inf(. - h)``, with ``h`` the shift selected by ``z0``,
    decays to a floor of the order of ``dx`` at which the profile of the
    scheme and the integrated one differ. The shifted profile is also
    evolved by the scheme next to ``z0``; the distance of this pair is
    non-increasing by L1 contraction, which is checked at every step.

    Parameters
    ----------

    z0 : SCLState
        Initial state within the band of the far field states.

    spec : ResponseSpec

    chi : float

    t_final : float

    dt : float, optional
        Defaults to the largest step allowed by the CFL condition.

    sample_every : int, optional

    z_inf : SCLState, optional
        Stationary profile on the grid of ``z0``.

    slack : float, optional
        Tolerated increase of the pair distance per step.

    keep_states : sequence of floats, optional
        Times at which to keep the state of the solution.

    Returns
    -------

    run : SCLRun
        ``l1_distance`` is the distance to the shifted profile,
        ``pair_distance`` the distance to the evolved shifted profile and
        ``mass_residual`` the integral of the difference to the shifted
        profile.
    """
    lo, hi = far_field(chi)
    if (z0.z > lo + 1e-12).any() or (z0.z < hi - 1e-12).any():
        raise ValueError('initial state leaves the band [-1/chi, 1/chi]')
    flux = Flux(spec, 2. / chi)
    dx = z0.dx
    if dt is None:
        dt = stable_dt(flux, chi, dx)
    if z_inf is None:
        z_inf = stationary_profile(spec, chi, L=z0.x[-1], dx=dx)
    h = shift_h(z0, z_inf, chi)
    profile = z_inf.shifted(h)

    z, ref = z0, profile
    n_steps = int(round(t_final / dt))
    keep = dict((int(round(t / dt)), t) for t in keep_states)
    times, dist, pair, mass, states = [], [], [], [], {}

    def sample(k):
        times.append(k * dt)
        dist.append(l1_norm(z, profile))
        pair.append(l1_norm(z, ref))
        mass.append(scipy.integrate.trapezoid(z.z - profile.z, z.x))

    sample(0)
    if 0 in keep:
        states[keep[0]] = z
    last = pair[0]
    for k in range(1, n_steps + 1):
        z = step_scl(z, flux, dt)
        ref = step_scl(ref, flux, dt)
        current = l1_norm(z, ref)
        if current > last + slack:
            raise ContractionViolation(
                'L1 distance of the pair grew from %g to %g at t = %g'
                % (last, current, k * dt))
        last = current
        if k % sample_every == 0 or k == n_steps:
            sample(k)
        if k in keep:
            states[keep[k]] = z
    logger.info('scl run to t = %g: shift %g, L1 distance %g -> %g',
                n_steps * dt, h, dist[0], dist[-1])
    return SCLRun(np.array(times), np.array(dist), np.array(pair),
                  np.array(mass), h, states)


def co_properties(a, b, flux, dt, n_steps=1, slack=1e-12):
    """Check comparison, contraction, conservation and constants on a pair
    of states with equal boundary values.

    Returns
    -------

    report : dict
        Boolean outcomes for ``comparison``, ``contraction`` and
        ``constants``, the change of ``int (a - b)`` for ``conservation``.
    """
    flux = _as_flux(flux, a)
    ta, tb = a, b
    for _ in range(n_steps):
        ta = step_scl(ta, flux, dt)
        tb = step_scl(tb, flux, dt)
    ordered = (a.z <= b.z).all()
    lo, hi = a.far_field
    constant = SCLState(a.x, np.full_like(a.z, .5 * (lo + hi)),
                        (.5 * (lo + hi),) * 2)
    tc = constant
    for _ in range(n_steps):
        tc = step_scl(tc, flux, dt)
    mass_before = scipy.integrate.trapezoid(a.z - b.z, a.x)
    mass_after = scipy.integrate.trapezoid(ta.z - tb.z, a.x)
    return {
        'comparison': bool(not ordered or (ta.z <= tb.z + slack).all()),
        'contraction': bool(l1_norm(ta, tb) <= l1_norm(a, b) + slack),
        'conservation': float(abs(mass_after - mass_before)),
        'constants': bool(np.abs(tc.z - constant.z).max() <= slack),
    }
