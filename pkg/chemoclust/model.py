# -*- coding: utf-8 -*-

"""Model parameters and the mass-Lagrangian representation of the cell
density.

The density is stored through its inverse cumulative distribution function:
particle ``i`` sits at the position holding cumulative mass
``(i + 1/2) * delta_eta``. Mass is carried by the representation, so no
operation in this package ever changes it.
"""

import logging
import warnings

import numpy as np
import scipy.integrate
import scipy.optimize


logger = logging.getLogger(__name__)


class InvalidDensity(ValueError):
    pass


class MassMismatch(ValueError):
    pass


class UnsupportedNormalization(ValueError):
    pass


class OrderingViolation(Exception):
    pass


class ModelParams(object):
    """Physical constants of the model.

    Attributes
    ----------

    chi : float
        Chemosensitivity, in units of inverse length.

    alpha : float
        Decay rate of the chemoattractant, in units of inverse squared length.

    mass : float
        Total mass of cells. Defaults to ``2 / chi``.

    lam : float
        Derived exponent ``chi + sqrt(alpha)`` of the second conservation law.
    """

    def __init__(self, chi=1.0, alpha=1.0, mass=None):
        chi = float(chi)
        alpha = float(alpha)
        mass = 2. / chi if mass is None and chi > 0 else mass
        if not chi > 0:
            raise ValueError('chi has to be positive, got %r' % chi)
        if not alpha >= 0:
            raise ValueError('alpha has to be non-negative, got %r' % alpha)
        if mass is None or not float(mass) > 0:
            raise ValueError('mass has to be positive, got %r' % mass)
        self._chi = chi
        self._alpha = alpha
        self._mass = float(mass)

    chi = property(lambda self: self._chi)
    alpha = property(lambda self: self._alpha)
    mass = property(lambda self: self._mass)

    @property
    def sqrt_alpha(self):
        return np.sqrt(self._alpha)

    @property
    def lam(self):
        return self._chi + np.sqrt(self._alpha)

    @property
    def equilibrium_mass(self):
        return 2. / self._chi

    def as_dict(self):
        return {'chi': self.chi, 'alpha': self.alpha, 'mass': self.mass,
                'lambda': self.lam}

    def __eq__(self, other):
        return (isinstance(other, ModelParams)
                and self.as_dict() == other.as_dict())

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.chi, self.alpha, self.mass))

    def __repr__(self):
        return 'ModelParams(chi=%r, alpha=%r, mass=%r)' % (
            self.chi, self.alpha, self.mass)


class MassGrid(object):
    """Particle positions at uniform mass spacing.

    Attributes
    ----------

    positions : array_like
        Strictly increasing positions ``X_0 < ... < X_{N-1}``. The array is
        read only.

    delta_eta : float
        Mass carried by each particle.
    """

    def __init__(self, positions, delta_eta):
        positions = np.array(positions, dtype=float)
        if positions.ndim != 1 or positions.shape[0] < 2:
            raise ValueError('positions have to be a 1D array of length >= 2')
        if not delta_eta > 0:
            raise ValueError('delta_eta has to be positive, got %r'
                             % delta_eta)
        check_ordering(positions)
        positions.setflags(write=False)
        self.positions = positions
        self.delta_eta = delta_eta

    def __len__(self):
        return self.positions.shape[0]

    @property
    def n(self):
        return self.positions.shape[0]

    @property
    def total_mass(self):
        return self.n * self.delta_eta

    @property
    def eta(self):
        """Cumulative mass at which each particle sits."""
        return (np.arange(self.n) + .5) * self.delta_eta

    def with_positions(self, positions):
        """Return a grid with the same mass spacing and new positions."""
        return MassGrid(positions, self.delta_eta)

    def translate(self, a):
        return self.with_positions(self.positions + a)

    def reflect(self):
        """Return the mirror image ``x -> -x`` of the grid."""
        return self.with_positions(-self.positions[::-1])

    def __repr__(self):
        return 'MassGrid(n=%i, delta_eta=%r, span=[%g, %g])' % (
            self.n, self.delta_eta, self.positions[0], self.positions[-1])


class DensityProfile(object):
    """Density samples at particle positions.

    Attributes
    ----------

    positions : array_like
        Sample positions, increasing.

    density : array_like
        Non-negative density values at ``positions``.
    """

    def __init__(self, positions, density):
        self.positions = np.asarray(positions, dtype=float)
        self.density = np.asarray(density, dtype=float)
        if (self.density < 0).any():
            raise InvalidDensity('negative density sample')

    def mass(self):
        return scipy.integrate.trapezoid(self.density, self.positions)

    def __call__(self, x):
        """Evaluate the piecewise linear interpolant, zero off the support."""
        return np.interp(x, self.positions, self.density, left=0., right=0.)


class TabulatedDensity(object):
    """Density sampler given by tabulated ``(y, rho)`` pairs.

    The sampler interpolates linearly and vanishes outside the table.
    """

    def __init__(self, y, rho):
        y = np.asarray(y, dtype=float)
        rho = np.asarray(rho, dtype=float)
        if y.ndim != 1 or y.shape != rho.shape or y.shape[0] < 2:
            raise InvalidDensity('table needs two equally long columns')
        if (np.diff(y) <= 0).any():
            raise InvalidDensity('table positions have to be increasing')
        if not np.isfinite(rho).all() or (rho < 0).any():
            raise InvalidDensity('table densities have to be finite and '
                                 'non-negative')
        self.y = y
        self.rho = rho
        self.support = (y[0], y[-1])
        self.breakpoints = y

    def __call__(self, x):
        return np.interp(x, self.y, self.rho, left=0., right=0.)


def load_density_csv(fn):
    """Read a density table with header ``y,rho`` from ``fn``."""
    with open(fn) as fp:
        header = fp.readline().strip().replace(' ', '')
        if header != 'y,rho':
            raise InvalidDensity('expected header "y,rho", got %r' % header)
        table = np.loadtxt(fp, delimiter=',', ndmin=2)
    return TabulatedDensity(table[:, 0], table[:, 1])


def equilibrium_density(params):
    """Return the stationary density ``exp(-chi |y|)``."""
    chi = params.chi
    sampler = lambda x: np.exp(-chi * np.abs(x))
    sampler.breakpoints = np.array([0.])
    return sampler


def shifted_density(params, shift):
    """Return the stationary density translated by ``shift``."""
    chi = params.chi
    sampler = lambda x: np.exp(-chi * np.abs(np.asarray(x) - shift))
    sampler.breakpoints = np.array([shift])
    return sampler


def two_peaks_density(params):
    """Return an asymmetric two bump density of mass ``2 / chi``.

    The profile is ``c (exp(-2 (y + 3)^2) + 0.7 exp(-2 (y - 2)^2))``.
    """
    c = params.equilibrium_mass / (1.7 * np.sqrt(np.pi / 2))

    def sampler(x):
        x = np.asarray(x, dtype=float)
        return c * (np.exp(-2 * (x + 3) ** 2) + .7 * np.exp(-2 * (x - 2) ** 2))
    sampler.breakpoints = np.array([-3., 2.])
    return sampler


def even_perturbation_density(params, amplitude):
    """Return ``exp(-chi |y|) (1 + a (cos(chi y) - 1/2))``.

    The perturbation has zero mass against the stationary density and is
    even, so the peak stays at the kink in the origin and ``w(0)`` vanishes.
    """
    chi = params.chi
    if not 0 <= amplitude < 2. / 3:
        raise InvalidDensity('amplitude has to lie in [0, 2/3), got %r'
                             % amplitude)

    def sampler(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-chi * np.abs(x)) * (
            1 + amplitude * (np.cos(chi * x) - .5))
    sampler.breakpoints = np.array([0.])
    return sampler


def odd_perturbation_density(params, amplitude):
    """Return ``exp(-chi |y|) (1 + a (sin(chi y) - c sin(2 chi y)))``.

    ``c = (l^2 + 4) / (2 (l^2 + 1))`` with ``l = lambda / chi`` cancels the
    gradient of the concentration at the origin, so the peak sits at the kink
    of the density while ``w(0) = a chi (1 - 2 c)`` does not vanish.
    """
    chi = params.chi
    ratio = (params.lam / chi) ** 2
    c = (ratio + 4) / (2 * (ratio + 1))
    if not 0 <= amplitude < 1. / (1 + c):
        raise InvalidDensity('amplitude has to lie in [0, %g), got %r'
                             % (1. / (1 + c), amplitude))

    def sampler(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-chi * np.abs(x)) * (
            1 + amplitude * (np.sin(chi * x) - c * np.sin(2 * chi * x)))
    sampler.breakpoints = np.array([0.])
    return sampler


builtin_densities = {
    'equilibrium': lambda params, shift=0., amplitude=0.:
        equilibrium_density(params),
    'shifted': lambda params, shift=0., amplitude=0.:
        shifted_density(params, shift),
    'two_peaks': lambda params, shift=0., amplitude=0.:
        two_peaks_density(params),
    'even_perturbation': lambda params, shift=0., amplitude=.04:
        even_perturbation_density(params, amplitude),
    'odd_perturbation': lambda params, shift=0., amplitude=.04:
        odd_perturbation_density(params, amplitude),
}


def check_ordering(positions):
    gaps = np.diff(positions)
    if not np.isfinite(positions).all():
        raise OrderingViolation('non-finite particle position')
    if (gaps <= 0).any():
        i = int(np.argmax(gaps <= 0))
        raise OrderingViolation(
            'positions not strictly increasing at index %i: %r >= %r'
            % (i, positions[i], positions[i + 1]))


def _quad(rho0, a, b, breakpoints):
    edges = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    value = 0.
    with warnings.catch_warnings():
        warnings.simplefilter('error', scipy.integrate.IntegrationWarning)
        try:
            for lo, hi in zip(edges[:-1], edges[1:]):
                value += scipy.integrate.quad(
                    lambda x: float(rho0(x)), lo, hi,
                    epsabs=1e-13, epsrel=1e-10, limit=200)[0]
        except scipy.integrate.IntegrationWarning as e:
            raise InvalidDensity('density not integrable on [%g, %g]: %s'
                                 % (a, b, e))
    if not np.isfinite(value):
        raise InvalidDensity('density not integrable on [%g, %g]' % (a, b))
    return value


def _support(rho0, delta_eta):
    """Find an interval holding all but a small fraction of the mass."""
    if hasattr(rho0, 'support'):
        return rho0.support
    breakpoints = getattr(rho0, 'breakpoints', np.array([0.]))
    lo, hi = np.min(breakpoints) - 1., np.max(breakpoints) + 1.
    tail = 1e-3 * delta_eta
    for _ in range(60):
        if _quad(rho0, -np.inf, lo, breakpoints) < tail:
            break
        lo -= 2 * (hi - lo)
    for _ in range(60):
        if _quad(rho0, hi, np.inf, breakpoints) < tail:
            break
        hi += 2 * (hi - lo)
    return lo, hi


def init_grid_from_density(rho0, n, params, n_cells=2048):
    """Return the mass grid of a density by inverting its cumulative mass.

    Parameters
    ----------

    rho0 : callable
        Non-negative, integrable density. Optional attributes ``support``
        (finite interval outside of which it vanishes) and ``breakpoints``
        (positions of kinks) guide the quadrature.

    n : int
        Number of particles, at least 3.

    params : ModelParams
        The total mass of ``rho0`` has to equal ``params.mass``.

    n_cells : int, optional
        Number of cells of the tabulated cumulative mass used to bracket
        each particle before the root is refined.

    Returns
    -------

    grid : MassGrid
    """
    if n < 3:
        raise ValueError('need at least 3 particles, got %r' % n)
    breakpoints = np.asarray(getattr(rho0, 'breakpoints', [0.]), dtype=float)
    delta_eta = params.mass / n

    y = np.linspace(breakpoints.min() - 50, breakpoints.max() + 50, 4001)
    values = np.asarray(rho0(y), dtype=float)
    if not np.isfinite(values).all() or (values < 0).any():
        raise InvalidDensity('density has negative or non-finite values')

    if hasattr(rho0, 'support'):
        lo, hi = rho0.support
        total = _quad(rho0, lo, hi, breakpoints)
    else:
        total = _quad(rho0, -np.inf, np.inf, breakpoints)
        lo, hi = _support(rho0, delta_eta)
    if abs(total - params.mass) > 1e-6 * params.mass:
        raise MassMismatch('density has mass %r, expected %r'
                           % (total, params.mass))

    # Tabulate the cumulative mass, then refine each particle within its cell.
    nodes = np.union1d(np.linspace(lo, hi, n_cells + 1),
                       breakpoints[(breakpoints > lo) & (breakpoints < hi)])
    offset = 0. if hasattr(rho0, 'support') else _quad(
        rho0, -np.inf, lo, breakpoints)
    cells = [_quad(rho0, a, b, breakpoints)
             for a, b in zip(nodes[:-1], nodes[1:])]
    cumulative = offset + np.concatenate([[0.], np.cumsum(cells)])

    targets = (np.arange(n) + .5) * delta_eta
    positions = np.empty(n)
    for i, target in enumerate(targets):
        k = int(np.searchsorted(cumulative, target)) - 1
        k = min(max(k, 0), len(nodes) - 2)
        a, b = nodes[k], nodes[k + 1]
        base = cumulative[k]
        f = lambda x: base + _quad(rho0, a, x, breakpoints) - target
        fa, fb = f(a), f(b)
        if fa >= 0:
            positions[i] = a
        elif fb <= 0:
            positions[i] = b
        else:
            positions[i] = scipy.optimize.bisect(f, a, b, xtol=1e-12,
                                                 maxiter=200)
    logger.debug('inverted cumulative mass for %i particles on [%g, %g]',
                 n, lo, hi)
    return MassGrid(positions, delta_eta)


def equilibrium_grid(params, n):
    """Return the exact mass grid of the stationary density.

    The inverse of the cumulative mass of ``exp(-chi |y|)`` is
    ``log(chi eta) / chi`` below the median and ``-log(2 - chi eta) / chi``
    above. The upper half is mirrored from the lower half, so the positions
    are exactly antisymmetric.
    """
    if abs(params.mass - params.equilibrium_mass) > 1e-12 * params.mass:
        raise UnsupportedNormalization(
            'equilibrium grid needs mass 2 / chi = %r, got %r'
            % (params.equilibrium_mass, params.mass))
    if n < 3:
        raise ValueError('need at least 3 particles, got %r' % n)
    chi = params.chi
    delta_eta = params.mass / n
    half = n // 2
    eta = (np.arange(half) + .5) * delta_eta
    lower = np.log(chi * eta) / chi
    middle = [0.] if n % 2 else []
    positions = np.concatenate([lower, middle, -lower[::-1]])
    return MassGrid(positions, delta_eta)


def reconstruct_density(grid):
    """Return density samples at the particles of ``grid``.

    Interior particles use the centered quotient
    ``2 delta_eta / (X_{i+1} - X_{i-1})``, the two end particles the one
    sided quotient of their only gap.
    """
    x = np.asarray(grid.positions)
    check_ordering(x)
    d = grid.delta_eta
    rho = np.empty_like(x)
    rho[1:-1] = 2 * d / (x[2:] - x[:-2])
    rho[0] = d / (x[1] - x[0])
    rho[-1] = d / (x[-1] - x[-2])
    return DensityProfile(x, rho)
