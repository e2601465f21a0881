# -*- coding: utf-8 -*-

"""Numerical checks of the weighted functional inequalities behind the
stability of the stationary state.

The central one is the Poincare inequality

    int |w - <w>_lambda|^2 exp(-chi |y|) <= 4 / chi^2 int |w'|^2 exp(-chi |y|)

for ``lambda >= chi``, where the average uses a steeper weight than the
energy. Its left hand side is a quadratic form in ``w'`` with the kernel
``omega``, which is non-negative and symmetric.
"""

import collections
import logging

import numpy as np
import scipy.integrate

from sklearn.utils import check_random_state

from chemoclust.analysis.diagnostics import (
    uniform_grid, weighted_integral, weighted_mean)
from chemoclust.utils import trapezoid_weights


logger = logging.getLogger(__name__)


class ParameterOrder(ValueError):
    pass


PoincareResult = collections.namedtuple('PoincareResult',
                                        ['ratio', 'lhs', 'rhs'])


class KernelParams(object):
    """Exponents of the averaging weight (``lam``) and the energy weight
    (``chi``)."""

    def __init__(self, lam, chi=1.):
        if not chi > 0:
            raise ValueError('chi has to be positive, got %r' % chi)
        if not lam >= chi:
            raise ParameterOrder('need lambda >= chi, got lambda=%r chi=%r'
                                 % (lam, chi))
        self.lam = float(lam)
        self.chi = float(chi)

    def __repr__(self):
        return 'KernelParams(lam=%r, chi=%r)' % (self.lam, self.chi)


class SampledFunction(object):
    """Function sampled on a uniform grid of ``[-radius, radius]``.

    Attributes
    ----------

    y : array_like
        Grid, symmetric about zero.

    values : array_like
        Samples.
    """

    def __init__(self, y, values):
        y = np.asarray(y, dtype=float)
        values = np.asarray(values, dtype=float)
        if y.ndim != 1 or y.shape != values.shape or y.shape[0] < 3:
            raise ValueError('need matching 1D arrays of length >= 3')
        if not np.allclose(np.diff(y), y[1] - y[0]):
            raise ValueError('grid has to be uniform')
        self.y = y
        self.values = values

    @classmethod
    def from_callable(cls, f, radius, h):
        y = uniform_grid(radius, h)
        return cls(y, f(y))

    @property
    def h(self):
        return self.y[1] - self.y[0]

    @property
    def radius(self):
        return self.y[-1]

    @property
    def derivative(self):
        return np.gradient(self.values, self.h)

    def at_zero(self):
        return float(np.interp(0., self.y, self.values))


class GaussianSum(object):
    """Sum of Gaussian bumps ``a exp(-(y - c)^2 / (2 s^2))``."""

    def __init__(self, centers, widths, amplitudes):
        self.centers = np.asarray(centers, dtype=float)
        self.widths = np.asarray(widths, dtype=float)
        self.amplitudes = np.asarray(amplitudes, dtype=float)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)[..., np.newaxis]
        z = (y - self.centers) / self.widths
        return (self.amplitudes * np.exp(-.5 * z ** 2)).sum(axis=-1)


def random_test_functions(n_functions, random_state=42, max_terms=8,
                          center_range=(-5., 5.), width_range=(.3, 2.),
                          amplitude_range=(-1., 1.)):
    """Return ``n_functions`` random sums of at most ``max_terms`` Gaussians.
    """
    rng = check_random_state(random_state)
    functions = []
    for _ in range(n_functions):
        k = rng.randint(1, max_terms + 1)
        functions.append(GaussianSum(rng.uniform(*center_range, size=k),
                                     rng.uniform(*width_range, size=k),
                                     rng.uniform(*amplitude_range, size=k)))
    return functions


def cdf_M(lam, x):
    """Cumulative distribution of the density ``lam / 2 exp(-lam |x|)``."""
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0, .5 * np.exp(lam * np.minimum(x, 0)),
                    1 - .5 * np.exp(-lam * np.maximum(x, 0)))


def sf_M(lam, x):
    """Return ``1 - cdf_M(lam, x)`` without cancellation for large ``x``."""
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, .5 * np.exp(-lam * np.maximum(x, 0)),
                    1 - .5 * np.exp(lam * np.minimum(x, 0)))


def cdf_gap(lam, chi, x):
    """Return ``cdf_M(lam, x) - cdf_M(chi, x)`` without cancellation."""
    x = np.asarray(x, dtype=float)
    neg = np.minimum(x, 0)
    pos = np.maximum(x, 0)
    return np.where(x <= 0,
                    .5 * (np.exp(lam * neg) - np.exp(chi * neg)),
                    .5 * (np.exp(-chi * pos) - np.exp(-lam * pos)))


def omega(kp, x, y):
    """Evaluate the kernel of the quadratic form; broadcasts over ``x, y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    return (cdf_gap(kp.lam, kp.chi, x) * cdf_gap(kp.lam, kp.chi, y)
            + sf_M(kp.chi, hi) * cdf_M(kp.chi, lo))


def centered_energy(w, kp):
    """Return ``int |w - <w>_lambda|^2 exp(-chi |y|)``."""
    mean = weighted_mean(w.y, w.values, kp.lam)
    return weighted_integral(w.y, (w.values - mean) ** 2, kp.chi)


def kernel_form(w, kp):
    """Return ``int int w'(x) w'(y) omega(x, y) dx dy / chi``.

    The double sum is split along the branches of the kernel and computed
    with prefix sums in linear cost.
    """
    g = w.derivative * trapezoid_weights(w.y)
    separable = (g * cdf_gap(kp.lam, kp.chi, w.y)).sum() ** 2
    M = cdf_M(kp.chi, w.y)
    N = sf_M(kp.chi, w.y)
    below = np.concatenate([[0.], np.cumsum(g * M)[:-1]])
    crossed = (g * N * (2 * below + g * M)).sum()
    return (separable + crossed) / kp.chi


def kernel_form_naive(w, kp):
    """Quadratic cost version of ``kernel_form``, for cross checks."""
    g = w.derivative * trapezoid_weights(w.y)
    K = omega(kp, w.y[:, np.newaxis], w.y[np.newaxis, :])
    return g.dot(K).dot(g) / kp.chi


def quadratic_form_identity(w, kp):
    """Compare both sides of the kernel representation of the Poincare left
    hand side.

    Returns
    -------

    lhs : float
        ``1/2 int |w - <w>_lambda|^2 exp(-chi |y|)``.

    rhs : float
        The kernel form of ``w'``.

    gap : float
        ``|lhs - rhs|`` relative to ``lhs``; zero if both vanish.
    """
    lhs = .5 * centered_energy(w, kp)
    rhs = kernel_form(w, kp)
    scale = max(abs(lhs), abs(rhs))
    gap = abs(lhs - rhs) / scale if scale > 0 else 0.
    return lhs, rhs, gap


def poincare_check(w, kp):
    """Return the ratio of the Poincare left hand side to its bound.

    A ratio above one is a violation. Constant functions give ``0 / 0``,
    reported as a zero ratio.
    """
    lhs = centered_energy(w, kp)
    rhs = weighted_integral(w.y, w.derivative ** 2, kp.chi)
    bound = 4. / kp.chi ** 2 * rhs
    if bound > 0:
        ratio = lhs / bound
    elif lhs > 1e-300:
        logger.warning('positive left hand side %g with vanishing gradient',
                       lhs)
        ratio = np.inf
    else:
        ratio = 0.
    return PoincareResult(ratio, lhs, rhs)


def pointwise_bound(kp, x, radius=40.):
    """Return ``exp(|x|/2) int omega(x, y) exp(|y|/2) dy`` with ``chi = 1``.

    The kernel parameters are rescaled by ``y -> chi y`` first. The value
    stays below 2 and tends to 2 as ``|x|`` grows.
    """
    lam = kp.lam / kp.chi
    x = kp.chi * float(x)
    unit = KernelParams(lam, 1.)
    integrand = lambda y: float(omega(unit, x, y)) * np.exp(.5 * abs(y))
    edges = [-radius] + sorted(set([0., x])) + [radius]
    total = sum(scipy.integrate.quad(integrand, a, b, epsabs=1e-13,
                                     epsrel=1e-12, limit=200)[0]
                for a, b in zip(edges[:-1], edges[1:]) if b > a)
    return np.exp(.5 * abs(x)) * total


def zero_integral_identity(lam, radius=80.):
    """Return ``int (cdf_M(lam, y) - cdf_M(1, y)) exp(|y|/2) dy``, which
    vanishes for ``lam > 1/2``."""
    integrand = lambda y: float(cdf_gap(lam, 1., y)) * np.exp(.5 * abs(y))
    return sum(scipy.integrate.quad(integrand, a, b, epsabs=1e-13,
                                    epsrel=1e-12, limit=200)[0]
               for a, b in ((-radius, 0.), (0., radius)))


def interpolation_check(f, a, b):
    """Return both sides of the bound of ``|f(0) - <f>_a|^2`` by
    ``1 / (2 a - b) 1/2 int |f'|^2 exp(-b |y|)``."""
    if not a >= b > 0:
        raise ParameterOrder('need a >= b > 0, got a=%r b=%r' % (a, b))
    lhs = (f.at_zero() - weighted_mean(f.y, f.values, a)) ** 2
    rhs = (.5 * weighted_integral(f.y, f.derivative ** 2, b)
           / (2. * a - b))
    return lhs, rhs


def hardy_gap(f, lam):
    """Return ``|<f>_lam - f(0)|``, which vanishes as ``lam`` grows."""
    return abs(weighted_mean(f.y, f.values, lam) - f.at_zero())


def near_optimizer(radius, chi=1.):
    """Return ``(chi |y| / 2 - 1) exp(chi |y| / 2)``, frozen beyond
    ``radius``.

    Its Poincare ratio approaches one as the radius grows.
    """
    def w(y):
        r = chi * np.minimum(np.abs(y), radius)
        return (r / 2. - 1) * np.exp(r / 2.)
    return w


def rayleigh_sweep(radii, kp, h=1e-2, margin=20.):
    """Return the Poincare ratio of the near optimizer for each radius."""
    ratios = []
    for radius in radii:
        w = SampledFunction.from_callable(
            near_optimizer(radius, kp.chi), radius + margin / kp.chi, h)
        ratios.append(poincare_check(w, kp).ratio)
        logger.debug('near optimizer radius %g: ratio %g', radius,
                     ratios[-1])
    return ratios
