# -*- coding: utf-8 -*-

"""Chemoattractant concentration generated by a mass grid.

With ``alpha > 0`` the concentration is the convolution of the density with
the kernel ``exp(-sqrt(alpha) |x|) / (2 sqrt(alpha))``, approximated by the
midpoint rule in mass. The discrete drift of particle ``i`` is driven by

    G_i = 1/2 sum_{j != i} sign(X_i - X_j) exp(-sqrt(alpha) |X_i - X_j|) d_eta

which equals ``-dS/dx`` at ``X_i``.
"""

import logging
import warnings

import numpy as np
import scipy.optimize

from chemoclust.model import reconstruct_density


logger = logging.getLogger(__name__)


class UnsupportedParameters(ValueError):
    pass


class DegeneratePeak(Exception):
    pass


class FieldSample(object):
    """Concentration and its first two derivatives at query points.

    Attributes
    ----------

    x : array_like
        Query positions.

    S : array_like
        Concentration.

    dS : array_like
        First derivative.

    d2S : array_like
        Second derivative, given by ``alpha S - rho``.
    """

    def __init__(self, x, S, dS, d2S):
        self.x = x
        self.S = S
        self.dS = dS
        self.d2S = d2S

    def __repr__(self):
        return 'FieldSample(x=%r, S=%r, dS=%r, d2S=%r)' % (
            self.x, self.S, self.dS, self.d2S)


def _rate(params):
    if not params.alpha > 0:
        raise UnsupportedParameters(
            'the convolution kernel needs alpha > 0; use chemoclust.scl for '
            'alpha = 0')
    return params.sqrt_alpha


def _one_sided_sums(x, rate):
    """Return kernel sums over the particles left and right of each particle.

    Both sums run over increasing distance, so a grid and its mirror image
    produce identical values with left and right exchanged.
    """
    n = x.shape[0]
    k = np.arange(1, n)
    i = np.arange(n)[:, np.newaxis]
    left_idx = i - k
    right_idx = i + k
    left = np.where(left_idx >= 0,
                    np.exp(-rate * (x[:, np.newaxis] - x[left_idx.clip(0)])),
                    0.)
    right = np.where(right_idx < n,
                     np.exp(-rate * (x[right_idx.clip(max=n - 1)]
                                     - x[:, np.newaxis])),
                     0.)
    return left.sum(axis=1), right.sum(axis=1)


def _one_sided_sums_prefix(x, rate):
    """Linear cost version of ``_one_sided_sums``.

    Uses ``exp(-r (X_i - X_j)) = exp(-r (X_i - c)) exp(r (X_j - c))`` with
    the center ``c`` of the grid as reference.
    """
    c = .5 * (x[0] + x[-1])
    up = np.exp(rate * (x - c))
    down = np.exp(-rate * (x - c))
    left = down * np.concatenate([[0.], np.cumsum(up)[:-1]])
    right = up * np.concatenate([np.cumsum(down[::-1])[::-1][1:], [0.]])
    return left, right


def grad_S_sums(grid, params, method='direct'):
    """Return ``G_i`` for all particles.

    Parameters
    ----------

    grid : MassGrid

    params : ModelParams

    method : {'direct', 'prefix'}, optional
        ``direct`` sums all pairs, ``prefix`` uses prefix sums of the
        factorized kernel. The latter falls back to the former if the grid
        is too wide for the factorization to stay finite.

    Returns
    -------

    G : array_like
        One entry per particle, ``dS/dx(X_i) = -G_i``.
    """
    rate = params.sqrt_alpha
    x = np.asarray(grid.positions)
    if method == 'prefix' and rate * (x[-1] - x[0]) < 600:
        left, right = _one_sided_sums_prefix(x, rate)
    elif method in ('direct', 'prefix'):
        left, right = _one_sided_sums(x, rate)
    else:
        raise ValueError('unknown summation method %r' % method)
    return .5 * grid.delta_eta * (left - right)


def grad_S_sum(grid, params, i):
    """Return ``G_i`` of a single particle."""
    x = np.asarray(grid.positions)
    d = x[i] - np.delete(x, i)
    return (.5 * grid.delta_eta
            * (np.sign(d) * np.exp(-params.sqrt_alpha * np.abs(d))).sum())


def S_at(grid, params, x):
    """Return the concentration at ``x`` (scalar or array)."""
    rate = _rate(params)
    x = np.asarray(x, dtype=float)
    d = np.abs(x[..., np.newaxis] - np.asarray(grid.positions))
    return np.exp(-rate * d).sum(axis=-1) * grid.delta_eta / (2 * rate)


def S_prefix(grid, params, x):
    """Linear cost evaluation of ``S_at`` for increasing query points."""
    rate = _rate(params)
    xs = np.asarray(grid.positions)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c = .5 * (xs[0] + xs[-1])
    if rate * (max(xs[-1], x.max()) - min(xs[0], x.min())) >= 600:
        return S_at(grid, params, x)
    up = np.concatenate([[0.], np.cumsum(np.exp(rate * (xs - c)))])
    down = np.concatenate([np.cumsum(np.exp(-rate * (xs - c))[::-1])[::-1],
                           [0.]])
    k = np.searchsorted(xs, x, side='right')
    total = (np.exp(-rate * (x - c)) * up[k]
             + np.exp(rate * (x - c)) * down[k])
    return total * grid.delta_eta / (2 * rate)


def drift_map(grid, params, x):
    """Return ``1/2 sum_j d_eta sign(x - X_j) exp(-sqrt(alpha) |x - X_j|)``.

    This is the continuous extension of ``G_i`` to arbitrary positions and
    equals ``-dS/dx``.
    """
    x = np.asarray(x, dtype=float)
    d = x[..., np.newaxis] - np.asarray(grid.positions)
    return (.5 * grid.delta_eta
            * (np.sign(d) * np.exp(-params.sqrt_alpha * np.abs(d)))
            .sum(axis=-1))


def field_sample(grid, params, x):
    """Return a ``FieldSample`` at the query points ``x``."""
    x = np.asarray(x, dtype=float)
    S = S_at(grid, params, x)
    rho = reconstruct_density(grid)(x)
    return FieldSample(x, S, -drift_map(grid, params, x),
                       params.alpha * S - rho)


def sign_changes(G):
    """Return index pairs ``(a, b)`` of consecutive non-zero entries of ``G``
    with opposite signs; zero entries in between are skipped."""
    signs = np.sign(G)
    nonzero = np.flatnonzero(signs)
    return [(a, b) for a, b in zip(nonzero[:-1], nonzero[1:])
            if signs[a] != signs[b]]


def count_critical_points(grid, params, G=None, method='direct'):
    """Return the number of critical points without refining them."""
    if G is None:
        G = grad_S_sums(grid, params, method=method)
    return len(sign_changes(G))


def critical_points(grid, params, tol=1e-10, G=None):
    """Return the critical points of the concentration.

    Sign changes of ``G_i`` between neighbouring particles bracket roots of
    ``drift_map``, which are refined by bisection. A run of exactly vanishing
    ``G_i`` between opposite signs is a plateau; its midpoint is returned
    and a warning is issued.

    Returns
    -------

    points : list of floats
        Increasing positions. Empty if ``G`` never changes sign.
    """
    x = np.asarray(grid.positions)
    if G is None:
        G = grad_S_sums(grid, params)
    f = lambda y: float(drift_map(grid, params, y))

    points = []
    for a, b in sign_changes(G):
        if b == a + 1:
            points.append(scipy.optimize.bisect(f, x[a], x[b], xtol=tol))
        elif b == a + 2:
            points.append(x[a + 1])
        else:
            mid = .5 * (x[a + 1] + x[b - 1])
            warnings.warn('concentration is flat between %g and %g, '
                          'returning the midpoint' % (x[a + 1], x[b - 1]))
            points.append(mid)
    return points


def density_slopes(grid, center):
    """Return the one sided density slopes right and left of ``center``.

    Each slope is the difference quotient of the two closest particles on
    its side whose centered density samples do not reach across ``center``.
    """
    profile = reconstruct_density(grid)
    x, rho = profile.positions, profile.density
    r = int(np.searchsorted(x, center, side='right'))
    if r < 3 or r > len(x) - 3:
        raise DegeneratePeak('center %g too close to the edge of the grid'
                             % center)
    right = (rho[r + 2] - rho[r + 1]) / (x[r + 2] - x[r + 1])
    left = (rho[r - 2] - rho[r - 3]) / (x[r - 2] - x[r - 3])
    return right, left


def peak_curvature(grid, params, center):
    """Return ``d2S`` at ``center`` via ``alpha S - rho``."""
    rho = reconstruct_density(grid)(center)
    return params.alpha * float(S_at(grid, params, center)) - float(rho)


def xdot(grid, params, center):
    """Return the velocity of the concentration peak at ``center``.

    The velocity is the mean of the one sided density slopes divided by the
    curvature of the concentration at the peak.
    """
    d2S = peak_curvature(grid, params, center)
    if not d2S < 0:
        raise DegeneratePeak('curvature at the peak is %r, expected < 0'
                             % d2S)
    right, left = density_slopes(grid, center)
    return (right + left) / (2 * d2S)
