# -*- coding: utf-8 -*-

import numpy as np
import pytest

from chemoclust.field import (
    DegeneratePeak, UnsupportedParameters, S_at, S_prefix,
    count_critical_points, critical_points, density_slopes, drift_map,
    field_sample, grad_S_sum, grad_S_sums, peak_curvature, sign_changes, xdot)
from chemoclust.model import (
    MassGrid, ModelParams, equilibrium_grid, init_grid_from_density,
    reconstruct_density)


def make_two_bumps(n=200):
    """Return a symmetric grid with unit mass bumps at -5 and 5."""
    def rho(x):
        x = np.asarray(x, dtype=float)
        return .5 * (np.exp(-np.abs(x + 5)) + np.exp(-np.abs(x - 5)))
    rho.breakpoints = np.array([-5., 5.])
    grid = init_grid_from_density(rho, n, ModelParams())
    x = grid.positions
    return grid.with_positions(.5 * (x - x[::-1]))


def make_skewed(n=400):
    """Return a single peaked grid without mirror symmetry."""
    x = equilibrium_grid(ModelParams(), n).positions
    return MassGrid(x + .3 * (np.logaddexp(0., x) - np.log(2.)), 2. / n)


def test_S_equilibrium_peak():
    """The concentration of the stationary state peaks at 1 / (sqrt(alpha)
    (sqrt(alpha) + chi))."""
    p = ModelParams()
    grid = equilibrium_grid(p, 400)
    S = S_at(grid, p, 0.)
    assert abs(S - .5) < 5e-3, 'S(0) = %g' % S


def test_S_single_particle():
    p = ModelParams(alpha=4.)
    grid = MassGrid([0., 1e3], .3)
    assert np.allclose(S_at(grid, p, 0.), .3 / 4.), 'wrong kernel value'


def test_S_symmetric():
    p = ModelParams()
    grid = equilibrium_grid(p, 100)
    x = np.linspace(0, 5, 11)
    assert np.allclose(S_at(grid, p, x), S_at(grid, p, -x), rtol=1e-14), \
        'S is not even'


def test_S_translation():
    p = ModelParams()
    grid = make_skewed(100)
    x = np.linspace(-3, 3, 7)
    assert np.allclose(S_at(grid.translate(.7), p, x + .7), S_at(grid, p, x),
                       rtol=1e-12), 'S does not move with the grid'


def test_S_needs_decay():
    p = ModelParams(alpha=0.)
    with pytest.raises(UnsupportedParameters):
        S_at(equilibrium_grid(p, 10), p, 0.)


def test_S_prefix_agrees():
    p = ModelParams()
    grid = make_skewed(400)
    x = np.linspace(-8, 8, 33)
    assert np.allclose(S_prefix(grid, p, x), S_at(grid, p, x), rtol=0,
                       atol=1e-12), 'prefix sums deviate'


def test_two_body_drift():
    """For particles at -d and d the right one sees the left one only."""
    p = ModelParams(alpha=2.)
    d, de = .3, .1
    grid = MassGrid([-d, d], de)
    G = grad_S_sum(grid, p, 1)
    assert np.allclose(G, .5 * de * np.exp(-np.sqrt(2.) * 2 * d)), \
        'wrong two body value'
    assert G > 0, 'concentration increases towards the partner'
    assert np.allclose(grad_S_sums(grid, p), [-G, G]), 'sums disagree'


def test_middle_particle_balanced():
    p = ModelParams()
    grid = equilibrium_grid(p, 101)
    G = grad_S_sums(grid, p)
    assert G[50] == 0., 'middle particle feels a drift: %g' % G[50]
    assert abs(grad_S_sum(grid, p, 50)) < 1e-15, 'single sum is off'


def test_drift_sign_equilibrium():
    """The drift of the stationary grid points to the peak."""
    p = ModelParams()
    grid = equilibrium_grid(p, 400)
    G = grad_S_sums(grid, p)
    assert (np.sign(G) == np.sign(grid.positions)).all(), 'wrong signs'
    assert (G == -G[::-1]).all(), 'drift not antisymmetric'


def test_drift_prefix_agrees():
    p = ModelParams()
    for grid in (equilibrium_grid(p, 400), make_two_bumps()):
        direct = grad_S_sums(grid, p, 'direct')
        prefix = grad_S_sums(grid, p, 'prefix')
        assert np.allclose(direct, prefix, rtol=0, atol=1e-12), \
            'prefix sums deviate by %g' % np.abs(direct - prefix).max()


def test_drift_map_extends_sums():
    p = ModelParams()
    grid = make_skewed(50)
    G = grad_S_sums(grid, p)
    assert np.allclose(drift_map(grid, p, grid.positions), G, atol=1e-14), \
        'continuous map does not interpolate the sums'


def test_unknown_method():
    p = ModelParams()
    with pytest.raises(ValueError):
        grad_S_sums(equilibrium_grid(p, 10), p, 'fmm')


def test_critical_point_equilibrium():
    p = ModelParams()
    grid = equilibrium_grid(p, 400)
    points = critical_points(grid, p)
    assert len(points) == 1, 'found %i critical points' % len(points)
    assert abs(points[0]) < grid.delta_eta, 'peak at %g' % points[0]


def test_critical_points_two_bumps():
    p = ModelParams()
    points = critical_points(make_two_bumps(), p)
    assert len(points) == 3, 'found %i critical points' % len(points)
    assert np.allclose(points, [-5, 0, 5], atol=5e-2), 'points %r' % points


def test_critical_points_translate():
    p = ModelParams()
    grid = make_two_bumps()
    points = critical_points(grid, p)
    moved = critical_points(grid.translate(1.25), p)
    assert np.allclose(np.array(points) + 1.25, moved, rtol=0, atol=1e-9), \
        'critical points do not move with the grid'


def test_plateau_warns():
    """Three particles in the middle of a wide gap balance exactly."""
    p = ModelParams()
    grid = MassGrid([-30., -1., 0., 1., 30.], .4)
    with pytest.warns(UserWarning):
        points = critical_points(grid, p, G=np.array([-1., 0., 0., 0., 1.]))
    assert points == [0.], 'plateau midpoint %r' % points


def test_single_zero_is_critical_point():
    p = ModelParams()
    grid = equilibrium_grid(p, 101)
    points = critical_points(grid, p)
    assert points == [0.], 'middle particle is not the peak: %r' % points


def test_elliptic_identity():
    """The second derivative from the identity agrees with a second
    difference of the concentration."""
    p = ModelParams()
    grid = equilibrium_grid(p, 400)
    x = np.array([.7, 1.3, 2.])
    h = .2
    S = lambda y: S_at(grid, p, y)
    second = (S(x + h) - 2 * S(x) + S(x - h)) / h ** 2
    sample = field_sample(grid, p, x)
    assert np.allclose(sample.d2S, second, rtol=0, atol=2e-2), \
        'identity %r vs difference %r' % (sample.d2S, second)
    rho = reconstruct_density(grid)(x)
    assert np.allclose(sample.d2S, p.alpha * sample.S - rho), \
        'd2S is not alpha S - rho'


def test_peak_curvature_equilibrium():
    """Twice the curvature at the peak of the stationary state is -1."""
    p = ModelParams()
    grid = equilibrium_grid(p, 400)
    d2S = peak_curvature(grid, p, 0.)
    assert abs(2 * d2S + 1) < 2e-2, 'curvature %g' % d2S


def test_xdot_equilibrium():
    p = ModelParams()
    grid = equilibrium_grid(p, 400)
    center = critical_points(grid, p)[0]
    assert abs(xdot(grid, p, center)) < grid.delta_eta, 'peak moves'


def test_xdot_reflection():
    p = ModelParams()
    grid = make_skewed()
    center = critical_points(grid, p)[0]
    v = xdot(grid, p, center)
    v_reflected = xdot(grid.reflect(), p, -center)
    assert np.allclose(v_reflected, -v, rtol=1e-8), \
        'velocity %g does not flip: %g' % (v, v_reflected)


def test_xdot_degenerate():
    p = ModelParams()
    grid = make_two_bumps()
    with pytest.raises(DegeneratePeak):
        xdot(grid, p, 0.)


def test_sign_changes_skip_zeros():
    G = np.array([-1., 0., 2., 3., 0., 0., -1., 1.])
    assert sign_changes(G) == [(0, 2), (3, 6), (6, 7)], \
        'pairs %r' % sign_changes(G)
    assert sign_changes(np.zeros(4)) == [], 'zeros change sign'


def test_count_matches_critical_points():
    p = ModelParams()
    for grid in (equilibrium_grid(p, 101), make_two_bumps(), make_skewed()):
        assert count_critical_points(grid, p, method='prefix') == len(
            critical_points(grid, p)), 'count and points disagree'


def test_density_slopes_avoid_peak():
    """Samples whose stencil spans the kink at the peak are not used, so
    the slopes of the stationary density are close to -1 and 1."""
    p = ModelParams()
    grid = equilibrium_grid(p, 400)
    right, left = density_slopes(grid, 0.)
    assert abs(right + 1) < 2e-2 and abs(left - 1) < 2e-2, \
        'slopes %g, %g' % (right, left)
