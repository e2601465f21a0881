# -*- coding: utf-8 -*-

import numpy as np
import pytest
import scipy.integrate

from chemoclust.model import (
    ModelParams, MassGrid, InvalidDensity, MassMismatch, OrderingViolation,
    UnsupportedNormalization, TabulatedDensity, check_ordering,
    equilibrium_density, equilibrium_grid, init_grid_from_density,
    builtin_densities, even_perturbation_density, load_density_csv,
    odd_perturbation_density, reconstruct_density, shifted_density,
    two_peaks_density)


def test_params_defaults():
    """Test the derived quantities of the parameters."""
    p = ModelParams(chi=2., alpha=4.)
    assert p.mass == 1., 'default mass is not 2 / chi'
    assert p.lam == 4., 'lambda is not chi + sqrt(alpha)'
    assert ModelParams() == ModelParams(1, 1, 2), 'equality is broken'


def test_params_reject_bad_values():
    with pytest.raises(ValueError):
        ModelParams(chi=-1.)
    with pytest.raises(ValueError):
        ModelParams(alpha=-1.)
    with pytest.raises(ValueError):
        ModelParams(mass=0.)


def test_equilibrium_grid_closed_form():
    """Test the four particle grid of the stationary density."""
    grid = equilibrium_grid(ModelParams(), 4)
    desired = [np.log(.25), np.log(.75), -np.log(.75), -np.log(.25)]
    assert np.allclose(grid.positions, desired, rtol=0, atol=1e-15), \
        'wrong positions: %r' % grid.positions
    assert grid.total_mass == 2., 'wrong mass'


def test_equilibrium_grid_median_and_quartile():
    """The particle at mass one sits at zero, the one at mass one half at
    log(1/2)."""
    grid = equilibrium_grid(ModelParams(), 3)
    assert grid.positions[1] == 0., 'median particle is not at zero'
    grid = equilibrium_grid(ModelParams(), 6)
    assert np.allclose(grid.positions[1], np.log(.5)), 'wrong quartile'


def test_equilibrium_grid_antisymmetric():
    for n in (4, 10, 400):
        x = equilibrium_grid(ModelParams(), n).positions
        assert (x == -x[::-1]).all(), 'grid of %i particles not symmetric' % n


def test_equilibrium_grid_needs_normalized_mass():
    with pytest.raises(UnsupportedNormalization):
        equilibrium_grid(ModelParams(mass=1.), 10)


def test_init_grid_matches_closed_form():
    """Inverting the cumulative mass by quadrature reproduces the closed
    form."""
    for chi in (1., 2.):
        p = ModelParams(chi=chi)
        grid = init_grid_from_density(equilibrium_density(p), 100, p)
        closed = equilibrium_grid(p, 100)
        assert np.allclose(grid.positions, closed.positions, rtol=0,
                           atol=1e-8), 'quadrature grid deviates'


def test_init_grid_four_particles():
    p = ModelParams()
    grid = init_grid_from_density(equilibrium_density(p), 4, p)
    desired = [np.log(.25), np.log(.75), -np.log(.75), -np.log(.25)]
    assert np.allclose(grid.positions, desired, atol=1e-10), \
        'wrong positions: %r' % grid.positions


def test_init_grid_shifted():
    """A shifted density gives a shifted grid."""
    p = ModelParams()
    grid = init_grid_from_density(shifted_density(p, 1.5), 20, p)
    closed = equilibrium_grid(p, 20).translate(1.5)
    assert np.allclose(grid.positions, closed.positions, atol=1e-8), \
        'shifted grid deviates'


def test_init_grid_mass_mismatch():
    p = ModelParams()
    rho = lambda x: 2 * np.exp(-np.abs(x))
    with pytest.raises(MassMismatch):
        init_grid_from_density(rho, 10, p)


def test_init_grid_negative_density():
    p = ModelParams()
    rho = lambda x: np.exp(-np.abs(x)) * (1 - 2 * (np.abs(x) < .1))
    with pytest.raises(InvalidDensity):
        init_grid_from_density(rho, 10, p)


def test_init_grid_too_few_particles():
    p = ModelParams()
    with pytest.raises(ValueError):
        init_grid_from_density(equilibrium_density(p), 2, p)


def test_tabulated_density(tmp_path):
    """Test a tent density read from a file."""
    fn = tmp_path / 'tent.csv'
    fn.write_text('y,rho\n-1,0\n0,2\n1,0\n')
    rho = load_density_csv(str(fn))
    assert rho.support == (-1., 1.), 'wrong support'
    grid = init_grid_from_density(rho, 3, ModelParams())
    assert abs(grid.positions[1]) < 1e-10, 'median of the tent is not zero'
    # Mass 1/3 sits left of -1 + sqrt(1/3).
    assert np.allclose(grid.positions[0], -1 + np.sqrt(1. / 3), atol=1e-10), \
        'wrong first particle'


def test_tabulated_density_bad_header(tmp_path):
    fn = tmp_path / 'bad.csv'
    fn.write_text('x,density\n0,1\n1,1\n')
    with pytest.raises(InvalidDensity):
        load_density_csv(str(fn))


def test_tabulated_density_negative():
    with pytest.raises(InvalidDensity):
        TabulatedDensity([0., 1.], [1., -1.])


def test_reconstruct_equilibrium_peak():
    """The density next to the peak of the stationary grid is close to
    one."""
    grid = equilibrium_grid(ModelParams(), 400)
    profile = reconstruct_density(grid)
    i = np.argmin(np.abs(profile.positions))
    assert abs(profile.density[i] - 1) < 1e-2, \
        'peak density %g' % profile.density[i]
    assert abs(profile.mass() - 2) < 1e-2, 'wrong trapezoid mass'


def test_reconstruct_uniform():
    h, c = .1, 2.
    grid = MassGrid(np.arange(10) * h, c * h)
    profile = reconstruct_density(grid)
    assert np.allclose(profile.density[1:-1], c), 'density is not constant'
    assert np.allclose(profile.density[[0, -1]], c), 'end points are off'


def test_ordering_violation():
    with pytest.raises(OrderingViolation):
        MassGrid([0., 0., 1.], .1)
    with pytest.raises(OrderingViolation):
        check_ordering(np.array([0., np.nan, 1.]))


def test_rigid_motions():
    grid = equilibrium_grid(ModelParams(), 10)
    moved = grid.translate(2.)
    assert np.allclose(moved.positions, grid.positions + 2.), 'bad translate'
    assert (grid.reflect().positions == grid.positions).all(), \
        'symmetric grid changes under reflection'
    assert moved.total_mass == grid.total_mass, 'mass changed'


def test_positions_read_only():
    grid = equilibrium_grid(ModelParams(), 10)
    with pytest.raises(ValueError):
        grid.positions[0] = 0.


def test_reconstruction_converges():
    """Reconstructed densities converge at least linearly in the mass
    spacing."""
    p = ModelParams()
    rho0 = two_peaks_density(p)
    errors = []
    for n in (100, 200, 400):
        profile = reconstruct_density(init_grid_from_density(rho0, n, p))
        x, rho = profile.positions, profile.density
        core = rho0(x) > .1
        errors.append(np.abs(rho - rho0(x))[core].max())
    order = np.log2(np.array(errors[:-1]) / errors[1:])
    assert (order >= 1).all(), 'observed orders %r' % order


@pytest.mark.parametrize('name', ['even_perturbation', 'odd_perturbation'])
def test_perturbations_keep_mass(name):
    p = ModelParams()
    rho = builtin_densities[name](p, amplitude=.2)
    mass = sum(scipy.integrate.quad(rho, a, b, epsabs=1e-13, limit=200)[0]
               for a, b in ((-np.inf, 0.), (0., np.inf)))
    assert abs(mass - p.mass) < 1e-9, 'mass %r' % mass
    assert (rho(np.linspace(-20, 20, 4001)) > 0).all(), 'negative density'


def test_perturbation_amplitude_bounds():
    p = ModelParams()
    with pytest.raises(InvalidDensity):
        even_perturbation_density(p, .7)
    with pytest.raises(InvalidDensity):
        odd_perturbation_density(p, .6)


def test_odd_perturbation_keeps_peak_at_kink():
    """The concentration gradient at the origin vanishes for every decay
    rate."""
    for alpha in (.25, 1., 4.):
        p = ModelParams(alpha=alpha)
        rho = odd_perturbation_density(p, .3)
        weight = lambda y: .5 * np.exp(-p.sqrt_alpha * abs(y)) * rho(y)
        right = scipy.integrate.quad(weight, 0., np.inf, epsabs=1e-14,
                                     epsrel=1e-12, limit=200)[0]
        left = scipy.integrate.quad(weight, -np.inf, 0., epsabs=1e-14,
                                    epsrel=1e-12, limit=200)[0]
        assert abs(right - left) < 1e-9, \
            'gradient %g at alpha %g' % (right - left, alpha)
