import numpy as np
import pytest

from supermix import catalog_density, kernel_grid, parse_kernel_id


@pytest.fixture(scope="session")
def phi1():
    """Standard normal on the default grid."""
    return kernel_grid(parse_kernel_id("gaussian:1"))


@pytest.fixture(scope="session")
def fvp():
    return kernel_grid(parse_kernel_id("fvp:1"))


@pytest.fixture(scope="session")
def cauchy1():
    return kernel_grid(parse_kernel_id("cauchy:1"))


@pytest.fixture(scope="session")
def gaussian_truth():
    return catalog_density("gaussian:1")


@pytest.fixture(scope="session")
def cauchy_truth():
    return catalog_density("cauchy:1")


@pytest.fixture(scope="session")
def fvp_truth():
    return catalog_density("fvp:1")


def gaussian_mixture_fn(atoms, weights, sigmas):
    """Closed-form gaussian mixture evaluator for oracle-side densities."""
    atoms = np.asarray(atoms, float)
    weights = np.asarray(weights, float)
    sigmas = np.asarray(sigmas, float)

    def density(x):
        out = np.zeros_like(np.asarray(x, float))
        for a, w, s in zip(atoms, weights, np.broadcast_to(sigmas, atoms.shape)):
            out += w * np.exp(-((x - a) / s) ** 2 / 2) / (s * np.sqrt(2 * np.pi))
        return out

    return density


def random_gaussian_mixture(rng, grid, max_atoms=5):
    """Random mixture GridFunction for property tests."""
    from supermix import GridFunction

    k = rng.integers(1, max_atoms + 1)
    atoms = rng.uniform(-4, 4, k)
    weights = rng.dirichlet(np.ones(k))
    sigmas = rng.uniform(0.3, 2.0, k)
    fn = gaussian_mixture_fn(atoms, weights, sigmas)
    return GridFunction(grid.half_width, fn(grid.grid()))
