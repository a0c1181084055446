import numpy as np
import pytest

from lpns.lp import build_filter_bank
from lpns.spectral import GridSpec, SpectralVelocity, dealias, leray_project
from lpns.verify import random_solenoidal_field


@pytest.fixture(scope="session")
def grid16():
    return GridSpec(16)


@pytest.fixture(scope="session")
def grid32():
    return GridSpec(32)


@pytest.fixture(scope="session")
def grid64():
    return GridSpec(64)


@pytest.fixture(scope="session")
def bank16(grid16):
    return build_filter_bank(grid16)


@pytest.fixture(scope="session")
def bank32(grid32):
    return build_filter_bank(grid32)


@pytest.fixture(scope="session")
def bank64(grid64):
    return build_filter_bank(grid64)


def single_mode_field(grid, k, component_amplitudes, solenoidal=True):
    """Field on the mode pair +-k; projected to divergence-free by default."""
    coeffs = np.zeros((3, *grid.shape), dtype=np.complex128)
    idx = tuple(ki % grid.n for ki in k)
    neg = tuple(-ki % grid.n for ki in k)
    for comp, amp in enumerate(component_amplitudes):
        coeffs[(comp, *idx)] = amp
        coeffs[(comp, *neg)] = np.conj(amp)
    u = SpectralVelocity(grid, coeffs)
    if solenoidal:
        u = leray_project(u)
    return u


def mode_keyed_field(n, seed, kcap=10, decay=0.02):
    """Same band-limited continuum field realized on any grid with k_max >= kcap.

    Amplitudes are drawn once for the cube |k_i| <= kcap independently of n,
    so two grids carrying those modes receive identical coefficients and grid
    refinement changes only quadrature, never the field.
    """
    grid = GridSpec(n)
    if kcap > grid.k_max:
        raise ValueError("kcap exceeds the grid's dealias cutoff")
    rng = np.random.default_rng(seed)
    m = 2 * kcap + 1
    cube = rng.standard_normal((3, m, m, m)) + 1j * rng.standard_normal((3, m, m, m))
    ks = np.arange(-kcap, kcap + 1)
    k2 = ks[:, None, None] ** 2 + ks[None, :, None] ** 2 + ks[None, None, :] ** 2
    cube *= np.exp(-decay * k2)
    coeffs = np.zeros((3, *grid.shape), dtype=np.complex128)
    coeffs[np.ix_(range(3), ks % n, ks % n, ks % n)] = cube
    reflected = np.roll(coeffs[:, ::-1, ::-1, ::-1], 1, axis=(1, 2, 3))
    u = SpectralVelocity(grid, 0.5 * (coeffs + np.conj(reflected)))
    u = leray_project(u)
    u.coeffs[:, 0, 0, 0] = 0.0
    return dealias(u)


__all__ = ["mode_keyed_field", "random_solenoidal_field", "single_mode_field"]
