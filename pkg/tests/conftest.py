import numpy as np
import pytest

from pairdyn import (
    CondensateSpec,
    GridSpec,
    PhysicalParams,
    build_condensate,
    build_operator,
    fourier_coefficients,
)

# Standard parameter set used throughout: potassium dimers dissociating
# with chi = 1e-7 m^{3/2}/s at Omega = -4e3 / s, t0 = 1 ms.
STD = dict(m_a=6.642e-26, Omega=-4.0e3, chi=1.0e-7, t0=1.0e-3)


@pytest.fixture
def params_fermi():
    return PhysicalParams(q=-1, **STD)


@pytest.fixture
def params_bose():
    return PhysicalParams(q=+1, **STD)


def make_params(q=-1, **overrides):
    kw = dict(STD)
    kw.update(overrides)
    return PhysicalParams(q=q, **kw)


def random_tensor(grid, symmetry_class, seed=0, scale=1.0):
    """Random coefficient tensor of a given class, built through the
    sampling pipeline so each class arises the way it would physically."""
    rng = np.random.default_rng(seed)
    shape = grid.shape
    real = rng.standard_normal(shape)
    if symmetry_class == "general_complex":
        samples = real + 1j * rng.standard_normal(shape)
    elif symmetry_class == "real_psi":
        samples = real.astype(complex)
        # break evenness so the class stays exactly real_psi
        samples.flat[0] += 3.0
    elif symmetry_class == "real_even_psi":
        flip = (slice(None, None, -1),) * grid.D
        samples = (real + real[flip]).astype(complex)
    else:
        raise ValueError(symmetry_class)
    spec = CondensateSpec(kind="grid_samples", samples=samples.reshape(-1) * scale)
    return fourier_coefficients(build_condensate(spec, grid), grid)


def uniform_operator(grid, q=-1, rho0=1e20, matvec_mode="auto", **overrides):
    spec = CondensateSpec(kind="uniform", rho0=rho0)
    tensor = fourier_coefficients(build_condensate(spec, grid), grid)
    return build_operator(tensor, make_params(q=q, **overrides), grid, matvec_mode)
