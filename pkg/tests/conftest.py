import numpy as np
import pytest

from tensormeans.tensor_core import HermitianTensor, Tensor, TensorShape


def make_pd(rng, dim, floor=0.5, mode_dims=None):
    """Random complex PD tensor G G^H / dim + floor * I."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    shape = TensorShape(tuple(mode_dims) if mode_dims else (dim,))
    return HermitianTensor(shape, g @ g.conj().T / dim + floor * np.eye(dim))


def make_hermitian(rng, dim, scale=1.0):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianTensor((dim,), scale * (g + g.conj().T) / 2)


def make_general(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return Tensor((dim,), g + dim * np.eye(dim))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
