import numpy as np
import pytest

from cohsub.qcore import DensityMatrix

SQ6 = np.sqrt(6.0)
R5 = np.sqrt(5.0)

# three-dimensional stochastic example, printed form
T2_RHO = np.array([[2, 1, SQ6], [1, 2, SQ6], [SQ6, SQ6, 4]]) / 8
T2_OUT = np.array([[3, SQ6, 0], [SQ6, 2, 0], [0, 0, 0]]) / 5
T2_PHI = np.array([np.sqrt(3 / 5), np.sqrt(2 / 5), 0])
K_TILDE = np.array([[1, 1, 0], [0, 0, 1], [0, 0, 0]]) / np.sqrt(2)
K_TILDE_MINUS = np.array([[1, -1, 0], [0, 0, 1], [0, 0, 0]]) / np.sqrt(2)

# four-dimensional deterministic example, printed form
T4_PARAMS = (4 / 5, 3 / 5, 1 / R5, 2 / R5, 1 / 2)
T4_RHO = np.array([
    [1 / 4, 0, 1 / (2 * R5), 1 / (4 * R5)],
    [0, 1 / 4, -1 / (4 * R5), 1 / (2 * R5)],
    [1 / (2 * R5), -1 / (4 * R5), 1 / 4, 0],
    [1 / (4 * R5), 1 / (2 * R5), 0, 1 / 4],
])
T4_K1 = np.array([[4 / 5, 3 / 5, 0, 0], [0, 0, 1 / R5, 2 / R5], [0, 0, 0, 0], [0, 0, 0, 0]])
T4_K2 = np.array([[-3 / 5, 4 / 5, 0, 0], [0, 0, -2 / R5, 1 / R5], [0, 0, 0, 0], [0, 0, 0, 0]])
T4_PHI1 = np.array([4, 3, R5, 2 * R5]) / (5 * np.sqrt(2))
T4_PHI2 = np.array([-3, 4, -2 * R5, R5]) / (5 * np.sqrt(2))
T4_OUT = np.array([[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]) / 2
T4_TARGET = np.array([1, 1, 0, 0]) / np.sqrt(2)


def random_density(dim, rng, rank=None):
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_unit(dim, rng):
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def t2_rho():
    return DensityMatrix(T2_RHO)


@pytest.fixture
def t4_rho():
    return DensityMatrix(T4_RHO)
