import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cohsub.qcore import (
    DensityMatrix,
    coherence_rank_pure,
    dagger,
    dephase,
    hermitian_eigendecomposition,
    is_pure,
    purity,
)

from conftest import T2_RHO, random_density, random_unit

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


def test_dagger_examples():
    np.testing.assert_array_equal(dagger(np.eye(2)), np.eye(2))
    np.testing.assert_array_equal(dagger(np.array([[0, 1j], [0, 0]])), np.array([[0, 0], [-1j, 0]]))
    a, b = 0.3 + 0.4j, -0.2 + 0.1j
    np.testing.assert_array_equal(dagger(np.array([[a, b], [0, 0]])),
                                  np.array([[np.conj(a), 0], [np.conj(b), 0]]))


def test_dagger_swaps_shape():
    assert dagger(np.zeros((2, 3))).shape == (3, 2)


@given(re=arrays(np.float64, (3, 4), elements=finite), im=arrays(np.float64, (3, 4), elements=finite))
def test_dagger_involution(re, im):
    m = re + 1j * im
    assert np.max(np.abs(dagger(dagger(m)) - m), initial=0) <= 1e-15


def test_density_validation():
    with pytest.raises(ValueError, match="Hermitian"):
        DensityMatrix([[0.5, 0.1], [0.2, 0.5]])
    with pytest.raises(ValueError, match="trace"):
        DensityMatrix(np.eye(2))
    with pytest.raises(ValueError, match="positive"):
        DensityMatrix([[1.5, 0], [0, -0.5]])
    with pytest.raises(ValueError, match="square"):
        DensityMatrix(np.ones((2, 3)) / 2)
    with pytest.raises(ValueError, match="non-finite"):
        DensityMatrix([[np.nan, 0], [0, 1]])


def test_density_is_read_only(t2_rho):
    with pytest.raises(ValueError):
        t2_rho.matrix[0, 0] = 1


def test_purity_examples(t2_rho, rng):
    assert purity(DensityMatrix.from_pure(random_unit(4, rng))) == pytest.approx(1, abs=1e-12)
    assert purity(np.eye(3) / 3) == pytest.approx(1 / 3, abs=1e-15)
    # two pure components with overlap 3/4: (1 + 9/16) / 2
    assert purity(t2_rho) == pytest.approx(25 / 32, abs=1e-14)


def test_purity_bounds(rng):
    for dim in range(2, 6):
        p = purity(random_density(dim, rng))
        assert 1 / dim - 1e-9 <= p <= 1 + 1e-9


def test_dephasing_never_increases_purity(rng):
    for i in range(1000):
        rho = DensityMatrix(random_density(2 + i % 4, rng, rank=1 + i % 2))
        assert purity(dephase(rho)) <= purity(rho) + 1e-12


def test_is_pure_examples():
    v = is_pure(np.ones((2, 2)) / 2)
    np.testing.assert_allclose(v, np.ones(2) / np.sqrt(2), atol=1e-12)
    assert is_pure(np.eye(2) / 2) is None
    rho = np.array([[3, np.sqrt(6), 0], [np.sqrt(6), 2, 0], [0, 0, 0]]) / 5
    np.testing.assert_allclose(is_pure(rho), [np.sqrt(3 / 5), np.sqrt(2 / 5), 0], atol=1e-12)


def test_is_pure_phase_convention(rng):
    psi = np.zeros(4, complex)
    psi[1:] = random_unit(3, rng)
    v = is_pure(DensityMatrix.from_pure(psi))
    assert v[0] == 0
    assert v[1].imag == 0 and v[1].real > 0


def test_is_pure_reconstruction(rng):
    tol = 1e-9
    for _ in range(200):
        psi = random_unit(3, rng)
        eps = rng.uniform(0, 2e-9)
        rho = DensityMatrix((1 - eps) * np.outer(psi, psi.conj()) + eps * np.eye(3) / 3)
        v = is_pure(rho, tol)
        if v is not None:
            assert np.max(np.abs(rho.matrix - np.outer(v, v.conj()))) <= 10 * tol


def test_is_pure_rejects_bad_tol():
    with pytest.raises(ValueError):
        is_pure(np.eye(2) / 2, tol=0)


def test_dephase_examples(t2_rho):
    diag = np.diag([0.2, 0.3, 0.5])
    np.testing.assert_array_equal(dephase(diag).matrix, diag)
    np.testing.assert_allclose(dephase(np.ones((2, 2)) / 2).matrix, np.eye(2) / 2)
    np.testing.assert_allclose(dephase(t2_rho).matrix, np.diag([1 / 4, 1 / 4, 1 / 2]), atol=1e-15)


def test_dephase_idempotent(rng):
    rho = dephase(random_density(4, rng))
    np.testing.assert_array_equal(dephase(rho).matrix, rho.matrix)


def test_coherence_rank_examples():
    assert coherence_rank_pure([0, 0, 1]) == 0
    assert coherence_rank_pure([0.6, -0.8j, 0]) == 1
    assert coherence_rank_pure(np.ones(4) / 2) == 3
    with pytest.raises(ValueError, match="null state"):
        coherence_rank_pure(np.zeros(3))


def test_coherence_rank_is_scale_free():
    v = np.array([1, 1e-6, 0, 0.3])
    assert coherence_rank_pure(v) == coherence_rank_pure(1e-8 * v) == 2


@settings(max_examples=200)
@given(amps=arrays(np.float64, (5,), elements=st.sampled_from([0.0, 0.3, -1.2, 2.0, 0.7])),
       phase=st.floats(0, 2 * np.pi), perm=st.permutations(range(5)))
def test_coherence_rank_invariances(amps, phase, perm):
    if not np.any(amps):
        return
    v = amps.astype(complex)
    base = coherence_rank_pure(v)
    assert coherence_rank_pure(v[list(perm)]) == base
    assert coherence_rank_pure(np.exp(1j * phase) * v) == base


def test_eigendecomposition_examples(t2_rho, rng):
    vals, vecs = hermitian_eigendecomposition(np.eye(2) / 2)
    np.testing.assert_allclose(vals, [0.5, 0.5])
    np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(2), atol=1e-12)
    psi = random_unit(3, rng)
    vals, _ = hermitian_eigendecomposition(DensityMatrix.from_pure(psi))
    np.testing.assert_allclose(vals, [1, 0, 0], atol=1e-12)
    # components with overlap 3/4: eigenvalues (1 +- 3/4)/2 and 0
    vals, _ = hermitian_eigendecomposition(t2_rho)
    np.testing.assert_allclose(vals, [7 / 8, 1 / 8, 0], atol=1e-14)


@pytest.mark.parametrize("dim", [2, 3, 5, 8])
def test_eigendecomposition_properties(dim, rng):
    for rank in (1, dim // 2 + 1, dim):
        rho = DensityMatrix(random_density(dim, rng, rank))
        vals, vecs = hermitian_eigendecomposition(rho)
        assert np.all(np.diff(vals) <= 0)
        recon = (vecs * vals) @ vecs.conj().T
        assert np.max(np.abs(recon - rho.matrix)) <= 1e-10
        assert abs(vals.sum() - 1) <= 1e-10
        gram = vecs.conj().T @ vecs
        assert np.max(np.abs(gram - np.eye(dim))) <= 1e-9
