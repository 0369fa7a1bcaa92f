import numpy as np
import pytest

from cohsub.channels import (
    ChannelKind,
    KrausClass,
    VanishingProbabilityError,
    apply_channel,
    apply_stochastic,
    classify_kraus,
    is_incoherent_by_action,
    validate_channel,
)
from cohsub.qcore import DensityMatrix, dagger, dephase
from cohsub.paperbench import random_sio_channel

from conftest import (
    K_TILDE, K_TILDE_MINUS, T2_OUT, T2_RHO, T4_K1, T4_K2, T4_OUT, random_density,
)


def random_structured(dim, rng):
    """Random operator whose sparsity pattern is drawn to hit every class."""
    k = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    mask = rng.random((dim, dim)) < rng.uniform(0.1, 0.9)
    return k * mask


@pytest.mark.parametrize("k, expected", [
    (K_TILDE, KrausClass.INCOHERENT_ONLY),
    (np.diag([0.3, -0.7j]), KrausClass.STRICTLY_INCOHERENT),
    ([[1, 0], [1, 0]], KrausClass.NOT_INCOHERENT),
    (np.eye(4), KrausClass.STRICTLY_INCOHERENT),
    (np.zeros((3, 3)), KrausClass.STRICTLY_INCOHERENT),
    ([[0.6, 0.8], [0, 0]], KrausClass.INCOHERENT_ONLY),
    ([[1, 1e-13], [0, 1]], KrausClass.STRICTLY_INCOHERENT),
])
def test_classify_examples(k, expected):
    assert classify_kraus(k) is expected


def test_classify_rejects_non_square():
    with pytest.raises(ValueError, match="square"):
        classify_kraus(np.ones((2, 3)))


def test_action_examples():
    assert is_incoherent_by_action(np.diag([1, 2j, 3]))
    assert not is_incoherent_by_action([[1, 0], [1, 0]])
    assert is_incoherent_by_action([[0.6, 0.8j], [0, 0]])


def test_action_is_seed_deterministic(rng):
    k = random_structured(3, rng)
    assert is_incoherent_by_action(k, seed=5) == is_incoherent_by_action(k, seed=5)


def test_structural_and_action_agree(rng):
    for i in range(2000):
        k = random_structured(2 + i % 3, rng)
        assert classify_kraus(k).is_incoherent == is_incoherent_by_action(k, trials=50, seed=i)


def test_strict_class_is_dagger_closed(rng):
    seen = 0
    for i in range(2000):
        k = random_structured(2 + i % 3, rng)
        if classify_kraus(k) is KrausClass.STRICTLY_INCOHERENT:
            seen += 1
            assert classify_kraus(dagger(k)) is KrausClass.STRICTLY_INCOHERENT
    assert seen > 50


def test_validate_examples():
    assert validate_channel([K_TILDE, K_TILDE_MINUS]).kind is ChannelKind.TRACE_PRESERVING
    assert validate_channel([K_TILDE]).kind is ChannelKind.SUB_NORMALIZED
    assert validate_channel([2 * np.eye(2)]).kind is ChannelKind.INVALID
    assert validate_channel([T4_K1, T4_K2]).kind is ChannelKind.TRACE_PRESERVING
    with pytest.raises(ValueError, match="empty"):
        validate_channel([])
    with pytest.raises(ValueError, match="mismatched"):
        validate_channel([np.eye(2), np.eye(3)])


def test_sub_normalized_spectrum():
    # eigenvalues of K~^dag K~ are {1, 1/2, 0}
    vals = np.linalg.eigvalsh(dagger(K_TILDE) @ K_TILDE)
    np.testing.assert_allclose(vals, [0, 0.5, 1], atol=1e-15)


def test_apply_channel_examples(t2_rho, t4_rho, rng):
    spec = validate_channel([T4_K1, T4_K2])
    np.testing.assert_allclose(apply_channel(spec, t4_rho).matrix, T4_OUT, atol=1e-12)
    rho = DensityMatrix(random_density(3, rng))
    np.testing.assert_allclose(apply_channel(validate_channel([np.eye(3)]), rho).matrix, rho.matrix,
                               atol=1e-15)
    # brute-force oracle, written out as loops
    out = np.zeros((3, 3), complex)
    for k in (K_TILDE, K_TILDE_MINUS):
        for i in range(3):
            for j in range(3):
                out[i, j] += sum(k[i, a] * T2_RHO[a, b] * np.conj(k[j, b])
                                 for a in range(3) for b in range(3))
    got = apply_channel(validate_channel([K_TILDE, K_TILDE_MINUS]), t2_rho).matrix
    np.testing.assert_allclose(got, out, atol=1e-14)
    assert np.trace(got).real == pytest.approx(1, abs=1e-14)


def test_apply_channel_rejects_non_tp(t2_rho):
    with pytest.raises(ValueError, match="not trace preserving"):
        apply_channel(validate_channel([K_TILDE]), t2_rho)


def test_apply_channel_outputs_are_states(rng):
    for i in range(200):
        dim = 2 + i % 3
        spec = random_sio_channel(dim, 1 + i % 3, seed=i)
        out = apply_channel(spec, random_density(dim, rng)).matrix
        assert np.max(np.abs(out - out.conj().T)) <= 1e-12
        assert abs(np.trace(out) - 1) <= 1e-12
        assert np.linalg.eigvalsh(out)[0] >= -1e-12


def test_apply_stochastic_examples(t2_rho, rng):
    out, p = apply_stochastic([K_TILDE], t2_rho)
    np.testing.assert_allclose(out.matrix, T2_OUT, atol=1e-12)
    # (1/2)(6/8 + 4/8)
    assert p == pytest.approx(5 / 8, abs=1e-12)
    _, p = apply_stochastic([K_TILDE, K_TILDE_MINUS], t2_rho)
    assert p == pytest.approx(1, abs=1e-12)
    with pytest.raises(VanishingProbabilityError, match="vanishing probability"):
        apply_stochastic([[[0, 0.5], [0, 0]]], np.diag([1.0, 0.0]))


def test_apply_stochastic_probability_and_trace(rng):
    for i in range(200):
        dim = 2 + i % 3
        ops = random_sio_channel(dim, 3, seed=i).kraus_ops
        subset = ops[: 1 + i % 2]
        rho = random_density(dim, rng)
        if all(not np.any(k) for k in subset):
            continue
        out, p = apply_stochastic(subset, rho)
        expected = sum(np.trace(k @ rho @ dagger(k)).real for k in subset)
        assert abs(p - expected) <= 1e-12
        assert abs(np.trace(out.matrix) - 1) <= 1e-12


def test_incoherent_maps_diagonal_to_diagonal(rng):
    checked = 0
    for i in range(1000):
        dim = 2 + i % 3
        k = random_structured(dim, rng)
        if not classify_kraus(k).is_incoherent:
            continue
        rho = np.diag(rng.dirichlet(np.ones(dim)))
        img = k @ rho @ dagger(k)
        tr = np.trace(img).real
        if tr <= 1e-12:
            continue
        state = img / tr
        assert np.max(np.abs(dephase(state).matrix - state)) <= 1e-12
        checked += 1
    assert checked > 100
