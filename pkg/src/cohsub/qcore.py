"""Dense complex linear algebra and quantum-state primitives.

Matrices and state vectors are plain ``numpy`` arrays of dtype
``complex128``.  Density matrices are wrapped in :class:`DensityMatrix`,
which validates Hermiticity, positivity and unit trace once at
construction so that downstream routines can assume a physical state.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

STATE_TOL = 1e-9


def as_matrix(data) -> np.ndarray:
    """Coerce ``data`` to a 2-D complex128 array, rejecting NaN/Inf."""
    arr = np.array(data, dtype=np.complex128)
    if arr.ndim != 2 or 0 in arr.shape:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix contains non-finite entries")
    return arr


def as_vector(data) -> np.ndarray:
    arr = np.array(data, dtype=np.complex128).reshape(-1)
    if arr.size == 0:
        raise ValueError("empty state vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("state vector contains non-finite entries")
    return arr


class DensityMatrix:
    """A validated density matrix.

    Parameters
    ----------
    data : array_like
        Square complex matrix.  Must be Hermitian (max entrywise
        ``|rho - rho^dagger| <= 1e-9``), positive semidefinite (all
        eigenvalues ``>= -1e-9``) and have trace ``1 +- 1e-9``.

    The stored matrix is read-only.
    """

    __slots__ = ("_matrix",)

    def __init__(self, data):
        if isinstance(data, DensityMatrix):
            self._matrix = data._matrix
            return
        m = as_matrix(data)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > STATE_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > STATE_TOL:
            raise ValueError(f"density matrix trace {np.trace(m).real:.12g} != 1")
        if np.linalg.eigvalsh((m + m.conj().T) / 2)[0] < -STATE_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        self._matrix = m

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._matrix.copy()
        return self._matrix.astype(dtype)

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim})"

    @classmethod
    def from_pure(cls, psi) -> "DensityMatrix":
        v = normalize(as_vector(psi))
        return cls(np.outer(v, v.conj()))

    @classmethod
    def from_ensemble(cls, probs, states) -> "DensityMatrix":
        """Build ``sum_i p_i |psi_i><psi_i|``; states are normalized first."""
        probs = np.asarray(probs, dtype=float)
        vecs = [normalize(as_vector(s)) for s in states]
        if len(vecs) != len(probs):
            raise ValueError("probabilities and states differ in length")
        rho = sum(p * np.outer(v, v.conj()) for p, v in zip(probs, vecs))
        return cls(rho)


def as_density(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)


def dagger(m) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(m).conj().T


def normalize(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("null state")
    return v / n


def fix_global_phase(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate ``v`` so its first non-negligible amplitude is real positive.

    "Non-negligible" is relative: ``|v_i| > tol * max|v|``.
    """
    v = np.asarray(v, dtype=np.complex128)
    mags = np.abs(v)
    top = mags.max()
    if top == 0:
        return v.copy()
    first = int(np.argmax(mags > tol * top))
    return v * (np.conj(v[first]) / mags[first])


def purity(rho) -> float:
    """Return ``Tr(rho^2)``."""
    m = as_density(rho).matrix
    # Tr(rho rho) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(m) ** 2))


def hermitian_eigendecomposition(rho) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a density matrix.

    Returns
    -------
    eigenvalues : ndarray of float
        Sorted in descending order.
    eigenvectors : ndarray
        Unit eigenvectors as columns, ``eigenvectors[:, i]`` belongs to
        ``eigenvalues[i]``.  Each column carries the global-phase
        convention of :func:`fix_global_phase`.
    """
    m = as_density(rho).matrix
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1]
    vecs = np.column_stack([fix_global_phase(vecs[:, i]) for i in range(vecs.shape[1])])
    return vals, vecs


def support_basis(rho, cutoff: float = 1e-10) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues above ``cutoff`` and the matching eigenvectors (columns)."""
    vals, vecs = hermitian_eigendecomposition(rho)
    keep = vals > cutoff
    return vals[keep], vecs[:, keep]


def is_pure(rho, tol: float = STATE_TOL) -> Optional[np.ndarray]:
    """Return the unit vector ``v`` with ``rho = v v^dagger`` if ``rho`` is pure.

    ``rho`` counts as pure when its largest eigenvalue is at least
    ``1 - tol``.  The returned vector has its first nonzero amplitude real
    and positive.  Returns ``None`` for mixed states.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    vals, vecs = hermitian_eigendecomposition(rho)
    if vals[0] < 1.0 - tol:
        return None
    return fix_global_phase(vecs[:, 0])


def dephase(rho) -> DensityMatrix:
    """Completely dephasing map: keep only the diagonal."""
    m = as_density(rho).matrix
    return DensityMatrix(np.diag(np.diag(m)))


def coherence_rank_pure(v, tol: float = STATE_TOL) -> int:
    """Number of nonzero amplitudes minus one.

    An amplitude counts as nonzero when its modulus exceeds
    ``tol * max|v_i|``, so the result does not depend on the norm of
    ``v``.

    Raises
    ------
    ValueError
        If ``v`` is the zero vector.
    """
    mags = np.abs(as_vector(v))
    top = mags.max()
    if top == 0:
        raise ValueError("null state")
    return int(np.count_nonzero(mags > tol * top)) - 1


def operator_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m), ord=2))


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with the phase correction of Mezzadri."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
