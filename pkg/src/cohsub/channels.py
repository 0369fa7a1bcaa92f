"""Kraus operators: incoherence classification, channel validation, application.

An incoherent Kraus operator has at most one nonzero entry in every
column; a strictly incoherent one additionally has at most one nonzero
entry in every row.  Classification is structural.  The action-based
test in :func:`is_incoherent_by_action` is kept only as an independent
cross-check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .qcore import DensityMatrix, as_density, as_matrix, dagger

ENTRY_TOL = 1e-12
CHANNEL_TOL = 1e-9
PROB_TOL = 1e-12


class KrausClass(enum.Enum):
    STRICTLY_INCOHERENT = "StrictlyIncoherent"
    INCOHERENT_ONLY = "IncoherentOnly"
    NOT_INCOHERENT = "NotIncoherent"

    @property
    def is_incoherent(self) -> bool:
        return self is not KrausClass.NOT_INCOHERENT


class ChannelKind(enum.Enum):
    TRACE_PRESERVING = "TracePreserving"
    SUB_NORMALIZED = "SubNormalized"
    INVALID = "Invalid"


class VanishingProbabilityError(ValueError):
    """Raised when a post-selected outcome has (numerically) zero probability."""


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    kraus_ops: Tuple[np.ndarray, ...]
    kind: ChannelKind

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[1]

    def __len__(self) -> int:
        return len(self.kraus_ops)


def _square(k) -> np.ndarray:
    m = as_matrix(k)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"Kraus operator must be square, got shape {m.shape}")
    return m


def classify_kraus(k, tol: float = ENTRY_TOL) -> KrausClass:
    """Structural incoherence class of a square Kraus operator.

    An entry is nonzero when its modulus exceeds ``tol`` (absolute).
    The zero operator is vacuously strictly incoherent.
    """
    nz = np.abs(_square(k)) > tol
    if np.any(nz.sum(axis=0) > 1):
        return KrausClass.NOT_INCOHERENT
    if np.any(nz.sum(axis=1) > 1):
        return KrausClass.INCOHERENT_ONLY
    return KrausClass.STRICTLY_INCOHERENT


def random_diagonal_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    return np.diag(rng.dirichlet(np.ones(dim))).astype(np.complex128)


def is_incoherent_by_action(k, trials: int = 50, seed: int = 0) -> bool:
    """Check that ``K rho K^dagger`` stays diagonal for random diagonal ``rho``.

    Every image must have max off-diagonal modulus ``<= 1e-10``.
    Deterministic for a given ``seed``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    m = _square(k)
    rng = np.random.default_rng(seed)
    off = ~np.eye(m.shape[0], dtype=bool)
    for _ in range(trials):
        rho = random_diagonal_state(m.shape[0], rng)
        img = m @ rho @ dagger(m)
        if np.max(np.abs(img[off]), initial=0.0) > 1e-10:
            return False
    return True


def completeness_defect(ops: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_n K_n^dagger K_n - I``."""
    total = sum(dagger(k) @ k for k in ops)
    return total - np.eye(total.shape[0])


def validate_channel(ops) -> ChannelSpec:
    """Classify a family of Kraus operators by its completeness relation.

    Raises
    ------
    ValueError
        On an empty family or mismatched dimensions.
    """
    mats = tuple(_square(k) for k in ops)
    if not mats:
        raise ValueError("empty Kraus family")
    dim = mats[0].shape[0]
    if any(k.shape != (dim, dim) for k in mats):
        raise ValueError("Kraus operators have mismatched dimensions")
    for k in mats:
        k.setflags(write=False)
    defect = completeness_defect(mats)
    if np.max(np.abs(defect)) <= CHANNEL_TOL:
        kind = ChannelKind.TRACE_PRESERVING
    else:
        # I - sum K^dag K >= 0  <=>  eigenvalues of the defect <= 0
        top = np.linalg.eigvalsh((defect + dagger(defect)) / 2)[-1]
        kind = ChannelKind.SUB_NORMALIZED if top <= CHANNEL_TOL else ChannelKind.INVALID
    return ChannelSpec(mats, kind)


def _image(ops, m: np.ndarray) -> np.ndarray:
    return sum(k @ m @ dagger(k) for k in ops)


def apply_channel(spec: ChannelSpec, rho) -> DensityMatrix:
    """Deterministic application ``sum_n K_n rho K_n^dagger``."""
    if spec.kind is not ChannelKind.TRACE_PRESERVING:
        raise ValueError("not trace preserving")
    rho = as_density(rho)
    if rho.dim != spec.dim:
        raise ValueError(f"state dimension {rho.dim} != channel dimension {spec.dim}")
    out = _image(spec.kraus_ops, rho.matrix)
    return DensityMatrix((out + dagger(out)) / 2)


def apply_stochastic(subset, rho) -> Tuple[DensityMatrix, float]:
    """Post-select on a sub-family of Kraus operators.

    Returns the normalized output state and its success probability
    ``Tr(sum_n K_n rho K_n^dagger)``.

    Raises
    ------
    ValueError
        If the sub-family is not sub-normalized.
    VanishingProbabilityError
        If the success probability is at most ``1e-12``.
    """
    spec = subset if isinstance(subset, ChannelSpec) else validate_channel(subset)
    if spec.kind is ChannelKind.INVALID:
        raise ValueError("Kraus family is not sub-normalized")
    rho = as_density(rho)
    if rho.dim != spec.dim:
        raise ValueError(f"state dimension {rho.dim} != channel dimension {spec.dim}")
    out = _image(spec.kraus_ops, rho.matrix)
    prob = float(np.trace(out).real)
    if prob <= PROB_TOL:
        raise VanishingProbabilityError("outcome has vanishing probability")
    out = out / prob
    return DensityMatrix((out + dagger(out)) / 2), prob
