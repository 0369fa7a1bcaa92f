"""Incoherent projectors and maximal pure coherent-state subspaces.

A state has a pure coherent-state subspace on a set of basis indices when
its compression to those indices, once normalized, is a pure state with
no vanishing amplitude on the set.  The subspace dimension is the size of
the index set.  Basis indices are 1-based throughout the public API.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .qcore import STATE_TOL, as_density, coherence_rank_pure, fix_global_phase

MAX_ENUM_DIM = 16


@dataclass(frozen=True)
class IncoherentProjector:
    """Projector ``sum_{i in indices} |i><i|`` with 1-based ``indices``."""

    dim: int
    indices: Tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not idx:
            raise ValueError("projector needs at least one index")
        if list(idx) != sorted(set(idx)):
            raise ValueError("indices must be strictly increasing")
        if idx[0] < 1 or idx[-1] > self.dim:
            raise ValueError(f"indices out of range 1..{self.dim}")
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def zero_based(self) -> List[int]:
        return [i - 1 for i in self.indices]

    def matrix(self) -> np.ndarray:
        p = np.zeros((self.dim, self.dim), dtype=np.complex128)
        p[self.zero_based, self.zero_based] = 1.0
        return p


@dataclass(frozen=True, eq=False)
class SubspaceReport:
    max_dimension: int
    witness_projector: IncoherentProjector
    witness_state: np.ndarray


def _check_enum_dim(dim: int) -> None:
    if dim > MAX_ENUM_DIM:
        raise ValueError("dimension too large for enumeration")
    if dim < 1:
        raise ValueError("dimension must be positive")


def enumerate_incoherent_projectors(dim: int, min_size: int = 1) -> List[IncoherentProjector]:
    """All incoherent projectors with at least ``min_size`` indices.

    Ordered by size, then lexicographically within each size.
    """
    _check_enum_dim(dim)
    if not 1 <= min_size <= dim:
        raise ValueError(f"min_size must lie in 1..{dim}")
    return [
        IncoherentProjector(dim, combo)
        for k in range(min_size, dim + 1)
        for combo in itertools.combinations(range(1, dim + 1), k)
    ]


def _largest_first(dim: int) -> Iterator[Tuple[int, ...]]:
    for k in range(dim, 0, -1):
        yield from itertools.combinations(range(1, dim + 1), k)


def pure_subspace_at(rho, projector: IncoherentProjector,
                     tol: float = STATE_TOL) -> Optional[Tuple[np.ndarray, int]]:
    """Test whether ``P rho P / Tr(P rho P)`` is pure and fully coherent on ``P``.

    Returns ``(state, coherence_rank)`` with the state embedded in the full
    space, or ``None``.  A vanishing compressed trace also yields ``None``.
    """
    rho = as_density(rho)
    if projector.dim != rho.dim:
        raise ValueError("projector and state dimensions differ")
    idx = projector.zero_based
    block = rho.matrix[np.ix_(idx, idx)]
    tr = float(np.trace(block).real)
    if tr <= 1e-12:
        return None
    vals, vecs = np.linalg.eigh(block / tr)
    if vals[-1] < 1.0 - tol:
        return None
    v = vecs[:, -1]
    rank = coherence_rank_pure(v, tol)
    if rank != len(idx) - 1:
        return None
    full = np.zeros(rho.dim, dtype=np.complex128)
    full[idx] = v
    return fix_global_phase(full), rank


def max_pure_coherent_subspace(rho, tol: float = STATE_TOL) -> SubspaceReport:
    """Largest incoherent projector carrying a pure, fully coherent compression.

    Projectors are scanned from the largest size down; ties within a size
    go to the lexicographically smallest index set.
    """
    rho = as_density(rho)
    _check_enum_dim(rho.dim)
    for combo in _largest_first(rho.dim):
        proj = IncoherentProjector(rho.dim, combo)
        hit = pure_subspace_at(rho, proj, tol)
        if hit is not None:
            return SubspaceReport(proj.size, proj, hit[0])
    # unreachable for a unit-trace state: some diagonal entry exceeds 1/dim
    raise AssertionError("no singleton witness for a unit-trace state")


def ssio_pure_reachable(rho, target_rank: int,
                        tol: float = STATE_TOL) -> Optional[IncoherentProjector]:
    """Witness projector for stochastic strictly incoherent reachability.

    A pure state of coherence rank ``target_rank`` is reachable from ``rho``
    by a stochastic strictly incoherent operation exactly when some
    incoherent projector compresses ``rho`` to a pure state of coherence
    rank at least ``target_rank``.  Returns the largest such projector, or
    ``None``.
    """
    rho = as_density(rho)
    if not 0 <= target_rank <= rho.dim - 1:
        raise ValueError(f"target_rank must lie in 0..{rho.dim - 1}")
    report = max_pure_coherent_subspace(rho, tol)
    if report.max_dimension - 1 >= target_rank:
        return report.witness_projector
    return None
