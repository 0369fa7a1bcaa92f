"""Reachability of pure target states under incoherent Kraus operators.

Stochastic reachability is decided exactly.  A pure target ``phi`` can be
reached from ``rho`` with nonzero probability iff a single incoherent
Kraus operator maps every vector of ``supp(rho)`` onto the ray of
``phi`` without annihilating all of them.  Incoherent operators have at
most one nonzero entry per column, so the search runs over column
assignments (which row each column's entry sits in) and, per assignment,
over the null space of a homogeneous linear system.

Deterministic reachability has no such reduction.  The branches of a
candidate channel must live in the per-assignment solution subspaces, and
the completeness relation ``sum_n K_n^dagger K_n = I`` is linear in the
Gram matrices of those branches.  :func:`deterministic_completion_search`
minimizes its residual over low-rank Gram factors with a trust-region
least-squares solver from seeded random starts.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import least_squares, linprog, minimize

from .channels import ChannelKind, ChannelSpec, validate_channel
from .qcore import (
    DensityMatrix,
    as_density,
    as_vector,
    dagger,
    fix_global_phase,
    haar_unitary,
    normalize,
    operator_norm,
    support_basis,
)

log = logging.getLogger(__name__)

MAX_PATTERN_DIM = 6
NULL_TOL = 1e-10
SUPPORT_CUTOFF = 1e-10
RAY_TOL = 1e-9
SUCCESS_RESIDUAL = 1e-9
MIN_PROBABILITY = 1e-10


@dataclass(frozen=True)
class ColumnAssignment:
    """Row of the single nonzero entry of each column (1-based), or ``None``."""

    dim: int
    target_row: Tuple[Optional[int], ...]

    def __post_init__(self):
        rows = tuple(None if t is None else int(t) for t in self.target_row)
        if len(rows) != self.dim:
            raise ValueError("assignment length must equal dim")
        if any(t is not None and not 1 <= t <= self.dim for t in rows):
            raise ValueError(f"target rows must lie in 1..{self.dim}")
        object.__setattr__(self, "target_row", rows)

    @property
    def columns(self) -> List[int]:
        """Zero-based indices of the assigned columns."""
        return [j for j, t in enumerate(self.target_row) if t is not None]

    def positions(self) -> List[Tuple[int, int]]:
        """Zero-based ``(row, col)`` positions allowed to be nonzero."""
        return [(t - 1, j) for j, t in enumerate(self.target_row) if t is not None]

    def embed(self, entries: Sequence[complex]) -> np.ndarray:
        k = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for (r, c), val in zip(self.positions(), entries):
            k[r, c] = val
        return k


@dataclass(frozen=True, eq=False)
class RayMappingSolution:
    pattern: ColumnAssignment
    kraus: np.ndarray
    ray_constants: np.ndarray
    success_probability: float


@dataclass(frozen=True, eq=False)
class CompletionResult:
    residual: float
    channel: Optional[ChannelSpec]
    restarts_used: int

    @property
    def success(self) -> bool:
        return self.channel is not None


def enumerate_column_assignments(dim: int) -> List[ColumnAssignment]:
    """All ``(dim+1)**dim - 1`` assignments, skipping the all-``None`` one.

    Order is ``itertools.product`` over ``(None, 1, ..., dim)`` per column.
    """
    if dim > MAX_PATTERN_DIM:
        raise ValueError(f"dimension {dim} too large for pattern enumeration (max {MAX_PATTERN_DIM})")
    if dim < 1:
        raise ValueError("dimension must be positive")
    choices = (None,) + tuple(range(1, dim + 1))
    return [
        ColumnAssignment(dim, rows)
        for rows in itertools.product(choices, repeat=dim)
        if any(r is not None for r in rows)
    ]


def _full_assignments(dim: int):
    for rows in itertools.product(range(1, dim + 1), repeat=dim):
        yield ColumnAssignment(dim, rows)


def _target(phi, dim: int) -> np.ndarray:
    v = as_vector(phi)
    if v.size != dim:
        raise ValueError(f"target dimension {v.size} != state dimension {dim}")
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValueError("target state must be normalized")
    return v


def _ray_system(vecs: np.ndarray, phi: np.ndarray, pattern: ColumnAssignment) -> np.ndarray:
    # unknowns: [K entries in pattern order..., c_1..c_r]; rows: (vector i, output row)
    d, r = vecs.shape
    pos = pattern.positions()
    m = len(pos)
    a = np.zeros((d * r, m + r), dtype=np.complex128)
    for i in range(r):
        for n, (row, col) in enumerate(pos):
            a[i * d + row, n] = vecs[col, i]
        a[i * d:(i + 1) * d, m + i] = -phi
    return a


def _null_basis(a: np.ndarray, tol: float) -> np.ndarray:
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    rank = int(np.count_nonzero(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return vh[rank:].conj().T


def _probability(k: np.ndarray, vals: np.ndarray, vecs: np.ndarray) -> float:
    img = k @ vecs
    return float(np.sum(vals * np.sum(np.abs(img) ** 2, axis=0)))


def _best_direction(nk: np.ndarray, pattern: ColumnAssignment,
                    vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Coefficients in the null space maximizing probability at unit operator norm."""
    q = nk.shape[1]
    mats = np.stack([pattern.embed(nk[:, i]) for i in range(q)])

    def ratio(alpha: np.ndarray) -> float:
        k = np.tensordot(alpha, mats, axes=1)
        nrm = operator_norm(k)
        return 0.0 if nrm == 0 else _probability(k, vals, vecs) / nrm ** 2

    if q == 1:
        return np.ones(1, dtype=np.complex128)
    # seed with generalized eigenvectors of (weighted image Gram, Frobenius Gram)
    imgs = np.einsum("qij,jk->qik", mats, vecs * np.sqrt(vals))
    gram_img = np.einsum("pik,qik->pq", imgs.conj(), imgs)
    gram_fro = nk.conj().T @ nk
    w, v = np.linalg.eig(np.linalg.solve(gram_fro, gram_img))
    starts = [v[:, i] for i in np.argsort(-w.real)[: min(q, 3)]]

    def neg(x):
        return -ratio(x[:q] + 1j * x[q:])

    best, best_val = starts[0], ratio(starts[0])
    for s in starts:
        res = minimize(neg, np.concatenate([s.real, s.imag]), method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        cand = res.x[:q] + 1j * res.x[q:]
        for alpha in (s, cand):
            val = ratio(alpha)
            if val > best_val + 1e-14:
                best, best_val = alpha, val
    return best


def solve_ray_mapping(rho, phi, pattern: ColumnAssignment,
                      tol: float = NULL_TOL) -> Optional[RayMappingSolution]:
    """Find a Kraus operator with the given column pattern mapping ``supp(rho)`` into ``ray(phi)``.

    Parameters
    ----------
    rho : DensityMatrix or array_like
    phi : array_like
        Normalized target state.
    pattern : ColumnAssignment
    tol : float
        Relative singular-value cutoff for the null-space computation.

    Returns
    -------
    RayMappingSolution or None
        The operator is rescaled to operator norm 1 (the largest scale at
        which it alone is a sub-normalized Kraus family), its first nonzero
        entry is made real positive, and ``success_probability`` is
        ``Tr(K rho K^dagger)``.  When the null space has dimension above one,
        the direction maximizing that probability is searched numerically.
        ``None`` if every solution annihilates ``supp(rho)``.
    """
    rho = as_density(rho)
    phi = _target(phi, rho.dim)
    if pattern.dim != rho.dim:
        raise ValueError("pattern and state dimensions differ")
    vals, vecs = support_basis(rho, SUPPORT_CUTOFF)
    m = len(pattern.positions())
    if m == 0:
        return None
    null = _null_basis(_ray_system(vecs, phi, pattern), tol)
    if null.shape[1] == 0 or np.linalg.norm(null[m:]) < 1e-8:
        return None
    alpha = _best_direction(null[:m], pattern, vals, vecs)
    x = null @ alpha
    k = pattern.embed(x[:m])
    nrm = operator_norm(k)
    if nrm == 0:
        return None
    flat = k.T.reshape(-1)  # column-major scan: first entry in pattern order
    lead = flat[np.argmax(np.abs(flat) > 1e-12 * np.abs(flat).max())]
    phase = np.conj(lead) / abs(lead)
    k = k * phase / nrm
    consts = x[m:] * phase / nrm
    if np.max(np.linalg.norm(k @ vecs - np.outer(phi, consts), axis=0)) > RAY_TOL:
        return None
    prob = _probability(k, vals, vecs)
    if prob <= MIN_PROBABILITY:
        return None
    k[np.abs(k) <= 1e-15] = 0
    return RayMappingSolution(pattern, k, consts, min(prob, 1.0))


def stochastic_io_reachable(rho, phi, tol: float = NULL_TOL) -> Optional[RayMappingSolution]:
    """Exact stochastic incoherent reachability of ``phi`` from ``rho``.

    Scans every column assignment and returns the feasible single-operator
    solution of largest success probability (ties keep the earliest
    assignment).  ``None`` certifies that no stochastic incoherent
    operation produces ``phi`` with nonzero probability.
    """
    rho = as_density(rho)
    best = None
    for pattern in enumerate_column_assignments(rho.dim):
        sol = solve_ray_mapping(rho, phi, pattern, tol)
        if sol is None:
            continue
        if best is None or sol.success_probability > best.success_probability + 1e-12:
            best = sol
    return best


def _remixed_members(vals: np.ndarray, vecs: np.ndarray, rng: np.random.Generator):
    r = vals.size
    n = r + int(rng.integers(0, 3))
    u = haar_unitary(n, rng)[:, :r]
    # sqrt(p_i) psi_i = sum_j U_ij sqrt(lambda_j) |lambda_j>
    return (vecs * np.sqrt(vals)) @ u.T


def ray_invariance_check(k, rho, phi, remixings: int = 100, seed: int = 0) -> bool:
    """Check ``K psi`` lies on ``ray(phi)`` for members of random ensembles of ``rho``.

    Each remixing draws a Haar unitary and forms a new pure-state ensemble
    of ``rho`` from its eigen-ensemble.  Every normalized member must
    satisfy ``|K psi - c phi| <= 1e-9`` for the best ``c``.
    """
    if remixings < 1:
        raise ValueError("remixings must be >= 1")
    rho = as_density(rho)
    phi = _target(phi, rho.dim)
    k = np.asarray(k, dtype=np.complex128)
    vals, vecs = support_basis(rho, SUPPORT_CUTOFF)
    rng = np.random.default_rng(seed)
    proj_out = np.eye(rho.dim) - np.outer(phi, phi.conj())
    for _ in range(remixings):
        members = _remixed_members(vals, vecs, rng)
        norms = np.linalg.norm(members, axis=0)
        members = members[:, norms > 1e-12] / norms[norms > 1e-12]
        off_ray = np.linalg.norm(proj_out @ k @ members, axis=0)
        if off_ray.size and off_ray.max() > RAY_TOL:
            return False
    return True


def build_theorem4_instance(a: complex, b: complex, c: complex, d: complex,
                            p1: float) -> Tuple[DensityMatrix, ChannelSpec, np.ndarray]:
    """Four-dimensional state whose maximal pure subspace grows under an incoherent channel.

    The channel has two Kraus operators acting as 2x2 rotations on the
    pairs of columns (1, 2) and (3, 4)::

        K1 = [[ a,  b,  0,  0],      K2 = [[-b*, a*,  0,   0 ],
              [ 0,  0,  c,  d],            [ 0,   0, -d*,  c*],
              [ 0,  0,  0,  0],            [ 0,   0,  0,   0 ],
              [ 0,  0,  0,  0]]            [ 0,   0,  0,   0 ]]

    The ensemble vectors solve ``K1 phi1 ~ phi``, ``K2 phi1 = 0``,
    ``K1 phi2 = 0``, ``K2 phi2 ~ phi`` for ``phi = (1, 1, 0, 0)/sqrt(2)``,
    with phases fixed so the proportionality constants are positive.

    Returns
    -------
    (rho, channel, phi)
        ``rho = p1 phi1 phi1^dagger + (1 - p1) phi2 phi2^dagger``.
    """
    a, b, c, d = (complex(x) for x in (a, b, c, d))
    if min(abs(a), abs(b), abs(c), abs(d)) == 0:
        raise ValueError("degenerate rotation")
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1) > 1e-9 or abs(abs(c) ** 2 + abs(d) ** 2 - 1) > 1e-9:
        raise ValueError("rotation blocks must satisfy |a|^2+|b|^2 = |c|^2+|d|^2 = 1")
    if not 0 < p1 < 1:
        raise ValueError("p1 must lie strictly between 0 and 1")
    k1 = np.zeros((4, 4), dtype=np.complex128)
    k2 = np.zeros((4, 4), dtype=np.complex128)
    k1[0, :2], k1[1, 2:] = (a, b), (c, d)
    k2[0, :2], k2[1, 2:] = (-b.conjugate(), a.conjugate()), (-d.conjugate(), c.conjugate())
    phi = np.array([1, 1, 0, 0], dtype=np.complex128) / np.sqrt(2)
    off_phi = np.eye(4) - np.outer(phi, phi.conj())

    def branch_vector(keep: np.ndarray, kill: np.ndarray) -> np.ndarray:
        ker = null_space(kill)
        coeff = null_space(off_phi @ keep @ ker)
        if coeff.shape[1] != 1:
            raise ValueError("branch conditions do not determine a unique vector")
        v = normalize(ker @ coeff[:, 0])
        amp = np.vdot(phi, keep @ v)
        return v * (np.conj(amp) / abs(amp))

    phi1 = branch_vector(k1, k2)
    phi2 = branch_vector(k2, k1)
    rho = DensityMatrix.from_ensemble([p1, 1 - p1], [phi1, phi2])
    channel = validate_channel([k1, k2])
    if channel.kind is not ChannelKind.TRACE_PRESERVING:
        raise ValueError("constructed Kraus pair is not trace preserving")
    return rho, channel, phi


# --------------------------------------------------------------------------
# deterministic completion
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RaySubspace:
    """Incoherent operators on a fixed support mapping ``supp(rho)`` into ``ray(phi)``.

    ``basis`` has shape ``(q, d, d)``; ``support`` holds zero-based
    ``(row, col)`` positions any member may occupy.
    """

    support: frozenset
    basis: np.ndarray = field(repr=False)


def ray_subspaces(rho, phi, tol: float = NULL_TOL) -> List[RaySubspace]:
    """Maximal solution subspaces of the ray-mapping system.

    Includes operators that annihilate ``supp(rho)``.  Only full column
    assignments are solved, since each contains all of its sub-patterns;
    subspaces whose effective support is strictly contained in another's
    are dropped.
    """
    rho = as_density(rho)
    phi = _target(phi, rho.dim)
    _, vecs = support_basis(rho, SUPPORT_CUTOFF)
    dim = rho.dim
    if dim > MAX_PATTERN_DIM:
        raise ValueError(f"dimension {dim} too large for pattern enumeration (max {MAX_PATTERN_DIM})")
    found = {}
    for pattern in _full_assignments(dim):
        null = _null_basis(_ray_system(vecs, phi, pattern), tol)
        if null.shape[1] == 0:
            continue
        nk = null[:dim]
        pos = pattern.positions()
        live = np.max(np.abs(nk), axis=1) > 1e-12
        key = frozenset(p for p, on in zip(pos, live) if on)
        if not key or key in found:
            continue
        # re-orthonormalize in the space of operators
        q, _ = np.linalg.qr(nk)
        rank = np.linalg.matrix_rank(nk, tol=1e-12)
        basis = np.stack([pattern.embed(q[:, i]) for i in range(rank)])
        found[key] = basis
    keys = list(found)
    return [RaySubspace(k, found[k]) for k in keys if not any(k < other for other in keys)]


class _GramFit:
    """Residual ``sum_t K_t^dagger K_t - I`` with ``K_t = sum_m A[m, t] B_m`` per subspace."""

    def __init__(self, bases: Sequence[np.ndarray], widths: Sequence[int]):
        self.bases = list(bases)
        self.shapes = [(b.shape[0], w) for b, w in zip(self.bases, widths)]
        self.dim = self.bases[0].shape[1]
        self.size = sum(2 * q * w for q, w in self.shapes)

    def unpack(self, x: np.ndarray) -> List[np.ndarray]:
        out, o = [], 0
        for q, w in self.shapes:
            n = q * w
            out.append((x[o:o + n] + 1j * x[o + n:o + 2 * n]).reshape(q, w))
            o += 2 * n
        return out

    @staticmethod
    def pack(factors: Sequence[np.ndarray]) -> np.ndarray:
        parts = []
        for f in factors:
            parts += [f.real.ravel(), f.imag.ravel()]
        return np.concatenate(parts)

    def branches(self, x: np.ndarray) -> List[np.ndarray]:
        out = []
        for a, b in zip(self.unpack(x), self.bases):
            out.extend(np.einsum("mt,mij->tij", a, b))
        return out

    def residual_matrix(self, x: np.ndarray) -> np.ndarray:
        r = -np.eye(self.dim, dtype=np.complex128)
        for a, b in zip(self.unpack(x), self.bases):
            k = np.einsum("mt,mij->tij", a, b)
            r += np.einsum("tki,tkj->ij", k.conj(), k)
        return r

    def fun(self, x: np.ndarray) -> np.ndarray:
        r = self.residual_matrix(x)
        return np.concatenate([r.real.ravel(), r.imag.ravel()])

    def jac(self, x: np.ndarray) -> np.ndarray:
        cols = []
        for a, b in zip(self.unpack(x), self.bases):
            q, w = a.shape
            k = np.einsum("mt,mij->tij", a, b)
            m = np.einsum("mki,tkj->mtij", b.conj(), k)
            mh = np.conj(np.swapaxes(m, -1, -2))
            for dr in (m + mh, -1j * (m - mh)):
                dr = dr.reshape(q * w, -1)
                cols.append(np.concatenate([dr.real, dr.imag], axis=1))
        return np.concatenate(cols, axis=0).T

    def solve(self, x0: np.ndarray, max_nfev: int = 2000) -> Tuple[np.ndarray, float]:
        res = least_squares(self.fun, x0, jac=self.jac, method="trf",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
        return res.x, float(np.linalg.norm(self.fun(res.x)))


def _extract_branches(fit: _GramFit, x: np.ndarray) -> List[Tuple[int, np.ndarray]]:
    """Split each Gram matrix into rank-one branches, tagged with their subspace index."""
    out = []
    for s, a in enumerate(fit.unpack(x)):
        vals, vecs = np.linalg.eigh(a @ a.conj().T)
        for lam, v in zip(vals, vecs.T):
            if lam > 1e-14:
                out.append((s, np.sqrt(lam) * v))
    return out


def _thin_branches(branches, bases, rng: np.random.Generator):
    """Reweight branches to a vertex of ``{w >= 0 : sum w_n K_n^dag K_n = I}``."""
    mats = [np.tensordot(c, bases[s], axes=1) for s, c in branches]
    cols = [dagger(k) @ k for k in mats]
    eq = np.array([np.concatenate([g.real.ravel(), g.imag.ravel()]) for g in cols]).T
    eye = np.eye(mats[0].shape[0])
    rhs = np.concatenate([eye.ravel(), np.zeros(eye.size)])
    res = linprog(rng.uniform(1.0, 2.0, len(mats)), A_eq=eq, b_eq=rhs,
                  bounds=(0, None), method="highs-ds")
    if res.status != 0:
        return branches
    return [(s, np.sqrt(w) * c) for (s, c), w in zip(branches, res.x) if w > 1e-12]


def _polish(branches, bases) -> Tuple[List[Tuple[int, np.ndarray]], float]:
    """Refit a fixed branch list, one factor column per branch."""
    groups = {}
    for s, c in branches:
        groups.setdefault(s, []).append(c)
    order = sorted(groups)
    fit = _GramFit([bases[s] for s in order], [len(groups[s]) for s in order])
    x0 = fit.pack([np.column_stack(groups[s]) for s in order])
    x, res = fit.solve(x0, max_nfev=500)
    polished = []
    for s, a in zip(order, fit.unpack(x)):
        polished.extend((s, a[:, t]) for t in range(a.shape[1]))
    return polished, res


def _branches_on_ray(ops, vecs: np.ndarray, phi: np.ndarray) -> bool:
    off = np.eye(phi.size) - np.outer(phi, phi.conj())
    return all(np.linalg.norm(off @ k @ vecs, axis=0).max(initial=0.0) <= RAY_TOL for k in ops)


def deterministic_completion_search(rho, phi, restarts: int = 32,
                                    max_branches: Optional[int] = None,
                                    seed: int = 0) -> CompletionResult:
    """Search for an incoherent channel with ``Lambda(rho) = phi phi^dagger``.

    Every branch of such a channel maps ``supp(rho)`` into ``ray(phi)``,
    so branches are drawn from :func:`ray_subspaces`.  Each restart fits
    random Gram factors (full rank per subspace) by least squares on
    ``||sum K^dagger K - I||_F``; the first fit below ``1e-9`` is split
    into rank-one branches, thinned to at most ``max_branches`` (default
    ``2 * dim``) and refit.  The result is deterministic per ``seed``.

    Returns
    -------
    CompletionResult
        ``channel`` is set only on success; ``residual`` is the best
        Frobenius residual seen.
    """
    rho = as_density(rho)
    phi = _target(phi, rho.dim)
    dim = rho.dim
    if dim > MAX_PATTERN_DIM:
        raise ValueError(f"dimension {dim} too large for completion search (max {MAX_PATTERN_DIM})")
    if max_branches is None:
        max_branches = 2 * dim
    subspaces = ray_subspaces(rho, phi)
    if not subspaces:
        return CompletionResult(float(np.sqrt(dim)), None, 0)
    bases = [s.basis for s in subspaces]
    fit = _GramFit(bases, [b.shape[0] for b in bases])
    _, vecs = support_basis(rho, SUPPORT_CUTOFF)
    rng = np.random.default_rng(seed)
    best = np.inf
    for attempt in range(1, restarts + 1):
        x0 = rng.standard_normal(fit.size)
        scale = sum(np.sum(np.abs(k) ** 2) for k in fit.branches(x0))
        x, res = fit.solve(x0 * np.sqrt(dim / scale))
        if res > SUCCESS_RESIDUAL:
            best = min(best, res)
            continue
        branches = _extract_branches(fit, x)
        if len(branches) > max_branches:
            branches = _thin_branches(branches, bases, rng)
        branches, res = _polish(branches, bases)
        while len(branches) > max_branches and res <= SUCCESS_RESIDUAL:
            weakest = min(range(len(branches)), key=lambda i: np.linalg.norm(branches[i][1]))
            branches, res = _polish(branches[:weakest] + branches[weakest + 1:], bases)
        if res > SUCCESS_RESIDUAL or len(branches) > max_branches:
            log.debug("restart %d: fit succeeded but branch budget %d not met", attempt, max_branches)
            best = min(best, res)
            continue
        ops = [np.tensordot(c, bases[s], axes=1) for s, c in branches]
        channel = validate_channel(ops)
        if channel.kind is ChannelKind.TRACE_PRESERVING and _branches_on_ray(ops, vecs, phi):
            return CompletionResult(res, channel, attempt)
        log.warning("restart %d: converged branches failed channel validation", attempt)
    if not np.isfinite(best):
        best = float(np.sqrt(dim))
    return CompletionResult(float(best), None, restarts)
