"""Block-triangular normal form for commuting families.

The construction is the standard one: split C^n into joint spectral
subspaces (every generator restricted to a subspace has a single
eigenvalue), then triangularize each restricted family by iterated
common-left-eigenvector deflation.  The assembled basis matrix P satisfies
P^-1 A P in K for every generator A, where K is the direct sum of lower
triangular blocks with constant diagonals.

Conventions fixed here so outputs are deterministic and testable:

* blocks are ordered by descending size, then lexicographically by the
  joint eigenvalue tuple compared entrywise as (re, im);
* a family of exactly diagonal matrices keeps P = I with unit blocks, the
  least restrictive frame;
* any block on which the restricted family is numerically scalar is
  refined into unit blocks;
* the reference vector u0 has a 1 in the first coordinate of every block,
  v0 = P u0, and x lies in the open set V iff every block of P^-1 x has a
  nonzero first coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .algebra import GeneratorFamily, as_vector, block_slices, frobenius, is_in_K
from .errors import ClusteringAmbiguous, IllConditioned

COND_LIMIT = 1e12
EIG_TOL_FACTOR = 1e-7
AMBIGUITY_FACTOR = 2.0
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class NormalForm:
    """Conjugation data: P^-1 A P lies in the block structure for every A."""

    n: int
    P: np.ndarray
    P_inv: np.ndarray
    partition: tuple[int, ...]
    block_eigs: tuple[tuple[complex, ...], ...]
    conjugated: tuple[np.ndarray, ...]
    cond_P: float
    residual: float

    @property
    def r(self) -> int:
        return len(self.partition)

    def to_normal_coords(self, x) -> np.ndarray:
        return self.P_inv @ as_vector(x, self.n)

    def from_normal_coords(self, y) -> np.ndarray:
        return self.P @ as_vector(y, self.n)


@dataclass(frozen=True)
class ReferenceFrame:
    """Canonical density test point and the open set it certifies on."""

    nf: NormalForm
    u0: np.ndarray
    v0: np.ndarray

    def in_U(self, y, rel_tol: float = 1e-9) -> bool:
        """Is every block first coordinate of y (normal coords) nonzero?"""
        y = as_vector(y, self.nf.n)
        scale = np.linalg.norm(y)
        if scale == 0.0:
            return False
        return all(
            abs(y[s.start]) > rel_tol * scale for s in block_slices(self.nf.partition)
        )

    def in_V(self, x, rel_tol: float = 1e-9) -> bool:
        return self.in_U(self.nf.to_normal_coords(x), rel_tol)


def clustering_tolerance(dim: int, scale: float) -> float:
    """Merge radius for eigenvalues of a dim x dim restriction of norm scale.

    Eigenvalues of a defective (Jordan-like) block scatter like
    eps^(1/dim) under conjugation roundoff, far beyond any fixed multiple
    of machine epsilon, so the radius combines a floor proportional to the
    norm with a scatter-aware term.  Measured worst-case scatter for
    conditioning up to 100 and dim up to 6 sits a factor of several below
    this radius.
    """
    return max(
        EIG_TOL_FACTOR * (1.0 + scale),
        _EPS ** (1.0 / (dim + 1)) * math.sqrt(1.0 + scale),
    )


def _cluster(values: np.ndarray, tol: float):
    """Transitively merge values closer than tol; gap-check the clusters.

    Returns (clusters, max_internal_spread).  Raises ClusteringAmbiguous
    when two distinct clusters come within AMBIGUITY_FACTOR of tol - close
    enough that merging or splitting would be a guess.
    """
    m = len(values)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            if abs(values[i] - values[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    clusters = list(groups.values())
    for a in range(len(clusters)):
        for b in range(a + 1, len(clusters)):
            gap = min(
                abs(values[i] - values[j]) for i in clusters[a] for j in clusters[b]
            )
            if gap < AMBIGUITY_FACTOR * tol:
                raise ClusteringAmbiguous(gap, tol)
    spread = 0.0
    for idx in clusters:
        if len(idx) > 1:
            vals = values[idx]
            spread = max(
                spread, float(max(abs(u - v) for u in vals for v in vals))
            )
    clusters.sort(key=lambda idx: (values[idx].mean().real, values[idx].mean().imag))
    return clusters, spread


def _fix_phase(q: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest entry is real positive."""
    q = q.copy()
    for j in range(q.shape[1]):
        k = int(np.argmax(np.abs(q[:, j])))
        ph = q[k, j]
        if ph != 0:
            q[:, j] *= np.conj(ph) / abs(ph)
    return q


def common_spectral_split(
    family: GeneratorFamily, tol: float | None = None, with_spread: bool = False
):
    """Decompose C^n into joint spectral subspaces of the family.

    Returns a list of (eigenvalue_tuple, orthonormal_basis) pairs; on each
    subspace every generator has the single eigenvalue recorded in the
    tuple.  Subspace dimensions sum to n.  With ``with_spread`` each entry
    also carries the widest eigenvalue cluster that was merged to form it,
    so callers can tell certainly-equal blocks from scatter-merged ones.
    """
    n = family.n
    blocks: list[tuple[tuple[complex, ...], np.ndarray, float]] = [
        ((), np.eye(n, dtype=complex), 0.0)
    ]
    for a in family.generators:
        refined = []
        for tup, q, spread in blocks:
            r = q.conj().T @ (a @ q)
            d = r.shape[0]
            tol_r = tol if tol is not None else clustering_tolerance(d, frobenius(r))
            vals = np.linalg.eigvals(r)
            clusters, merged_spread = _cluster(vals, tol_r)
            spread = max(spread, merged_spread)
            if len(clusters) == 1:
                refined.append((tup + (complex(vals.mean()),), q, spread))
                continue
            for idx in clusters:
                members = vals[idx]
                others = np.delete(vals, idx)

                def in_cluster(z, members=members, others=others):
                    return np.min(np.abs(z - members)) <= np.min(np.abs(z - others))

                t, z, sdim = scipy.linalg.schur(r, output="complex", sort=in_cluster)
                if sdim != len(idx):
                    raise ClusteringAmbiguous(float(tol_r), float(tol_r))
                refined.append(
                    (tup + (complex(members.mean()),), q @ z[:, :sdim], spread)
                )
        blocks = refined
    assert sum(b.shape[1] for _, b, _ in blocks) == n
    if with_spread:
        return [(tup, q, spread) for tup, q, spread in blocks]
    return [(tup, q) for tup, q, _ in blocks]


def _common_left_eigvec(mats, mus):
    """Unit vector w with w* M_j ~ mu_j w* for every j (single-eig commuting M_j)."""
    d = mats[0].shape[0]
    stacked = np.vstack([m.conj().T - np.conj(mu) * np.eye(d) for m, mu in zip(mats, mus)])
    _, _, vh = np.linalg.svd(stacked)
    return vh[-1].conj()


def _unitary_with_first_column(w: np.ndarray) -> np.ndarray:
    d = w.shape[0]
    q, _ = np.linalg.qr(np.column_stack([w, np.eye(d, dtype=complex)]), mode="reduced")
    q = q[:, :d]
    ph = np.vdot(q[:, 0], w)
    q[:, 0] *= ph / abs(ph)
    return q


def _triangularize_block(mats):
    """Unitary S with S* M S lower triangular for every M in the commuting list."""
    d = mats[0].shape[0]
    if d == 1:
        return np.eye(1, dtype=complex)
    mus = [np.trace(m) / d for m in mats]
    w = _common_left_eigvec(mats, mus)
    u = _unitary_with_first_column(w)
    transformed = [u.conj().T @ m @ u for m in mats]
    inner = _triangularize_block([m[1:, 1:] for m in transformed])
    s = np.eye(d, dtype=complex)
    s[1:, 1:] = inner
    return u @ s


def build_normal_form(
    family: GeneratorFamily,
    tol_eig: float | None = None,
    tol_struct: float = 1e-9,
    cond_limit: float = COND_LIMIT,
) -> NormalForm:
    """Compute P with P^-1 A P in the block-triangular structure for all A.

    Raises ClusteringAmbiguous when joint eigenvalues cannot be separated
    and IllConditioned (with the best form attached) when cond(P) exceeds
    ``cond_limit``.
    """
    n = family.n
    if family.is_diagonal:
        eye = np.eye(n, dtype=complex)
        tuples = tuple(
            tuple(complex(g[i, i]) for g in family.generators) for i in range(n)
        )
        return NormalForm(
            n=n,
            P=eye,
            P_inv=eye.copy(),
            partition=(1,) * n,
            block_eigs=tuples,
            conjugated=tuple(g.copy() for g in family.generators),
            cond_P=1.0,
            residual=0.0,
        )

    split = common_spectral_split(family, tol_eig, with_spread=True)
    scale = max(frobenius(g) for g in family.generators)
    pieces = []  # (size, eig_tuple, basis columns)
    for tup, q, spread in split:
        restricted = [q.conj().T @ (g @ q) for g in family.generators]
        d = q.shape[1]
        if d == 1:
            pieces.append((1, tup, _fix_phase(q)))
            continue
        s = _triangularize_block(restricted)
        basis = q @ s
        tri = [s.conj().T @ m @ s for m in restricted]
        # a merged cluster must triangularize into a clean constant-diagonal
        # block; if it does not, the merge grouped genuinely distinct
        # eigenvalues that sat below the clustering resolution
        block_residual = max(is_in_K(m, (d,), tol_struct)[1] for m in tri)
        if block_residual > max(tol_struct, 1e-12 * (1.0 + scale)) and spread > 0:
            raise ClusteringAmbiguous(spread, block_residual)
        strict_lower = max(
            float(np.abs(np.tril(m, -1)).max()) if d > 1 else 0.0 for m in tri
        )
        if strict_lower <= 1e-10 * (1.0 + scale):
            # numerically scalar restricted family: refine into unit blocks
            basis = _fix_phase(basis)
            for j in range(d):
                pieces.append((1, tup, basis[:, j : j + 1]))
        else:
            pieces.append((d, tup, _fix_phase(basis)))

    def sort_key(piece):
        size, tup, _ = piece
        return (-size, tuple((v.real, v.imag) for v in tup))

    pieces.sort(key=sort_key)
    p_mat = np.hstack([b for _, _, b in pieces])
    partition = tuple(size for size, _, _ in pieces)
    block_eigs = tuple(tup for _, tup, _ in pieces)
    cond_p = float(np.linalg.cond(p_mat))
    p_inv = np.linalg.inv(p_mat)
    conjugated = tuple(p_inv @ g @ p_mat for g in family.generators)
    residual = 0.0
    for c in conjugated:
        _, res = is_in_K(c, partition, tol_struct)
        residual = max(residual, res)
    nf = NormalForm(
        n=n,
        P=p_mat,
        P_inv=p_inv,
        partition=partition,
        block_eigs=block_eigs,
        conjugated=conjugated,
        cond_P=cond_p,
        residual=residual,
    )
    if cond_p > cond_limit or residual > 1e3 * tol_struct:
        raise IllConditioned(cond_p, cond_limit, nf)
    return nf


def reference_frame(nf: NormalForm) -> ReferenceFrame:
    """u0 (blockwise first basis vectors), v0 = P u0 and the U/V membership."""
    u0 = np.zeros(nf.n, dtype=complex)
    for s in block_slices(nf.partition):
        u0[s.start] = 1.0
    v0 = nf.P @ u0
    return ReferenceFrame(nf=nf, u0=u0, v0=v0)
