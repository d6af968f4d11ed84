"""Structural subspaces of block-triangular commuting families.

For a family in single-block lower-triangular form with diagonals mu_j, the
seed subspace is the span of (A_j - mu_j I) e_i over all generators j and
all columns i except the last.  That span already absorbs every element of
the generated semigroup: for products the identity

    (AB - mu_A mu_B) e_i = A (B - mu_B) e_i + mu_B (A - mu_A) e_i

pushes product seeds into generator seeds plus one multiplication by A, and
B w = mu_B w + sum_i w_i (B - mu_B) e_i keeps the span invariant.  The
closure loop below is therefore provably a no-op for valid input; it is
kept as defense in depth, and growth raises instead of being absorbed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import GeneratorFamily, as_matrix, as_vector, block_slices, is_in_K
from .errors import NotTriangularForm
from .normal_form import NormalForm

RANK_REL_TOL = 1e-9


@dataclass(frozen=True)
class Subspace:
    """Orthonormal basis with the threshold used to decide its rank."""

    ambient_dim: int
    basis: np.ndarray  # (ambient_dim, rank), orthonormal columns
    tol: float

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def contains(self, x, rel_tol: float = 1e-8) -> bool:
        x = as_vector(x, self.ambient_dim)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return True
        return self.distance(x) <= rel_tol * nx

    def distance(self, x) -> float:
        """Norm of the component of x orthogonal to the subspace."""
        x = as_vector(x, self.ambient_dim)
        if self.rank == 0:
            return float(np.linalg.norm(x))
        return float(np.linalg.norm(x - self.basis @ (self.basis.conj().T @ x)))


def subspace_from_columns(columns, ambient_dim: int, rel_tol: float = RANK_REL_TOL) -> Subspace:
    """Rank-revealing span: keep singular directions above rel_tol * sigma_max."""
    cols = [as_vector(c, ambient_dim) for c in columns]
    if not cols:
        return Subspace(ambient_dim, np.zeros((ambient_dim, 0), dtype=complex), rel_tol)
    m = np.column_stack(cols)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return Subspace(ambient_dim, np.zeros((ambient_dim, 0), dtype=complex), rel_tol)
    keep = s > rel_tol * s[0]
    return Subspace(ambient_dim, u[:, keep], rel_tol)


@dataclass(frozen=True)
class BlockReport:
    index: int
    size: int
    f_subspace: Subspace
    rank: int
    rank_expected: int

    @property
    def ok(self) -> bool:
        return self.rank == self.rank_expected


@dataclass(frozen=True)
class BlockStructureReport:
    blocks: tuple[BlockReport, ...]

    @property
    def ok(self) -> bool:
        return all(b.ok for b in self.blocks)

    def obstruction(self) -> str | None:
        bad = [b for b in self.blocks if not b.ok]
        if not bad:
            return None
        return "; ".join(
            f"block {b.index + 1} (size {b.size}): rank {b.rank} != {b.rank_expected}"
            for b in bad
        )


def f_subspace(block_generators, tol_struct: float = 1e-9, rel_tol: float = RANK_REL_TOL) -> Subspace:
    """Seed span of a single lower-triangular block family, closed under it."""
    mats = [as_matrix(a) for a in block_generators]
    if not mats:
        raise NotTriangularForm("empty generator list")
    d = mats[0].shape[0]
    for m in mats:
        ok, res = is_in_K(m, (d,), tol_struct)
        if not ok:
            raise NotTriangularForm(
                f"matrix is not lower triangular with constant diagonal "
                f"(structure residual {res:.3e})"
            )
    seeds = []
    for m in mats:
        mu = np.diagonal(m).mean()
        shifted = m - mu * np.eye(d)
        for i in range(d - 1):
            seeds.append(shifted[:, i])
    span = subspace_from_columns(seeds, d, rel_tol)
    for _ in range(d):
        images = [m @ span.basis[:, j] for m in mats for j in range(span.rank)]
        grown = subspace_from_columns(list(span.basis.T) + images, d, rel_tol)
        if grown.rank == span.rank:
            return span
        span = grown
    raise RuntimeError(
        "seed span kept growing under closure; the input is numerically "
        "inconsistent with a commuting triangular family"
    )


def block_f_subspaces(nf: NormalForm) -> list[Subspace]:
    out = []
    for s in block_slices(nf.partition):
        out.append(f_subspace([c[s, s] for c in nf.conjugated]))
    return out


def rank_condition(nf: NormalForm, family: GeneratorFamily | None = None) -> BlockStructureReport:
    """Per-block rank flags: rank(F_k) must equal block size - 1.

    Failure on any block is a structural obstruction: no vector of the open
    set U can then have a full extended limit set, so the family cannot be
    hypercyclic.
    """
    reports = []
    for k, (sub, size) in enumerate(zip(block_f_subspaces(nf), nf.partition)):
        reports.append(
            BlockReport(
                index=k,
                size=size,
                f_subspace=sub,
                rank=sub.rank,
                rank_expected=size - 1,
            )
        )
    return BlockStructureReport(blocks=tuple(reports))


def h_subspace(x, nf: NormalForm, f_subs: list[Subspace] | None = None) -> Subspace:
    """Blockwise span of x and the seed subspaces, direct-summed.

    ``x`` is given in normal-form coordinates.  The result is stored
    orthonormalized via a rank-revealing update per block.
    """
    x = as_vector(x, nf.n)
    if f_subs is None:
        f_subs = block_f_subspaces(nf)
    columns = []
    for s, sub in zip(block_slices(nf.partition), f_subs):
        d = s.stop - s.start
        block_cols = [x[s]] + [sub.basis[:, j] for j in range(sub.rank)]
        local = subspace_from_columns(block_cols, d)
        for j in range(local.rank):
            col = np.zeros(nf.n, dtype=complex)
            col[s] = local.basis[:, j]
            columns.append(col)
    if not columns:
        return Subspace(nf.n, np.zeros((nf.n, 0), dtype=complex), RANK_REL_TOL)
    # blocks occupy disjoint coordinates, so the stack is already orthonormal
    return Subspace(nf.n, np.column_stack(columns), RANK_REL_TOL)


def invariance_residual(sub: Subspace, matrices) -> float:
    """Max normalized leakage of A q outside the subspace, over A and basis q."""
    worst = 0.0
    for a in matrices:
        a = as_matrix(a)
        for j in range(sub.rank):
            img = a @ sub.basis[:, j]
            worst = max(worst, sub.distance(img) / (np.linalg.norm(img) + 1.0))
    return worst


def jdense_locus_bound(nf: NormalForm) -> list[Subspace]:
    """The r hyperplanes that must contain every point with full J-set.

    Hyperplane k is the image under P of "block k first coordinate = 0";
    their union is exactly the complement of the open set V.
    """
    out = []
    starts = [s.start for s in block_slices(nf.partition)]
    for k in range(nf.r):
        cols = np.column_stack([nf.P[:, j] for j in range(nf.n) if j != starts[k]])
        # columns of an invertible P are independent: QR keeps rank n-1 exact
        q, _ = np.linalg.qr(cols)
        out.append(Subspace(nf.n, q, 0.0))
    return out
