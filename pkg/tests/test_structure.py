import numpy as np
import pytest

from hypercyc import (
    NotTriangularForm,
    Subspace,
    build_normal_form,
    f_subspace,
    h_subspace,
    invariance_residual,
    jdense_locus_bound,
    rank_condition,
    reference_frame,
    verify_commuting,
)
from hypercyc.normal_form import NormalForm
from hypercyc.structure import block_f_subspaces, subspace_from_columns

from .test_normal_form import random_k_family


def t2_frame(matrix) -> NormalForm:
    """A handmade single-T2-block frame around one 2x2 matrix."""
    eye = np.eye(2, dtype=complex)
    return NormalForm(
        n=2,
        P=eye,
        P_inv=eye.copy(),
        partition=(2,),
        block_eigs=((complex(matrix[0, 0]),),),
        conjugated=(np.asarray(matrix, dtype=complex),),
        cond_P=1.0,
        residual=0.0,
    )


class TestFSubspace:
    def test_single_subdiagonal_block(self):
        b = np.array([[2.0, 0.0], [3.0, 2.0]])
        sub = f_subspace([b])
        assert sub.rank == 1
        assert sub.contains([0.0, 1.0])

    def test_identity_has_empty_seeds(self):
        assert f_subspace([np.eye(3)]).rank == 0

    def test_t3_pair_spans_two_directions(self):
        mu = 1.5
        a = mu * np.eye(3)
        a[1, 0] = 1.0
        b = mu * np.eye(3)
        b[2, 1] = 1.0
        sub = f_subspace([a, b])
        assert sub.rank == 2
        assert sub.contains([0.0, 1.0, 0.0]) and sub.contains([0.0, 0.0, 1.0])

    def test_rejects_non_triangular(self):
        with pytest.raises(NotTriangularForm):
            f_subspace([np.array([[1.0, 2.0], [0.0, 1.0]])])
        with pytest.raises(NotTriangularForm):
            f_subspace([np.diag([1.0, 2.0])])  # unequal diagonal

    def test_rank_bounded_by_dimension_minus_one(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(1, 5))
            nil = np.tril(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)), -1)
            mats = []
            for _ in range(2):
                g = (rng.normal() + 1j * rng.normal()) * np.eye(n) + nil * rng.normal()
                mats.append(g)
            assert f_subspace(mats).rank <= n - 1


class TestRankCondition:
    def test_diagonal_construction_passes(self):
        gens = [0.7 * np.eye(3, dtype=complex)]
        for k in range(3):
            d = np.full(3, 2.0, dtype=complex)
            d[k] = 1.0
            gens.append(np.diag(d))
        nf = build_normal_form(verify_commuting(gens))
        report = rank_condition(nf)
        assert report.ok
        assert all(b.rank == 0 and b.size == 1 for b in report.blocks)

    def test_identity_in_t2_frame_obstructed(self):
        report = rank_condition(t2_frame(np.eye(2)))
        assert not report.ok
        assert "rank 0 != 1" in report.obstruction()

    def test_full_chain_t3_passes(self):
        a = 2.0 * np.eye(3)
        a[1, 0] = 1.0
        a[2, 1] = 1.0
        nf = NormalForm(
            n=3, P=np.eye(3, dtype=complex), P_inv=np.eye(3, dtype=complex),
            partition=(3,), block_eigs=((2.0 + 0j,),),
            conjugated=(a.astype(complex),), cond_P=1.0, residual=0.0,
        )
        report = rank_condition(nf)
        assert report.ok
        assert report.blocks[0].rank == 2

    def test_broken_chain_fails(self):
        a = 2.0 * np.eye(3)
        a[1, 0] = 1.0  # no entry feeding the third coordinate
        nf = NormalForm(
            n=3, P=np.eye(3, dtype=complex), P_inv=np.eye(3, dtype=complex),
            partition=(3,), block_eigs=((2.0 + 0j,),),
            conjugated=(a.astype(complex),), cond_P=1.0, residual=0.0,
        )
        assert not rank_condition(nf).ok


class TestHSubspace:
    def test_zero_vector_gives_f_sum(self):
        rng = np.random.default_rng(1)
        fam, _, _ = random_k_family(rng, (2, 2), p=2)
        nf = build_normal_form(fam)
        f_ranks = sum(s.rank for s in block_f_subspaces(nf))
        h0 = h_subspace(np.zeros(4), nf)
        assert h0.rank == f_ranks

    def test_first_basis_vector_fills_small_block(self):
        b = np.array([[2.0, 0.0], [1.0, 2.0]])
        nf = t2_frame(b)
        h = h_subspace([1.0, 0.0], nf)
        assert h.rank == 2

    def test_rank_increment_zero_or_one(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            fam, _, _ = random_k_family(rng, (3,), p=2)
            nf = build_normal_form(fam)
            f_rank = block_f_subspaces(nf)[0].rank
            x = rng.normal(size=3) + 1j * rng.normal(size=3)
            h = h_subspace(x, nf)
            assert h.rank in (f_rank, f_rank + 1)


class TestInvarianceResidual:
    def test_h_subspace_is_invariant(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            fam, _, _ = random_k_family(rng, (2, 1), p=2)
            nf = build_normal_form(fam)
            x = rng.normal(size=3) + 1j * rng.normal(size=3)
            h = h_subspace(x, nf)
            assert invariance_residual(h, nf.conjugated) < 1e-10

    def test_full_space_exactly_invariant(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        full = Subspace(3, np.eye(3, dtype=complex), 0.0)
        assert invariance_residual(full, [a]) == 0.0

    def test_non_invariant_line_flagged(self):
        b = np.array([[0.5, 0.0], [1.0, 0.5]])
        line = Subspace(2, np.eye(2, dtype=complex)[:, :1], 0.0)
        assert invariance_residual(line, [b]) > 0.4


class TestJdenseLocusBound:
    def diagonal_frame(self, n=3):
        gens = [0.7 * np.eye(n, dtype=complex)]
        for k in range(n):
            d = np.full(n, 2.0, dtype=complex)
            d[k] = 1.0
            gens.append(np.diag(d))
        return build_normal_form(verify_commuting(gens))

    def test_unit_frame_hyperplanes_are_coordinate_zero_sets(self):
        nf = self.diagonal_frame(3)
        locus = jdense_locus_bound(nf)
        assert len(locus) == 3 and all(h.rank == 2 for h in locus)
        for k, h in enumerate(locus):
            x = np.ones(3, dtype=complex)
            x[k] = 0.0
            assert h.contains(x, 1e-12)
            assert not h.contains(np.ones(3), 1e-6)

    def test_canonical_vectors_lie_in_the_union(self):
        locus = jdense_locus_bound(self.diagonal_frame(3))
        for k in range(3):
            e_k = np.zeros(3, dtype=complex)
            e_k[k] = 1.0
            assert any(h.contains(e_k, 1e-12) for h in locus)

    def test_conjugated_frame_membership(self):
        rng = np.random.default_rng(5)
        fam, _, _ = random_k_family(rng, (2, 1), p=2)
        nf = build_normal_form(fam)
        locus = jdense_locus_bound(nf)
        starts = [0, 2]
        for k, h in enumerate(locus):
            y = rng.normal(size=3) + 1j * rng.normal(size=3)
            y[starts[k]] = 0.0
            assert h.distance(nf.P @ y) <= 1e-10 * np.linalg.norm(nf.P @ y)

    def test_union_is_complement_of_v(self):
        rng = np.random.default_rng(6)
        fam, _, _ = random_k_family(rng, (2, 1), p=2)
        nf = build_normal_form(fam)
        frame = reference_frame(nf)
        locus = jdense_locus_bound(nf)
        for _ in range(200):
            x = rng.normal(size=3) + 1j * rng.normal(size=3)
            in_union = any(h.contains(x, 1e-8) for h in locus)
            assert frame.in_V(x) == (not in_union)
        for k, h in enumerate(locus):
            y = rng.normal(size=3) + 1j * rng.normal(size=3)
            y[[0, 2][k]] = 0.0
            x = nf.P @ y
            assert any(hh.contains(x, 1e-8) for hh in locus)
            assert not frame.in_V(x)


class TestSubspaceFromColumns:
    def test_orthonormal_basis(self):
        rng = np.random.default_rng(7)
        cols = [rng.normal(size=4) + 1j * rng.normal(size=4) for _ in range(3)]
        cols.append(cols[0] + cols[1])  # dependent
        sub = subspace_from_columns(cols, 4)
        assert sub.rank == 3
        gram = sub.basis.conj().T @ sub.basis
        np.testing.assert_allclose(gram, np.eye(3), atol=1e-12)

    def test_empty_and_zero(self):
        assert subspace_from_columns([], 3).rank == 0
        assert subspace_from_columns([np.zeros(3)], 3).rank == 0
