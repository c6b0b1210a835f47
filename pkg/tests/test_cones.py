import numpy as np
import pytest
from math import comb

from rankcertify.affine import AffineSet
from rankcertify.cones import (
    block_rank,
    enumerate_J,
    frechet_RXr_basis,
    in_bouligand_rank_set,
    in_frechet_RXr,
    in_frechet_normal_feasible,
    in_frechet_rank_set,
    in_mordukhovich_rank_set,
    in_normal_RXJ,
    in_normal_fixed_rank,
    in_tangent_fixed_rank,
    normal_fixed_rank_basis,
)
from rankcertify.exceptions import InputError
from rankcertify.matcore import project_rank, svd_point
from rankcertify.oracle import frechet_samples, random_rank_r, sample_bouligand


def point(m, n, s, seed):
    return svd_point(random_rank_r(m, n, s, seed))


class TestFixedRankSpaces:
    def test_tangent_contains_scaled_point(self):
        P = point(5, 4, 2, 0)
        assert in_tangent_fixed_rank(P, 3.0 * P.original)

    def test_tangent_rejects_normal_direction(self):
        P = point(5, 4, 2, 1)
        W = P.from_internal(np.outer(P.U[:, 3], P.V[:, 2]))
        assert not in_tangent_fixed_rank(P, W)
        assert in_normal_fixed_rank(P, W)

    def test_normal_rejects_tangent_direction(self):
        P = point(5, 4, 2, 2)
        Xi = P.from_internal(np.outer(P.U[:, 0], P.V[:, 3]))
        assert not in_normal_fixed_rank(P, Xi)
        assert in_tangent_fixed_rank(P, Xi)

    def test_tangent_normal_spaces_are_complementary(self):
        # dim(T) + dim(N) = m n, checked by pairwise orthogonality of bases
        P = point(4, 3, 2, 3)
        N = normal_fixed_rank_basis(P)
        assert len(N) == (P.m - P.s) * (P.n - P.s)
        for W in N:
            for Xi in sample_bouligand(P, P.s, 5, seed=9):
                assert abs(np.sum(W * Xi)) < 1e-8 * np.linalg.norm(Xi)

    def test_zero_rank_point_normal_is_everything(self):
        P = svd_point(np.zeros((3, 3)))
        assert in_normal_fixed_rank(P, np.random.default_rng(0).standard_normal((3, 3)))


class TestBouligand:
    def test_samples_accepted(self):
        for s, r in ((1, 2), (2, 2), (1, 3)):
            P = point(6, 5, s, seed=10 * s + r)
            for Xi in sample_bouligand(P, r, 20, seed=5):
                assert in_bouligand_rank_set(P, r, Xi)

    def test_full_rank_normal_block_rejected(self):
        P = point(6, 5, 2, 4)
        r = 3  # budget 1, but the normal block below has rank 3
        rng = np.random.default_rng(0)
        W = P.U_gamma_m_perp @ rng.standard_normal((4, 3)) @ P.V_gamma_n_perp.T
        assert not in_bouligand_rank_set(P, r, P.from_internal(W))

    def test_tangent_direction_always_accepted(self):
        P = point(5, 4, 2, 5)
        Xi = P.from_internal(np.outer(P.U[:, 0], P.V[:, 3]))
        assert in_bouligand_rank_set(P, 2, Xi)

    def test_rank_bound_violation_raises(self):
        P = point(4, 4, 3, 6)
        with pytest.raises(InputError):
            in_bouligand_rank_set(P, 2, np.eye(4))


class TestFrechetAndMordukhovich:
    def test_frechet_samples_accepted(self):
        P = point(5, 4, 2, 7)
        for W in frechet_samples(P, 2, 10, seed=1):
            assert in_frechet_rank_set(P, 2, W)

    def test_frechet_is_zero_when_rank_slack(self):
        P = point(5, 4, 1, 8)
        W = P.from_internal(np.outer(P.U[:, 2], P.V[:, 3]))
        assert not in_frechet_rank_set(P, 2, W)
        assert in_frechet_rank_set(P, 2, np.zeros((5, 4)))

    def test_frechet_subset_of_mordukhovich(self):
        P = point(5, 4, 2, 9)
        for W in frechet_samples(P, 2, 10, seed=2):
            # a low-rank truncation of a Frechet element stays in the bigger cone
            Wlow, _ = project_rank(W, min(W.shape) - 2)
            assert in_mordukhovich_rank_set(P, 2, Wlow)

    def test_mordukhovich_rank_cap(self):
        P = point(6, 5, 2, 10)
        rng = np.random.default_rng(3)
        # rank-3 element of the fixed-rank normal space exceeds the n - r = 2 cap
        W = P.U_gamma_m_perp @ rng.standard_normal((4, 3)) @ P.V_gamma_n_perp.T
        W = P.from_internal(W)
        assert in_normal_fixed_rank(P, W)
        assert not in_mordukhovich_rank_set(P, 3, W)
        # truncated to rank 2 it fits under the cap
        Wlow, _ = project_rank(W, 2)
        assert in_mordukhovich_rank_set(P, 3, Wlow)

    def test_polar_inequality(self):
        # Frechet normal elements make nonpositive inner products with every
        # Bouligand tangent direction (polarity, sampled)
        for seed in range(5):
            P = point(6, 5, 2, 100 + seed)
            Ws = frechet_samples(P, 2, 5, seed=seed)
            Xis = sample_bouligand(P, 2, 50, seed=seed + 1)
            for W in Ws:
                for Xi in Xis:
                    ip = float(np.sum(W * Xi))
                    assert ip <= 1e-8 * np.linalg.norm(W) * np.linalg.norm(Xi)


class TestIndexFamily:
    def test_counts(self):
        P = point(6, 5, 2, 11)
        fam = enumerate_J(P, 4)
        assert len(fam.sets) == comb(5 - 2, 2)
        assert not fam.truncated
        assert all(set(P.gamma) <= set(J) and len(J) == 4 for J in fam.sets)

    def test_lexicographic_order(self):
        P = point(6, 5, 1, 12)
        fam = enumerate_J(P, 3)
        assert fam.sets == sorted(fam.sets)

    def test_truncation(self):
        P = svd_point(np.zeros((25, 20)))
        fam = enumerate_J(P, 10, cap=50)
        assert fam.truncated and len(fam.sets) == 50

    def test_rank_bound_violation(self):
        P = point(4, 4, 3, 13)
        with pytest.raises(InputError):
            enumerate_J(P, 2)


class TestRXJ:
    def test_normal_membership(self):
        P = point(5, 4, 1, 14)
        J = (0, 2)
        # u_p v_q^T with p or q outside J is in the normal space of R_X(J)
        W = P.from_internal(np.outer(P.U[:, 1], P.V[:, 3]))
        assert in_normal_RXJ(P, J, W)
        Xi = P.from_internal(np.outer(P.U[:, 0], P.V[:, 2]))
        assert not in_normal_RXJ(P, J, Xi)


class TestFrechetRXr:
    def test_rank_full_case(self):
        P = point(5, 4, 2, 15)
        W = P.from_internal(np.outer(P.U[:, 0], P.V[:, 2]))
        ok, dec = in_frechet_RXr(P, 2, W)
        assert ok and dec.case == "rank_full"
        bad = P.from_internal(np.outer(P.U[:, 0], P.V[:, 1]))
        assert not in_frechet_RXr(P, 2, bad)[0]

    def test_rank_deficit_one_case(self):
        P = point(5, 4, 2, 16)
        # off-diagonal kernel block: allowed
        W = P.from_internal(np.outer(P.U[:, 2], P.V[:, 3]))
        ok, dec = in_frechet_RXr(P, 3, W)
        assert ok and dec.case == "rank_deficit_one"
        assert np.linalg.norm(np.diag(dec.D)) < 1e-12
        # diagonal kernel block: rejected
        bad = P.from_internal(np.outer(P.U[:, 2], P.V[:, 2]))
        ok_bad, dec_bad = in_frechet_RXr(P, 3, bad)
        assert not ok_bad
        assert np.linalg.norm(np.diag(dec_bad.D)) > 0.9

    def test_rank_deficit_one_extra_rows_allowed(self):
        P = point(5, 4, 2, 17)
        W = P.from_internal(np.outer(P.U[:, 4], P.V[:, 0]))
        ok, dec = in_frechet_RXr(P, 3, W)
        assert ok and dec.H is not None

    def test_rank_deficit_two_plus_square_is_zero(self):
        P = point(4, 4, 1, 18)
        W = P.from_internal(np.outer(P.U[:, 2], P.V[:, 3]))
        assert not in_frechet_RXr(P, 3, W)[0]
        assert in_frechet_RXr(P, 3, np.zeros((4, 4)))[0]

    def test_rank_deficit_two_plus_rectangular(self):
        P = point(6, 4, 1, 19)
        ok, dec = in_frechet_RXr(P, 3, P.from_internal(np.outer(P.U[:, 5], P.V[:, 1])))
        assert ok and dec.case == "rank_deficit_two_plus"
        assert not in_frechet_RXr(P, 3, P.from_internal(np.outer(P.U[:, 2], P.V[:, 3])))[0]

    def test_basis_is_orthonormal_and_member(self):
        for (s, r) in ((2, 2), (2, 3), (1, 3)):
            P = point(6, 5, s, 20 + s + r)
            basis = frechet_RXr_basis(P, r)
            for i, B in enumerate(basis):
                assert in_frechet_RXr(P, r, B)[0]
                for j in range(i + 1, len(basis)):
                    assert abs(np.sum(B * basis[j])) < 1e-10
                assert np.linalg.norm(B) == pytest.approx(1.0, abs=1e-10)

    def test_basis_counts(self):
        P = point(6, 5, 2, 25)
        # s = r: complement of the s x s block
        assert len(frechet_RXr_basis(P, 2)) == 6 * 5 - 4
        # s = r - 1: off-diagonal kernel pairs plus extra rows
        assert len(frechet_RXr_basis(P, 3)) == 3 * 2 + 1 * 5
        # s <= r - 2: extra rows only
        assert len(frechet_RXr_basis(P, 4)) == 1 * 5


class TestNormalFeasibleSplit:
    def test_recovers_constructed_split(self):
        rng = np.random.default_rng(30)
        X0 = random_rank_r(5, 4, 2, 31)
        P = svd_point(X0)
        mats = [rng.standard_normal((5, 4)) for _ in range(2)]
        S = AffineSet(mats, [float(np.sum(A * X0)) for A in mats])
        y_true = np.array([0.7, -1.3])
        W2 = P.from_internal(np.outer(P.U[:, 3], P.V[:, 2]))
        W = sum(yi * A for yi, A in zip(y_true, mats)) + 2.0 * W2
        split = in_frechet_normal_feasible(P, S, 2, W)
        assert split.member
        assert np.allclose(split.y, y_true, atol=1e-8)
        assert in_normal_fixed_rank(P, split.W2)

    def test_rejects_outside_element(self):
        X0 = random_rank_r(4, 4, 2, 32)
        P = svd_point(X0)
        A = np.zeros((4, 4))
        A[3, 3] = 1.0
        S = AffineSet([A], [float(X0[3, 3])])
        # a tangent-space direction not aligned with A cannot be represented
        W = P.from_internal(np.outer(P.U[:, 0], P.V[:, 1]))
        split = in_frechet_normal_feasible(P, S, 2, W)
        assert not split.member

    def test_unqualified_flag_passthrough(self):
        X0 = random_rank_r(4, 4, 2, 33)
        P = svd_point(X0)
        S = AffineSet([np.eye(4)], [float(np.trace(X0))])
        split = in_frechet_normal_feasible(P, S, 2, np.eye(4), qualified=False)
        assert not split.qualified


class TestBlockRank:
    def test_matches_matrix_rank(self):
        P = point(4, 4, 2, 40)
        M = random_rank_r(3, 3, 2, 41)
        assert block_rank(P, M) == 2
        assert block_rank(P, np.zeros((0, 3))) == 0
